#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace unmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy shared by every module. The C layer maps these onto status
// codes; inside the library they propagate as exceptions.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {  // file and CSV problems
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {  // enumeration size guards
  using std::runtime_error::runtime_error;
};

// Contiguous per-class column ranges of a bundle dictionary. Class k owns
// columns [offset(k), offset(k) + size(k)).
class GroupingMap {
 public:
  GroupingMap() = default;
  static GroupingMap from_sizes(const std::vector<int>& atoms_per_class);

  int classes() const { return static_cast<int>(offsets_.size()) - 1; }
  int atoms() const { return offsets_.back(); }
  int offset(int k) const { return offsets_.at(k); }
  int size(int k) const { return offsets_.at(k + 1) - offsets_.at(k); }
  int class_of(int atom) const;

 private:
  std::vector<int> offsets_ = {0};
};

// Endmember bundle dictionary: L bands by N atoms, column blocks grouped by
// class. Immutable once constructed; construction validates the invariants
// (finite nonnegative reflectances, every class nonempty).
class SpectralBundles {
 public:
  SpectralBundles() = default;
  SpectralBundles(Matrix atoms, std::vector<int> atoms_per_class,
                  std::vector<std::string> class_names = {});

  int bands() const { return static_cast<int>(atoms_.rows()); }
  int atom_count() const { return static_cast<int>(atoms_.cols()); }
  int class_count() const { return static_cast<int>(atoms_per_class_.size()); }
  const Matrix& atoms() const { return atoms_; }
  const std::vector<int>& atoms_per_class() const { return atoms_per_class_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const GroupingMap& grouping() const { return grouping_; }
  // L x size(k) view of class k's atoms
  auto class_block(int k) const {
    return atoms_.middleCols(grouping_.offset(k), grouping_.size(k));
  }

 private:
  Matrix atoms_;
  std::vector<int> atoms_per_class_;
  std::vector<std::string> class_names_;
  GroupingMap grouping_;
};

// Ground truth attached to a synthetic batch. `bundling` is recorded only
// when the generator drew within-class mixing weights (empty otherwise).
struct BatchTruth {
  Matrix abundance;  // K x P, columns on the simplex
  Matrix multiple;   // N x P, per-atom abundances
  Matrix bundling;   // N x P or empty
  std::vector<std::vector<int>> class_support;  // sorted, per pixel
  std::vector<std::vector<int>> atom_support;   // sorted, per pixel

  bool has_bundling() const { return bundling.size() != 0; }
};

struct PixelBatch {
  Matrix spectra;  // L x P observations
  double snr_db = std::numeric_limits<double>::infinity();
  std::string dataset = "file";  // provenance label: sim1, sim2, or file
  std::uint64_t seed = 0;
  std::optional<BatchTruth> truth;

  int bands() const { return static_cast<int>(spectra.rows()); }
  int pixels() const { return static_cast<int>(spectra.cols()); }
};

// Sum per-atom abundances within each class: a_k = sum of r over class k.
Vector aggregate_abundance(const Vector& multiple, const GroupingMap& g);

// Per-atom abundances from bundling weights and class abundances:
// r_j = b_j * a_{class(j)}.
Vector compose_r(const Vector& bundling, const Vector& abundance,
                 const GroupingMap& g);

// Mix the dictionary with per-atom abundances: y = E r.
Vector reconstruct(const SpectralBundles& bundles, const Vector& multiple);

}  // namespace unmix
