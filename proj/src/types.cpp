#include "types.hpp"

#include <cmath>

namespace unmix {

GroupingMap GroupingMap::from_sizes(const std::vector<int>& atoms_per_class) {
  if (atoms_per_class.empty())
    throw ParameterError("grouping: need at least one class");
  GroupingMap g;
  g.offsets_.reserve(atoms_per_class.size() + 1);
  for (int n : atoms_per_class) {
    if (n <= 0) throw ParameterError("grouping: class sizes must be positive");
    g.offsets_.push_back(g.offsets_.back() + n);
  }
  return g;
}

int GroupingMap::class_of(int atom) const {
  if (atom < 0 || atom >= atoms())
    throw DimensionError("grouping: atom index out of range");
  // offsets_ is strictly increasing; find the block containing `atom`
  int lo = 0, hi = classes() - 1;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (offsets_[mid] <= atom)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

SpectralBundles::SpectralBundles(Matrix atoms, std::vector<int> atoms_per_class,
                                 std::vector<std::string> class_names)
    : atoms_(std::move(atoms)),
      atoms_per_class_(std::move(atoms_per_class)),
      class_names_(std::move(class_names)) {
  grouping_ = GroupingMap::from_sizes(atoms_per_class_);
  if (grouping_.atoms() != atom_count())
    throw DimensionError("bundles: class sizes do not sum to the atom count");
  if (atoms_.rows() == 0) throw ParameterError("bundles: no spectral bands");
  if (!class_names_.empty() &&
      static_cast<int>(class_names_.size()) != class_count())
    throw DimensionError("bundles: class name count mismatch");
  if (!atoms_.allFinite())
    throw ParameterError("bundles: non-finite reflectance");
  if ((atoms_.array() < 0.0).any())
    throw ParameterError("bundles: negative reflectance");
}

Vector aggregate_abundance(const Vector& multiple, const GroupingMap& g) {
  if (multiple.size() != g.atoms())
    throw DimensionError("aggregate_abundance: length mismatch");
  Vector a(g.classes());
  for (int k = 0; k < g.classes(); ++k)
    a[k] = multiple.segment(g.offset(k), g.size(k)).sum();
  return a;
}

Vector compose_r(const Vector& bundling, const Vector& abundance,
                 const GroupingMap& g) {
  if (bundling.size() != g.atoms())
    throw DimensionError("compose_r: bundling length mismatch");
  if (abundance.size() != g.classes())
    throw DimensionError("compose_r: abundance length mismatch");
  Vector r(g.atoms());
  for (int k = 0; k < g.classes(); ++k)
    r.segment(g.offset(k), g.size(k)) =
        bundling.segment(g.offset(k), g.size(k)) * abundance[k];
  return r;
}

Vector reconstruct(const SpectralBundles& bundles, const Vector& multiple) {
  if (multiple.size() != bundles.atom_count())
    throw DimensionError("reconstruct: abundance length mismatch");
  return bundles.atoms() * multiple;
}

}  // namespace unmix
