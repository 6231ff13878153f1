#pragma once

#include "admm.hpp"
#include "types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace unmix::memm {

enum class Variant {
  Penalized,  // l0 penalty on the bundling weights
  TopOne,     // at most one active atom per class, enforced exactly
};

struct Config {
  double lambda_b = 1e-3;  // bundling-weight l0 penalty (Penalized only)
  double lambda_a = 1e-3;  // abundance l0 penalty
  double gamma_m = 1.1;    // step inflation, bundling block
  double gamma_a = 1.1;    // step inflation, abundance block
  int max_iters = 500;
  double rel_tol = 1e-6;   // relative objective change stopping rule
  Variant variant = Variant::Penalized;
  int bundling_cap = 0;    // optional hard cap on nnz(b), 0 = none
  int class_cap = 0;       // optional hard cap on nnz(a), 0 = none
  // the least-squares initializer only seeds the alternating refinement, so
  // its default iteration budget is bounded; raise it when the init itself
  // matters
  admm::Options init_admm{1.0, 600, 1e-6};
  // test hook: observes (b, a) after initialization and after every
  // iteration; never set on production paths
  std::function<void(const Vector&, const Vector&)> on_iterate;
};

struct Solution {
  Vector bundling;   // b, nonnegative
  Vector abundance;  // a, on the simplex
  Vector multiple;   // r composed from b and a
  std::vector<double> objective_trace;  // trace[0] is the initial objective
  int iterations = 0;
  bool converged = false;
};

// U matrix of the bundling subproblem: class block k of the dictionary
// scaled by a_k, so that U b = E (b * a_expanded) = E r.
Matrix build_u_matrix(const SpectralBundles& bundles, const Vector& a);

// Gradient of 1/2||U b - y||^2 in b.
Vector grad_b(const Matrix& u, const Vector& b, const Vector& y);

// Gradient of 1/2||M a - y||^2 in a, M the per-pixel mixing matrix.
Vector grad_a(const Matrix& m, const Vector& a, const Vector& y);

// Per-pixel mixing matrix: column k = E_k b_k.
Matrix bundle_mix_matrix(const SpectralBundles& bundles, const Vector& b);

// ||diag(scale) gram diag(scale)||_F in O(N^2); equals ||U'U||_F when gram
// is E'E and scale the per-atom class expansion of a.
double scaled_gram_fnorm(const Matrix& gram, const Vector& scale);

// Simplex least-squares initialization: r0 from the convex fit, then
// a0 = aggregate(r0) clipped and renormalized onto the simplex, and
// b0 block k = r0 block / a0_k (uniform when a0_k is numerically zero), so
// the composition b0 * a0 reproduces r0 whatever its total mass.
std::pair<Vector, Vector> initialize(const SpectralBundles& bundles,
                                     const Vector& y,
                                     const admm::Options& opt = {});

// The b0/a0 split of a given per-atom abundance vector (the second half of
// initialize, reusable with a precomputed r0).
std::pair<Vector, Vector> split_init(const SpectralBundles& bundles,
                                     const Vector& r0);

// Alternating proximal descent on
//   J(b,a) = 1/2||E B a - y||^2 + h(b) + g(a)
// with h the nonnegative l0 penalty (or the exact one-atom-per-class rule)
// and g the l0-penalized simplex indicator. Each sweep updates b with step
// gamma_m*||U'U||_F, then a with step gamma_a*||M'M||_F; the objective trace
// is non-increasing. Stops when the relative objective change drops below
// rel_tol or after max_iters sweeps.
class Solver {
 public:
  Solver(const SpectralBundles& bundles, Config cfg);

  Solution solve(const Vector& y) const;  // initializes internally
  Solution solve_from(const Vector& y, const Vector& r0) const;

  const Config& config() const { return cfg_; }

 private:
  Solution run(const Vector& y, Vector b, Vector a) const;

  const SpectralBundles& bundles_;  // caller keeps it alive
  Config cfg_;
  Matrix gram_;  // E'E, reused by the step-size rule
};

Solution solve_pixel(const SpectralBundles& bundles, const Vector& y,
                     const Config& cfg);

struct BatchResult {
  Matrix bundling;   // N x P
  Matrix abundance;  // K x P
  Matrix multiple;   // N x P
  std::vector<std::vector<double>> traces;
  std::vector<int> iterations;
  std::vector<std::string> errors;  // per pixel, empty string = ok
  int failed = 0;
  double wall_time_s = 0.0;
};

// Batch driver: one shared dictionary Gram matrix and one shared
// least-squares initializer factorization; per-pixel failures are collected
// and the batch proceeds.
BatchResult solve_batch(const SpectralBundles& bundles, const PixelBatch& batch,
                        const Config& cfg, int threads = 1);

}  // namespace unmix::memm
