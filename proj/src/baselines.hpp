#pragma once

#include "admm.hpp"
#include "types.hpp"

#include <string>
#include <vector>

namespace unmix::baselines {

enum class Method { Fcls, Sunsal, GroupLasso, ElitistLasso, Mesma };

struct Config {
  Method method = Method::Fcls;
  double lambda_r = 0.0;  // l1 weight (sunsal, group lasso), social weight (elitist)
  double lambda_g = 0.0;  // group weight (group lasso)
  int elitist_p = 1;      // (p,q) of the social norm, (1,2) or (2,1)
  int elitist_q = 2;
  admm::Options admm;     // consensus solvers
  int fista_max_iters = 1000;
  double fista_rel_tol = 1e-10;
  int mesma_max_classes = 2;
  long long mesma_budget = 2000000;  // candidate combinations per pixel
};

struct Solution {
  Vector multiple;    // r after the documented normalization step
  Vector abundance;   // aggregated per-class abundances
  std::vector<double> objective;  // solver trace
  int iterations = 0;
  bool converged = true;
  bool zero_flag = false;          // all-zero result, normalization skipped
  std::vector<int> class_support;  // mesma: selected classes, sorted
  double residual_norm = 0.0;      // mesma: ||E r - y||
};

// Social norm Omega(r) = (sum_k ||r_k||_p^q)^(1/q), (p,q) in {(1,2),(2,1)}.
double social_norm(const Vector& r, const GroupingMap& g, int p, int q);

// In-place prox of t*Omega(.) + indicator(. >= 0) at v.
// (2,1): per-block nonnegative group soft-threshold.
// (1,2): the coupled case; per block the solution subtracts a uniform
// threshold tau_k = theta * sum(z_k) where the scalar theta solves
// theta * ||(sum(z_k(theta)))_k||_2 = t, found by bisection (the left side is
// continuous and strictly increasing). Zero solution iff
// t >= ||(max_j v_kj^+)_k||_2.
void prox_social_nonneg(Vector& v, const GroupingMap& g, double t, int p,
                        int q);

// Fully constrained least squares: min 1/2||E r - y||^2, r on the simplex.
Solution fcls(const SpectralBundles& bundles, const Vector& y,
              const admm::Options& opt = {});

// Sparse unmixing: min 1/2||E r - y||^2 + lambda||r||_1, r >= 0, then
// r <- r / sum(r) (zero_flag instead if the solution is all zero).
Solution sunsal(const SpectralBundles& bundles, const Vector& y,
                double lambda_r, const admm::Options& opt = {});

// Group lasso: min 1/2||E r - y||^2 + lambda_g sum_k||r_k||_2
//              + lambda_r||r||_1, r >= 0, same normalization as sunsal.
// Accelerated proximal gradient, step 1/(1.1 ||E'E||_F), monotone by
// falling back to a plain descent step whenever the momentum candidate
// raises the objective.
Solution group_lasso_unmix(const SpectralBundles& bundles, const Vector& y,
                           double lambda_g, double lambda_r,
                           int max_iters = 1000, double rel_tol = 1e-10);

// Elitist lasso: min 1/2||E r - y||^2 + lambda_r Omega_{p,q}(r) over the
// simplex, via two-split consensus (social prox + simplex projection).
Solution elitist_lasso_unmix(const SpectralBundles& bundles, const Vector& y,
                             double lambda_r, int p = 1, int q = 2,
                             const admm::Options& opt = {});

// Exhaustive per-pixel endmember-set search: over every class subset of size
// <= max_classes and every atom choice within the subset, solve the simplex
// least-squares fit and keep the best residual. Candidates are enumerated by
// subset size then lexicographically; a candidate replaces the incumbent
// only when strictly better (beyond a tiny relative margin), so earlier,
// smaller supports win ties. Subsets of one or two atoms use the exact
// closed-form simplex fit. Throws BudgetError when the combination count
// exceeds `budget`.
Solution mesma_exhaustive(const SpectralBundles& bundles, const Vector& y,
                          int max_classes, long long budget,
                          const admm::Options& opt = {});

Solution solve_pixel(const SpectralBundles& bundles, const Vector& y,
                     const Config& cfg);

struct BatchResult {
  Matrix multiple;   // N x P
  Matrix abundance;  // K x P
  std::vector<std::vector<double>> traces;
  std::vector<std::vector<int>> class_support;  // mesma only
  std::vector<std::string> errors;  // per pixel, empty string = ok
  int failed = 0;
  double wall_time_s = 0.0;
};

// Shared-factorization batch driver; per-pixel failures are collected and
// the batch proceeds.
BatchResult solve_batch(const SpectralBundles& bundles, const PixelBatch& batch,
                        const Config& cfg, int threads = 1);

}  // namespace unmix::baselines
