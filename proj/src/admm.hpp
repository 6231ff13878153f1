#pragma once

#include "types.hpp"

#include <functional>
#include <vector>

namespace unmix::admm {

struct Options {
  double rho = 1.0;     // penalty weight, fixed over the run
  int max_iters = 1000;
  double tol = 1e-6;    // primal and dual residual 2-norm threshold
};

struct Solution {
  Vector r;                       // designated feasible split variable
  std::vector<double> objective;  // evaluated at that split, per iteration
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool zero_flag = false;  // post-normalization skipped on an all-zero result
};

// Consensus splitting for  min_r 1/2||E r - y||^2 + sum_j g_j(z_j),  z_j = r.
//
// The r update solves (E'E + m rho I) r = E'y + rho sum_j (z_j - u_j) with a
// factorization computed once per dictionary, so one instance can serve a
// whole batch of pixels. Each split supplies an in-place prox of g_j at
// penalty rho, i.e. v <- argmin g_j(z) + (rho/2)||z - v||^2.
class DictionarySolver {
 public:
  using Prox = std::function<void(Vector&)>;
  using Objective = std::function<double(const Vector&)>;

  DictionarySolver(const Matrix& dictionary, int n_splits, Options opt);

  // report_split selects which z_j is returned and fed to the objective.
  Solution solve(const Vector& y, const std::vector<Prox>& prox,
                 int report_split, const Objective& objective) const;

  int atoms() const { return static_cast<int>(dict_t_.rows()); }

 private:
  Matrix dict_t_;  // E', cached for the linear term
  Eigen::LLT<Matrix> factor_;
  Options opt_;
  int n_splits_;
};

}  // namespace unmix::admm
