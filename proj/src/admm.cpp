#include "admm.hpp"

#include <cmath>

namespace unmix::admm {

DictionarySolver::DictionarySolver(const Matrix& dictionary, int n_splits,
                                   Options opt)
    : dict_t_(dictionary.transpose()), opt_(opt), n_splits_(n_splits) {
  if (dictionary.size() == 0)
    throw ParameterError("admm: empty dictionary");
  if (n_splits < 1) throw ParameterError("admm: need at least one split");
  if (!(opt_.rho > 0.0)) throw ParameterError("admm: rho must be positive");
  Matrix gram = dict_t_ * dictionary;
  // E'E + m rho I is positive definite for rho > 0, so the cheaper Cholesky
  // route is safe
  gram.diagonal().array() += n_splits_ * opt_.rho;
  factor_.compute(gram);
  if (factor_.info() != Eigen::Success)
    throw SolverError("admm: normal-equation factorization failed");
}

Solution DictionarySolver::solve(const Vector& y,
                                 const std::vector<Prox>& prox,
                                 int report_split,
                                 const Objective& objective) const {
  if (static_cast<int>(prox.size()) != n_splits_)
    throw ParameterError("admm: prox count mismatch");
  if (report_split < 0 || report_split >= n_splits_)
    throw ParameterError("admm: report split out of range");
  if (y.size() != dict_t_.cols())
    throw DimensionError("admm: observation length mismatch");

  const int n = atoms();
  Vector r = Vector::Constant(n, 1.0 / n);
  std::vector<Vector> z(n_splits_, r), u(n_splits_, Vector::Zero(n));
  const Vector ety = dict_t_ * y;

  Solution out;
  out.objective.reserve(opt_.max_iters);
  Vector rhs(n), v(n);
  for (int it = 1; it <= opt_.max_iters; ++it) {
    rhs = ety;
    for (int j = 0; j < n_splits_; ++j) rhs += opt_.rho * (z[j] - u[j]);
    r = factor_.solve(rhs);

    double pri2 = 0.0, dual2 = 0.0;
    for (int j = 0; j < n_splits_; ++j) {
      v = r + u[j];
      prox[j](v);
      dual2 += (v - z[j]).squaredNorm();
      z[j] = v;
      u[j] += r - z[j];
      pri2 += (r - z[j]).squaredNorm();
    }
    out.iterations = it;
    out.primal_residual = std::sqrt(pri2);
    out.dual_residual = opt_.rho * std::sqrt(dual2);
    if (objective) out.objective.push_back(objective(z[report_split]));
    if (out.primal_residual < opt_.tol && out.dual_residual < opt_.tol) {
      out.converged = true;
      break;
    }
  }
  out.r = z[report_split];
  return out;
}

}  // namespace unmix::admm
