#include "prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace unmix::prox {

namespace {

void check_params(const ProxParams& p, const char* who) {
  if (!(p.step > 0.0))
    throw ParameterError(std::string(who) + ": step must be positive");
  if (p.lambda < 0.0)
    throw ParameterError(std::string(who) + ": lambda must be nonnegative");
}

// Indices of x sorted by value descending, index ascending on ties.
std::vector<int> descending_order(const Vector& x) {
  std::vector<int> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return x[a] > x[b]; });
  return idx;
}

// Simplex projection of the values in `vals` (modified in place to the
// projected result). Returns the threshold tau.
double project_simplex_inplace(std::vector<double>& vals) {
  std::vector<double> u(vals);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  for (double& v : vals) v = std::max(v - tau, 0.0);
  return tau;
}

}  // namespace

Vector project_simplex(const Vector& x) {
  if (x.size() == 0) throw ParameterError("project_simplex: empty input");
  std::vector<double> vals(x.data(), x.data() + x.size());
  project_simplex_inplace(vals);
  return Eigen::Map<const Vector>(vals.data(), x.size());
}

Vector prox_nonneg_l0(const Vector& x, const ProxParams& p) {
  check_params(p, "prox_nonneg_l0");
  Vector z = Vector::Zero(x.size());
  std::vector<int> kept;
  for (int j = 0; j < x.size(); ++j) {
    if (x[j] > 0.0 && 0.5 * p.step * x[j] * x[j] >= p.lambda) kept.push_back(j);
  }
  if (p.support_cap > 0 && static_cast<int>(kept.size()) > p.support_cap) {
    std::stable_sort(kept.begin(), kept.end(),
                     [&](int a, int b) { return x[a] > x[b]; });
    kept.resize(p.support_cap);
  }
  for (int j : kept) z[j] = x[j];
  return z;
}

Vector prox_nonneg_block_top1(const Vector& x, const GroupingMap& g) {
  if (x.size() != g.atoms())
    throw DimensionError("prox_nonneg_block_top1: length mismatch");
  Vector z = Vector::Zero(x.size());
  for (int k = 0; k < g.classes(); ++k) {
    int best = -1;
    double best_val = 0.0;
    for (int j = g.offset(k); j < g.offset(k) + g.size(k); ++j) {
      if (x[j] > best_val) {  // strict: ties keep the earlier index
        best_val = x[j];
        best = j;
      }
    }
    if (best >= 0) z[best] = x[best];
  }
  return z;
}

Vector prox_simplex_l0(const Vector& x, const ProxParams& p) {
  check_params(p, "prox_simplex_l0");
  if (x.size() == 0) throw ParameterError("prox_simplex_l0: empty input");
  const int n = static_cast<int>(x.size());
  const int max_support =
      p.support_cap > 0 ? std::min(n, p.support_cap) : n;
  const std::vector<int> order = descending_order(x);
  const double total_sq = x.squaredNorm();

  double best_score = std::numeric_limits<double>::infinity();
  int best_v = 0;
  std::vector<double> best_proj;

  std::vector<double> sub;
  sub.reserve(max_support);
  double sub_sq = 0.0;
  for (int v = 1; v <= max_support; ++v) {
    sub.push_back(x[order[v - 1]]);
    sub_sq += x[order[v - 1]] * x[order[v - 1]];
    std::vector<double> proj(sub);
    project_simplex_inplace(proj);
    double dist2 = total_sq - sub_sq;
    int nnz = 0;
    for (int i = 0; i < v; ++i) {
      double d = proj[i] - sub[i];
      dist2 += d * d;
      if (proj[i] != 0.0) ++nnz;
    }
    double score = 0.5 * p.step * dist2 + p.lambda * nnz;
    if (score < best_score) {  // strict: ties keep the smaller support
      best_score = score;
      best_v = v;
      best_proj = proj;
    }
  }

  Vector z = Vector::Zero(n);
  for (int i = 0; i < best_v; ++i) z[order[i]] = best_proj[i];
  return z;
}

Vector prox_sparse_group(const Vector& x, const GroupingMap& g,
                         double lambda_group, double lambda_l1, double step) {
  if (x.size() != g.atoms())
    throw DimensionError("prox_sparse_group: length mismatch");
  if (!(step > 0.0))
    throw ParameterError("prox_sparse_group: step must be positive");
  if (lambda_group < 0.0 || lambda_l1 < 0.0)
    throw ParameterError("prox_sparse_group: lambdas must be nonnegative");
  Vector z = (x.array().max(0.0) - lambda_l1 / step).max(0.0);
  for (int k = 0; k < g.classes(); ++k) {
    auto block = z.segment(g.offset(k), g.size(k));
    double nrm = block.norm();
    if (nrm > 0.0)
      block *= std::max(0.0, 1.0 - lambda_group / (step * nrm));
  }
  return z;
}

}  // namespace unmix::prox
