#include "baselines.hpp"

#include "parallel.hpp"
#include "prox.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace unmix::baselines {

namespace {

void check_social_pq(int p, int q) {
  if (!((p == 1 && q == 2) || (p == 2 && q == 1)))
    throw ParameterError("elitist: (p,q) must be (1,2) or (2,1)");
}

void check_lambda(double lambda, const char* who) {
  if (lambda < 0.0)
    throw ParameterError(std::string(who) + ": lambda must be nonnegative");
}

// Post step shared by sunsal and group lasso: scale r onto the simplex, or
// flag an all-zero result and leave it untouched.
void normalize_multiple(Solution& sol) {
  double s = sol.multiple.sum();
  if (s > 0.0)
    sol.multiple /= s;
  else
    sol.zero_flag = true;
}

Solution from_admm(admm::Solution s, const GroupingMap& g) {
  Solution out;
  out.multiple = std::move(s.r);
  out.abundance = aggregate_abundance(out.multiple, g);
  out.objective = std::move(s.objective);
  out.iterations = s.iterations;
  out.converged = s.converged;
  return out;
}

double residual_sq(const Matrix& dict_t, const Vector& z, const Vector& y) {
  return (dict_t.transpose() * z - y).squaredNorm();
}

// traced=false skips the per-iteration objective (batch fast path)

Solution fcls_core(const admm::DictionarySolver& solver, const GroupingMap& g,
                   const Matrix& dict_t, const Vector& y, bool traced) {
  std::vector<admm::DictionarySolver::Prox> prox = {
      [](Vector& v) { v = prox::project_simplex(v); }};
  admm::DictionarySolver::Objective obj = nullptr;
  if (traced)
    obj = [&](const Vector& z) { return 0.5 * residual_sq(dict_t, z, y); };
  return from_admm(solver.solve(y, prox, 0, obj), g);
}

Solution sunsal_core(const admm::DictionarySolver& solver,
                     const GroupingMap& g, const Matrix& dict_t,
                     const Vector& y, double lambda, double rho, bool traced) {
  check_lambda(lambda, "sunsal");
  const double shift = lambda / rho;
  std::vector<admm::DictionarySolver::Prox> prox = {[shift](Vector& v) {
    v = (v.array() - shift).max(0.0).matrix();
  }};
  admm::DictionarySolver::Objective obj = nullptr;
  if (traced)
    obj = [&, lambda](const Vector& z) {
      return 0.5 * residual_sq(dict_t, z, y) + lambda * z.cwiseAbs().sum();
    };
  Solution out = from_admm(solver.solve(y, prox, 0, obj), g);
  normalize_multiple(out);
  out.abundance = aggregate_abundance(out.multiple, g);
  return out;
}

Solution elitist_core(const admm::DictionarySolver& solver,
                      const GroupingMap& g, const Matrix& dict_t,
                      const Vector& y, double lambda, double rho, int p, int q,
                      bool traced) {
  check_social_pq(p, q);
  check_lambda(lambda, "elitist");
  const double t = lambda / rho;
  std::vector<admm::DictionarySolver::Prox> prox = {
      [&g, t, p, q](Vector& v) { prox_social_nonneg(v, g, t, p, q); },
      [](Vector& v) { v = prox::project_simplex(v); }};
  admm::DictionarySolver::Objective obj = nullptr;
  if (traced)
    obj = [&, lambda, p, q](const Vector& z) {
      return 0.5 * residual_sq(dict_t, z, y) +
             lambda * social_norm(z, g, p, q);
    };
  return from_admm(solver.solve(y, prox, 1, obj), g);
}

Solution group_lasso_core(const Matrix& gram, const Matrix& dict_t,
                          const GroupingMap& g, const Vector& y,
                          double lambda_g, double lambda_r, int max_iters,
                          double rel_tol) {
  check_lambda(lambda_g, "group_lasso");
  check_lambda(lambda_r, "group_lasso");
  const int n = static_cast<int>(gram.cols());
  // 1/step must dominate the gradient Lipschitz constant; the Frobenius
  // norm bounds the spectral norm, inflated for headroom.
  const double lip = 1.1 * gram.norm();
  if (!(lip > 0.0)) throw ParameterError("group_lasso: zero dictionary");
  const Vector ety = dict_t * y;
  const double ysq = y.squaredNorm();

  auto objective = [&](const Vector& x) {
    double val = 0.5 * x.dot(gram * x) - x.dot(ety) + 0.5 * ysq +
                 lambda_r * x.cwiseAbs().sum();
    for (int k = 0; k < g.classes(); ++k)
      val += lambda_g * x.segment(g.offset(k), g.size(k)).norm();
    return val;
  };

  Vector x = Vector::Zero(n), mom = x;
  double t = 1.0;
  double obj_prev = objective(x);
  Solution out;
  out.objective.push_back(obj_prev);
  out.converged = false;
  for (int it = 1; it <= max_iters; ++it) {
    Vector cand = prox::prox_sparse_group(mom - (gram * mom - ety) / lip, g,
                                          lambda_g, lambda_r, lip);
    double obj = objective(cand);
    if (obj > obj_prev) {
      // momentum overshot; a plain descent step from x cannot increase
      cand = prox::prox_sparse_group(x - (gram * x - ety) / lip, g, lambda_g,
                                     lambda_r, lip);
      obj = objective(cand);
      t = 1.0;
    }
    double tnew = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    mom = cand + ((t - 1.0) / tnew) * (cand - x);
    x = cand;
    t = tnew;
    out.objective.push_back(obj);
    out.iterations = it;
    if (std::abs(obj_prev - obj) <=
        rel_tol * std::max(std::abs(obj_prev), 1e-12)) {
      out.converged = true;
      break;
    }
    obj_prev = obj;
  }
  out.multiple = x;
  normalize_multiple(out);
  out.abundance = aggregate_abundance(out.multiple, g);
  return out;
}

// Exact simplex least squares for one or two columns.
Vector tiny_simplex_fit(const Matrix& m, const Vector& y) {
  if (m.cols() == 1) return Vector::Constant(1, 1.0);
  Vector d = m.col(0) - m.col(1);
  double dd = d.squaredNorm();
  double t = dd > 0.0 ? std::clamp(d.dot(y - m.col(1)) / dd, 0.0, 1.0) : 0.0;
  Vector a(2);
  a << t, 1.0 - t;
  return a;
}

// Elementary symmetric sums of the class sizes count the atom combinations
// per subset size without enumerating them.
double count_mesma_candidates(const std::vector<int>& sizes, int max_classes) {
  std::vector<double> e(sizes.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    for (std::size_t v = std::min(i + 1, e.size() - 1); v >= 1; --v)
      e[v] += e[v - 1] * sizes[i];
  double total = 0.0;
  for (int v = 1; v <= max_classes && v < static_cast<int>(e.size()); ++v)
    total += e[v];
  return total;
}

bool next_combination(std::vector<int>& c, int n) {
  int v = static_cast<int>(c.size());
  for (int i = v - 1; i >= 0; --i) {
    if (c[i] < n - (v - i)) {
      ++c[i];
      for (int j = i + 1; j < v; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

double social_norm(const Vector& r, const GroupingMap& g, int p, int q) {
  check_social_pq(p, q);
  if (r.size() != g.atoms())
    throw DimensionError("social_norm: length mismatch");
  double acc = 0.0;
  for (int k = 0; k < g.classes(); ++k) {
    auto block = r.segment(g.offset(k), g.size(k));
    if (p == 2) {  // (2,1): sum of block l2 norms
      acc += block.norm();
    } else {  // (1,2): l2 norm of block l1 norms
      double s = block.cwiseAbs().sum();
      acc += s * s;
    }
  }
  return p == 2 ? acc : std::sqrt(acc);
}

void prox_social_nonneg(Vector& v, const GroupingMap& g, double t, int p,
                        int q) {
  check_social_pq(p, q);
  if (v.size() != g.atoms())
    throw DimensionError("prox_social_nonneg: length mismatch");
  if (t < 0.0) throw ParameterError("prox_social_nonneg: negative threshold");
  if (t == 0.0) {
    v = v.cwiseMax(0.0);
    return;
  }
  if (p == 2) {  // blockwise group soft-threshold of the clipped block
    for (int k = 0; k < g.classes(); ++k) {
      auto block = v.segment(g.offset(k), g.size(k));
      Vector w = block.cwiseMax(0.0);
      double nrm = w.norm();
      if (nrm > t)
        block = (1.0 - t / nrm) * w;
      else
        block.setZero();
    }
    return;
  }

  // (1,2): within block k the solution is z = max(v - tau_k, 0) with a
  // block-uniform threshold tau_k = theta * sum(z_k); the scalar theta
  // solves theta * ||(sum(z_k))_k||_2 = t, whose left side is continuous
  // and strictly increasing, so bisection applies. The zero solution is
  // optimal iff t >= ||(max_j v_kj^+)_k||_2.
  const int kk = g.classes();
  std::vector<std::vector<double>> sorted(kk);
  double vmax_sq = 0.0;
  for (int k = 0; k < kk; ++k) {
    auto block = v.segment(g.offset(k), g.size(k));
    auto& w = sorted[k];
    for (int i = 0; i < block.size(); ++i)
      if (block[i] > 0.0) w.push_back(block[i]);
    std::sort(w.begin(), w.end(), std::greater<>());
    if (!w.empty()) vmax_sq += w[0] * w[0];
  }
  if (std::sqrt(vmax_sq) <= t) {
    v.setZero();
    return;
  }

  // block sum at a given theta: the active count m is the largest with
  // w[m-1]*(1 + m*theta) > theta*prefix(m)
  auto block_sum = [](const std::vector<double>& w, double theta) {
    double prefix = 0.0, s = 0.0;
    for (std::size_t m = 1; m <= w.size(); ++m) {
      prefix += w[m - 1];
      if (w[m - 1] * (1.0 + static_cast<double>(m) * theta) > theta * prefix)
        s = prefix / (1.0 + static_cast<double>(m) * theta);
      else
        break;
    }
    return s;
  };
  auto excess = [&](double theta) {
    double acc = 0.0;
    for (int k = 0; k < kk; ++k) {
      double s = block_sum(sorted[k], theta);
      acc += s * s;
    }
    return theta * std::sqrt(acc) - t;
  };

  double lo = 0.0, hi = 1.0;
  while (excess(hi) < 0.0 && hi < 1e30) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  for (int k = 0; k < kk; ++k) {
    double tau = theta * block_sum(sorted[k], theta);
    auto block = v.segment(g.offset(k), g.size(k));
    block = (block.array() - tau).max(0.0).matrix();
  }
}

Solution fcls(const SpectralBundles& bundles, const Vector& y,
              const admm::Options& opt) {
  admm::DictionarySolver solver(bundles.atoms(), 1, opt);
  return fcls_core(solver, bundles.grouping(), bundles.atoms().transpose(), y,
                   true);
}

Solution sunsal(const SpectralBundles& bundles, const Vector& y,
                double lambda_r, const admm::Options& opt) {
  admm::DictionarySolver solver(bundles.atoms(), 1, opt);
  return sunsal_core(solver, bundles.grouping(), bundles.atoms().transpose(),
                     y, lambda_r, opt.rho, true);
}

Solution group_lasso_unmix(const SpectralBundles& bundles, const Vector& y,
                           double lambda_g, double lambda_r, int max_iters,
                           double rel_tol) {
  if (y.size() != bundles.bands())
    throw DimensionError("group_lasso: observation length mismatch");
  Matrix dict_t = bundles.atoms().transpose();
  Matrix gram = dict_t * bundles.atoms();
  return group_lasso_core(gram, dict_t, bundles.grouping(), y, lambda_g,
                          lambda_r, max_iters, rel_tol);
}

Solution elitist_lasso_unmix(const SpectralBundles& bundles, const Vector& y,
                             double lambda_r, int p, int q,
                             const admm::Options& opt) {
  admm::DictionarySolver solver(bundles.atoms(), 2, opt);
  return elitist_core(solver, bundles.grouping(), bundles.atoms().transpose(),
                      y, lambda_r, opt.rho, p, q, true);
}

Solution mesma_exhaustive(const SpectralBundles& bundles, const Vector& y,
                          int max_classes, long long budget,
                          const admm::Options& opt) {
  if (y.size() != bundles.bands())
    throw DimensionError("mesma: observation length mismatch");
  const int kk = bundles.class_count();
  if (max_classes < 1) throw ParameterError("mesma: max_classes must be >= 1");
  max_classes = std::min(max_classes, kk);
  double count = count_mesma_candidates(bundles.atoms_per_class(), max_classes);
  if (count > static_cast<double>(budget)) {
    std::ostringstream msg;
    msg << "mesma: " << count << " candidate combinations exceed the budget "
        << budget
        << "; reduce classes or atoms per class, or raise the budget";
    throw BudgetError(msg.str());
  }

  const GroupingMap& g = bundles.grouping();
  double best_res2 = std::numeric_limits<double>::infinity();
  std::vector<int> best_subset, best_atoms;
  Vector best_a;
  long long tried = 0;

  for (int v = 1; v <= max_classes; ++v) {
    std::vector<int> subset(v);
    std::iota(subset.begin(), subset.end(), 0);
    do {
      std::vector<int> pick(v, 0);  // atom index within each chosen class
      Matrix m(bundles.bands(), v);
      for (;;) {
        for (int i = 0; i < v; ++i)
          m.col(i) = bundles.atoms().col(g.offset(subset[i]) + pick[i]);
        Vector a;
        if (v <= 2) {
          a = tiny_simplex_fit(m, y);
        } else {
          admm::DictionarySolver solver(m, 1, opt);
          std::vector<admm::DictionarySolver::Prox> prox = {
              [](Vector& vv) { vv = prox::project_simplex(vv); }};
          a = solver.solve(y, prox, 0, nullptr).r;
        }
        double res2 = (m * a - y).squaredNorm();
        ++tried;
        // strictly-better rule: earlier, smaller supports win ties (the
        // infinite sentinel must accept unconditionally, inf - inf is NaN)
        if (!std::isfinite(best_res2) ||
            res2 < best_res2 - 1e-12 * std::max(1.0, best_res2)) {
          best_res2 = res2;
          best_subset = subset;
          best_atoms = pick;
          best_a = a;
        }
        int i = v - 1;
        while (i >= 0 && ++pick[i] == g.size(subset[i])) pick[i--] = 0;
        if (i < 0) break;
      }
    } while (next_combination(subset, kk));
  }

  Solution out;
  out.multiple = Vector::Zero(bundles.atom_count());
  for (std::size_t i = 0; i < best_subset.size(); ++i)
    out.multiple[g.offset(best_subset[i]) + best_atoms[i]] = best_a[i];
  out.abundance = aggregate_abundance(out.multiple, g);
  out.class_support = best_subset;
  out.residual_norm = std::sqrt(std::max(best_res2, 0.0));
  out.iterations = static_cast<int>(
      std::min<long long>(tried, std::numeric_limits<int>::max()));
  return out;
}

Solution solve_pixel(const SpectralBundles& bundles, const Vector& y,
                     const Config& cfg) {
  switch (cfg.method) {
    case Method::Fcls:
      return fcls(bundles, y, cfg.admm);
    case Method::Sunsal:
      return sunsal(bundles, y, cfg.lambda_r, cfg.admm);
    case Method::GroupLasso:
      return group_lasso_unmix(bundles, y, cfg.lambda_g, cfg.lambda_r,
                               cfg.fista_max_iters, cfg.fista_rel_tol);
    case Method::ElitistLasso:
      return elitist_lasso_unmix(bundles, y, cfg.lambda_r, cfg.elitist_p,
                                 cfg.elitist_q, cfg.admm);
    case Method::Mesma:
      return mesma_exhaustive(bundles, y, cfg.mesma_max_classes,
                              cfg.mesma_budget, cfg.admm);
  }
  throw ParameterError("solve_pixel: unknown method");
}

BatchResult solve_batch(const SpectralBundles& bundles, const PixelBatch& batch,
                        const Config& cfg, int threads) {
  if (batch.bands() != bundles.bands())
    throw DimensionError("solve_batch: band count mismatch");
  const int n = bundles.atom_count(), kk = bundles.class_count(),
            pp = batch.pixels();
  const GroupingMap& g = bundles.grouping();

  BatchResult out;
  out.multiple = Matrix::Zero(n, pp);
  out.abundance = Matrix::Zero(kk, pp);
  out.traces.resize(pp);
  out.class_support.resize(pp);
  out.errors.assign(pp, "");

  // per-dictionary state shared across pixels
  std::optional<admm::DictionarySolver> solver;
  Matrix dict_t, gram;
  switch (cfg.method) {
    case Method::Fcls:
    case Method::Sunsal:
      solver.emplace(bundles.atoms(), 1, cfg.admm);
      dict_t = bundles.atoms().transpose();
      break;
    case Method::ElitistLasso:
      check_social_pq(cfg.elitist_p, cfg.elitist_q);
      solver.emplace(bundles.atoms(), 2, cfg.admm);
      dict_t = bundles.atoms().transpose();
      break;
    case Method::GroupLasso:
      dict_t = bundles.atoms().transpose();
      gram = dict_t * bundles.atoms();
      break;
    case Method::Mesma:
      break;
  }

  auto start = std::chrono::steady_clock::now();
  parallel_for(pp, resolve_threads(threads), [&](int i) {
    try {
      Vector y = batch.spectra.col(i);
      Solution sol;
      switch (cfg.method) {
        case Method::Fcls:
          sol = fcls_core(*solver, g, dict_t, y, false);
          break;
        case Method::Sunsal:
          sol = sunsal_core(*solver, g, dict_t, y, cfg.lambda_r, cfg.admm.rho,
                            false);
          break;
        case Method::ElitistLasso:
          sol = elitist_core(*solver, g, dict_t, y, cfg.lambda_r, cfg.admm.rho,
                             cfg.elitist_p, cfg.elitist_q, false);
          break;
        case Method::GroupLasso:
          sol = group_lasso_core(gram, dict_t, g, y, cfg.lambda_g,
                                 cfg.lambda_r, cfg.fista_max_iters,
                                 cfg.fista_rel_tol);
          break;
        case Method::Mesma:
          sol = mesma_exhaustive(bundles, y, cfg.mesma_max_classes,
                                 cfg.mesma_budget, cfg.admm);
          break;
      }
      out.multiple.col(i) = sol.multiple;
      out.abundance.col(i) = sol.abundance;
      out.traces[i] = std::move(sol.objective);
      out.class_support[i] = std::move(sol.class_support);
    } catch (const std::exception& e) {
      out.errors[i] = e.what();
      if (out.errors[i].empty()) out.errors[i] = "solver failure";
    }
  });
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  out.failed = static_cast<int>(
      std::count_if(out.errors.begin(), out.errors.end(),
                    [](const std::string& s) { return !s.empty(); }));
  return out;
}

}  // namespace unmix::baselines
