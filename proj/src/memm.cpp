#include "memm.hpp"

#include "baselines.hpp"
#include "parallel.hpp"
#include "prox.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

namespace unmix::memm {

// ||diag(s) G diag(s)||_F without forming the scaled Gram matrix. With
// G = E'E and s the per-atom expansion of a this equals ||U'U||_F, the
// bundling-step curvature bound, at O(nnz(s)^2) instead of O(N^2 L):
// zero-scale rows and columns contribute nothing and are skipped.
double scaled_gram_fnorm(const Matrix& gram, const Vector& scale) {
  const int n = static_cast<int>(gram.rows());
  std::vector<int> nz;
  nz.reserve(n);
  for (int i = 0; i < n; ++i)
    if (scale[i] != 0.0) nz.push_back(i);
  double acc = 0.0;
  for (int j : nz) {
    const double sj = scale[j];
    for (int i : nz) {
      const double t = scale[i] * sj * gram(i, j);
      acc += t * t;
    }
  }
  return std::sqrt(acc);
}

namespace {

Vector expand_by_class(const Vector& a, const GroupingMap& g) {
  Vector s(g.atoms());
  for (int k = 0; k < g.classes(); ++k)
    s.segment(g.offset(k), g.size(k)).setConstant(a[k]);
  return s;
}

int nnz(const Vector& v) {
  int c = 0;
  for (int i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) ++c;
  return c;
}

}  // namespace

Matrix build_u_matrix(const SpectralBundles& bundles, const Vector& a) {
  if (a.size() != bundles.class_count())
    throw DimensionError("build_u_matrix: abundance length mismatch");
  Matrix u(bundles.bands(), bundles.atom_count());
  const GroupingMap& g = bundles.grouping();
  for (int k = 0; k < g.classes(); ++k)
    u.middleCols(g.offset(k), g.size(k)) = bundles.class_block(k) * a[k];
  return u;
}

Vector grad_b(const Matrix& u, const Vector& b, const Vector& y) {
  if (b.size() != u.cols()) throw DimensionError("grad_b: length mismatch");
  if (y.size() != u.rows()) throw DimensionError("grad_b: band mismatch");
  return u.transpose() * (u * b - y);
}

Vector grad_a(const Matrix& m, const Vector& a, const Vector& y) {
  if (a.size() != m.cols()) throw DimensionError("grad_a: length mismatch");
  if (y.size() != m.rows()) throw DimensionError("grad_a: band mismatch");
  return m.transpose() * (m * a - y);
}

Matrix bundle_mix_matrix(const SpectralBundles& bundles, const Vector& b) {
  if (b.size() != bundles.atom_count())
    throw DimensionError("bundle_mix_matrix: length mismatch");
  const GroupingMap& g = bundles.grouping();
  Matrix m(bundles.bands(), g.classes());
  for (int k = 0; k < g.classes(); ++k)
    m.col(k) =
        bundles.class_block(k) * b.segment(g.offset(k), g.size(k));
  return m;
}

std::pair<Vector, Vector> split_init(const SpectralBundles& bundles,
                                     const Vector& r0) {
  const GroupingMap& g = bundles.grouping();
  if (r0.size() != g.atoms())
    throw DimensionError("split_init: length mismatch");
  Vector a = aggregate_abundance(r0, g).cwiseMax(0.0);
  double s = a.sum();
  if (s > 0.0)
    a /= s;
  else
    a.setConstant(1.0 / g.classes());
  // dividing by the normalized abundance makes the composition b0*a0
  // reproduce r0 exactly (up to clipped mass), whatever r0's total is
  Vector b(g.atoms());
  for (int k = 0; k < g.classes(); ++k) {
    auto block = b.segment(g.offset(k), g.size(k));
    if (a[k] >= 1e-12)
      block = r0.segment(g.offset(k), g.size(k)) / a[k];
    else
      block.setConstant(1.0 / g.size(k));
  }
  return {std::move(b), std::move(a)};
}

std::pair<Vector, Vector> initialize(const SpectralBundles& bundles,
                                     const Vector& y,
                                     const admm::Options& opt) {
  baselines::Solution ls = baselines::fcls(bundles, y, opt);
  return split_init(bundles, ls.multiple);
}

Solver::Solver(const SpectralBundles& bundles, Config cfg)
    : bundles_(bundles), cfg_(std::move(cfg)) {
  if (bundles_.atom_count() == 0)
    throw ParameterError("memm: empty dictionary");
  if (!(cfg_.gamma_m > 1.0) || !(cfg_.gamma_a > 1.0))
    throw ParameterError("memm: step inflation factors must exceed 1");
  if (cfg_.lambda_a < 0.0 || cfg_.lambda_b < 0.0)
    throw ParameterError("memm: lambdas must be nonnegative");
  if (cfg_.max_iters < 1) throw ParameterError("memm: max_iters must be >= 1");
  if (!(cfg_.rel_tol >= 0.0)) throw ParameterError("memm: bad rel_tol");
  gram_ = bundles_.atoms().transpose() * bundles_.atoms();
  if (!(gram_.norm() > 0.0)) throw ParameterError("memm: zero dictionary");
}

Solution Solver::solve(const Vector& y) const {
  if (y.size() != bundles_.bands())
    throw DimensionError("memm: observation length mismatch");
  auto [b, a] = initialize(bundles_, y, cfg_.init_admm);
  return run(y, std::move(b), std::move(a));
}

Solution Solver::solve_from(const Vector& y, const Vector& r0) const {
  if (y.size() != bundles_.bands())
    throw DimensionError("memm: observation length mismatch");
  auto [b, a] = split_init(bundles_, r0);
  return run(y, std::move(b), std::move(a));
}

Solution Solver::run(const Vector& y, Vector b, Vector a) const {
  const GroupingMap& g = bundles_.grouping();
  const bool penalized = cfg_.variant == Variant::Penalized;

  // The initial iterate must already satisfy the variant's feasible set:
  // one atom per class for the exact variant, the hard nonzero cap when one
  // is configured. The default penalized, uncapped path keeps the
  // initializer's split untouched.
  if (!penalized)
    b = prox::prox_nonneg_block_top1(b, g);
  else if (cfg_.bundling_cap > 0)
    b = prox::prox_nonneg_l0(b, {0.0, 1.0, cfg_.bundling_cap});
  if (cfg_.class_cap > 0)
    a = prox::prox_simplex_l0(a, {0.0, 1.0, cfg_.class_cap});

  auto objective = [&](const Matrix& mix, const Vector& bb,
                       const Vector& aa) {
    double j = 0.5 * (mix * aa - y).squaredNorm() + cfg_.lambda_a * nnz(aa);
    if (penalized) j += cfg_.lambda_b * nnz(bb);
    return j;
  };

  Solution out;
  out.objective_trace.reserve(cfg_.max_iters + 1);
  Matrix mix = bundle_mix_matrix(bundles_, b);
  double j_prev = objective(mix, b, a);
  out.objective_trace.push_back(j_prev);
  if (cfg_.on_iterate) cfg_.on_iterate(b, a);

  // loop workspaces, sized once
  Vector yhat(bundles_.bands()), resid(bundles_.bands()), v(b.size());

  for (int it = 1; it <= cfg_.max_iters; ++it) {
    // bundling update: descend 1/2||U b - y||^2 at the curvature bound,
    // then apply the bundling prox. Blocks of zero-abundance classes have a
    // zero column in U, hence zero gradient; they are kept unchanged (the
    // prox would otherwise clear them). U itself never materializes: U b and
    // U' resid reduce to per-class products with the dictionary blocks.
    double ct = cfg_.gamma_m * scaled_gram_fnorm(gram_, expand_by_class(a, g));
    if (ct > 0.0) {
      yhat.setZero();
      for (int k = 0; k < g.classes(); ++k)
        if (a[k] != 0.0)
          yhat.noalias() += a[k] * (bundles_.class_block(k) *
                                    b.segment(g.offset(k), g.size(k)));
      resid = yhat - y;
      v = b;  // dead coordinates keep b, matching their zero gradient
      for (int k = 0; k < g.classes(); ++k)
        if (a[k] != 0.0)
          v.segment(g.offset(k), g.size(k)).noalias() -=
              (a[k] / ct) * (bundles_.class_block(k).transpose() * resid);
      if (penalized && cfg_.bundling_cap > 0) {
        // frozen nonzeros consume the cap; the active coordinates get the
        // remainder (an exact restriction of the capped prox)
        std::vector<int> active;
        int frozen_nnz = 0;
        for (int k = 0; k < g.classes(); ++k) {
          for (int j = g.offset(k); j < g.offset(k) + g.size(k); ++j) {
            if (a[k] != 0.0)
              active.push_back(j);
            else if (b[j] != 0.0)
              ++frozen_nnz;
          }
        }
        const int cap_left = std::max(cfg_.bundling_cap - frozen_nnz, 0);
        Vector va(static_cast<int>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i) va[i] = v[active[i]];
        Vector za = cap_left == 0
                        ? Vector(Vector::Zero(va.size()))
                        : prox::prox_nonneg_l0(
                              va, {cfg_.lambda_b, ct, cap_left});
        for (std::size_t i = 0; i < active.size(); ++i) b[active[i]] = za[i];
      } else {
        Vector bnew = penalized
                          ? prox::prox_nonneg_l0(v, {cfg_.lambda_b, ct, 0})
                          : prox::prox_nonneg_block_top1(v, g);
        for (int k = 0; k < g.classes(); ++k)
          if (a[k] != 0.0)
            b.segment(g.offset(k), g.size(k)) =
                bnew.segment(g.offset(k), g.size(k));
      }
    }

    // abundance update on the refreshed mixing matrix (columns rebuilt in
    // place, no per-sweep allocation)
    for (int k = 0; k < g.classes(); ++k)
      mix.col(k).noalias() =
          bundles_.class_block(k) * b.segment(g.offset(k), g.size(k));
    double dt = cfg_.gamma_a * (mix.transpose() * mix).norm();
    if (dt > 0.0) {
      Vector w = a - grad_a(mix, a, y) / dt;
      a = prox::prox_simplex_l0(w, {cfg_.lambda_a, dt, cfg_.class_cap});
    }

    double j = objective(mix, b, a);
    if (!std::isfinite(j))
      throw SolverError("memm: non-finite objective (divergence)");
    out.objective_trace.push_back(j);
    out.iterations = it;
    if (cfg_.on_iterate) cfg_.on_iterate(b, a);
    if (std::abs(j_prev - j) <= cfg_.rel_tol * std::max(j_prev, 1e-12)) {
      out.converged = true;
      j_prev = j;
      break;
    }
    j_prev = j;
  }

  out.bundling = std::move(b);
  out.abundance = std::move(a);
  out.multiple = compose_r(out.bundling, out.abundance, g);
  return out;
}

Solution solve_pixel(const SpectralBundles& bundles, const Vector& y,
                     const Config& cfg) {
  return Solver(bundles, cfg).solve(y);
}

BatchResult solve_batch(const SpectralBundles& bundles, const PixelBatch& batch,
                        const Config& cfg, int threads) {
  if (batch.bands() != bundles.bands())
    throw DimensionError("memm: band count mismatch");
  const int n = bundles.atom_count(), kk = bundles.class_count(),
            pp = batch.pixels();

  BatchResult out;
  out.bundling = Matrix::Zero(n, pp);
  out.abundance = Matrix::Zero(kk, pp);
  out.multiple = Matrix::Zero(n, pp);
  out.traces.resize(pp);
  out.iterations.assign(pp, 0);
  out.errors.assign(pp, "");

  Solver solver(bundles, cfg);
  // the initializer shares one factorization across the batch
  admm::DictionarySolver init(bundles.atoms(), 1, cfg.init_admm);
  std::vector<admm::DictionarySolver::Prox> init_prox = {
      [](Vector& v) { v = prox::project_simplex(v); }};

  auto start = std::chrono::steady_clock::now();
  parallel_for(pp, resolve_threads(threads), [&](int i) {
    try {
      Vector y = batch.spectra.col(i);
      Vector r0 = init.solve(y, init_prox, 0, nullptr).r;
      Solution sol = solver.solve_from(y, r0);
      out.bundling.col(i) = sol.bundling;
      out.abundance.col(i) = sol.abundance;
      out.multiple.col(i) = sol.multiple;
      out.traces[i] = std::move(sol.objective_trace);
      out.iterations[i] = sol.iterations;
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

}  // namespace unmix::memm
