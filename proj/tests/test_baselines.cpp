#include "baselines.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "test_support.hpp"

using namespace unmix;
namespace bl = unmix::baselines;

namespace {

admm::Options tight_admm() {
  admm::Options o;
  o.tol = 1e-10;
  o.max_iters = 20000;
  return o;
}

double fit_obj(const SpectralBundles& b, const Vector& r, const Vector& y) {
  return 0.5 * (b.atoms() * r - y).squaredNorm();
}

}  // namespace

TEST_CASE("fcls recovers a vertex when the pixel is a dictionary column") {
  std::mt19937_64 rng(201);
  SpectralBundles b = testing::random_bundles(12, {3, 3}, rng);
  for (int j = 0; j < b.atom_count(); ++j) {
    Vector y = b.atoms().col(j);
    bl::Solution s = bl::fcls(b, y, tight_admm());
    Vector expect = Vector::Zero(b.atom_count());
    expect[j] = 1.0;
    CHECK((s.multiple - expect).lpNorm<Eigen::Infinity>() < 1e-5);
    CHECK(s.converged);
  }
}

TEST_CASE("fcls splits an even two-atom mixture evenly") {
  std::mt19937_64 rng(202);
  SpectralBundles b = testing::random_bundles(10, {2, 2}, rng);
  Vector y = 0.5 * (b.atoms().col(0) + b.atoms().col(1));
  bl::Solution s = bl::fcls(b, y, tight_admm());
  Vector ref = oracle::fcls_enumerate(b.atoms(), y);
  CHECK((s.multiple - ref).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(s.multiple[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(s.multiple[1] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("fcls matches the exhaustive active-set oracle on random pixels") {
  std::mt19937_64 rng(203);
  for (int it = 0; it < 30; ++it) {
    int atoms = 2 + static_cast<int>(rng() % 5);
    SpectralBundles b = testing::random_bundles(8, {atoms}, rng);
    Vector y = testing::random_vector(8, rng, 0.0, 1.0);
    bl::Solution s = bl::fcls(b, y, tight_admm());
    Vector ref = oracle::fcls_enumerate(b.atoms(), y);
    double gap = fit_obj(b, s.multiple, y) - fit_obj(b, ref, y);
    CHECK(gap <= 1e-6);
    CHECK(gap >= -1e-8);
    CHECK(std::abs(s.multiple.sum() - 1.0) < 1e-9);
    CHECK(s.multiple.minCoeff() >= -1e-12);
  }
}

TEST_CASE("fcls reports sub-tolerance residuals at convergence") {
  std::mt19937_64 rng(204);
  SpectralBundles b = testing::random_bundles(10, {3, 3}, rng);
  Vector y = testing::random_vector(10, rng, 0.0, 1.0);
  admm::Options opt;  // defaults: tol 1e-6
  bl::Solution s = bl::fcls(b, y, opt);
  CHECK(s.converged);
  CHECK(std::abs(s.abundance.sum() - 1.0) < 1e-9);
  // trace settles: the final value sits at the running minimum
  REQUIRE(!s.objective.empty());
  double lo = s.objective[0];
  for (double v : s.objective) lo = std::min(lo, v);
  CHECK(s.objective.back() <= lo + 1e-8);
  CHECK(s.objective.back() <= s.objective.front() + 1e-9);
}

TEST_CASE("sunsal with zero weight is normalized nonnegative least squares") {
  std::mt19937_64 rng(205);
  SpectralBundles b = testing::random_bundles(9, {3, 2}, rng);
  Vector r_true = Vector::Zero(5);
  r_true[1] = 0.7;
  r_true[3] = 0.3;
  Vector y = b.atoms() * r_true;
  bl::Solution s = bl::sunsal(b, y, 0.0, tight_admm());
  // separable noiseless instance: NNLS finds the exact decomposition and the
  // normalization leaves it unchanged
  CHECK((s.multiple - r_true).lpNorm<Eigen::Infinity>() < 1e-5);
  bl::Solution f = bl::fcls(b, y, tight_admm());
  CHECK((s.abundance - f.abundance).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("sunsal flags the all-zero solution at huge weight") {
  std::mt19937_64 rng(206);
  SpectralBundles b = testing::random_bundles(9, {3, 2}, rng);
  Vector y = testing::random_vector(9, rng, 0.0, 0.5);
  bl::Solution s = bl::sunsal(b, y, 1e6, tight_admm());
  CHECK(s.zero_flag);
  CHECK(s.multiple.isZero(0.0));
}

TEST_CASE("sunsal objective matches the coordinate-descent oracle") {
  std::mt19937_64 rng(207);
  for (int it = 0; it < 20; ++it) {
    int atoms = 2 + static_cast<int>(rng() % 5);
    SpectralBundles b = testing::random_bundles(8, {atoms}, rng);
    Vector y = testing::random_vector(8, rng, 0.0, 1.0);
    double lambda = 0.001 * (1 + it % 7);
    bl::Solution s = bl::sunsal(b, y, lambda, tight_admm());
    Vector ref = oracle::nnlasso_cd(b.atoms(), y, lambda);
    double ref_obj = 0.5 * (b.atoms() * ref - y).squaredNorm() + lambda * ref.sum();
    REQUIRE(!s.objective.empty());
    CHECK(std::abs(s.objective.back() - ref_obj) < 1e-6);
    if (!s.zero_flag) CHECK(std::abs(s.multiple.sum() - 1.0) < 1e-9);
  }
}

TEST_CASE("group lasso with zero weights reaches the least-squares objective") {
  std::mt19937_64 rng(208);
  SpectralBundles b = testing::random_bundles(8, {3, 3}, rng);
  Vector y = testing::random_vector(8, rng, 0.0, 1.0);
  bl::Solution s = bl::group_lasso_unmix(b, y, 0.0, 0.0, 20000, 1e-14);
  Vector ref = oracle::nnlasso_cd(b.atoms(), y, 0.0);
  double gap = 0.5 * (b.atoms() * s.multiple - y).squaredNorm() -
               0.5 * (b.atoms() * ref - y).squaredNorm();
  // raw objective before normalization is recorded in the trace
  REQUIRE(!s.objective.empty());
  CHECK(std::abs(s.objective.back() -
                 0.5 * (b.atoms() * ref - y).squaredNorm()) < 1e-6);
  (void)gap;
}

TEST_CASE("group lasso zeroes whole class blocks at large group weight") {
  std::mt19937_64 rng(209);
  SpectralBundles b = testing::random_bundles(10, {3, 3, 3}, rng);
  Vector y = b.atoms().col(1);  // lives in class 0
  bl::Solution s = bl::group_lasso_unmix(b, y, 0.05, 0.0, 5000, 1e-14);
  const GroupingMap& g = b.grouping();
  int dead = 0;
  for (int k = 0; k < g.classes(); ++k)
    if (s.multiple.segment(g.offset(k), g.size(k)).norm() == 0.0) ++dead;
  CHECK(dead >= 1);
}

TEST_CASE("group lasso matches the coordinate-descent oracle objective") {
  std::mt19937_64 rng(210);
  for (int it = 0; it < 15; ++it) {
    GroupingMap g;
    std::vector<int> sizes = testing::random_sizes(2, 3, rng);
    SpectralBundles b = testing::random_bundles(8, sizes, rng);
    Vector y = testing::random_vector(8, rng, 0.0, 1.0);
    double lg = 0.002 * (1 + it % 5), lr = 0.001 * (it % 3);
    bl::Solution s = bl::group_lasso_unmix(b, y, lg, lr, 20000, 1e-15);
    Vector ref = oracle::group_lasso_cd(b.atoms(), y, b.grouping(), lg, lr);
    double got = s.objective.back();
    double best = oracle::group_lasso_obj(b.atoms(), y, b.grouping(), ref, lg, lr);
    CHECK(got <= best + 1e-6);
    CHECK(got >= best - 1e-6);
  }
}

TEST_CASE("group lasso trace is non-increasing") {
  std::mt19937_64 rng(211);
  SpectralBundles b = testing::random_bundles(10, {4, 4}, rng);
  Vector y = testing::random_vector(10, rng, 0.0, 1.0);
  bl::Solution s = bl::group_lasso_unmix(b, y, 0.01, 0.005, 2000, 1e-13);
  for (std::size_t i = 1; i < s.objective.size(); ++i)
    CHECK(s.objective[i] <= s.objective[i - 1] + 1e-12);
}

TEST_CASE("social norms reduce to hand values on block vectors") {
  GroupingMap g = GroupingMap::from_sizes({2, 1});
  Vector r(3);
  r << 0.3, 0.7, 0.5;
  CHECK(bl::social_norm(r, g, 1, 2) ==
        doctest::Approx(std::sqrt(1.0 + 0.25)).epsilon(1e-12));
  CHECK(bl::social_norm(r, g, 2, 1) ==
        doctest::Approx(std::sqrt(0.09 + 0.49) + 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(bl::social_norm(r, g, 3, 1), ParameterError);
}

TEST_CASE("social prox matches the coordinate-descent oracle") {
  std::mt19937_64 rng(212);
  std::uniform_real_distribution<double> td(0.01, 0.5);
  for (int it = 0; it < 60; ++it) {
    int classes = 1 + static_cast<int>(rng() % 3);
    GroupingMap g = GroupingMap::from_sizes(testing::random_sizes(classes, 4, rng));
    Vector v = testing::random_vector(g.atoms(), rng);
    double t = td(rng);
    for (auto [p, q] : {std::pair{1, 2}, std::pair{2, 1}}) {
      Vector z = v;
      bl::prox_social_nonneg(z, g, t, p, q);
      CHECK(z.minCoeff() >= 0.0);
      Vector ref = oracle::social_prox_cd(v, g, t, p, q);
      double got = oracle::social_prox_obj(z, v, g, t, p, q);
      double best = oracle::social_prox_obj(ref, v, g, t, p, q);
      CHECK(got <= best + 1e-6);
    }
  }
}

TEST_CASE("elitist prox zeroes the input exactly at its threshold norm") {
  GroupingMap g = GroupingMap::from_sizes({2, 2});
  Vector v(4);
  v << 0.3, 0.1, -0.2, 0.4;
  // per-block positive maxima (0.3, 0.4), threshold norm 0.5
  double bound = std::sqrt(0.09 + 0.16);
  Vector z = v;
  bl::prox_social_nonneg(z, g, bound + 1e-12, 1, 2);
  CHECK(z.isZero(0.0));
  z = v;
  bl::prox_social_nonneg(z, g, bound * 0.9, 1, 2);
  CHECK(z.maxCoeff() > 0.0);
}

TEST_CASE("elitist output stays on the simplex") {
  std::mt19937_64 rng(213);
  SpectralBundles b = testing::random_bundles(10, {3, 3}, rng);
  for (int it = 0; it < 5; ++it) {
    Vector y = testing::random_vector(10, rng, 0.0, 1.0);
    bl::Solution s = bl::elitist_lasso_unmix(b, y, 0.01, 1, 2, tight_admm());
    CHECK(std::abs(s.multiple.sum() - 1.0) < 1e-9);
    CHECK(s.multiple.minCoeff() >= -1e-12);
  }
}

TEST_CASE("group-flavor social solver at vanishing weight agrees with fcls") {
  std::mt19937_64 rng(214);
  SpectralBundles b = testing::random_bundles(12, {3, 3}, rng);
  Vector y = testing::random_vector(12, rng, 0.0, 1.0);
  bl::Solution e = bl::elitist_lasso_unmix(b, y, 1e-10, 2, 1, tight_admm());
  bl::Solution f = bl::fcls(b, y, tight_admm());
  CHECK((e.abundance - f.abundance).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("elitist solver reaches the dense-grid optimum on a 3-atom pixel") {
  std::mt19937_64 rng(215);
  SpectralBundles b = testing::random_bundles(8, {1, 1, 1}, rng);
  Vector y = testing::random_vector(8, rng, 0.0, 1.0);
  double lambda = 0.05;
  bl::Solution s = bl::elitist_lasso_unmix(b, y, lambda, 1, 2, tight_admm());
  double got = fit_obj(b, s.multiple, y) +
               lambda * bl::social_norm(s.multiple, b.grouping(), 1, 2);
  double best = std::numeric_limits<double>::infinity();
  int m = 200;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; i + j <= m; ++j) {
      Vector r(3);
      r << double(i) / m, double(j) / m, double(m - i - j) / m;
      double obj = fit_obj(b, r, y) +
                   lambda * bl::social_norm(r, b.grouping(), 1, 2);
      best = std::min(best, obj);
    }
  }
  CHECK(got <= best + 1e-3);
}

TEST_CASE("elitist keeps both classes of a two-class pixel active") {
  std::mt19937_64 rng(216);
  SpectralBundles b = testing::random_bundles(12, {3, 3, 3}, rng);
  Vector r_true = Vector::Zero(9);
  r_true[0] = 0.6;
  r_true[4] = 0.4;
  Vector y = b.atoms() * r_true;
  bl::Solution s = bl::elitist_lasso_unmix(b, y, 0.01, 1, 2, tight_admm());
  CHECK(s.abundance[0] >= 1e-4);
  CHECK(s.abundance[1] >= 1e-4);
}

TEST_CASE("elitist rejects unsupported exponent pairs") {
  std::mt19937_64 rng(217);
  SpectralBundles b = testing::random_bundles(6, {2, 2}, rng);
  Vector y = testing::random_vector(6, rng, 0.0, 1.0);
  CHECK_THROWS_AS(bl::elitist_lasso_unmix(b, y, 0.1, 2, 2), ParameterError);
}

TEST_CASE("exhaustive search recovers an exact atom from a clean pixel") {
  std::mt19937_64 rng(218);
  SpectralBundles b = testing::random_bundles(10, {3, 3, 3}, rng);
  Vector y = b.atoms().col(4);  // class 1, second atom
  bl::Solution s = bl::mesma_exhaustive(b, y, 2, 1000000, tight_admm());
  CHECK(s.residual_norm < 1e-10);
  REQUIRE(s.class_support.size() == 1);
  CHECK(s.class_support[0] == 1);
  CHECK(s.multiple[4] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exhaustive search nails a clean two-class mixture") {
  std::mt19937_64 rng(219);
  SpectralBundles b = testing::random_bundles(12, {3, 3, 3}, rng);
  Vector r_true = Vector::Zero(9);
  r_true[2] = 0.35;
  r_true[7] = 0.65;
  Vector y = b.atoms() * r_true;
  bl::Solution s = bl::mesma_exhaustive(b, y, 2, 1000000, tight_admm());
  CHECK(s.residual_norm < 1e-8);
  REQUIRE(s.class_support.size() == 2);
  CHECK(s.class_support[0] == 0);
  CHECK(s.class_support[1] == 2);
  // no other tested solver can fit this pixel better than exactly
  bl::Solution f = bl::fcls(b, y, tight_admm());
  CHECK(s.residual_norm <= (b.atoms() * f.multiple - y).norm() + 1e-8);
}

TEST_CASE("exhaustive search refuses oversized enumerations") {
  std::mt19937_64 rng(220);
  SpectralBundles b = testing::random_bundles(10, {5, 5, 5}, rng);
  Vector y = testing::random_vector(10, rng, 0.0, 1.0);
  CHECK_THROWS_AS(bl::mesma_exhaustive(b, y, 3, 10, tight_admm()),
                  BudgetError);
}

TEST_CASE("batch solves match pixelwise solves and isolate failures") {
  std::mt19937_64 rng(221);
  SpectralBundles b = testing::random_bundles(10, {3, 3}, rng);
  PixelBatch batch;
  batch.spectra = Matrix(10, 4);
  for (int p = 0; p < 4; ++p)
    batch.spectra.col(p) = testing::random_vector(10, rng, 0.0, 1.0);

  bl::Config cfg;
  cfg.method = bl::Method::Fcls;
  bl::BatchResult r = bl::solve_batch(b, batch, cfg);
  CHECK(r.failed == 0);
  CHECK(r.abundance.cols() == 4);
  for (int p = 0; p < 4; ++p) {
    bl::Solution s = bl::solve_pixel(b, batch.spectra.col(p), cfg);
    CHECK((r.multiple.col(p) - s.multiple).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  // budget failure on every pixel is collected, not thrown
  cfg.method = bl::Method::Mesma;
  cfg.mesma_budget = 1;
  cfg.mesma_max_classes = 2;
  bl::BatchResult bad = bl::solve_batch(b, batch, cfg);
  CHECK(bad.failed == 4);
  for (const std::string& e : bad.errors) CHECK(!e.empty());
}

TEST_CASE("empty batches produce empty results") {
  std::mt19937_64 rng(222);
  SpectralBundles b = testing::random_bundles(10, {3, 3}, rng);
  PixelBatch batch;
  batch.spectra = Matrix(10, 0);
  bl::Config cfg;
  bl::BatchResult r = bl::solve_batch(b, batch, cfg);
  CHECK(r.abundance.cols() == 0);
  CHECK(r.failed == 0);
}
