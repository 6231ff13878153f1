#include "types.hpp"

#include <doctest.h>

#include <random>

#include "test_support.hpp"

using namespace unmix;

TEST_CASE("grouping map exposes offsets, sizes, and class lookup") {
  GroupingMap g = GroupingMap::from_sizes({2, 3, 1});
  CHECK(g.classes() == 3);
  CHECK(g.atoms() == 6);
  CHECK(g.offset(0) == 0);
  CHECK(g.offset(1) == 2);
  CHECK(g.offset(2) == 5);
  CHECK(g.size(1) == 3);
  CHECK(g.class_of(0) == 0);
  CHECK(g.class_of(1) == 0);
  CHECK(g.class_of(4) == 1);
  CHECK(g.class_of(5) == 2);
  CHECK_THROWS_AS(g.class_of(6), DimensionError);
  CHECK_THROWS_AS(g.class_of(-1), DimensionError);
}

TEST_CASE("grouping map rejects empty and nonpositive class sizes") {
  CHECK_THROWS_AS(GroupingMap::from_sizes({}), ParameterError);
  CHECK_THROWS_AS(GroupingMap::from_sizes({2, 0}), ParameterError);
  CHECK_THROWS_AS(GroupingMap::from_sizes({-1}), ParameterError);
}

TEST_CASE("bundles validate shape, names, and reflectance sign") {
  Matrix e = Matrix::Constant(4, 5, 0.5);
  CHECK_NOTHROW(SpectralBundles(e, {2, 3}));
  CHECK_NOTHROW(SpectralBundles(e, {2, 3}, {"soil", "water"}));
  CHECK_THROWS_AS(SpectralBundles(e, {2, 2}), DimensionError);
  CHECK_THROWS_AS(SpectralBundles(e, {2, 3}, {"soil"}), DimensionError);
  CHECK_THROWS_AS(SpectralBundles(Matrix(0, 5), {2, 3}), ParameterError);
  Matrix neg = e;
  neg(1, 2) = -0.1;
  CHECK_THROWS_AS(SpectralBundles(neg, {2, 3}), ParameterError);
  Matrix nan = e;
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SpectralBundles(nan, {2, 3}), ParameterError);
}

TEST_CASE("class blocks view the right dictionary columns") {
  std::mt19937_64 rng(7);
  SpectralBundles b = testing::random_bundles(6, {2, 3, 1}, rng);
  CHECK(b.class_block(1).cols() == 3);
  CHECK(b.class_block(1).isApprox(b.atoms().middleCols(2, 3), 0.0));
  CHECK(b.class_block(2).isApprox(b.atoms().col(5), 0.0));
}

TEST_CASE("aggregate and compose are inverse on block-normalized weights") {
  std::mt19937_64 rng(8);
  for (int it = 0; it < 50; ++it) {
    GroupingMap g = GroupingMap::from_sizes(testing::random_sizes(4, 5, rng));
    Vector a = testing::random_simplex_point(g.classes(), rng);
    Vector b(g.atoms());
    for (int k = 0; k < g.classes(); ++k)
      b.segment(g.offset(k), g.size(k)) =
          testing::random_simplex_point(g.size(k), rng);
    Vector r = compose_r(b, a, g);
    Vector back = aggregate_abundance(r, g);
    CHECK((back - a).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("reconstruct multiplies the dictionary by the per-atom abundances") {
  std::mt19937_64 rng(9);
  SpectralBundles b = testing::random_bundles(7, {2, 2}, rng);
  Vector r = testing::random_vector(4, rng, 0.0, 1.0);
  CHECK(reconstruct(b, r).isApprox(b.atoms() * r, 1e-14));
  CHECK_THROWS_AS(reconstruct(b, Vector::Zero(3)), DimensionError);
}

TEST_CASE("aggregate and compose reject mismatched lengths") {
  GroupingMap g = GroupingMap::from_sizes({2, 2});
  CHECK_THROWS_AS(aggregate_abundance(Vector::Zero(3), g), DimensionError);
  CHECK_THROWS_AS(compose_r(Vector::Zero(4), Vector::Zero(3), g),
                  DimensionError);
  CHECK_THROWS_AS(compose_r(Vector::Zero(3), Vector::Zero(2), g),
                  DimensionError);
}

TEST_CASE("batch truth reports bundling weights only when recorded") {
  BatchTruth t;
  t.abundance = Matrix::Constant(2, 3, 0.5);
  t.multiple = Matrix::Constant(4, 3, 0.25);
  CHECK_FALSE(t.has_bundling());
  t.bundling = Matrix::Constant(4, 3, 0.25);
  CHECK(t.has_bundling());

  PixelBatch batch;
  batch.spectra = Matrix::Constant(6, 3, 0.25);
  CHECK(batch.bands() == 6);
  CHECK(batch.pixels() == 3);
  CHECK_FALSE(batch.truth.has_value());
}
