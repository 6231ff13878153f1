#pragma once

// Shared randomized-instance helpers for the unit tests. Each test seeds its
// own mt19937_64 so cases stay order-independent.

#include "types.hpp"

#include <random>
#include <vector>

namespace unmix::testing {

inline Vector random_vector(int n, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = d(rng);
  return x;
}

inline std::vector<int> random_sizes(int classes, int max_size,
                                     std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(1, max_size);
  std::vector<int> sizes(classes);
  for (int& s : sizes) s = d(rng);
  return sizes;
}

// Strictly positive dictionary with unit-normalized columns, so instances
// are well scaled and the simplex fit is nondegenerate.
inline Matrix random_dictionary(int bands, int atoms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.05, 1.0);
  Matrix e(bands, atoms);
  for (int j = 0; j < atoms; ++j) {
    for (int i = 0; i < bands; ++i) e(i, j) = d(rng);
    e.col(j) /= e.col(j).norm();
  }
  return e;
}

inline SpectralBundles random_bundles(int bands, const std::vector<int>& sizes,
                                      std::mt19937_64& rng) {
  int atoms = 0;
  for (int s : sizes) atoms += s;
  return SpectralBundles(random_dictionary(bands, atoms, rng), sizes);
}

inline Vector random_simplex_point(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Vector x(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = -std::log(1.0 - d(rng));
    sum += x[i];
  }
  return x / sum;
}

}  // namespace unmix::testing
