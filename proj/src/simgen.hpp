#pragma once

#include "types.hpp"

#include <random>

namespace unmix::simgen {

struct SimConfig {
  std::uint64_t seed = 1;
  int classes = 10;          // K
  int atoms_per_class = 30;  // N_k, identical across classes
  int pixels = 100;          // P
  int bands = 224;           // L
  double snr_db = std::numeric_limits<double>::infinity();
  int max_active_classes = 5;
  int max_active_atoms = 5;  // per class, second scenario only
  double dirichlet_alpha = 1.0;
  double min_angle_deg = 5.0;       // pairwise base-spectrum separation
  double scale_sigma = 0.2;         // lognormal per-atom brightness spread
  // random-walk step of the shape warp; calibrated so atoms stay within the
  // 5 degree class separation of their base
  double perturb_sigma = 0.007;
};

// Spectral angle between two band vectors, degrees.
double spectral_angle_deg(const Vector& u, const Vector& v);

// Dirichlet(alpha) draw of length n.
Vector dirichlet(int n, double alpha, std::mt19937_64& rng);

// K smooth nonnegative base spectra (sums of 3..6 Gaussian bumps, amplitudes
// 0.1..0.9), pairwise separated by more than min_angle_deg. Candidates
// violating the separation are rejected; 1000 consecutive rejections raise
// ParameterError (the seed/config cannot satisfy the constraint).
Matrix generate_base_spectra(const SimConfig& cfg, std::mt19937_64& rng);

// Bundle atoms as intra-class variations of a base spectrum: a mean-one
// lognormal brightness scale times a smooth multiplicative warp (smoothed
// Gaussian random walk, clipped to [0.7, 1.3]). Zero sigmas reproduce the
// base exactly.
Matrix generate_bundle(const Vector& base, int n_atoms, double scale_sigma,
                       double perturb_sigma, std::mt19937_64& rng);

SpectralBundles generate_bundles(const SimConfig& cfg, std::mt19937_64& rng);

// Scenario 1: per pixel draw the active class count uniformly from
// {1..max_active_classes}, the class subset uniformly, one atom per active
// class, and Dirichlet abundances. Truth records abundances, per-atom
// abundances, and both supports. A pixel is redrawn wholesale while any
// recorded-support truth value falls below the 1e-4 zero threshold, so
// recorded supports equal thresholded supports exactly.
PixelBatch generate_sim1(const SpectralBundles& bundles, const SimConfig& cfg,
                         std::mt19937_64& rng);

// Scenario 2: additionally draws, per active class, an atom count uniform on
// {1..max_active_atoms} and Dirichlet within-class weights (each active
// block of the bundling vector sums to one). Truth also records the
// bundling weights.
PixelBatch generate_sim2(const SpectralBundles& bundles, const SimConfig& cfg,
                         std::mt19937_64& rng);

// Additive white Gaussian noise at the batch signal-to-noise ratio:
// sigma^2 = mean signal power / 10^(snr_db/10). Infinite snr returns the
// batch unchanged.
PixelBatch add_noise(const PixelBatch& batch, double snr_db,
                     std::mt19937_64& rng);

struct SimData {
  SpectralBundles bundles;
  PixelBatch batch;
};

// Seed-deterministic end-to-end generation: bundles, pixels, then noise,
// all drawn from one mt19937_64(seed) stream. scenario is 1 or 2.
SimData simulate(const SimConfig& cfg, int scenario);

}  // namespace unmix::simgen
