#include "simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace unmix::simgen {

namespace {

constexpr double kZeroThreshold = 1e-4;  // matches the metrics threshold
constexpr int kMaxPixelRedraws = 10000;
constexpr int kMaxSpectrumRejections = 1000;

void validate(const SimConfig& cfg) {
  if (cfg.classes < 1) throw ParameterError("simgen: classes must be >= 1");
  if (cfg.atoms_per_class < 1)
    throw ParameterError("simgen: atoms_per_class must be >= 1");
  if (cfg.pixels < 1) throw ParameterError("simgen: pixels must be >= 1");
  if (cfg.bands < 2) throw ParameterError("simgen: bands must be >= 2");
  if (cfg.max_active_classes < 1 || cfg.max_active_classes > cfg.classes)
    throw ParameterError(
        "simgen: max_active_classes must be in [1, classes]");
  if (cfg.max_active_atoms < 1)
    throw ParameterError("simgen: max_active_atoms must be >= 1");
  if (!(cfg.dirichlet_alpha > 0.0))
    throw ParameterError("simgen: dirichlet_alpha must be positive");
  if (cfg.min_angle_deg < 0.0 || cfg.scale_sigma < 0.0 ||
      cfg.perturb_sigma < 0.0)
    throw ParameterError("simgen: negative spread parameter");
}

// first n slots of a uniform partial shuffle of 0..total-1, sorted
std::vector<int> draw_subset(int total, int n, std::mt19937_64& rng) {
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < n; ++j) {
    std::uniform_int_distribution<int> pick(j, total - 1);
    std::swap(idx[j], idx[pick(rng)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// centered moving average, window 2*half+1 clamped at the edges
Vector box_smooth(const Vector& w, int half) {
  const int n = static_cast<int>(w.size());
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    out[i] = w.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

}  // namespace

double spectral_angle_deg(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw DimensionError("spectral_angle: length mismatch");
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0)
    throw ParameterError("spectral_angle: zero vector");
  double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

Vector dirichlet(int n, double alpha, std::mt19937_64& rng) {
  if (n < 1) throw ParameterError("dirichlet: n must be >= 1");
  if (!(alpha > 0.0)) throw ParameterError("dirichlet: alpha must be positive");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Vector v(n);
  double s = 0.0;
  do {
    for (int i = 0; i < n; ++i) v[i] = gamma(rng);
    s = v.sum();
  } while (!(s > 0.0));
  return v / s;
}

Matrix generate_base_spectra(const SimConfig& cfg, std::mt19937_64& rng) {
  validate(cfg);
  const int ll = cfg.bands, kk = cfg.classes;
  std::uniform_int_distribution<int> bump_count(3, 6);
  std::uniform_real_distribution<double> center(0.0, ll - 1.0);
  std::uniform_real_distribution<double> width(ll / 30.0, ll / 8.0);
  std::uniform_real_distribution<double> amplitude(0.1, 0.9);

  Matrix base(ll, kk);
  int accepted = 0, consecutive_rejects = 0;
  while (accepted < kk) {
    Vector cand = Vector::Zero(ll);
    int bumps = bump_count(rng);
    for (int b = 0; b < bumps; ++b) {
      double c = center(rng), w = width(rng), amp = amplitude(rng);
      for (int l = 0; l < ll; ++l) {
        double d = (l - c) / w;
        cand[l] += amp * std::exp(-0.5 * d * d);
      }
    }
    bool ok = true;
    for (int k = 0; k < accepted && ok; ++k)
      ok = spectral_angle_deg(cand, base.col(k)) > cfg.min_angle_deg;
    if (ok) {
      base.col(accepted++) = cand;
      consecutive_rejects = 0;
    } else if (++consecutive_rejects >= kMaxSpectrumRejections) {
      throw ParameterError(
          "simgen: could not draw base spectra separated by the requested "
          "angle; change the seed or lower min_angle_deg/classes");
    }
  }
  return base;
}

Matrix generate_bundle(const Vector& base, int n_atoms, double scale_sigma,
                       double perturb_sigma, std::mt19937_64& rng) {
  if (n_atoms < 1) throw ParameterError("generate_bundle: n_atoms must be >= 1");
  if (base.size() < 1) throw ParameterError("generate_bundle: empty base");
  if (scale_sigma < 0.0 || perturb_sigma < 0.0)
    throw ParameterError("generate_bundle: negative sigma");
  const int ll = static_cast<int>(base.size());
  Matrix atoms(ll, n_atoms);
  for (int j = 0; j < n_atoms; ++j) {
    double scale = 1.0;
    if (scale_sigma > 0.0) {
      // mean-one lognormal brightness factor
      std::normal_distribution<double> gauss(-0.5 * scale_sigma * scale_sigma,
                                             scale_sigma);
      scale = std::exp(gauss(rng));
    }
    Vector warp = Vector::Ones(ll);
    if (perturb_sigma > 0.0) {
      std::normal_distribution<double> step(0.0, perturb_sigma);
      Vector walk(ll);
      walk[0] = 0.0;
      for (int l = 1; l < ll; ++l) walk[l] = walk[l - 1] + step(rng);
      walk = box_smooth(walk, std::max(1, ll / 40));
      for (int l = 0; l < ll; ++l)
        warp[l] = std::clamp(1.0 + walk[l], 0.7, 1.3);
    }
    atoms.col(j) = scale * base.cwiseProduct(warp);
  }
  return atoms;
}

SpectralBundles generate_bundles(const SimConfig& cfg, std::mt19937_64& rng) {
  validate(cfg);
  Matrix base = generate_base_spectra(cfg, rng);
  Matrix atoms(cfg.bands, cfg.classes * cfg.atoms_per_class);
  std::vector<std::string> names(cfg.classes);
  for (int k = 0; k < cfg.classes; ++k) {
    atoms.middleCols(k * cfg.atoms_per_class, cfg.atoms_per_class) =
        generate_bundle(base.col(k), cfg.atoms_per_class, cfg.scale_sigma,
                        cfg.perturb_sigma, rng);
    char buf[32];
    std::snprintf(buf, sizeof buf, "class%02d", k + 1);
    names[k] = buf;
  }
  return SpectralBundles(
      std::move(atoms), std::vector<int>(cfg.classes, cfg.atoms_per_class),
      std::move(names));
}

namespace {

PixelBatch generate_sim(const SpectralBundles& bundles, const SimConfig& cfg,
                        std::mt19937_64& rng, bool per_class_mixtures) {
  validate(cfg);
  if (cfg.max_active_classes > bundles.class_count())
    throw ParameterError("simgen: max_active_classes exceeds the class count");
  const GroupingMap& g = bundles.grouping();
  const int kk = bundles.class_count(), nn = bundles.atom_count(),
            pp = cfg.pixels;

  PixelBatch batch;
  batch.spectra = Matrix(bundles.bands(), pp);
  BatchTruth truth;
  truth.abundance = Matrix::Zero(kk, pp);
  truth.multiple = Matrix::Zero(nn, pp);
  if (per_class_mixtures) truth.bundling = Matrix::Zero(nn, pp);
  truth.class_support.resize(pp);
  truth.atom_support.resize(pp);

  std::uniform_int_distribution<int> active_count(1, cfg.max_active_classes);
  for (int i = 0; i < pp; ++i) {
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxPixelRedraws && !accepted; ++attempt) {
      int n_act = active_count(rng);
      std::vector<int> classes = draw_subset(kk, n_act, rng);
      Vector a = dirichlet(n_act, cfg.dirichlet_alpha, rng);
      if (a.minCoeff() < kZeroThreshold) continue;  // redraw wholesale

      std::vector<int> atom_support;
      Vector r = Vector::Zero(nn), b = Vector::Zero(nn);
      bool clean = true;
      for (int j = 0; j < n_act && clean; ++j) {
        const int k = classes[j], nk = g.size(k), off = g.offset(k);
        if (per_class_mixtures) {
          std::uniform_int_distribution<int> atom_count(
              1, std::min(cfg.max_active_atoms, nk));
          int m = atom_count(rng);
          std::vector<int> picks = draw_subset(nk, m, rng);
          Vector c = dirichlet(m, cfg.dirichlet_alpha, rng);
          for (int q = 0; q < m; ++q) {
            double rv = a[j] * c[q];
            if (rv < kZeroThreshold) {
              clean = false;  // recorded support must survive thresholding
              break;
            }
            b[off + picks[q]] = c[q];
            r[off + picks[q]] = rv;
            atom_support.push_back(off + picks[q]);
          }
        } else {
          std::uniform_int_distribution<int> pick(0, nk - 1);
          int atom = off + pick(rng);
          b[atom] = 1.0;
          r[atom] = a[j];
          atom_support.push_back(atom);
        }
      }
      if (!clean) continue;

      std::sort(atom_support.begin(), atom_support.end());
      for (int j = 0; j < n_act; ++j)
        truth.abundance(classes[j], i) = a[j];
      truth.multiple.col(i) = r;
      if (per_class_mixtures) truth.bundling.col(i) = b;
      truth.class_support[i] = classes;
      truth.atom_support[i] = atom_support;
      batch.spectra.col(i) = reconstruct(bundles, r);
      accepted = true;
    }
    if (!accepted)
      throw ParameterError(
          "simgen: pixel redraw budget exhausted; the abundance threshold "
          "cannot be met with this configuration");
  }
  batch.truth = std::move(truth);
  batch.dataset = per_class_mixtures ? "sim2" : "sim1";
  batch.seed = cfg.seed;
  return batch;
}

}  // namespace

PixelBatch generate_sim1(const SpectralBundles& bundles, const SimConfig& cfg,
                         std::mt19937_64& rng) {
  return generate_sim(bundles, cfg, rng, false);
}

PixelBatch generate_sim2(const SpectralBundles& bundles, const SimConfig& cfg,
                         std::mt19937_64& rng) {
  return generate_sim(bundles, cfg, rng, true);
}

PixelBatch add_noise(const PixelBatch& batch, double snr_db,
                     std::mt19937_64& rng) {
  PixelBatch out = batch;
  if (std::isinf(snr_db)) return out;
  const double power =
      batch.spectra.squaredNorm() / static_cast<double>(batch.spectra.size());
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::normal_distribution<double> gauss(0.0, sigma);
  for (int j = 0; j < out.spectra.cols(); ++j)
    for (int i = 0; i < out.spectra.rows(); ++i)
      out.spectra(i, j) += gauss(rng);
  out.snr_db = snr_db;
  return out;
}

SimData simulate(const SimConfig& cfg, int scenario) {
  if (scenario != 1 && scenario != 2)
    throw ParameterError("simulate: scenario must be 1 or 2");
  std::mt19937_64 rng(cfg.seed);
  SimData data;
  data.bundles = generate_bundles(cfg, rng);
  data.batch = scenario == 1 ? generate_sim1(data.bundles, cfg, rng)
                             : generate_sim2(data.bundles, cfg, rng);
  data.batch = add_noise(data.batch, cfg.snr_db, rng);
  return data;
}

}  // namespace unmix::simgen
