#pragma once

#include "types.hpp"

#include <string>
#include <vector>

namespace unmix::runner {

enum class Method { Fcls, Sunsal, Group, Elitist, Memm, MemmS, Mesma };

const char* method_name(Method m);
bool parse_method(const std::string& name, Method* out);

struct Options {
  Method method = Method::Fcls;
  double lambda_a = 1e-3;  // memm variants
  double lambda_b = 1e-3;  // memm
  double lambda_r = 0.0;   // sunsal, group lasso l1, elitist
  double lambda_g = 0.0;   // group lasso
  double gamma_m = 1.1;
  double gamma_a = 1.1;
  int max_iters = 500;     // outer iterations (memm sweeps / fista steps)
  double rel_tol = 1e-6;
  double admm_rho = 1.0;
  int admm_max_iters = 1000;
  double admm_tol = 1e-6;
  int elitist_p = 1;
  int elitist_q = 2;
  int mesma_max_classes = 2;
  long long mesma_budget = 2000000;
  int bundling_cap = 0;
  int class_cap = 0;
  int threads = 0;  // 0 = resolve via UNMIX_THREADS, then hardware
};

struct Output {
  std::string method;
  Matrix abundance;  // K x P
  Matrix multiple;   // N x P
  Matrix bundling;   // N x P, memm variants only (empty otherwise)
  std::vector<std::vector<double>> traces;  // memm variants only
  std::vector<std::string> errors;          // per pixel, empty = ok
  int failed = 0;
  double wall_time_s = 0.0;

  int pixels() const { return static_cast<int>(abundance.cols()); }
  bool has_bundling() const { return bundling.size() != 0; }
};

Output run(const SpectralBundles& bundles, const PixelBatch& batch,
           const Options& opt);

// cmd_unmix file set: abundances.csv and multiple_abundances.csv always,
// bundling.csv and objective_trace.csv when the method produces them.
void save_output(const Output& out, const std::string& dir);
Output load_output(const std::string& abundances_csv,
                   const std::string& multiple_csv);

}  // namespace unmix::runner
