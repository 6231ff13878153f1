#include "runner.hpp"

#include "baselines.hpp"
#include "csv.hpp"
#include "memm.hpp"

#include <filesystem>

namespace unmix::runner {

const char* method_name(Method m) {
  switch (m) {
    case Method::Fcls: return "fcls";
    case Method::Sunsal: return "sunsal";
    case Method::Group: return "group";
    case Method::Elitist: return "elitist";
    case Method::Memm: return "memm";
    case Method::MemmS: return "memm_s";
    case Method::Mesma: return "mesma";
  }
  return "unknown";
}

bool parse_method(const std::string& name, Method* out) {
  for (Method m : {Method::Fcls, Method::Sunsal, Method::Group,
                   Method::Elitist, Method::Memm, Method::MemmS,
                   Method::Mesma}) {
    if (name == method_name(m)) {
      *out = m;
      return true;
    }
  }
  return false;
}

Output run(const SpectralBundles& bundles, const PixelBatch& batch,
           const Options& opt) {
  Output out;
  out.method = method_name(opt.method);

  if (opt.method == Method::Memm || opt.method == Method::MemmS) {
    memm::Config cfg;
    cfg.lambda_a = opt.lambda_a;
    cfg.lambda_b = opt.lambda_b;
    cfg.gamma_m = opt.gamma_m;
    cfg.gamma_a = opt.gamma_a;
    cfg.max_iters = opt.max_iters;
    cfg.rel_tol = opt.rel_tol;
    cfg.variant = opt.method == Method::Memm ? memm::Variant::Penalized
                                             : memm::Variant::TopOne;
    cfg.bundling_cap = opt.bundling_cap;
    cfg.class_cap = opt.class_cap;
    cfg.init_admm = {opt.admm_rho, opt.admm_max_iters, opt.admm_tol};
    memm::BatchResult res = memm::solve_batch(bundles, batch, cfg, opt.threads);
    out.abundance = std::move(res.abundance);
    out.multiple = std::move(res.multiple);
    out.bundling = std::move(res.bundling);
    out.traces = std::move(res.traces);
    out.errors = std::move(res.errors);
    out.failed = res.failed;
    out.wall_time_s = res.wall_time_s;
    return out;
  }

  baselines::Config cfg;
  switch (opt.method) {
    case Method::Fcls: cfg.method = baselines::Method::Fcls; break;
    case Method::Sunsal: cfg.method = baselines::Method::Sunsal; break;
    case Method::Group: cfg.method = baselines::Method::GroupLasso; break;
    case Method::Elitist: cfg.method = baselines::Method::ElitistLasso; break;
    case Method::Mesma: cfg.method = baselines::Method::Mesma; break;
    default: throw ParameterError("run: unknown method");
  }
  cfg.lambda_r = opt.lambda_r;
  cfg.lambda_g = opt.lambda_g;
  cfg.elitist_p = opt.elitist_p;
  cfg.elitist_q = opt.elitist_q;
  cfg.admm = {opt.admm_rho, opt.admm_max_iters, opt.admm_tol};
  cfg.fista_max_iters = opt.max_iters;
  cfg.fista_rel_tol = opt.rel_tol;
  cfg.mesma_max_classes = opt.mesma_max_classes;
  cfg.mesma_budget = opt.mesma_budget;
  baselines::BatchResult res =
      baselines::solve_batch(bundles, batch, cfg, opt.threads);
  out.abundance = std::move(res.abundance);
  out.multiple = std::move(res.multiple);
  out.errors = std::move(res.errors);
  out.failed = res.failed;
  out.wall_time_s = res.wall_time_s;
  return out;
}

void save_output(const Output& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(dir + ": cannot create directory: " + ec.message());
  const std::map<std::string, std::string> meta = {{"method", out.method}};
  csvio::save_named_matrix((fs::path(dir) / "abundances.csv").string(),
                           "abundances", "class", out.abundance, meta);
  csvio::save_named_matrix(
      (fs::path(dir) / "multiple_abundances.csv").string(),
      "multiple_abundances", "atom", out.multiple, meta);
  if (out.has_bundling())
    csvio::save_named_matrix((fs::path(dir) / "bundling.csv").string(),
                             "bundling", "atom", out.bundling, meta);
  if (!out.traces.empty())
    csvio::save_traces((fs::path(dir) / "objective_trace.csv").string(),
                       out.traces);
}

Output load_output(const std::string& abundances_csv,
                   const std::string& multiple_csv) {
  Output out;
  std::map<std::string, std::string> meta;
  out.abundance = csvio::load_named_matrix(abundances_csv, "abundances", &meta);
  if (auto it = meta.find("method"); it != meta.end()) out.method = it->second;
  out.multiple =
      csvio::load_named_matrix(multiple_csv, "multiple_abundances", nullptr);
  if (out.multiple.cols() != out.abundance.cols())
    throw DataError(multiple_csv +
                    ": pixel count differs from the abundances file");
  out.errors.assign(out.pixels(), "");
  return out;
}

}  // namespace unmix::runner
