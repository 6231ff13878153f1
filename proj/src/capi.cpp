#include "unmix/unmix.h"

#include "csv.hpp"
#include "metrics.hpp"
#include "runner.hpp"
#include "simgen.hpp"
#include "types.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>

struct unmix_bundles {
  unmix::SpectralBundles impl;
};
struct unmix_batch {
  unmix::PixelBatch impl;
};
struct unmix_result {
  unmix::runner::Output impl;
};

namespace {

thread_local std::string t_last_error;

void set_error(std::string msg) { t_last_error = std::move(msg); }

unmix_status fail_invalid(const char* msg) {
  set_error(msg);
  return UNMIX_ERR_INVALID_ARGUMENT;
}

// Exception taxonomy -> status codes. Every entry point funnels through here
// so an exception can never cross the C boundary.
template <typename Fn>
unmix_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const unmix::ParameterError& e) {
    set_error(e.what());
    return UNMIX_ERR_INVALID_ARGUMENT;
  } catch (const unmix::DimensionError& e) {
    set_error(e.what());
    return UNMIX_ERR_DIMENSION;
  } catch (const unmix::DataError& e) {
    set_error(e.what());
    return UNMIX_ERR_DATA;
  } catch (const unmix::SolverError& e) {
    set_error(e.what());
    return UNMIX_ERR_SOLVER;
  } catch (const unmix::BudgetError& e) {
    set_error(e.what());
    return UNMIX_ERR_BUDGET;
  } catch (const std::exception& e) {
    set_error(e.what());
    return UNMIX_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown failure");
    return UNMIX_ERR_INTERNAL;
  }
}

unmix_status copy_string(const std::string& s, char* buf, size_t cap) {
  if (buf == nullptr || cap == 0) return fail_invalid("null output buffer");
  if (s.size() + 1 > cap) {
    set_error("buffer too small: need " + std::to_string(s.size() + 1) +
              " bytes");
    return UNMIX_ERR_BUFFER;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return UNMIX_OK;
}

unmix_status copy_matrix(const unmix::Matrix& m, double* out, size_t cap,
                         const char* what) {
  if (out == nullptr) return fail_invalid("null output buffer");
  size_t need = static_cast<size_t>(m.size());
  if (cap < need) {
    set_error(std::string(what) + ": buffer holds " + std::to_string(cap) +
              " elements, need " + std::to_string(need));
    return UNMIX_ERR_BUFFER;
  }
  std::memcpy(out, m.data(), need * sizeof(double));
  return UNMIX_OK;
}

bool to_runner_method(unmix_method m, unmix::runner::Method* out) {
  using unmix::runner::Method;
  switch (m) {
    case UNMIX_METHOD_FCLS: *out = Method::Fcls; return true;
    case UNMIX_METHOD_SUNSAL: *out = Method::Sunsal; return true;
    case UNMIX_METHOD_GROUP: *out = Method::Group; return true;
    case UNMIX_METHOD_ELITIST: *out = Method::Elitist; return true;
    case UNMIX_METHOD_MEMM: *out = Method::Memm; return true;
    case UNMIX_METHOD_MEMM_S: *out = Method::MemmS; return true;
    case UNMIX_METHOD_MESMA: *out = Method::Mesma; return true;
  }
  return false;
}

unmix::metrics::EvalReport to_report(const unmix_eval_report* r) {
  unmix::metrics::EvalReport rep;
  rep.sre_a_db = r->sre_a_db;
  rep.sre_r_db = r->sre_r_db;
  rep.sl_a = r->sl_a;
  rep.sl_r = r->sl_r;
  rep.sl_a_ref = r->sl_a_ref;
  rep.sl_r_ref = r->sl_r_ref;
  rep.dist_a = r->dist_a;
  rep.dist_r = r->dist_r;
  rep.wall_time_s = r->wall_time_s;
  rep.sre_a_capped = r->sre_a_capped != 0;
  rep.sre_r_capped = r->sre_r_capped != 0;
  rep.has_truth = r->has_truth != 0;
  return rep;
}

unmix::metrics::ReportLabels to_labels(const unmix_report_labels* labels) {
  unmix::metrics::ReportLabels l;
  if (labels != nullptr) {
    if (labels->method != nullptr) l.method = labels->method;
    if (labels->dataset != nullptr) l.dataset = labels->dataset;
    l.snr_db = labels->snr_db;
    l.lambda_a = labels->lambda_a;
    l.lambda_b = labels->lambda_b;
    l.lambda_r = labels->lambda_r;
    l.lambda_g = labels->lambda_g;
  }
  return l;
}

}  // namespace

extern "C" {

const char* unmix_version(void) { return "0.1.0"; }

const char* unmix_status_name(unmix_status s) {
  switch (s) {
    case UNMIX_OK: return "ok";
    case UNMIX_ERR_INVALID_ARGUMENT: return "invalid argument";
    case UNMIX_ERR_DIMENSION: return "dimension mismatch";
    case UNMIX_ERR_DATA: return "data error";
    case UNMIX_ERR_SOLVER: return "solver failure";
    case UNMIX_ERR_BUDGET: return "budget exceeded";
    case UNMIX_ERR_BUFFER: return "buffer too small";
    case UNMIX_ERR_INTERNAL: return "internal failure";
  }
  return "unknown status";
}

const char* unmix_last_error(void) { return t_last_error.c_str(); }

/* ---- dictionary ------------------------------------------------------- */

unmix_status unmix_bundles_load_csv(const char* path, unmix_bundles** out) {
  if (path == nullptr || out == nullptr)
    return fail_invalid("null path or output pointer");
  *out = nullptr;
  return guarded([&] {
    auto b = std::make_unique<unmix_bundles>();
    b->impl = unmix::csvio::load_bundles(path);
    *out = b.release();
    return UNMIX_OK;
  });
}

unmix_status unmix_bundles_save_csv(const unmix_bundles* b, const char* path) {
  if (b == nullptr || path == nullptr)
    return fail_invalid("null bundles or path");
  return guarded([&] {
    unmix::csvio::save_bundles(b->impl, path);
    return UNMIX_OK;
  });
}

void unmix_bundles_free(unmix_bundles* b) { delete b; }

int32_t unmix_bundles_bands(const unmix_bundles* b) {
  return b == nullptr ? -1 : b->impl.bands();
}

int32_t unmix_bundles_classes(const unmix_bundles* b) {
  return b == nullptr ? -1 : b->impl.class_count();
}

int32_t unmix_bundles_atoms(const unmix_bundles* b) {
  return b == nullptr ? -1 : b->impl.atom_count();
}

int32_t unmix_bundles_class_size(const unmix_bundles* b, int32_t class_index) {
  if (b == nullptr || class_index < 0 ||
      class_index >= b->impl.class_count())
    return -1;
  return b->impl.atoms_per_class()[class_index];
}

const char* unmix_bundles_class_name(const unmix_bundles* b,
                                     int32_t class_index) {
  if (b == nullptr || class_index < 0 ||
      class_index >= b->impl.class_count())
    return nullptr;
  if (b->impl.class_names().empty()) return "";
  return b->impl.class_names()[class_index].c_str();
}

/* ---- pixel batches ---------------------------------------------------- */

unmix_status unmix_batch_load_csv(const char* pixels_csv,
                                  const char* truth_csv, unmix_batch** out) {
  if (pixels_csv == nullptr || out == nullptr)
    return fail_invalid("null pixels path or output pointer");
  *out = nullptr;
  return guarded([&] {
    auto b = std::make_unique<unmix_batch>();
    b->impl = unmix::csvio::load_pixels(pixels_csv);
    if (truth_csv != nullptr) unmix::csvio::load_truth(b->impl, truth_csv);
    *out = b.release();
    return UNMIX_OK;
  });
}

unmix_status unmix_batch_save_csv(const unmix_batch* b,
                                  const char* pixels_csv,
                                  const char* truth_csv) {
  if (b == nullptr || pixels_csv == nullptr)
    return fail_invalid("null batch or pixels path");
  return guarded([&] {
    unmix::csvio::save_pixels(b->impl, pixels_csv);
    if (truth_csv != nullptr) {
      if (!b->impl.truth)
        throw unmix::ParameterError("batch carries no truth to save");
      unmix::csvio::save_truth(b->impl, truth_csv);
    }
    return UNMIX_OK;
  });
}

void unmix_batch_free(unmix_batch* b) { delete b; }

int32_t unmix_batch_pixels(const unmix_batch* b) {
  return b == nullptr ? -1 : b->impl.pixels();
}

int32_t unmix_batch_bands(const unmix_batch* b) {
  return b == nullptr ? -1 : b->impl.bands();
}

int unmix_batch_has_truth(const unmix_batch* b) {
  return b != nullptr && b->impl.truth.has_value() ? 1 : 0;
}

double unmix_batch_snr_db(const unmix_batch* b) {
  return b == nullptr ? std::numeric_limits<double>::quiet_NaN()
                      : b->impl.snr_db;
}

const char* unmix_batch_dataset(const unmix_batch* b) {
  return b == nullptr ? nullptr : b->impl.dataset.c_str();
}

uint64_t unmix_batch_seed(const unmix_batch* b) {
  return b == nullptr ? 0 : b->impl.seed;
}

/* ---- simulation ------------------------------------------------------- */

void unmix_sim_config_init(unmix_sim_config* cfg) {
  if (cfg == nullptr) return;
  unmix::simgen::SimConfig d;
  cfg->seed = d.seed;
  cfg->scenario = 2;
  cfg->classes = d.classes;
  cfg->atoms_per_class = d.atoms_per_class;
  cfg->pixels = d.pixels;
  cfg->bands = d.bands;
  cfg->snr_db = d.snr_db;
  cfg->max_active_classes = d.max_active_classes;
  cfg->max_active_atoms = d.max_active_atoms;
  cfg->dirichlet_alpha = d.dirichlet_alpha;
}

unmix_status unmix_simulate(const unmix_sim_config* cfg,
                            unmix_bundles** bundles_out,
                            unmix_batch** batch_out) {
  if (cfg == nullptr || bundles_out == nullptr || batch_out == nullptr)
    return fail_invalid("null config or output pointer");
  *bundles_out = nullptr;
  *batch_out = nullptr;
  return guarded([&] {
    unmix::simgen::SimConfig c;
    c.seed = cfg->seed;
    c.classes = cfg->classes;
    c.atoms_per_class = cfg->atoms_per_class;
    c.pixels = cfg->pixels;
    c.bands = cfg->bands;
    c.snr_db = cfg->snr_db;
    c.max_active_classes = cfg->max_active_classes;
    c.max_active_atoms = cfg->max_active_atoms;
    c.dirichlet_alpha = cfg->dirichlet_alpha;
    unmix::simgen::SimData data = unmix::simgen::simulate(c, cfg->scenario);
    auto bundles = std::make_unique<unmix_bundles>();
    auto batch = std::make_unique<unmix_batch>();
    bundles->impl = std::move(data.bundles);
    batch->impl = std::move(data.batch);
    *bundles_out = bundles.release();
    *batch_out = batch.release();
    return UNMIX_OK;
  });
}

/* ---- solving ---------------------------------------------------------- */

void unmix_solve_options_init(unmix_solve_options* opt, unmix_method method) {
  if (opt == nullptr) return;
  unmix::runner::Options d;
  opt->method = method;
  opt->lambda_a = d.lambda_a;
  opt->lambda_b = d.lambda_b;
  opt->lambda_r = d.lambda_r;
  opt->lambda_g = d.lambda_g;
  opt->gamma_m = d.gamma_m;
  opt->gamma_a = d.gamma_a;
  opt->max_iters = d.max_iters;
  opt->rel_tol = d.rel_tol;
  opt->admm_rho = d.admm_rho;
  opt->admm_max_iters = d.admm_max_iters;
  opt->admm_tol = d.admm_tol;
  opt->elitist_p = d.elitist_p;
  opt->elitist_q = d.elitist_q;
  opt->mesma_max_classes = d.mesma_max_classes;
  opt->mesma_budget = d.mesma_budget;
  opt->bundling_cap = d.bundling_cap;
  opt->class_cap = d.class_cap;
  opt->threads = d.threads;
}

unmix_status unmix_solve(const unmix_bundles* bundles,
                         const unmix_batch* batch,
                         const unmix_solve_options* opt, unmix_result** out) {
  if (bundles == nullptr || batch == nullptr || opt == nullptr ||
      out == nullptr)
    return fail_invalid("null bundles, batch, options, or output pointer");
  *out = nullptr;
  unmix::runner::Options o;
  if (!to_runner_method(opt->method, &o.method))
    return fail_invalid("unknown method");
  o.lambda_a = opt->lambda_a;
  o.lambda_b = opt->lambda_b;
  o.lambda_r = opt->lambda_r;
  o.lambda_g = opt->lambda_g;
  o.gamma_m = opt->gamma_m;
  o.gamma_a = opt->gamma_a;
  o.max_iters = opt->max_iters;
  o.rel_tol = opt->rel_tol;
  o.admm_rho = opt->admm_rho;
  o.admm_max_iters = opt->admm_max_iters;
  o.admm_tol = opt->admm_tol;
  o.elitist_p = opt->elitist_p;
  o.elitist_q = opt->elitist_q;
  o.mesma_max_classes = opt->mesma_max_classes;
  o.mesma_budget = opt->mesma_budget;
  o.bundling_cap = opt->bundling_cap;
  o.class_cap = opt->class_cap;
  o.threads = opt->threads;
  return guarded([&] {
    auto r = std::make_unique<unmix_result>();
    r->impl = unmix::runner::run(bundles->impl, batch->impl, o);
    if (r->impl.failed == r->impl.pixels() && r->impl.pixels() > 0) {
      // first per-pixel message as the representative cause
      std::string why;
      for (const auto& e : r->impl.errors)
        if (!e.empty()) {
          why = e;
          break;
        }
      throw unmix::SolverError("every pixel failed: " + why);
    }
    *out = r.release();
    return UNMIX_OK;
  });
}

void unmix_result_free(unmix_result* r) { delete r; }

int32_t unmix_result_pixels(const unmix_result* r) {
  return r == nullptr ? -1 : r->impl.pixels();
}

int32_t unmix_result_classes(const unmix_result* r) {
  return r == nullptr ? -1 : static_cast<int32_t>(r->impl.abundance.rows());
}

int32_t unmix_result_atoms(const unmix_result* r) {
  return r == nullptr ? -1 : static_cast<int32_t>(r->impl.multiple.rows());
}

int32_t unmix_result_failed(const unmix_result* r) {
  return r == nullptr ? -1 : r->impl.failed;
}

int unmix_result_pixel_ok(const unmix_result* r, int32_t pixel) {
  if (r == nullptr || pixel < 0 ||
      pixel >= static_cast<int32_t>(r->impl.errors.size()))
    return 0;
  return r->impl.errors[pixel].empty() ? 1 : 0;
}

const char* unmix_result_pixel_error(const unmix_result* r, int32_t pixel) {
  if (r == nullptr || pixel < 0 ||
      pixel >= static_cast<int32_t>(r->impl.errors.size()))
    return nullptr;
  return r->impl.errors[pixel].c_str();
}

double unmix_result_wall_time_s(const unmix_result* r) {
  return r == nullptr ? std::numeric_limits<double>::quiet_NaN()
                      : r->impl.wall_time_s;
}

int unmix_result_has_bundling(const unmix_result* r) {
  return r != nullptr && r->impl.has_bundling() ? 1 : 0;
}

const char* unmix_result_method(const unmix_result* r) {
  return r == nullptr ? nullptr : r->impl.method.c_str();
}

unmix_status unmix_result_abundances(const unmix_result* r, double* out,
                                     size_t cap) {
  if (r == nullptr) return fail_invalid("null result");
  return copy_matrix(r->impl.abundance, out, cap, "abundances");
}

unmix_status unmix_result_multiple(const unmix_result* r, double* out,
                                   size_t cap) {
  if (r == nullptr) return fail_invalid("null result");
  return copy_matrix(r->impl.multiple, out, cap, "multiple abundances");
}

unmix_status unmix_result_bundling(const unmix_result* r, double* out,
                                   size_t cap) {
  if (r == nullptr) return fail_invalid("null result");
  if (!r->impl.has_bundling())
    return fail_invalid("result carries no bundling weights");
  return copy_matrix(r->impl.bundling, out, cap, "bundling");
}

unmix_status unmix_result_save_csv(const unmix_result* r, const char* dir) {
  if (r == nullptr || dir == nullptr)
    return fail_invalid("null result or directory");
  return guarded([&] {
    unmix::runner::save_output(r->impl, dir);
    return UNMIX_OK;
  });
}

unmix_status unmix_result_load_csv(const char* abundances_csv,
                                   const char* multiple_csv,
                                   unmix_result** out) {
  if (abundances_csv == nullptr || multiple_csv == nullptr || out == nullptr)
    return fail_invalid("null path or output pointer");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<unmix_result>();
    r->impl = unmix::runner::load_output(abundances_csv, multiple_csv);
    *out = r.release();
    return UNMIX_OK;
  });
}

/* ---- evaluation ------------------------------------------------------- */

unmix_status unmix_evaluate(const unmix_batch* batch, const unmix_result* r,
                            unmix_eval_report* out) {
  if (batch == nullptr || r == nullptr || out == nullptr)
    return fail_invalid("null batch, result, or output pointer");
  return guarded([&] {
    unmix::metrics::Evaluation ev = unmix::metrics::evaluate(
        batch->impl, r->impl.abundance, r->impl.multiple,
        r->impl.wall_time_s);
    const unmix::metrics::EvalReport& rep = ev.report;
    out->sre_a_db = rep.sre_a_db;
    out->sre_r_db = rep.sre_r_db;
    out->sl_a = rep.sl_a;
    out->sl_r = rep.sl_r;
    out->sl_a_ref = rep.sl_a_ref;
    out->sl_r_ref = rep.sl_r_ref;
    out->dist_a = rep.dist_a;
    out->dist_r = rep.dist_r;
    out->wall_time_s = rep.wall_time_s;
    out->sre_a_capped = rep.sre_a_capped ? 1 : 0;
    out->sre_r_capped = rep.sre_r_capped ? 1 : 0;
    out->has_truth = rep.has_truth ? 1 : 0;
    return UNMIX_OK;
  });
}

unmix_status unmix_evaluate_per_pixel_csv(const unmix_batch* batch,
                                          const unmix_result* r,
                                          const char* path) {
  if (batch == nullptr || r == nullptr || path == nullptr)
    return fail_invalid("null batch, result, or path");
  return guarded([&] {
    unmix::metrics::Evaluation ev = unmix::metrics::evaluate(
        batch->impl, r->impl.abundance, r->impl.multiple,
        r->impl.wall_time_s);
    std::ostringstream out;
    out << "# unmix-csv v1 per_pixel pixels="
        << ev.per_pixel.size() << "\n";
    out << "pixel,err_a_sq,sig_a_sq,err_r_sq,sig_r_sq,dist_a,dist_r,"
           "sl_a,sl_r\n";
    using unmix::csvio::format_double;
    for (const auto& pe : ev.per_pixel) {
      out << pe.pixel << ',' << format_double(pe.err_a_sq) << ','
          << format_double(pe.sig_a_sq) << ',' << format_double(pe.err_r_sq)
          << ',' << format_double(pe.sig_r_sq) << ','
          << format_double(pe.dist_a) << ',' << format_double(pe.dist_r)
          << ',' << pe.sl_a << ',' << pe.sl_r << "\n";
    }
    unmix::csvio::write_text_file(path, out.str());
    return UNMIX_OK;
  });
}

unmix_status unmix_report_csv_header(char* buf, size_t cap) {
  return copy_string(unmix::metrics::report_csv_header(), buf, cap);
}

unmix_status unmix_report_csv_row(const unmix_report_labels* labels,
                                  const unmix_eval_report* r, char* buf,
                                  size_t cap) {
  if (r == nullptr) return fail_invalid("null report");
  return copy_string(
      unmix::metrics::report_csv_row(to_labels(labels), to_report(r)), buf,
      cap);
}

unmix_status unmix_report_text_header(char* buf, size_t cap) {
  return copy_string(unmix::metrics::report_text_header(), buf, cap);
}

unmix_status unmix_report_text_row(const unmix_report_labels* labels,
                                   const unmix_eval_report* r, char* buf,
                                   size_t cap) {
  if (r == nullptr) return fail_invalid("null report");
  return copy_string(
      unmix::metrics::report_text_row(to_labels(labels), to_report(r)), buf,
      cap);
}

/* ---- abundance maps --------------------------------------------------- */

unmix_status unmix_result_write_maps(const unmix_result* r, int32_t width,
                                     int32_t height, const char* dir) {
  if (r == nullptr || dir == nullptr)
    return fail_invalid("null result or directory");
  return guarded([&] {
    const unmix::Matrix& a = r->impl.abundance;
    if (width <= 0 || height <= 0 ||
        static_cast<long long>(width) * height != a.cols())
      throw unmix::DimensionError(
          "maps: width x height must equal the pixel count " +
          std::to_string(a.cols()));
    for (int k = 0; k < a.rows(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "map_c%02d.pgm", k);
      unmix::Vector row = a.row(k).transpose();
      unmix::csvio::write_pgm(
          (std::filesystem::path(dir) / name).string(), row, width, height);
    }
    return UNMIX_OK;
  });
}

}  // extern "C"
