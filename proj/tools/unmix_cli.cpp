// Command-line harness over the C API: synthetic scene generation, per-pixel
// unmixing, evaluation, grid-search benchmarking, and abundance maps.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 solver failure (every
// pixel failed).

#include "unmix/unmix.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

int exit_code(unmix_status s) {
  switch (s) {
    case UNMIX_OK:
      return 0;
    case UNMIX_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    case UNMIX_ERR_SOLVER:
      return kExitSolver;
    default:
      return kExitData;
  }
}

int fail(unmix_status s) {
  std::fprintf(stderr, "error: %s\n", unmix_last_error());
  return exit_code(s);
}

struct BundlesDeleter {
  void operator()(unmix_bundles* p) const { unmix_bundles_free(p); }
};
struct BatchDeleter {
  void operator()(unmix_batch* p) const { unmix_batch_free(p); }
};
struct ResultDeleter {
  void operator()(unmix_result* p) const { unmix_result_free(p); }
};
using BundlesPtr = std::unique_ptr<unmix_bundles, BundlesDeleter>;
using BatchPtr = std::unique_ptr<unmix_batch, BatchDeleter>;
using ResultPtr = std::unique_ptr<unmix_result, ResultDeleter>;

const std::vector<std::string> kMethodNames = {
    "fcls", "sunsal", "group", "elitist", "memm", "memm_s", "mesma"};

bool parse_method_name(const std::string& name, unmix_method* out) {
  for (size_t i = 0; i < kMethodNames.size(); ++i)
    if (kMethodNames[i] == name) {
      *out = static_cast<unmix_method>(i);
      return true;
    }
  return false;
}

void add_sim_flags(CLI::App* cmd, unmix_sim_config* cfg) {
  cmd->add_option("--sim", cfg->scenario, "scenario: 1 or 2")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--seed", cfg->seed, "generator seed")
      ->capture_default_str();
  cmd->add_option("--snr", cfg->snr_db, "noise level in dB, inf = noiseless")
      ->capture_default_str();
  cmd->add_option("--pixels", cfg->pixels, "pixel count")
      ->capture_default_str();
  cmd->add_option("--classes", cfg->classes, "endmember classes")
      ->capture_default_str();
  cmd->add_option("--atoms", cfg->atoms_per_class, "atoms per class")
      ->capture_default_str();
  cmd->add_option("--bands", cfg->bands, "spectral bands")
      ->capture_default_str();
  cmd->add_option("--max-active-classes", cfg->max_active_classes,
                  "active classes per pixel at most")
      ->capture_default_str();
  cmd->add_option("--max-active-atoms", cfg->max_active_atoms,
                  "active atoms per class at most (scenario 2)")
      ->capture_default_str();
  cmd->add_option("--alpha", cfg->dirichlet_alpha,
                  "Dirichlet concentration of the abundances")
      ->capture_default_str();
}

void add_solver_flags(CLI::App* cmd, unmix_solve_options* opt) {
  cmd->add_option("--lambda-a", opt->lambda_a,
                  "abundance sparsity weight (memm, memm_s)")
      ->capture_default_str();
  cmd->add_option("--lambda-b", opt->lambda_b,
                  "bundling sparsity weight (memm)")
      ->capture_default_str();
  cmd->add_option("--lambda-r", opt->lambda_r,
                  "l1 weight (sunsal, group) / social weight (elitist)")
      ->capture_default_str();
  cmd->add_option("--lambda-g", opt->lambda_g, "group weight (group)")
      ->capture_default_str();
  cmd->add_option("--gamma-m", opt->gamma_m,
                  "step inflation, bundling block")
      ->capture_default_str();
  cmd->add_option("--gamma-a", opt->gamma_a,
                  "step inflation, abundance block")
      ->capture_default_str();
  cmd->add_option("--max-iters", opt->max_iters, "outer iteration limit")
      ->capture_default_str();
  cmd->add_option("--rel-tol", opt->rel_tol,
                  "relative objective-change stop")
      ->capture_default_str();
  cmd->add_option("--admm-rho", opt->admm_rho, "ADMM penalty")
      ->capture_default_str();
  cmd->add_option("--admm-iters", opt->admm_max_iters, "ADMM iteration limit")
      ->capture_default_str();
  cmd->add_option("--admm-tol", opt->admm_tol, "ADMM residual tolerance")
      ->capture_default_str();
  cmd->add_option("--elitist-p", opt->elitist_p, "elitist norm: outer p")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--elitist-q", opt->elitist_q, "elitist norm: inner q")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--mesma-classes", opt->mesma_max_classes,
                  "mesma: active classes per pixel at most")
      ->capture_default_str();
  cmd->add_option("--mesma-budget", opt->mesma_budget,
                  "mesma: candidate combinations per pixel at most")
      ->capture_default_str();
  cmd->add_option("--cap-bundling", opt->bundling_cap,
                  "hard cap on nonzero bundling weights, 0 = none")
      ->capture_default_str();
  cmd->add_option("--cap-classes", opt->class_cap,
                  "hard cap on active classes, 0 = none")
      ->capture_default_str();
  cmd->add_option("--threads", opt->threads,
                  "worker threads, 0 = UNMIX_THREADS env, then hardware")
      ->capture_default_str();
}

// ---- gen ------------------------------------------------------------------

int run_gen(const unmix_sim_config& cfg0, const std::string& out_dir) {
  unmix_sim_config cfg = cfg0;
  if (cfg.max_active_classes > cfg.classes)
    cfg.max_active_classes = cfg.classes;
  unmix_bundles* bundles = nullptr;
  unmix_batch* batch = nullptr;
  unmix_status s = unmix_simulate(&cfg, &bundles, &batch);
  if (s != UNMIX_OK) return fail(s);
  BundlesPtr bguard(bundles);
  BatchPtr pguard(batch);

  fs::path out(out_dir);
  std::string bundles_path = (out / "bundles.csv").string();
  std::string pixels_path = (out / "pixels.csv").string();
  std::string truth_path = (out / "truth.csv").string();
  s = unmix_bundles_save_csv(bundles, bundles_path.c_str());
  if (s != UNMIX_OK) return fail(s);
  s = unmix_batch_save_csv(batch, pixels_path.c_str(), truth_path.c_str());
  if (s != UNMIX_OK) return fail(s);

  std::printf("sim%d seed=%llu: %d classes x %d atoms, %d bands, %d pixels\n",
              cfg.scenario, static_cast<unsigned long long>(cfg.seed),
              unmix_bundles_classes(bundles), cfg.atoms_per_class,
              unmix_bundles_bands(bundles), unmix_batch_pixels(batch));
  std::printf("wrote %s, %s, %s\n", bundles_path.c_str(), pixels_path.c_str(),
              truth_path.c_str());
  return 0;
}

// ---- unmix ------------------------------------------------------------

int run_unmix(const std::string& method_name, const unmix_solve_options& opt0,
              const std::string& in_dir, const std::string& out_dir) {
  unmix_solve_options opt = opt0;
  if (!parse_method_name(method_name, &opt.method)) {
    std::fprintf(stderr, "usage error: unknown method '%s'\n",
                 method_name.c_str());
    return kExitUsage;
  }

  fs::path in(in_dir);
  unmix_bundles* bundles = nullptr;
  unmix_status s = unmix_bundles_load_csv(
      (in / "bundles.csv").string().c_str(), &bundles);
  if (s != UNMIX_OK) return fail(s);
  BundlesPtr bguard(bundles);
  unmix_batch* batch = nullptr;
  s = unmix_batch_load_csv((in / "pixels.csv").string().c_str(), nullptr,
                           &batch);
  if (s != UNMIX_OK) return fail(s);
  BatchPtr pguard(batch);

  unmix_result* result = nullptr;
  s = unmix_solve(bundles, batch, &opt, &result);
  if (s != UNMIX_OK) return fail(s);
  ResultPtr rguard(result);

  for (int i = 0; i < unmix_result_pixels(result); ++i)
    if (!unmix_result_pixel_ok(result, i))
      std::fprintf(stderr, "pixel %d failed: %s\n", i,
                   unmix_result_pixel_error(result, i));

  s = unmix_result_save_csv(result, out_dir.c_str());
  if (s != UNMIX_OK) return fail(s);

  std::printf("%s: %d pixels (%d failed) in %.3f s -> %s\n",
              unmix_result_method(result), unmix_result_pixels(result),
              unmix_result_failed(result), unmix_result_wall_time_s(result),
              out_dir.c_str());
  return 0;
}

// ---- eval ---------------------------------------------------------------

int run_eval(const std::string& in_dir, const std::string& result_dir,
             std::string report_path, const std::string& per_pixel_path) {
  fs::path in(in_dir);
  fs::path rdir(result_dir);
  if (report_path.empty()) report_path = (rdir / "report.csv").string();
  std::string truth_path = (in / "truth.csv").string();

  unmix_batch* batch = nullptr;
  unmix_status s = unmix_batch_load_csv(
      (in / "pixels.csv").string().c_str(),
      fs::exists(truth_path) ? truth_path.c_str() : nullptr, &batch);
  if (s != UNMIX_OK) return fail(s);
  BatchPtr pguard(batch);

  unmix_result* result = nullptr;
  s = unmix_result_load_csv(
      (rdir / "abundances.csv").string().c_str(),
      (rdir / "multiple_abundances.csv").string().c_str(), &result);
  if (s != UNMIX_OK) return fail(s);
  ResultPtr rguard(result);

  unmix_eval_report report;
  s = unmix_evaluate(batch, result, &report);
  if (s != UNMIX_OK) return fail(s);

  unmix_report_labels labels;
  labels.method = unmix_result_method(result);
  labels.dataset = unmix_batch_dataset(batch);
  labels.snr_db = unmix_batch_snr_db(batch);
  labels.lambda_a = labels.lambda_b = labels.lambda_r = labels.lambda_g = NAN;

  char header[1024], row[1024];
  s = unmix_report_text_header(header, sizeof header);
  if (s != UNMIX_OK) return fail(s);
  s = unmix_report_text_row(&labels, &report, row, sizeof row);
  if (s != UNMIX_OK) return fail(s);
  std::printf("%s\n%s\n", header, row);
  if (!report.has_truth)
    std::fputs("note: no truth file, only sparsity levels measured\n",
               stdout);

  s = unmix_report_csv_header(header, sizeof header);
  if (s != UNMIX_OK) return fail(s);
  s = unmix_report_csv_row(&labels, &report, row, sizeof row);
  if (s != UNMIX_OK) return fail(s);
  {
    std::error_code ec;
    fs::path parent = fs::path(report_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent, ec);
    std::ofstream out(report_path, std::ios::binary);
    out << header << "\n" << row << "\n";
    if (!out) {
      std::fprintf(stderr, "error: %s: write failed\n", report_path.c_str());
      return kExitData;
    }
  }

  if (!per_pixel_path.empty()) {
    s = unmix_evaluate_per_pixel_csv(batch, result, per_pixel_path.c_str());
    if (s != UNMIX_OK) return fail(s);
  }
  return 0;
}

// ---- bench ----------------------------------------------------------------

struct Combo {
  double la = NAN, lb = NAN, lr = NAN, lg = NAN;
};

std::vector<Combo> combos_for(unmix_method m, const std::vector<double>& grid) {
  std::vector<Combo> out;
  Combo c;
  switch (m) {
    case UNMIX_METHOD_FCLS:
    case UNMIX_METHOD_MESMA:
      out.push_back(c);
      break;
    case UNMIX_METHOD_SUNSAL:
    case UNMIX_METHOD_ELITIST:
      for (double v : grid) {
        c.lr = v;
        out.push_back(c);
      }
      break;
    case UNMIX_METHOD_GROUP:
      for (double v : grid) {
        c.lg = v;
        out.push_back(c);
      }
      break;
    case UNMIX_METHOD_MEMM_S:
      for (double v : grid) {
        c.la = v;
        out.push_back(c);
      }
      break;
    case UNMIX_METHOD_MEMM:
      for (double va : grid)
        for (double vb : grid) {
          c.la = va;
          c.lb = vb;
          out.push_back(c);
        }
      break;
  }
  return out;
}

// Field-wise sums of eval reports over seeds, for one (method, combo) cell.
struct CellAgg {
  double sre_a = 0, sre_r = 0, sl_a = 0, sl_r = 0, sl_a_ref = 0, sl_r_ref = 0;
  double dist_a = 0, dist_r = 0, seconds = 0;
  int n = 0;

  void add(const unmix_eval_report& r, double wall_s) {
    sre_a += r.sre_a_db;
    sre_r += r.sre_r_db;
    sl_a += r.sl_a;
    sl_r += r.sl_r;
    sl_a_ref += r.sl_a_ref;
    sl_r_ref += r.sl_r_ref;
    dist_a += r.dist_a;
    dist_r += r.dist_r;
    seconds += wall_s;
    n += 1;
  }

  unmix_eval_report mean() const {
    unmix_eval_report r;
    std::memset(&r, 0, sizeof r);
    r.sre_a_db = sre_a / n;
    r.sre_r_db = sre_r / n;
    r.sl_a = sl_a / n;
    r.sl_r = sl_r / n;
    r.sl_a_ref = sl_a_ref / n;
    r.sl_r_ref = sl_r_ref / n;
    r.dist_a = dist_a / n;
    r.dist_r = dist_r / n;
    r.wall_time_s = NAN;  // kept out of the deterministic table
    r.has_truth = 1;
    return r;
  }
};

struct BenchSpec {
  std::vector<int> sims = {1, 2};
  std::vector<double> snrs = {30, 40, 50};
  std::vector<uint64_t> seeds = {1};
  std::vector<std::string> methods = {"fcls",    "sunsal", "group",
                                      "elitist", "memm_s", "memm"};
  std::vector<double> grid = {1e-4, 1e-3, 1e-2, 0.1, 1, 5};
  std::string out_dir = "bench_out";
};

int run_bench(const BenchSpec& spec, const unmix_sim_config& base_cfg0,
              const unmix_solve_options& base_opt) {
  unmix_sim_config base_cfg = base_cfg0;
  if (base_cfg.max_active_classes > base_cfg.classes)
    base_cfg.max_active_classes = base_cfg.classes;
  if (spec.methods.empty() || spec.seeds.empty() || spec.grid.empty() ||
      spec.sims.empty() || spec.snrs.empty()) {
    std::fputs("usage error: bench lists must be nonempty\n", stderr);
    return kExitUsage;
  }
  std::vector<unmix_method> methods;
  for (const auto& name : spec.methods) {
    unmix_method m;
    if (!parse_method_name(name, &m)) {
      std::fprintf(stderr, "usage error: unknown method '%s'\n",
                   name.c_str());
      return kExitUsage;
    }
    methods.push_back(m);
  }

  fs::path out_dir(spec.out_dir);
  {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      std::fprintf(stderr, "error: %s: cannot create directory\n",
                   out_dir.string().c_str());
      return kExitData;
    }
  }

  char buf[1024];
  unmix_status s = unmix_report_csv_header(buf, sizeof buf);
  if (s != UNMIX_OK) return fail(s);
  std::string tables = std::string(buf) + "\n";
  std::string times =
      "method,dataset,snr_db,pixels,seconds,seconds_per_pixel\n";
  s = unmix_report_text_header(buf, sizeof buf);
  if (s != UNMIX_OK) return fail(s);
  std::printf("%s\n", buf);

  for (int sim : spec.sims) {
    for (double snr : spec.snrs) {
      std::vector<std::vector<CellAgg>> agg(methods.size());
      for (size_t mi = 0; mi < methods.size(); ++mi)
        agg[mi].resize(combos_for(methods[mi], spec.grid).size());

      for (uint64_t seed : spec.seeds) {
        unmix_sim_config cfg = base_cfg;
        cfg.scenario = sim;
        cfg.snr_db = snr;
        cfg.seed = seed;
        unmix_bundles* bundles = nullptr;
        unmix_batch* batch = nullptr;
        s = unmix_simulate(&cfg, &bundles, &batch);
        if (s != UNMIX_OK) return fail(s);
        BundlesPtr bguard(bundles);
        BatchPtr pguard(batch);

        for (size_t mi = 0; mi < methods.size(); ++mi) {
          const std::vector<Combo> combos = combos_for(methods[mi], spec.grid);
          for (size_t ci = 0; ci < combos.size(); ++ci) {
            unmix_solve_options opt = base_opt;
            opt.method = methods[mi];
            const Combo& c = combos[ci];
            if (!std::isnan(c.la)) opt.lambda_a = c.la;
            if (!std::isnan(c.lb)) opt.lambda_b = c.lb;
            if (!std::isnan(c.lr)) opt.lambda_r = c.lr;
            if (!std::isnan(c.lg)) opt.lambda_g = c.lg;
            unmix_result* result = nullptr;
            s = unmix_solve(bundles, batch, &opt, &result);
            if (s != UNMIX_OK) {
              std::fprintf(stderr,
                           "[bench] sim%d snr=%g seed=%llu method=%s "
                           "combo=%zu failed: %s\n",
                           sim, snr, static_cast<unsigned long long>(seed),
                           spec.methods[mi].c_str(), ci, unmix_last_error());
              continue;  // partial failure: sweep continues
            }
            ResultPtr rguard(result);
            unmix_eval_report report;
            s = unmix_evaluate(batch, result, &report);
            if (s != UNMIX_OK) return fail(s);
            agg[mi][ci].add(report, unmix_result_wall_time_s(result));
          }
        }
        std::fprintf(stderr, "[bench] sim%d snr=%g seed=%llu done\n", sim,
                     snr, static_cast<unsigned long long>(seed));
      }

      for (size_t mi = 0; mi < methods.size(); ++mi) {
        const std::vector<Combo> combos = combos_for(methods[mi], spec.grid);
        int best = -1;
        double best_sre = 0;
        for (size_t ci = 0; ci < combos.size(); ++ci) {
          if (agg[mi][ci].n == 0) continue;
          double mean_sre = agg[mi][ci].sre_a / agg[mi][ci].n;
          if (best < 0 || mean_sre > best_sre) {  // ties keep the first
            best = static_cast<int>(ci);
            best_sre = mean_sre;
          }
        }
        if (best < 0) {
          std::fprintf(stderr,
                       "[bench] sim%d snr=%g method=%s: no combo succeeded, "
                       "row skipped\n",
                       sim, snr, spec.methods[mi].c_str());
          continue;
        }
        const CellAgg& cell = agg[mi][best];
        unmix_eval_report mean = cell.mean();
        unmix_report_labels labels;
        labels.method = spec.methods[mi].c_str();
        std::string dataset = sim == 1 ? "sim1" : "sim2";
        labels.dataset = dataset.c_str();
        labels.snr_db = snr;
        labels.lambda_a = combos[best].la;
        labels.lambda_b = combos[best].lb;
        labels.lambda_r = combos[best].lr;
        labels.lambda_g = combos[best].lg;
        s = unmix_report_csv_row(&labels, &mean, buf, sizeof buf);
        if (s != UNMIX_OK) return fail(s);
        tables += std::string(buf) + "\n";

        double mean_seconds = cell.seconds / cell.n;
        std::snprintf(buf, sizeof buf, "%s,%s,%g,%d,%.6g,%.6g\n",
                      spec.methods[mi].c_str(), dataset.c_str(), snr,
                      base_cfg.pixels, mean_seconds,
                      mean_seconds / base_cfg.pixels);
        times += buf;

        mean.wall_time_s = mean_seconds;  // console row may show timing
        s = unmix_report_text_row(&labels, &mean, buf, sizeof buf);
        if (s != UNMIX_OK) return fail(s);
        std::printf("%s\n", buf);
      }
    }
  }

  std::string tables_path = (out_dir / "tables.csv").string();
  std::string times_path = (out_dir / "times.csv").string();
  {
    std::ofstream out(tables_path, std::ios::binary);
    out << tables;
    if (!out) {
      std::fprintf(stderr, "error: %s: write failed\n", tables_path.c_str());
      return kExitData;
    }
  }
  {
    std::ofstream out(times_path, std::ios::binary);
    out << times;
    if (!out) {
      std::fprintf(stderr, "error: %s: write failed\n", times_path.c_str());
      return kExitData;
    }
  }
  std::printf("wrote %s and %s\n", tables_path.c_str(), times_path.c_str());
  return 0;
}

// ---- maps -----------------------------------------------------------------

int run_maps(const std::string& in_dir, int width, int height,
             std::string out_dir) {
  fs::path in(in_dir);
  if (out_dir.empty()) out_dir = in.string();
  unmix_result* result = nullptr;
  unmix_status s = unmix_result_load_csv(
      (in / "abundances.csv").string().c_str(),
      (in / "multiple_abundances.csv").string().c_str(), &result);
  if (s != UNMIX_OK) return fail(s);
  ResultPtr rguard(result);

  s = unmix_result_write_maps(result, width, height, out_dir.c_str());
  if (s != UNMIX_OK) return fail(s);
  std::printf("wrote %d maps to %s\n", unmix_result_classes(result),
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-pixel hyperspectral unmixing over endmember bundles"};
  app.require_subcommand(1);
  int rc = 0;

  unmix_sim_config gen_cfg;
  unmix_sim_config_init(&gen_cfg);
  std::string gen_out = ".";
  CLI::App* gen = app.add_subcommand(
      "gen", "synthesize a scene: bundles.csv, pixels.csv, truth.csv");
  add_sim_flags(gen, &gen_cfg);
  gen->add_option("--out", gen_out, "output directory")
      ->capture_default_str();
  gen->callback([&] { rc = run_gen(gen_cfg, gen_out); });

  std::string um_method, um_in = ".", um_out = ".";
  unmix_solve_options um_opt;
  unmix_solve_options_init(&um_opt, UNMIX_METHOD_FCLS);
  CLI::App* um = app.add_subcommand(
      "unmix", "solve one batch; writes abundances.csv and "
               "multiple_abundances.csv (+ bundling.csv, "
               "objective_trace.csv for memm variants)");
  um->add_option("--method", um_method, "fcls, sunsal, group, elitist, memm, "
                                        "memm_s, or mesma")
      ->required()
      ->check(CLI::IsMember(kMethodNames));
  um->add_option("--in", um_in, "directory with bundles.csv and pixels.csv")
      ->capture_default_str();
  um->add_option("--out", um_out, "output directory")->capture_default_str();
  add_solver_flags(um, &um_opt);
  um->callback([&] { rc = run_unmix(um_method, um_opt, um_in, um_out); });

  std::string ev_in = ".", ev_result = ".", ev_out, ev_per_pixel;
  CLI::App* ev = app.add_subcommand(
      "eval", "score solutions against recorded truth; writes report.csv");
  ev->add_option("--in", ev_in, "directory with pixels.csv (+ truth.csv)")
      ->capture_default_str();
  ev->add_option("--result", ev_result,
                 "directory with abundances.csv and multiple_abundances.csv")
      ->capture_default_str();
  ev->add_option("--out", ev_out, "report path (default RESULT/report.csv)");
  ev->add_option("--per-pixel", ev_per_pixel,
                 "also write a per-pixel breakdown CSV here");
  ev->callback([&] { rc = run_eval(ev_in, ev_result, ev_out, ev_per_pixel); });

  BenchSpec spec;
  unmix_sim_config bench_cfg;
  unmix_sim_config_init(&bench_cfg);
  bench_cfg.pixels = 50;  // desk scale
  bench_cfg.classes = 6;
  bench_cfg.atoms_per_class = 10;
  unmix_solve_options bench_opt;
  unmix_solve_options_init(&bench_opt, UNMIX_METHOD_FCLS);
  CLI::App* bench = app.add_subcommand(
      "bench", "grid-search sweep over methods x lambdas x seeds x SNRs; "
               "writes tables.csv (deterministic) and times.csv (wall "
               "clock)");
  bench->add_option("--out", spec.out_dir, "output directory")
      ->capture_default_str();
  bench->add_option("--sims", spec.sims, "scenario list")
      ->delimiter(',')
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  bench->add_option("--snrs", spec.snrs, "SNR list, dB")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--seeds", spec.seeds, "seed list")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--methods", spec.methods, "method list")
      ->delimiter(',')
      ->check(CLI::IsMember(kMethodNames))
      ->capture_default_str();
  bench->add_option("--grid", spec.grid, "lambda grid")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--pixels", bench_cfg.pixels, "pixels per batch")
      ->capture_default_str();
  bench->add_option("--classes", bench_cfg.classes, "endmember classes")
      ->capture_default_str();
  bench->add_option("--atoms", bench_cfg.atoms_per_class, "atoms per class")
      ->capture_default_str();
  bench->add_option("--bands", bench_cfg.bands, "spectral bands")
      ->capture_default_str();
  bench->add_option("--max-iters", bench_opt.max_iters,
                    "outer iteration limit")
      ->capture_default_str();
  bench->add_option("--rel-tol", bench_opt.rel_tol,
                    "relative objective-change stop")
      ->capture_default_str();
  bench->add_option("--mesma-classes", bench_opt.mesma_max_classes,
                    "mesma: active classes per pixel at most")
      ->capture_default_str();
  bench->add_option("--mesma-budget", bench_opt.mesma_budget,
                    "mesma: candidate combinations per pixel at most")
      ->capture_default_str();
  bench->add_option("--threads", bench_opt.threads,
                    "worker threads, 0 = UNMIX_THREADS env, then hardware")
      ->capture_default_str();
  bench->callback([&] { rc = run_bench(spec, bench_cfg, bench_opt); });

  std::string maps_in = ".", maps_out;
  int maps_w = 0, maps_h = 0;
  CLI::App* maps = app.add_subcommand(
      "maps", "one 8-bit PGM abundance map per class");
  maps->add_option("--in", maps_in, "directory with abundances.csv")
      ->capture_default_str();
  maps->add_option("--width", maps_w, "map width in pixels")
      ->required()
      ->check(CLI::PositiveNumber);
  maps->add_option("--height", maps_h, "map height in pixels")
      ->required()
      ->check(CLI::PositiveNumber);
  maps->add_option("--out", maps_out, "output directory (default --in)");
  maps->callback([&] { rc = run_maps(maps_in, maps_w, maps_h, maps_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  return rc;
}
