// Exercises the shared-library surface exactly as an external consumer
// would: only the public header, opaque handles, and status codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unmix/unmix.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("unmix_capi_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

struct Sim {
  unmix_bundles* bundles = nullptr;
  unmix_batch* batch = nullptr;
  Sim(int scenario = 2, double snr = 50.0, int pixels = 6) {
    unmix_sim_config cfg;
    unmix_sim_config_init(&cfg);
    cfg.scenario = scenario;
    cfg.classes = 4;
    cfg.atoms_per_class = 4;
    cfg.pixels = pixels;
    cfg.bands = 40;
    cfg.snr_db = snr;
    cfg.max_active_classes = 2;
    cfg.max_active_atoms = 2;
    REQUIRE(unmix_simulate(&cfg, &bundles, &batch) == UNMIX_OK);
  }
  ~Sim() {
    unmix_batch_free(batch);
    unmix_bundles_free(bundles);
  }
};

}  // namespace

TEST_CASE("version and status names are stable strings") {
  REQUIRE(unmix_version() != nullptr);
  CHECK(std::strlen(unmix_version()) > 0);
  CHECK(std::string(unmix_status_name(UNMIX_OK)) == "ok");
  for (int s = 0; s <= 7; ++s)
    CHECK(std::strlen(unmix_status_name(static_cast<unmix_status>(s))) > 0);
}

TEST_CASE("null arguments fail with a readable message") {
  CHECK(unmix_simulate(nullptr, nullptr, nullptr) ==
        UNMIX_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(unmix_last_error()) > 0);
  unmix_bundles* b = nullptr;
  CHECK(unmix_bundles_load_csv(nullptr, &b) == UNMIX_ERR_INVALID_ARGUMENT);
  CHECK(unmix_bundles_load_csv("/nonexistent/path.csv", &b) ==
        UNMIX_ERR_DATA);
}

TEST_CASE("simulation handles expose dimensions and provenance") {
  Sim sim;
  CHECK(unmix_bundles_bands(sim.bundles) == 40);
  CHECK(unmix_bundles_classes(sim.bundles) == 4);
  CHECK(unmix_bundles_atoms(sim.bundles) == 16);
  CHECK(unmix_bundles_class_size(sim.bundles, 2) == 4);
  CHECK(unmix_bundles_class_size(sim.bundles, 9) == -1);
  CHECK(unmix_bundles_class_name(sim.bundles, 0) != nullptr);
  CHECK(unmix_batch_pixels(sim.batch) == 6);
  CHECK(unmix_batch_bands(sim.batch) == 40);
  CHECK(unmix_batch_has_truth(sim.batch) == 1);
  CHECK(unmix_batch_snr_db(sim.batch) == 50.0);
  CHECK(std::string(unmix_batch_dataset(sim.batch)) == "sim2");
  CHECK(unmix_batch_seed(sim.batch) == 1);
}

TEST_CASE("bad simulation scenarios are rejected") {
  unmix_sim_config cfg;
  unmix_sim_config_init(&cfg);
  cfg.scenario = 3;
  unmix_bundles* b = nullptr;
  unmix_batch* p = nullptr;
  CHECK(unmix_simulate(&cfg, &b, &p) == UNMIX_ERR_INVALID_ARGUMENT);
  unmix_sim_config_init(&cfg);
  cfg.max_active_classes = cfg.classes + 1;
  CHECK(unmix_simulate(&cfg, &b, &p) == UNMIX_ERR_INVALID_ARGUMENT);
}

TEST_CASE("solving returns estimates with the advertised shapes") {
  Sim sim;
  unmix_solve_options opt;
  unmix_solve_options_init(&opt, UNMIX_METHOD_MEMM);
  CHECK(opt.method == UNMIX_METHOD_MEMM);
  CHECK(opt.gamma_m > 1.0);
  opt.threads = 1;
  unmix_result* res = nullptr;
  REQUIRE(unmix_solve(sim.bundles, sim.batch, &opt, &res) == UNMIX_OK);
  CHECK(unmix_result_pixels(res) == 6);
  CHECK(unmix_result_classes(res) == 4);
  CHECK(unmix_result_atoms(res) == 16);
  CHECK(unmix_result_failed(res) == 0);
  CHECK(unmix_result_pixel_ok(res, 0) == 1);
  CHECK(unmix_result_wall_time_s(res) >= 0.0);
  CHECK(unmix_result_has_bundling(res) == 1);
  CHECK(std::string(unmix_result_method(res)) == "memm");

  std::vector<double> a(4 * 6), r(16 * 6), bw(16 * 6);
  REQUIRE(unmix_result_abundances(res, a.data(), a.size()) == UNMIX_OK);
  REQUIRE(unmix_result_multiple(res, r.data(), r.size()) == UNMIX_OK);
  REQUIRE(unmix_result_bundling(res, bw.data(), bw.size()) == UNMIX_OK);
  for (int p = 0; p < 6; ++p) {
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += a[p * 4 + k];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  // an undersized buffer is refused without writing
  CHECK(unmix_result_abundances(res, a.data(), 4 * 6 - 1) ==
        UNMIX_ERR_BUFFER);
  unmix_result_free(res);
}

TEST_CASE("a batch where every pixel fails reports a solver error") {
  Sim sim(1);
  unmix_solve_options opt;
  unmix_solve_options_init(&opt, UNMIX_METHOD_MESMA);
  opt.mesma_budget = 1;
  opt.threads = 1;
  unmix_result* res = nullptr;
  CHECK(unmix_solve(sim.bundles, sim.batch, &opt, &res) == UNMIX_ERR_SOLVER);
  CHECK(std::strlen(unmix_last_error()) > 0);
}

TEST_CASE("evaluation fills the report and flags truth availability") {
  Sim sim;
  unmix_solve_options opt;
  unmix_solve_options_init(&opt, UNMIX_METHOD_FCLS);
  opt.threads = 1;
  unmix_result* res = nullptr;
  REQUIRE(unmix_solve(sim.bundles, sim.batch, &opt, &res) == UNMIX_OK);
  unmix_eval_report rep;
  REQUIRE(unmix_evaluate(sim.batch, res, &rep) == UNMIX_OK);
  CHECK(rep.has_truth == 1);
  CHECK(rep.sl_a >= 1.0);
  CHECK(rep.sre_a_db > 0.0);
  CHECK(rep.dist_a >= 0.0);
  CHECK(rep.dist_a <= 1.0);
  CHECK(rep.sl_a_ref > 0.0);

  TempDir tmp;
  REQUIRE(unmix_evaluate_per_pixel_csv(sim.batch, res,
                                       tmp.file("pp.csv").c_str()) ==
          UNMIX_OK);
  std::ifstream in(tmp.file("pp.csv"));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("# unmix-csv v1 per_pixel", 0) == 0);
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "pixel,err_a_sq,sig_a_sq,err_r_sq,sig_r_sq,dist_a,dist_r,sl_a,sl_r");
  unmix_result_free(res);
}

TEST_CASE("report rows format into caller buffers with truncation checks") {
  unmix_eval_report rep{};
  rep.sre_a_db = 12.5;
  rep.sl_a = 2.0;
  rep.has_truth = 1;
  unmix_report_labels labels{};
  labels.method = "fcls";
  labels.dataset = "sim1";
  labels.snr_db = 30.0;
  labels.lambda_a = NAN;
  labels.lambda_b = NAN;
  labels.lambda_r = NAN;
  labels.lambda_g = NAN;
  char buf[512];
  REQUIRE(unmix_report_csv_header(buf, sizeof buf) == UNMIX_OK);
  CHECK(std::string(buf).rfind("method,dataset,snr_db", 0) == 0);
  REQUIRE(unmix_report_csv_row(&labels, &rep, buf, sizeof buf) == UNMIX_OK);
  CHECK(std::string(buf).rfind("fcls,sim1,30,", 0) == 0);
  REQUIRE(unmix_report_text_header(buf, sizeof buf) == UNMIX_OK);
  REQUIRE(unmix_report_text_row(&labels, &rep, buf, sizeof buf) == UNMIX_OK);
  CHECK(unmix_report_csv_header(buf, 4) == UNMIX_ERR_BUFFER);
  // NULL labels render as blank fields
  labels.method = nullptr;
  REQUIRE(unmix_report_csv_row(&labels, &rep, buf, sizeof buf) == UNMIX_OK);
  CHECK(buf[0] == ',');
}

TEST_CASE("bundles, batches, and results survive csv round trips") {
  Sim sim;
  TempDir tmp;
  REQUIRE(unmix_bundles_save_csv(sim.bundles, tmp.file("b.csv").c_str()) ==
          UNMIX_OK);
  unmix_bundles* b2 = nullptr;
  REQUIRE(unmix_bundles_load_csv(tmp.file("b.csv").c_str(), &b2) == UNMIX_OK);
  CHECK(unmix_bundles_atoms(b2) == unmix_bundles_atoms(sim.bundles));
  CHECK(unmix_bundles_bands(b2) == unmix_bundles_bands(sim.bundles));

  REQUIRE(unmix_batch_save_csv(sim.batch, tmp.file("p.csv").c_str(),
                               tmp.file("t.csv").c_str()) == UNMIX_OK);
  unmix_batch* batch2 = nullptr;
  REQUIRE(unmix_batch_load_csv(tmp.file("p.csv").c_str(),
                               tmp.file("t.csv").c_str(),
                               &batch2) == UNMIX_OK);
  CHECK(unmix_batch_has_truth(batch2) == 1);
  CHECK(unmix_batch_pixels(batch2) == 6);
  unmix_batch* batch3 = nullptr;
  REQUIRE(unmix_batch_load_csv(tmp.file("p.csv").c_str(), nullptr, &batch3) ==
          UNMIX_OK);
  CHECK(unmix_batch_has_truth(batch3) == 0);

  unmix_solve_options opt;
  unmix_solve_options_init(&opt, UNMIX_METHOD_MEMM_S);
  opt.threads = 1;
  unmix_result* res = nullptr;
  REQUIRE(unmix_solve(b2, batch2, &opt, &res) == UNMIX_OK);
  REQUIRE(unmix_result_save_csv(res, tmp.path.string().c_str()) == UNMIX_OK);
  unmix_result* res2 = nullptr;
  REQUIRE(unmix_result_load_csv(
              tmp.file("abundances.csv").c_str(),
              tmp.file("multiple_abundances.csv").c_str(), &res2) == UNMIX_OK);
  CHECK(unmix_result_pixels(res2) == unmix_result_pixels(res));
  std::vector<double> a1(4 * 6), a2(4 * 6);
  REQUIRE(unmix_result_abundances(res, a1.data(), a1.size()) == UNMIX_OK);
  REQUIRE(unmix_result_abundances(res2, a2.data(), a2.size()) == UNMIX_OK);
  CHECK(a1 == a2);
  CHECK(std::string(unmix_result_method(res2)) == "memm_s");

  unmix_result_free(res2);
  unmix_result_free(res);
  unmix_batch_free(batch3);
  unmix_batch_free(batch2);
  unmix_bundles_free(b2);
}

TEST_CASE("abundance maps render one gray image per class") {
  Sim sim(1, INFINITY, 6);
  unmix_solve_options opt;
  unmix_solve_options_init(&opt, UNMIX_METHOD_FCLS);
  opt.threads = 1;
  unmix_result* res = nullptr;
  REQUIRE(unmix_solve(sim.bundles, sim.batch, &opt, &res) == UNMIX_OK);
  TempDir tmp;
  CHECK(unmix_result_write_maps(res, 4, 2, tmp.path.string().c_str()) ==
        UNMIX_ERR_DIMENSION);  // 4*2 != 6 pixels
  REQUIRE(unmix_result_write_maps(res, 3, 2, tmp.path.string().c_str()) ==
          UNMIX_OK);
  for (int k = 0; k < 4; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "map_c%02d.pgm", k);
    CHECK(fs::exists(tmp.path / name));
  }
  std::ifstream in(tmp.file("map_c00.pgm"), std::ios::binary);
  std::string magic;
  in >> magic;
  CHECK(magic == "P5");
  unmix_result_free(res);
}
