#include "runner.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "simgen.hpp"

using namespace unmix;
namespace rn = unmix::runner;
namespace fs = std::filesystem;

namespace {

simgen::SimData tiny_sim(int scenario) {
  simgen::SimConfig cfg;
  cfg.classes = 4;
  cfg.atoms_per_class = 4;
  cfg.pixels = 8;
  cfg.bands = 40;
  cfg.max_active_classes = 2;
  cfg.max_active_atoms = 2;
  cfg.snr_db = 50.0;
  return simgen::simulate(cfg, scenario);
}

}  // namespace

TEST_CASE("method names parse and print consistently") {
  for (rn::Method m :
       {rn::Method::Fcls, rn::Method::Sunsal, rn::Method::Group,
        rn::Method::Elitist, rn::Method::Memm, rn::Method::MemmS,
        rn::Method::Mesma}) {
    rn::Method back;
    REQUIRE(rn::parse_method(rn::method_name(m), &back));
    CHECK(back == m);
  }
  rn::Method out;
  CHECK_FALSE(rn::parse_method("nonsense", &out));
}

TEST_CASE("every method produces full-shape estimates on simulated pixels") {
  simgen::SimData sim = tiny_sim(2);
  for (rn::Method m :
       {rn::Method::Fcls, rn::Method::Sunsal, rn::Method::Group,
        rn::Method::Elitist, rn::Method::Memm, rn::Method::MemmS,
        rn::Method::Mesma}) {
    rn::Options opt;
    opt.method = m;
    opt.lambda_r = 1e-4;
    opt.lambda_g = 1e-4;
    opt.threads = 1;
    rn::Output out = rn::run(sim.bundles, sim.batch, opt);
    CHECK(out.failed == 0);
    CHECK(out.method == rn::method_name(m));
    CHECK(out.abundance.rows() == 4);
    CHECK(out.abundance.cols() == 8);
    CHECK(out.multiple.rows() == 16);
    CHECK(out.multiple.cols() == 8);
    CHECK(out.wall_time_s >= 0.0);
    bool is_memm = m == rn::Method::Memm || m == rn::Method::MemmS;
    CHECK(out.has_bundling() == is_memm);
    if (is_memm) {
      CHECK(out.traces.size() == 8);
      for (const auto& t : out.traces) CHECK(!t.empty());
    }
  }
}

TEST_CASE("thread count does not change the estimates") {
  simgen::SimData sim = tiny_sim(1);
  rn::Options opt;
  opt.method = rn::Method::Memm;
  opt.threads = 1;
  rn::Output a = rn::run(sim.bundles, sim.batch, opt);
  opt.threads = 3;
  rn::Output b = rn::run(sim.bundles, sim.batch, opt);
  CHECK(a.abundance == b.abundance);
  CHECK(a.multiple == b.multiple);
  CHECK(a.bundling == b.bundling);
}

TEST_CASE("the exact one-per-class variant caps every bundling block") {
  simgen::SimData sim = tiny_sim(2);
  rn::Options opt;
  opt.method = rn::Method::MemmS;
  opt.threads = 1;
  rn::Output out = rn::run(sim.bundles, sim.batch, opt);
  const GroupingMap& g = sim.bundles.grouping();
  for (int p = 0; p < out.pixels(); ++p)
    for (int k = 0; k < g.classes(); ++k) {
      int cnt = 0;
      for (int j = g.offset(k); j < g.offset(k) + g.size(k); ++j)
        if (out.bundling(j, p) != 0.0) ++cnt;
      CHECK(cnt <= 1);
    }
}

TEST_CASE("per-pixel failures are recorded without aborting the batch") {
  simgen::SimData sim = tiny_sim(1);
  rn::Options opt;
  opt.method = rn::Method::Mesma;
  opt.mesma_budget = 1;
  opt.threads = 1;
  rn::Output out = rn::run(sim.bundles, sim.batch, opt);
  CHECK(out.failed == 8);
  for (const std::string& e : out.errors) CHECK(!e.empty());
}

TEST_CASE("solver outputs round trip through their csv files") {
  simgen::SimData sim = tiny_sim(2);
  rn::Options opt;
  opt.method = rn::Method::Memm;
  opt.threads = 1;
  rn::Output out = rn::run(sim.bundles, sim.batch, opt);
  fs::path dir = fs::temp_directory_path() /
                 ("unmix_runner_test_" + std::to_string(std::random_device{}()));
  rn::save_output(out, dir.string());
  CHECK(fs::exists(dir / "abundances.csv"));
  CHECK(fs::exists(dir / "multiple_abundances.csv"));
  CHECK(fs::exists(dir / "bundling.csv"));
  CHECK(fs::exists(dir / "objective_trace.csv"));
  rn::Output back = rn::load_output((dir / "abundances.csv").string(),
                                    (dir / "multiple_abundances.csv").string());
  CHECK(back.abundance == out.abundance);
  CHECK(back.multiple == out.multiple);
  CHECK(back.method == out.method);
  fs::remove_all(dir);
}
