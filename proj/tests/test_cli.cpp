#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "experiments.hpp"
#include "vortexlab/fields.hpp"
#include "vortexlab/vortex.hpp"

using namespace vortexlab;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("defaults") {
  for (const auto& name : lab::experiment_names()) {
    CAPTURE(name);
    const lab::ExperimentConfig c = lab::default_config(name);
    CHECK(c.experiment == name);
    CHECK(c.grid.n == 256);
    CHECK_NOTHROW(c.validate());
  }
  CHECK(lab::default_config("spectrum-sweep").alpha_list == std::vector<double>{0, 1, 5, 10, 50, 100});
  const auto conv = lab::default_config("convergence");
  CHECK(conv.initial.family == Family::shifted_oseen);
  CHECK(conv.initial.shift == std::array<double, 2>{0.5, 0.0});
  CHECK(conv.fit_lo == 2.0);
  CHECK(conv.fit_hi == 5.0);
  CHECK_THROWS_AS(lab::default_config("nope"), Error);
}

TEST_CASE("config parsing") {
  const json base = {{"schema_version", 1}, {"grid", {{"n", 64}}}, {"solver", {{"dt", 0.02}}}};
  const auto c = lab::config_from_json(base, "convergence");
  CHECK(c.grid.n == 64);
  CHECK(c.grid.half_width == 12.0);
  CHECK(c.solver.dt == 0.02);
  CHECK(c.solver.end_tau == 5.0);

  json unknown = base;
  unknown["grid"]["m"] = 3;
  CHECK_THROWS_AS(lab::config_from_json(unknown, "convergence"), Error);
  unknown = base;
  unknown["colour"] = "blue";
  CHECK_THROWS_AS(lab::config_from_json(unknown, "convergence"), Error);

  json no_version = base;
  no_version.erase("schema_version");
  CHECK_THROWS_AS(lab::config_from_json(no_version, "convergence"), Error);
  json future = base;
  future["schema_version"] = 2;
  CHECK_THROWS_AS(lab::config_from_json(future, "convergence"), Error);

  json named = base;
  named["experiment"] = "entropy";
  CHECK_THROWS_AS(lab::config_from_json(named, "convergence"), Error);
  CHECK(lab::config_from_json(named, "").experiment == "entropy");

  json bad_window = base;
  bad_window["fit_window"] = {1.0};
  CHECK_THROWS_AS(lab::config_from_json(bad_window, "convergence"), Error);

  lab::ExperimentConfig invalid = c;
  invalid.grid.n = 63;
  CHECK_THROWS_AS(invalid.validate(), Error);
  invalid = c;
  invalid.spectrum.check_resolution = invalid.spectrum.resolution;
  CHECK_THROWS_AS(invalid.validate(), Error);
  invalid = c;
  invalid.kernels = "sse9";
  CHECK_THROWS_AS(invalid.validate(), Error);
}

TEST_CASE("config survives a manifest round trip") {
  lab::ExperimentConfig c = lab::default_config("entropy");
  c.grid.n = 96;
  c.initial.seed = 77;
  c.solver.norm_weights = {0.0, 1.5, 3.0};
  const json manifest = {{"tool", "vortexlab"}, {"config", lab::to_json(c)}};
  const auto back = lab::config_from_json(manifest, "entropy");
  CHECK(lab::to_json(back) == lab::to_json(c));
  CHECK(back.initial.seed == 77);
}

TEST_CASE("second-order asymptotics") {
  const Grid2D grid(128, 12.0);
  SolverConfig s;
  s.end_tau = 5.0;
  s.keep_snapshots = true;
  s.entropy = false;

  SUBCASE("w0 = G is degenerate") {
    const auto rec = simulate(gaussian_G(grid), s);
    const auto so = lab::second_order_asymptotics(rec, 2.0, 2.0, 5.0);
    CHECK(so.degenerate);
    CHECK(so.residuals.back() <= 1e-10);
  }
  SUBCASE("beta = 0 datum decays at rate one") {
    InitialCondition ic;
    ic.family = Family::random_smooth;
    ic.amplitude = 0.3;
    ic.correlation_length = 1.0;
    ic.seed = 5;
    ic.even = true;
    const ScalarField w0 = make_initial(grid, ic);
    const auto rec = simulate(w0, s);
    CHECK(std::abs(rec.initial.beta1) <= 1e-12);
    const auto so = lab::second_order_asymptotics(rec, 2.0, 2.0, 5.0);
    CHECK_FALSE(so.degenerate);
    CHECK(so.fit.mu >= 0.9);
    CHECK(so.fit.mu <= 1.1);
  }
  SUBCASE("rejects records without snapshots") {
    s.keep_snapshots = false;
    s.end_tau = 0.2;
    const auto rec = simulate(gaussian_G(grid), s);
    CHECK_THROWS_AS(lab::second_order_asymptotics(rec, 2.0, 0.0, 0.2), Error);
  }
}

TEST_CASE("identities run writes artifacts and is reproducible") {
  const auto dir = std::filesystem::temp_directory_path() / "vortexlab_test_cli";
  std::filesystem::remove_all(dir);
  lab::ExperimentConfig c = lab::default_config("vortex-identities");
  c.grid.n = 128;
  c.out = dir / "a";
  const auto r1 = lab::run(c);
  CHECK(r1.all_pass());
  c.out = dir / "b";
  const auto r2 = lab::run(c);
  for (const char* f : {"identities.csv", "summary.json"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest.at("config").at("grid").at("n") == 128);
  CHECK(manifest.contains("version"));
  const json summary = json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary.at("all_pass") == true);
  for (const auto& a : summary.at("assertions")) {
    CHECK(a.contains("relation"));
    CHECK(a.contains("pass"));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("assertion helpers") {
  CHECK(lab::check_le("x", 1.0, 1.0).pass);
  CHECK_FALSE(lab::check_lt("x", 1.0, 1.0).pass);
  CHECK(lab::check_ge("x", 0.5, 0.5).pass);
  CHECK(lab::check_in("x", 0.5, 0.45, 0.55).pass);
  CHECK_FALSE(lab::check_in("x", 0.56, 0.45, 0.55).pass);
  CHECK_FALSE(lab::check_le("x", std::nan(""), 1.0).pass);
}
