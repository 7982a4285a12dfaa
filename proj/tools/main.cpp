#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "experiments.hpp"

using namespace vortexlab;

int main(int argc, char** argv) {
  CLI::App app{"vortexlab: numerical studies of the rescaled 2D vorticity equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  for (const auto& name : lab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " study");
    sub->add_option("--config", config_path, "JSON config (schema_version 1) or an earlier manifest.json");
    sub->add_option("--out", out_dir, "output directory (default out/<experiment>)");
    sub->add_option("--workers", workers, "concurrent eigenproblems")->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; },
        "seed for random initial data");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  lab::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error("cannot read " + config_path);
      cfg = lab::config_from_json(nlohmann::json::parse(in), experiment);
    } else {
      cfg = lab::default_config(experiment);
    }
    if (workers > 0) cfg.workers = workers;
    if (seed_given) cfg.initial.seed = seed;
    cfg.out = out_dir.empty() ? std::filesystem::path("out") / experiment : std::filesystem::path(out_dir);
    cfg.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }

  try {
    const lab::ExperimentResult res = lab::run(cfg);
    for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& a : res.assertions) {
      if (a.relation == "in")
        std::printf("%s %-40s %.6g in [%g, %g]\n", a.pass ? "PASS" : "FAIL", a.name.c_str(), a.value, a.lo, a.hi);
      else
        std::printf("%s %-40s %.6g %s %g\n", a.pass ? "PASS" : "FAIL", a.name.c_str(), a.value,
                    a.relation.c_str(), a.relation == ">=" ? a.lo : a.hi);
    }
    std::printf("%s: %s (artifacts in %s)\n", experiment.c_str(), res.all_pass() ? "all assertions pass" : "FAILED",
                cfg.out.string().c_str());
    return res.all_pass() ? 0 : 1;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
