// Runs the default studies and reports the ten acceptance criteria, one
// line each. Artifacts go under the directory given as the first argument.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "experiments.hpp"

using namespace vortexlab;

namespace {

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

// Which criterion an assertion of a given experiment belongs to.
int criterion_of(const std::string& experiment, const std::string& name) {
  if (experiment == "vortex-identities")
    return starts_with(name, "L_") || starts_with(name, "Lambda_") ? 2 : 1;
  if (experiment == "spectrum-sweep") {
    if (starts_with(name, "symmetry_") || starts_with(name, "skew_")) return 3;
    if (starts_with(name, "alpha0_ladder")) return 4;
    return 5;
  }
  const bool conservation = starts_with(name, "mass_drift") || starts_with(name, "first_moment") ||
                            starts_with(name, "positivity");
  if (experiment == "convergence") return conservation ? 8 : 6;
  if (experiment == "entropy") return conservation ? 8 : 7;
  if (experiment == "linear-decay") return 9;
  return 10;
}

const char* kTitles[] = {"",
                         "vortex identities",
                         "frozen eigenstructure of the discrete operators",
                         "operator structure in X",
                         "alpha = 0 spectrum",
                         "eigenvalue bounds",
                         "nonlinear convergence rate",
                         "entropy suite",
                         "conservation and symmetry-driven decay",
                         "linear semigroup decay",
                         "scaled vs unscaled cross-check"};

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path root = argc > 1 ? argv[1] : "acceptance_runs";
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  struct Entry {
    std::string experiment;
    lab::Assertion a;
  };
  std::map<int, std::vector<Entry>> by_criterion;
  std::map<int, std::vector<std::string>> errors;

  const std::vector<std::pair<std::string, std::vector<int>>> plan{
      {"vortex-identities", {1, 2}}, {"spectrum-sweep", {3, 4, 5}}, {"convergence", {6, 8}},
      {"entropy", {7, 8}},           {"linear-decay", {9}},         {"cross-check", {10}}};

  for (const auto& [experiment, criteria] : plan) {
    lab::ExperimentConfig cfg = lab::default_config(experiment);
    cfg.out = root / experiment;
    cfg.workers = workers;
    try {
      const lab::ExperimentResult res = lab::run(cfg);
      for (const auto& a : res.assertions) by_criterion[criterion_of(experiment, a.name)].push_back({experiment, a});
      for (const auto& w : res.warnings) std::printf("  [%s] warning: %s\n", experiment.c_str(), w.c_str());
    } catch (const std::exception& e) {
      for (int c : criteria) errors[c].push_back(experiment + ": " + e.what());
    }
  }

  int failed = 0;
  for (int c = 1; c <= 10; ++c) {
    const auto& entries = by_criterion[c];
    bool pass = !entries.empty() && errors[c].empty();
    for (const auto& e : entries) pass = pass && e.a.pass;
    if (!pass) ++failed;
    std::printf("criterion %d: %s  %s\n", c, pass ? "PASS" : "FAIL", kTitles[c]);
    for (const auto& e : entries) {
      const auto& a = e.a;
      if (a.relation == "in")
        std::printf("    %-4s %-14s %-40s %.6g in [%g, %g]\n", a.pass ? "ok" : "FAIL", e.experiment.c_str(),
                    a.name.c_str(), a.value, a.lo, a.hi);
      else
        std::printf("    %-4s %-14s %-40s %.6g %s %g\n", a.pass ? "ok" : "FAIL", e.experiment.c_str(),
                    a.name.c_str(), a.value, a.relation.c_str(), a.relation == ">=" ? a.lo : a.hi);
    }
    for (const auto& msg : errors[c]) std::printf("    error: %s\n", msg.c_str());
  }
  std::printf("%d of 10 criteria pass\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
