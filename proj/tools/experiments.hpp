#pragma once

// Named studies shared by the command-line tool and the acceptance suite.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vortexlab/evolution.hpp"
#include "vortexlab/initial.hpp"

namespace vortexlab::lab {

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& experiment_names();

struct GridSpec {
  int n = 256;
  double half_width = 12.0;
  Grid2D grid() const { return Grid2D(n, half_width); }
};

struct SpectrumSpec {
  int resolution = 120;
  int check_resolution = 80;
  int max_mode = 4;
  double m = 4.0;            // weight of L^2(m) in the essential-spectrum bound
  double tau_end = 12.0;     // linear-decay horizon
};

struct ExperimentConfig {
  std::string experiment;
  GridSpec grid;
  SolverConfig solver;
  InitialCondition initial;
  std::vector<double> alpha_list;
  SpectrumSpec spectrum;
  double fit_lo = 2.0, fit_hi = 5.0;  // decay-fit window in tau
  std::string kernels = "auto";
  std::filesystem::path out = "out";
  int workers = 1;

  void validate() const;
};

/// Defaults for one experiment (what the acceptance criteria run).
ExperimentConfig default_config(const std::string& experiment);

/// Overlays a JSON document on the experiment defaults. Accepts either a
/// bare config or a manifest written by an earlier run (key "config").
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::string& experiment);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// One checked claim: value compared against a pinned tolerance.
struct Assertion {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", "<", ">=", "in", "==" (counts)
  double lo = 0.0, hi = 0.0;  // bound(s); for "<=" and "<" only hi is used
  bool pass = false;
};

Assertion check_le(std::string name, double value, double tol);
Assertion check_lt(std::string name, double value, double bound);
Assertion check_ge(std::string name, double value, double bound);
Assertion check_in(std::string name, double value, double lo, double hi);

struct ExperimentResult {
  std::string experiment;
  std::vector<Assertion> assertions;
  std::vector<std::string> warnings;
  bool all_pass() const;
};

/// Runs one experiment, writing manifest.json, CSVs and summary.json under
/// cfg.out. Runtime errors propagate after whatever was written so far.
ExperimentResult run(const ExperimentConfig& cfg);

struct SecondOrder {
  std::vector<double> taus;
  std::vector<double> residuals;
  DecayFit fit;
  bool degenerate = false;  // residual at round-off, rate meaningless
};

/// |w(tau) - alpha G - (beta_1 F_1 + beta_2 F_2) e^{-(tau - tau0)/2}|_m
/// along a record with snapshots, beta from the initial datum, and its
/// fitted decay rate on [tau_lo, tau_hi].
SecondOrder second_order_asymptotics(const TrajectoryRecord& record, double m, double tau_lo,
                                     double tau_hi);

}  // namespace vortexlab::lab
