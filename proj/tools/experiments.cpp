#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

#include "vortexlab/biot_savart.hpp"
#include "vortexlab/fields.hpp"
#include "vortexlab/kernels.hpp"
#include "vortexlab/lyapunov.hpp"
#include "vortexlab/spectral.hpp"
#include "vortexlab/spectrum.hpp"
#include "vortexlab/vortex.hpp"

#ifndef VORTEXLAB_VERSION
#define VORTEXLAB_VERSION "unknown"
#endif

namespace vortexlab::lab {

using nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"vortex-identities", "convergence", "entropy",
                                              "spectrum-sweep",    "linear-decay", "cross-check"};
  return names;
}

// ---------------------------------------------------------------- config

ExperimentConfig default_config(const std::string& experiment) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    throw Error("unknown experiment '" + experiment + "'");
  ExperimentConfig c;
  c.experiment = experiment;
  c.solver.norm_weights = {0.0, 2.0};
  c.solver.entropy = false;
  c.initial.family = Family::shifted_oseen;
  c.initial.alpha = 1.0;
  c.initial.shift = {0.5, 0.0};
  if (experiment == "convergence") {
    c.solver.end_tau = 5.0;
    c.solver.keep_snapshots = true;
  } else if (experiment == "entropy") {
    c.initial.family = Family::random_smooth;
    c.initial.shift = {0.0, 0.0};
    c.initial.amplitude = 0.3;
    c.initial.correlation_length = 1.0;
    c.initial.seed = 1;
    c.initial.even = true;
    c.solver.end_tau = 3.0;
    c.solver.record_every = 2;
    c.solver.entropy = true;
    c.solver.keep_snapshots = true;
  } else if (experiment == "spectrum-sweep") {
    c.alpha_list = {0.0, 1.0, 5.0, 10.0, 50.0, 100.0};
  } else if (experiment == "linear-decay") {
    c.alpha_list = {0.0, 1.0, 10.0};
    c.initial.seed = 1;
  } else if (experiment == "cross-check") {
    c.solver.end_tau = 2.0;
    c.fit_lo = 0.0;
    c.fit_hi = 2.0;
  }
  return c;
}

void ExperimentConfig::validate() const {
  default_config(experiment);  // name check
  if (grid.n < 8 || grid.n % 2 != 0) throw Error("grid.n must be even and >= 8");
  if (!(grid.half_width > 0.0)) throw Error("grid.half_width must be positive");
  solver.validate();
  initial.validate();
  if (spectrum.resolution < 8 || spectrum.check_resolution < 8 ||
      spectrum.resolution == spectrum.check_resolution)
    throw Error("spectrum: need two distinct resolutions >= 8");
  if (spectrum.max_mode < 0) throw Error("spectrum.max_mode must be >= 0");
  if (!(spectrum.tau_end > 0.0)) throw Error("spectrum.tau_end must be positive");
  if (!(fit_hi > fit_lo)) throw Error("fit_window must be increasing");
  if (workers < 1) throw Error("workers must be >= 1");
  if (kernels != "auto" && kernels != "scalar" && kernels != "avx2" && kernels != "neon")
    throw Error("kernels must be auto, scalar, avx2 or neon");
  for (double a : alpha_list)
    if (!std::isfinite(a)) throw Error("alpha_list entries must be finite");
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw Error("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void take(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& input, const std::string& experiment) {
  const json& doc = input.contains("config") ? input.at("config") : input;
  reject_unknown(doc,
                 {"schema_version", "experiment", "grid", "solver", "initial", "alpha_list",
                  "spectrum", "fit_window", "kernels", "workers"},
                 "config");
  if (!doc.contains("schema_version")) throw Error("config: schema_version missing");
  if (doc.at("schema_version").get<int>() != kSchemaVersion)
    throw Error("config: unsupported schema_version " + doc.at("schema_version").dump());
  std::string name = experiment;
  if (doc.contains("experiment")) {
    const auto in_file = doc.at("experiment").get<std::string>();
    if (!name.empty() && in_file != name)
      throw Error("config is for experiment '" + in_file + "', not '" + name + "'");
    name = in_file;
  }
  ExperimentConfig c = default_config(name);
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    reject_unknown(g, {"n", "half_width"}, "grid");
    take(g, "n", c.grid.n);
    take(g, "half_width", c.grid.half_width);
  }
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s,
                   {"dt", "end_tau", "record_every", "dealias", "scheme", "norm_weights",
                    "cfl_limit", "clock", "unscaled_points", "unscaled_half_width", "entropy",
                    "keep_snapshots"},
                   "solver");
    take(s, "dt", c.solver.dt);
    take(s, "end_tau", c.solver.end_tau);
    take(s, "record_every", c.solver.record_every);
    if (s.contains("dealias")) c.solver.dealias = dealias_from_string(s.at("dealias").get<std::string>());
    if (s.contains("scheme")) c.solver.scheme = scheme_from_string(s.at("scheme").get<std::string>());
    if (s.contains("clock")) c.solver.clock = clock_from_string(s.at("clock").get<std::string>());
    take(s, "norm_weights", c.solver.norm_weights);
    take(s, "cfl_limit", c.solver.cfl_limit);
    take(s, "unscaled_points", c.solver.unscaled_points);
    take(s, "unscaled_half_width", c.solver.unscaled_half_width);
    take(s, "entropy", c.solver.entropy);
    take(s, "keep_snapshots", c.solver.keep_snapshots);
  }
  if (doc.contains("initial")) {
    const json& i = doc.at("initial");
    reject_unknown(i,
                   {"family", "alpha", "shift", "amplitude", "correlation_length", "seed", "even",
                    "path"},
                   "initial");
    if (i.contains("family")) c.initial.family = family_from_string(i.at("family").get<std::string>());
    take(i, "alpha", c.initial.alpha);
    take(i, "shift", c.initial.shift);
    take(i, "amplitude", c.initial.amplitude);
    take(i, "correlation_length", c.initial.correlation_length);
    take(i, "seed", c.initial.seed);
    take(i, "even", c.initial.even);
    if (i.contains("path")) c.initial.path = i.at("path").get<std::string>();
  }
  take(doc, "alpha_list", c.alpha_list);
  if (doc.contains("spectrum")) {
    const json& s = doc.at("spectrum");
    reject_unknown(s, {"resolution", "check_resolution", "max_mode", "m", "tau_end"}, "spectrum");
    take(s, "resolution", c.spectrum.resolution);
    take(s, "check_resolution", c.spectrum.check_resolution);
    take(s, "max_mode", c.spectrum.max_mode);
    take(s, "m", c.spectrum.m);
    take(s, "tau_end", c.spectrum.tau_end);
  }
  if (doc.contains("fit_window")) {
    const auto w = doc.at("fit_window").get<std::vector<double>>();
    if (w.size() != 2) throw Error("fit_window needs two entries");
    c.fit_lo = w[0];
    c.fit_hi = w[1];
  }
  take(doc, "kernels", c.kernels);
  take(doc, "workers", c.workers);
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = c.experiment;
  j["grid"] = {{"n", c.grid.n}, {"half_width", c.grid.half_width}};
  j["solver"] = {{"dt", c.solver.dt},
                 {"end_tau", c.solver.end_tau},
                 {"record_every", c.solver.record_every},
                 {"dealias", to_string(c.solver.dealias)},
                 {"scheme", to_string(c.solver.scheme)},
                 {"clock", to_string(c.solver.clock)},
                 {"norm_weights", c.solver.norm_weights},
                 {"cfl_limit", c.solver.cfl_limit},
                 {"unscaled_points", c.solver.unscaled_points},
                 {"unscaled_half_width", c.solver.unscaled_half_width},
                 {"entropy", c.solver.entropy},
                 {"keep_snapshots", c.solver.keep_snapshots}};
  j["initial"] = {{"family", to_string(c.initial.family)},
                  {"alpha", c.initial.alpha},
                  {"shift", c.initial.shift},
                  {"amplitude", c.initial.amplitude},
                  {"correlation_length", c.initial.correlation_length},
                  {"seed", c.initial.seed},
                  {"even", c.initial.even},
                  {"path", c.initial.path.string()}};
  j["alpha_list"] = c.alpha_list;
  j["spectrum"] = {{"resolution", c.spectrum.resolution},
                   {"check_resolution", c.spectrum.check_resolution},
                   {"max_mode", c.spectrum.max_mode},
                   {"m", c.spectrum.m},
                   {"tau_end", c.spectrum.tau_end}};
  j["fit_window"] = {c.fit_lo, c.fit_hi};
  j["kernels"] = c.kernels;
  j["workers"] = c.workers;
  return j;
}

// ------------------------------------------------------------ assertions

Assertion check_le(std::string name, double value, double tol) {
  return {std::move(name), value, "<=", 0.0, tol, value <= tol};
}
Assertion check_lt(std::string name, double value, double bound) {
  return {std::move(name), value, "<", 0.0, bound, value < bound};
}
Assertion check_ge(std::string name, double value, double bound) {
  return {std::move(name), value, ">=", bound, 0.0, value >= bound};
}
Assertion check_in(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, "in", lo, hi, value >= lo && value <= hi};
}

bool ExperimentResult::all_pass() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

namespace {

constexpr double kPi = std::numbers::pi;

// NaN and infinities are not JSON numbers.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const Assertion& a) {
  json j{{"name", a.name}, {"value", number(a.value)}, {"relation", a.relation}, {"pass", a.pass}};
  if (a.relation == "in") {
    j["lo"] = a.lo;
    j["hi"] = a.hi;
  } else if (a.relation == ">=") {
    j["bound"] = a.lo;
  } else {
    j["bound"] = a.hi;
  }
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::string& header) : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    out_ << header << '\n';
  }
  Csv& num(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return field(buffer);
  }
  Csv& integer(long v) { return field(std::to_string(v)); }
  Csv& field(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ofstream out_;
  bool first_ = true;
};

std::string res_column(double m) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "res_m%g", m);
  return buffer;
}

double rel_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num / den);
}

void add_completion(ExperimentResult& res, const TrajectoryRecord& rec, const std::string& label = "run") {
  res.assertions.push_back(check_le(label + "_aborted", rec.aborted ? 1.0 : 0.0, 0.0));
  if (rec.aborted) res.warnings.push_back("run aborted: " + rec.abort_reason);
  for (const auto& w : rec.diagnostics.warnings) res.warnings.push_back(w);
}

// Mass drift per unit tau, first-moment tracking and positivity.
void add_conservation(ExperimentResult& res, const TrajectoryRecord& rec, const ScalarField& w0) {
  if (rec.samples.size() < 2) return;
  const double tau0 = rec.samples.front().tau;
  const auto& m0 = rec.initial;
  const double phi0 = phi(w0).phi;
  double drift = 0.0, track = 0.0, undershoot = 0.0;
  // Symmetric data have beta = 0; measure against the mass instead.
  const double beta0 = std::hypot(m0.beta1, m0.beta2);
  const double beta_scale = beta0 > 1e-6 * phi0 ? beta0 : phi0;
  for (const auto& s : rec.samples) {
    const double dtau = s.tau - tau0;
    if (dtau > 0.0) drift = std::max(drift, std::abs(s.moments.alpha - m0.alpha) / dtau);
    const double decay = std::exp(-0.5 * dtau);
    track = std::max(track, std::hypot(s.moments.beta1 - m0.beta1 * decay,
                                       s.moments.beta2 - m0.beta2 * decay) / beta_scale);
    if (s.max_w > 0.0) undershoot = std::min(undershoot, s.min_w / s.max_w);
  }
  res.assertions.push_back(check_le("mass_drift_per_tau", drift, 1e-10));
  res.assertions.push_back(check_le("first_moment_tracking_rel", track, 1e-6));
  if (*std::min_element(w0.values.begin(), w0.values.end()) >= 0.0)
    res.assertions.push_back(check_ge("positivity_undershoot_rel", undershoot, -1e-6));
}

SolverConfig solver_for(const ExperimentConfig& cfg) { return cfg.solver; }

// ------------------------------------------------------------ experiments

void vortex_identities(const ExperimentConfig& cfg, ExperimentResult& res) {
  const Grid2D g = cfg.grid.grid();
  Diagnostics diag;
  const ScalarField G = gaussian_G(g);
  res.assertions.push_back(check_le("integral_G_error", std::abs(moments(G).alpha - 1.0), 1e-12));

  const VectorField v = velocity_spectral(G, &diag);
  const VectorField vg = oseen_velocity_vG(g);
  RealVector both(2 * g.size()), ref(2 * g.size());
  std::copy(v.u1.begin(), v.u1.end(), both.begin());
  std::copy(v.u2.begin(), v.u2.end(), both.begin() + g.size());
  std::copy(vg.u1.begin(), vg.u1.end(), ref.begin());
  std::copy(vg.u2.begin(), vg.u2.end(), ref.begin() + g.size());
  res.assertions.push_back(check_le("velocity_G_rel_l2", rel_l2(both, ref), 1e-6));
  res.assertions.push_back(check_le("divergence_windowed_rel", spectral_divergence_relative(v), 1e-10));

  const auto spec = Spectral::for_grid(g);
  RealVector d1, d2;
  spec->gradient(G.values, d1, d2);
  double advect = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p)
    advect = std::max(advect, std::abs(vg.u1[p] * d1[p] + vg.u2[p] * d2[p]));
  res.assertions.push_back(check_le("vG_dot_grad_G_max", advect, 1e-10));

  Csv csv(cfg.out / "identities.csv", "profile,eigenvalue,L_defect_rel,Lambda_defect_rel");
  for (const auto& f : frozen_eigenfunctions(g)) {
    ScalarField lf = apply_L(f.field);
    for (std::size_t p = 0; p < g.size(); ++p) lf.values[p] -= f.eigenvalue * f.field.values[p];
    const double scale = max_abs(f.field);
    const double l_defect = max_abs(lf) / scale;
    res.assertions.push_back(check_le("L_" + f.name + "_defect_rel", l_defect, 1e-8));
    double lam_defect = std::numeric_limits<double>::quiet_NaN();
    if (f.name == "G" || f.name == "F1" || f.name == "F2" || f.name == "LaplacianG") {
      lam_defect = max_abs(apply_Lambda(f.field)) / scale;
      res.assertions.push_back(check_le("Lambda_" + f.name + "_defect_rel", lam_defect, 1e-6));
    }
    csv.field(f.name).num(f.eigenvalue).num(l_defect).num(lam_defect).end();
  }

  // Independent quadrature oracle on a coarse grid.
  const Grid2D coarse(std::min(g.n, kDirectOracleCap), g.half_width);
  const ScalarField Gc = gaussian_G(coarse);
  const VectorField vd = velocity_direct(Gc);
  const VectorField vc = oseen_velocity_vG(coarse);
  double err = 0.0, peak = 0.0;
  for (std::size_t p = 0; p < coarse.size(); ++p) {
    err = std::max({err, std::abs(vd.u1[p] - vc.u1[p]), std::abs(vd.u2[p] - vc.u2[p])});
    peak = std::max({peak, std::abs(vc.u1[p]), std::abs(vc.u2[p])});
  }
  res.assertions.push_back(check_le("direct_oracle_G_rel_max", err / peak, 1e-5));
  for (const auto& w : diag.warnings) res.warnings.push_back(w);
}

void convergence(const ExperimentConfig& cfg, ExperimentResult& res) {
  const Grid2D g = cfg.grid.grid();
  Diagnostics diag;
  const ScalarField w0 = make_initial(g, cfg.initial, &diag);
  SolverConfig s = solver_for(cfg);
  s.keep_snapshots = true;
  const TrajectoryRecord rec = simulate(w0, s);
  write_trajectory_csv(cfg.out / "trajectory.csv", rec);
  for (const auto& w : diag.warnings) res.warnings.push_back(w);
  add_completion(res, rec);

  const double m = s.norm_weights.front();
  const auto residual = rec.column(res_column(m));
  const double floor = 1e-12 * rec.samples.front().phi;
  if (*std::max_element(residual.begin(), residual.end()) <= floor) {
    res.assertions.push_back(check_le("first_order_residual_floor", residual.back(), 1e-10));
  } else {
    const DecayFit fit = fit_decay_rate(rec, res_column(m), cfg.fit_lo, cfg.fit_hi);
    res.assertions.push_back(check_in("decay_rate_" + res_column(m), fit.mu, 0.45, 0.55));
  }

  const SecondOrder so = second_order_asymptotics(rec, m, cfg.fit_lo, cfg.fit_hi);
  Csv csv(cfg.out / "second_order.csv", "tau,residual");
  for (std::size_t k = 0; k < so.taus.size(); ++k) csv.num(so.taus[k]).num(so.residuals[k]).end();
  if (so.degenerate) {
    res.warnings.push_back("second-order residual at round-off; rate fit flagged degenerate");
    res.assertions.push_back(check_le("second_order_residual_floor", so.residuals.back(), 1e-10));
  } else {
    res.assertions.push_back(check_in("second_order_rate", so.fit.mu, 0.9, 1.1));
  }
  add_conservation(res, rec, w0);
}

void entropy(const ExperimentConfig& cfg, ExperimentResult& res) {
  const Grid2D g = cfg.grid.grid();
  Diagnostics diag;
  const ScalarField w0 = make_initial(g, cfg.initial, &diag);
  if (auto why = entropy_inadmissible(w0)) throw Error("entropy experiment: initial datum " + *why);
  SolverConfig s = solver_for(cfg);
  s.entropy = true;
  s.keep_snapshots = true;
  const TrajectoryRecord rec = simulate(w0, s);
  write_trajectory_csv(cfg.out / "trajectory.csv", rec);
  for (const auto& w : diag.warnings) res.warnings.push_back(w);
  add_completion(res, rec);

  const DissipationCheck dc = entropy_dissipation_check(rec);
  res.assertions.push_back(check_le("H_increase_max", dc.max_increase, 1e-8));
  res.assertions.push_back(check_le("dissipation_defect_rel", dc.max_defect, 0.01));

  const auto bound = explicit_bound(rec);
  Csv csv(cfg.out / "entropy.csv", "tau,H,I,ck_gap,logsob_gap,l1_residual,explicit_rhs");
  double min_ck = std::numeric_limits<double>::infinity();
  double min_ls = min_ck, excess = -min_ck;
  int invalid = 0;
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const EntropyReport r = inequality_suite(rec.snapshots[k]);
    if (!r.valid) {
      ++invalid;
      res.warnings.push_back("entropy suite invalid at tau " + std::to_string(rec.samples[k].tau) + ": " + r.reason);
      continue;
    }
    min_ck = std::min(min_ck, r.ck_gap);
    min_ls = std::min(min_ls, r.logsob_gap);
    excess = std::max(excess, bound[k].lhs - bound[k].rhs);
    csv.num(rec.samples[k].tau).num(r.H).num(r.I).num(r.ck_gap).num(r.logsob_gap)
        .num(bound[k].lhs).num(bound[k].rhs).end();
  }
  res.assertions.push_back(check_le("entropy_invalid_samples", invalid, 0.0));
  res.assertions.push_back(check_ge("ck_gap_min", min_ck, 0.0));
  res.assertions.push_back(check_ge("logsob_gap_min", min_ls, 0.0));
  res.assertions.push_back(check_le("explicit_bound_excess_max", excess, 0.0));
  add_conservation(res, rec, w0);
}

// Runs tasks [0, count) on up to `workers` threads; task k writes slot k
// only, so the merged output does not depend on scheduling.
template <class F>
void parallel_for(int count, int workers, F&& task) {
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        task(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(workers, count));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void spectrum_sweep(const ExperimentConfig& cfg, ExperimentResult& res) {
  const auto& sp = cfg.spectrum;
  const int M = sp.max_mode;
  const std::vector<Subspace> subspaces{Subspace::full, Subspace::zero_mean, Subspace::moment_free,
                                        Subspace::second_moment_free};
  struct Task {
    double alpha;
    int n;
    Subspace sub;
  };
  std::vector<Task> tasks;
  for (double a : cfg.alpha_list)
    for (int n = -M; n <= M; ++n)
      for (Subspace s : subspaces) tasks.push_back({a, n, s});
  std::vector<SpectrumResult> results(tasks.size());
  std::vector<int> flagged(tasks.size(), 0);
  parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int k) {
    const Task& t = tasks[k];
    const bool vectors = t.sub == Subspace::full;
    results[k] = eigen_spectrum(t.n, t.alpha, t.sub, sp.resolution, sp.check_resolution, vectors);
    if (!vectors) return;
    // Boundary-contaminated eigenvectors lose their trust.
    const auto grid = radial_grid(std::abs(t.n), sp.resolution);
    int seen = 0;
    for (std::size_t e = 0; e < results[k].eigenvalues.size() && seen < 5; ++e) {
      if (!results[k].trusted[e]) continue;
      ++seen;
      const DecayShape shape =
          eigenfunction_decay_check(t.n, *grid, results[k].eigenvectors.col(static_cast<Eigen::Index>(e)));
      if (shape.flagged) {
        results[k].trusted[e] = false;
        ++flagged[k];
      }
    }
    results[k].eigenvectors.resize(0, 0);
  });
  int total_flagged = 0;
  for (int f : flagged) total_flagged += f;
  if (total_flagged > 0)
    res.warnings.push_back(std::to_string(total_flagged) + " eigenvectors flagged by the tail check");
  write_spectrum_csv(cfg.out / "spectrum.csv", results);

  // Operator structure, alpha-independent.
  double sym = 0.0, skew = 0.0;
  {
    Csv csv(cfg.out / "structure.csv", "n,resolution,symmetry_defect,skew_defect");
    for (int n = 0; n <= M; ++n) {
      for (int N : {sp.resolution, sp.check_resolution}) {
        const OperatorMatrix op = assemble_operator(n, 1.0, N);
        const double a = symmetry_defect(op), b = skew_defect(op);
        sym = std::max(sym, a);
        skew = std::max(skew, b);
        csv.integer(n).integer(N).num(a).num(b).end();
      }
    }
  }
  res.assertions.push_back(check_le("symmetry_defect_max", sym, 1e-8));
  res.assertions.push_back(check_le("skew_defect_max", skew, 1e-6));

  auto find = [&](double alpha, int n, Subspace s) -> const SpectrumResult* {
    for (const auto& r : results)
      if (r.alpha == alpha && r.n == n && r.subspace == s) return &r;
    return nullptr;
  };
  auto has_trusted = [](const SpectrumResult& r, double target) {
    for (std::size_t e = 0; e < r.eigenvalues.size(); ++e)
      if (r.trusted[e] && std::abs(r.eigenvalues[e] - target) <= 1e-6) return true;
    return false;
  };

  // alpha = 0: harmonic-oscillator ladder -(|n| + 2k)/2.
  if (const SpectrumResult* probe = find(0.0, 0, Subspace::full); probe != nullptr) {
    double worst = 0.0;
    for (int n = 0; n <= std::min(3, M); ++n) {
      const SpectrumResult& r = *find(0.0, n, Subspace::full);
      for (int k = 0; k <= 5; ++k) {
        const double target = -0.5 * (n + 2 * k);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < r.eigenvalues.size(); ++e)
          if (r.trusted[e]) best = std::min(best, std::abs(r.eigenvalues[e] - target));
        worst = std::max(worst, best);
      }
    }
    res.assertions.push_back(check_le("alpha0_ladder_abs_error", worst, 1e-6));
  }

  // Frozen eigenvalues for every alpha.
  int missing = 0;
  for (double a : cfg.alpha_list) {
    if (M >= 1 && !has_trusted(*find(a, 1, Subspace::full), -0.5)) ++missing;
    if (!has_trusted(*find(a, 0, Subspace::full), 0.0)) ++missing;
    if (!has_trusted(*find(a, 0, Subspace::full), -1.0)) ++missing;
  }
  res.assertions.push_back(check_le("frozen_eigenvalues_missing", missing, 0.0));

  std::vector<SpectrumResult> constrained;
  for (const auto& r : results)
    if (r.subspace != Subspace::full) constrained.push_back(r);
  const BoundsReport bounds = verify_bounds(constrained, sp.m, 1e-6);
  {
    Csv csv(cfg.out / "bounds.csv", "subspace,alpha,max_re_lambda,n");
    for (const auto& e : bounds.extremes)
      csv.field(to_string(e.subspace)).num(e.alpha).num(e.max_re).integer(e.n).end();
  }
  res.assertions.push_back(check_le("bound_violations", static_cast<double>(bounds.violations.size()), 0.0));
  res.assertions.push_back(check_ge("trusted_eigenvalues_checked", bounds.checked, 1.0));

  // Fast rotation: the n = 2 gap below -1 on the second-moment-free
  // subspace grows with |alpha|.
  if (M >= 2) {
    std::vector<std::pair<double, double>> gaps;
    for (double a : cfg.alpha_list) {
      if (a == 0.0) continue;
      const SpectrumResult& r = *find(a, 2, Subspace::second_moment_free);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < r.eigenvalues.size(); ++e)
        if (r.trusted[e]) top = std::max(top, r.eigenvalues[e].real());
      gaps.emplace_back(std::abs(a), -1.0 - top);
    }
    std::sort(gaps.begin(), gaps.end());
    int inversions = 0;
    for (std::size_t k = 1; k < gaps.size(); ++k)
      if (!(gaps[k].second > gaps[k - 1].second)) ++inversions;
    if (!gaps.empty()) {
      res.assertions.push_back(check_le("n2_gap_not_increasing_in_alpha", inversions, 0.0));
    }
  }
}

// Generic profile in mode n: sqrt(W) e^{-s/4} (1 + noise/2), so the field
// decays like a Gaussian and has a component along every eigenvector.
Eigen::VectorXcd generic_profile(const RadialGrid& g, std::uint64_t seed, int n) {
  Eigen::VectorXcd y(g.N);
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                         static_cast<std::uint32_t>(seed >> 32)};
  for (int i = 0; i < g.N; ++i) {
    const auto r = philox4x32({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(n + 1024), 1, 0}, key);
    const double u1 = (r[0] + 1.0) * 0x1p-32, u2 = r[1] * 0x1p-32;
    const double noise = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    y(i) = g.sqrt_w(i) * std::exp(-0.25 * g.s(i)) * (1.0 + 0.5 * noise);
  }
  return y;
}

void linear_decay(const ExperimentConfig& cfg, ExperimentResult& res) {
  const auto& sp = cfg.spectrum;
  const int M = sp.max_mode;
  const std::vector<std::pair<double, Subspace>> targets{{0.5, Subspace::zero_mean},
                                                         {1.0, Subspace::moment_free}};
  const int samples = 48;
  struct Task {
    double alpha;
    std::size_t target;
    int n;
  };
  std::vector<Task> tasks;
  for (double a : cfg.alpha_list)
    for (std::size_t t = 0; t < targets.size(); ++t)
      for (int n = -M; n <= M; ++n) tasks.push_back({a, t, n});
  std::vector<SemigroupDecay> out(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int k) {
    const Task& t = tasks[k];
    const OperatorMatrix op = assemble_operator(t.n, t.alpha, sp.resolution);
    out[k] = semigroup_decay(op, targets[t.target].second, generic_profile(*op.grid, cfg.initial.seed, t.n),
                             sp.tau_end, samples);
  });

  Csv csv(cfg.out / "linear_decay.csv", "alpha,subspace,n,rate,r2");
  for (std::size_t k = 0; k < tasks.size(); ++k)
    csv.num(tasks[k].alpha).field(to_string(targets[tasks[k].target].second)).integer(tasks[k].n)
        .num(out[k].rate).num(out[k].r2).end();
  // All modes together: the norm of the sum is the l2 sum over n.
  for (double a : cfg.alpha_list) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      std::vector<double> taus, total;
      for (std::size_t k = 0; k < tasks.size(); ++k) {
        if (tasks[k].alpha != a || tasks[k].target != t) continue;
        if (taus.empty()) {
          taus = out[k].taus;
          total.assign(taus.size(), 0.0);
        }
        for (std::size_t q = 0; q < taus.size(); ++q) total[q] += out[k].norms[q] * out[k].norms[q];
      }
      for (double& v : total) v = std::sqrt(v);
      const DecayFit fit = fit_decay_rate(taus, total, 0.5 * sp.tau_end, sp.tau_end);
      char name[96];
      std::snprintf(name, sizeof name, "semigroup_rate_%s_alpha%g", to_string(targets[t].second).c_str(), a);
      csv.num(a).field(to_string(targets[t].second)).field("all").num(fit.mu).num(fit.r2).end();
      res.assertions.push_back(check_ge(name, fit.mu, targets[t].first - 1e-3));
    }
  }
}

Grid2D physical_grid(const ExperimentConfig& cfg) {
  double L = cfg.solver.unscaled_half_width;
  // The x-box must hold the xi-box at the final time, with some margin.
  if (L <= 0.0) L = std::ceil(1.2 * cfg.grid.half_width * std::exp(0.5 * cfg.solver.end_tau));
  return Grid2D(cfg.solver.unscaled_points, L);
}

void cross_check(const ExperimentConfig& cfg, ExperimentResult& res) {
  const Grid2D g = cfg.grid.grid();
  Diagnostics diag;
  const ScalarField w0 = make_initial(g, cfg.initial, &diag);
  SolverConfig s = solver_for(cfg);
  s.entropy = false;
  s.keep_snapshots = false;
  s.scheme = Scheme::strang_split;
  const TrajectoryRecord a = simulate(w0, s);
  const Grid2D xg = physical_grid(cfg);
  const ScalarField omega0 = to_unscaled_frame(w0, xg, s.clock, &diag);
  s.scheme = Scheme::unscaled_remap;
  const TrajectoryRecord b = simulate_unscaled(omega0, s, g);
  for (const auto& w : diag.warnings) res.warnings.push_back(w);
  add_completion(res, a, "scaled");
  add_completion(res, b, "unscaled");

  const std::string col = res_column(s.norm_weights.front());
  const auto ra = a.column(col), rb = b.column(col);
  const auto ta = a.taus();
  Csv csv(cfg.out / "cross_check.csv", "tau,scaled_" + col + ",unscaled_" + col + ",rel_diff");
  double worst = 0.0;
  const std::size_t count = std::min(ra.size(), rb.size());
  for (std::size_t k = 0; k < count; ++k) {
    const double rel = std::abs(ra[k] - rb[k]) / std::max(std::abs(ra[k]), 1e-300);
    if (ta[k] >= cfg.fit_lo - 1e-9 && ta[k] <= cfg.fit_hi + 1e-9) worst = std::max(worst, rel);
    csv.num(ta[k]).num(ra[k]).num(rb[k]).num(rel).end();
  }
  res.assertions.push_back(check_le("sample_count_mismatch", std::abs(double(ra.size()) - double(rb.size())), 0.0));
  res.assertions.push_back(check_le("scaled_vs_unscaled_rel_" + col, worst, 1e-4));
}

}  // namespace

SecondOrder second_order_asymptotics(const TrajectoryRecord& record, double m, double tau_lo,
                                     double tau_hi) {
  if (record.snapshots.empty() || record.snapshots.size() != record.samples.size())
    throw Error("second_order_asymptotics: record has no snapshots");
  if (record.alpha == 0.0) throw Error("second_order_asymptotics: needs nonzero alpha");
  const Grid2D& g = record.snapshots.front().grid;
  const ScalarField G = gaussian_G(g), F1 = dipole_F(g, 0), F2 = dipole_F(g, 1);
  const double tau0 = record.samples.front().tau;
  SecondOrder out;
  double scale = 0.0;
  for (std::size_t k = 0; k < record.samples.size(); ++k) {
    const double tau = record.samples[k].tau;
    const double decay = std::exp(-0.5 * (tau - tau0));
    ScalarField r = record.snapshots[k];
    for (std::size_t p = 0; p < g.size(); ++p)
      r.values[p] -= record.alpha * G.values[p] +
                     decay * (record.initial.beta1 * F1.values[p] + record.initial.beta2 * F2.values[p]);
    out.taus.push_back(tau);
    out.residuals.push_back(weighted_norm(r, m));
    scale = std::max(scale, weighted_norm(record.snapshots[k], m));
  }
  double top = 0.0;
  for (std::size_t k = 0; k < out.taus.size(); ++k)
    if (out.taus[k] >= tau_lo - 1e-9 && out.taus[k] <= tau_hi + 1e-9) top = std::max(top, out.residuals[k]);
  if (top <= 1e-10 * scale) {
    out.degenerate = true;
    return out;
  }
  out.fit = fit_decay_rate(out.taus, out.residuals, tau_lo, tau_hi);
  return out;
}

ExperimentResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kernels != "auto" && !kernels::select(cfg.kernels))
    throw Error("kernel variant '" + cfg.kernels + "' not available on this machine");
  std::filesystem::create_directories(cfg.out);
  write_json(cfg.out / "manifest.json", json{{"tool", "vortexlab"},
                                              {"version", VORTEXLAB_VERSION},
                                              {"kernels", std::string(kernels::active().name)},
                                              {"config", to_json(cfg)}});
  ExperimentResult res;
  res.experiment = cfg.experiment;
  if (cfg.experiment == "vortex-identities") vortex_identities(cfg, res);
  else if (cfg.experiment == "convergence") convergence(cfg, res);
  else if (cfg.experiment == "entropy") entropy(cfg, res);
  else if (cfg.experiment == "spectrum-sweep") spectrum_sweep(cfg, res);
  else if (cfg.experiment == "linear-decay") linear_decay(cfg, res);
  else if (cfg.experiment == "cross-check") cross_check(cfg, res);

  json summary{{"experiment", cfg.experiment},
               {"seed", cfg.initial.seed},
               {"all_pass", res.all_pass()},
               {"assertions", json::array()},
               {"warnings", res.warnings}};
  for (const auto& a : res.assertions) summary["assertions"].push_back(to_json(a));
  write_json(cfg.out / "summary.json", summary);
  return res;
}

}  // namespace vortexlab::lab
