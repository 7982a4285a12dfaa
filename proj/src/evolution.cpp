#include "vortexlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <Eigen/Dense>

#include "vortexlab/kernels.hpp"
#include "vortexlab/lyapunov.hpp"
#include "vortexlab/vortex.hpp"

namespace vortexlab {

std::string to_string(Dealias d) { return d == Dealias::two_thirds ? "two-thirds" : "none"; }
std::string to_string(Scheme s) {
  return s == Scheme::strang_split ? "strang-split" : "unscaled-remap";
}
std::string to_string(Clock c) { return c == Clock::exp ? "exp" : "exp-minus-one"; }

Dealias dealias_from_string(const std::string& text) {
  if (text == "two-thirds") return Dealias::two_thirds;
  if (text == "none") return Dealias::none;
  throw Error("unknown dealias rule '" + text + "'");
}
Scheme scheme_from_string(const std::string& text) {
  if (text == "strang-split") return Scheme::strang_split;
  if (text == "unscaled-remap") return Scheme::unscaled_remap;
  throw Error("unknown scheme '" + text + "'");
}
Clock clock_from_string(const std::string& text) {
  if (text == "exp") return Clock::exp;
  if (text == "exp-minus-one") return Clock::exp_minus_one;
  throw Error("unknown clock '" + text + "'");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("solver: dt must be positive");
  if (!(end_tau > 0.0) || !std::isfinite(end_tau)) throw Error("solver: end_tau must be positive");
  if (record_every < 1) throw Error("solver: record_every must be >= 1");
  if (!(cfl_limit > 0.0)) throw Error("solver: cfl_limit must be positive");
  for (double m : norm_weights) {
    if (!(m >= 0.0)) throw Error("solver: norm weights must be nonnegative");
  }
}

namespace {

double physical_time(double tau, Clock clock) {
  return clock == Clock::exp ? std::exp(tau) : std::expm1(tau);
}

double tau_of(double t, Clock clock) {
  return clock == Clock::exp ? std::log(t) : std::log1p(t);
}

bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

MomentSet span_moments(const Grid2D& grid, std::span<const double> w) {
  return moments(grid, w);
}

// Fourier data of S(tau) on one grid: Y = (-1)^{i+j} e^{-a|k|^2} E1 W E2^T
// with E(f, p) = exp(-i kappa_f x_p), kappa = k e^{-tau/2}.
struct SemigroupKernel {
  Eigen::MatrixXd c1, s1, c2, s2;
  RealVector multiplier;

  SemigroupKernel(const Spectral& spec, double tau) {
    const Grid2D& g = spec.grid();
    const int n = g.n;
    const int nc = spec.columns();
    const double shrink = std::exp(-0.5 * tau);
    const double a = -std::expm1(-tau);
    c1.resize(n, n);
    s1.resize(n, n);
    c2.resize(nc, n);
    s2.resize(nc, n);
    for (int p = 0; p < n; ++p) {
      const double x = g.coord(p);
      for (int f = 0; f < n; ++f) {
        const double phase = spec.k1()[f] * shrink * x;
        c1(f, p) = std::cos(phase);
        s1(f, p) = std::sin(phase);
      }
      for (int f = 0; f < nc; ++f) {
        const double phase = spec.k2()[f] * shrink * x;
        c2(f, p) = std::cos(phase);
        s2(f, p) = std::sin(phase);
      }
    }
    multiplier.resize(spec.spectrum_size());
    const auto ksq = spec.k_squared();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < nc; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * nc + j;
        const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        // Nyquist coefficients of a real field carry no usable phase.
        const bool nyquist = i == n / 2 || j == n / 2;
        multiplier[k] = nyquist ? 0.0 : sign * std::exp(-a * ksq[k]);
      }
    }
  }

  void apply(const Spectral& spec, std::span<const double> w,
             ComplexVector& out) const {
    const int n = spec.grid().n;
    const int nc = spec.columns();
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMatrix> W(w.data(), n, n);
    const Eigen::MatrixXd ar = W * c2.transpose();
    const Eigen::MatrixXd ai = -(W * s2.transpose());
    Eigen::MatrixXd br = c1 * ar;
    br.noalias() += s1 * ai;
    Eigen::MatrixXd bi = c1 * ai;
    bi.noalias() -= s1 * ar;
    out.resize(spec.spectrum_size());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < nc; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * nc + j;
        out[k] = multiplier[k] * std::complex<double>(br(i, j), bi(i, j));
      }
    }
  }
};

std::shared_ptr<const SemigroupKernel> semigroup_kernel(const Grid2D& grid, double tau) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, std::shared_ptr<const SemigroupKernel>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_tuple(grid.n, grid.half_width, tau);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (cache.size() >= 16) cache.clear();
  auto made = std::make_shared<const SemigroupKernel>(*Spectral::for_grid(grid), tau);
  cache.emplace(key, made);
  return made;
}

}  // namespace

ScalarField semigroup_S(const ScalarField& f, double tau, Diagnostics* diag) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error("semigroup_S: tau must be >= 0");
  require_finite(f, "semigroup_S");
  ScalarField out = f;
  out.time = f.time + tau;
  if (tau == 0.0) return out;
  auto spec = Spectral::for_grid(f.grid);
  ComplexVector hat;
  semigroup_kernel(f.grid, tau)->apply(*spec, f.values, hat);
  spec->inverse(hat, out.values);
  const double edge = boundary_ratio(out);
  if (edge > kTruncationTolerance) {
    warn(diag, "semigroup_S: result not negligible at the box boundary (ratio " +
                   std::to_string(edge) + ")");
  }
  return out;
}

ScalarField apply_L(const ScalarField& w) {
  auto spec = Spectral::for_grid(w.grid);
  const auto& t = coordinate_tables(w.grid);
  RealVector lap, d1, d2;
  spec->laplacian(w.values, lap);
  spec->gradient(w.values, d1, d2);
  ScalarField out(w.grid, w.frame, w.time);
  for (std::size_t k = 0; k < w.grid.size(); ++k) {
    out.values[k] = lap[k] + 0.5 * (t.xi1[k] * d1[k] + t.xi2[k] * d2[k]) + w.values[k];
  }
  return out;
}

ScalarField apply_Lambda(const ScalarField& r) {
  auto biot = BiotSavart::scaled(r.grid);
  const auto& t = coordinate_tables(r.grid);
  const VectorField vr = biot->velocity(r);
  const VectorField& vg = biot->core_velocity();
  const ScalarField& g = biot->core();
  RealVector d1, d2;
  Spectral::for_grid(r.grid)->gradient(r.values, d1, d2);
  ScalarField out(r.grid, r.frame, r.time);
  for (std::size_t k = 0; k < r.grid.size(); ++k) {
    // grad G = -xi G / 2
    const double g1 = -0.5 * t.xi1[k] * g.values[k];
    const double g2 = -0.5 * t.xi2[k] * g.values[k];
    out.values[k] = vg.u1[k] * d1[k] + vg.u2[k] * d2[k] + vr.u1[k] * g1 + vr.u2[k] * g2;
  }
  return out;
}

ScaledSolver::ScaledSolver(const Grid2D& grid, Dealias dealias, double cfl_limit)
    : grid_(grid),
      dealias_(dealias),
      cfl_limit_(cfl_limit),
      spec_(Spectral::for_grid(grid)),
      biot_(BiotSavart::scaled(grid)) {
  const auto& t = coordinate_tables(grid);
  const ScalarField& g = biot_->core();
  grad_g1_.resize(grid.size());
  grad_g2_.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grad_g1_[k] = -0.5 * t.xi1[k] * g.values[k];
    grad_g2_[k] = -0.5 * t.xi2[k] * g.values[k];
  }
}

void ScaledSolver::finish_tendency(RealVector& product, RealVector& out) const {
  ComplexVector hat;
  spec_->forward(product, hat);
  if (dealias_ == Dealias::two_thirds) kernels::scale_complex(hat, spec_->dealias_mask());
  hat[0] = 0.0;  // the tendency carries no mass
  spec_->inverse(hat, out);
}

void ScaledSolver::nonlinear_tendency(std::span<const double> w, RealVector& out,
                                      double* max_speed) const {
  ComplexVector hat, tmp;
  spec_->forward(w, hat);
  const MomentSet mom = span_moments(grid_, w);
  ComplexVector masked = hat;
  if (dealias_ == Dealias::two_thirds) kernels::scale_complex(masked, spec_->dealias_mask());
  RealVector d1, d2, u1, u2;
  spec_->derivative(masked, 0, tmp);
  spec_->inverse(tmp, d1);
  spec_->derivative(masked, 1, tmp);
  spec_->inverse(tmp, d2);
  biot_->velocity_from_spectrum(hat, mom, dealias_ == Dealias::two_thirds, u1, u2);
  RealVector product(grid_.size());
  kernels::advect(u1, u2, d1, d2, product);
  if (max_speed != nullptr) {
    double s2 = 0.0;
    for (std::size_t k = 0; k < u1.size(); ++k) s2 = std::max(s2, u1[k] * u1[k] + u2[k] * u2[k]);
    *max_speed = std::max(*max_speed, std::sqrt(s2));
  }
  finish_tendency(product, out);
}

void ScaledSolver::linear_tendency(std::span<const double> r, double alpha,
                                   RealVector& out) const {
  ComplexVector hat, tmp;
  spec_->forward(r, hat);
  const MomentSet mom = span_moments(grid_, r);
  ComplexVector masked = hat;
  if (dealias_ == Dealias::two_thirds) kernels::scale_complex(masked, spec_->dealias_mask());
  RealVector d1, d2, u1, u2;
  spec_->derivative(masked, 0, tmp);
  spec_->inverse(tmp, d1);
  spec_->derivative(masked, 1, tmp);
  spec_->inverse(tmp, d2);
  biot_->velocity_from_spectrum(hat, mom, dealias_ == Dealias::two_thirds, u1, u2);
  const VectorField& vg = biot_->core_velocity();
  // -alpha (v^G . grad R + v^R . grad G)
  RealVector product(grid_.size());
  kernels::advect(vg.u1, vg.u2, d1, d2, product);
  RealVector second(grid_.size());
  kernels::advect(u1, u2, grad_g1_, grad_g2_, second);
  for (std::size_t k = 0; k < product.size(); ++k) product[k] = alpha * (product[k] + second[k]);
  finish_tendency(product, out);
}

namespace {

// Classical RK4 for dy/dt = f(y) on flat arrays.
template <class F>
void rk4(RealVector& y, double dt, F&& f) {
  const std::size_t size = y.size();
  RealVector k1, k2, k3, k4, stage(size);
  f(y, k1);
  for (std::size_t i = 0; i < size; ++i) stage[i] = y[i] + 0.5 * dt * k1[i];
  f(stage, k2);
  for (std::size_t i = 0; i < size; ++i) stage[i] = y[i] + 0.5 * dt * k2[i];
  f(stage, k3);
  for (std::size_t i = 0; i < size; ++i) stage[i] = y[i] + dt * k3[i];
  f(stage, k4);
  for (std::size_t i = 0; i < size; ++i) {
    y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
  }
}

}  // namespace

double ScaledSolver::advect(ScalarField& w, double dt) const {
  double speed = 0.0;
  rk4(w.values, dt, [&](const RealVector& y, RealVector& out) {
    nonlinear_tendency(y, out, &speed);
  });
  return speed;
}

double ScaledSolver::advect_linear(ScalarField& r, double alpha, double dt) const {
  if (alpha == 0.0) return 0.0;
  rk4(r.values, dt, [&](const RealVector& y, RealVector& out) {
    linear_tendency(y, alpha, out);
  });
  double speed = 0.0;
  const VectorField& vg = biot_->core_velocity();
  for (std::size_t k = 0; k < vg.u1.size(); ++k) {
    speed = std::max(speed, std::hypot(vg.u1[k], vg.u2[k]));
  }
  return std::abs(alpha) * speed;
}

void ScaledSolver::cfl_check(double speed, double dt, Diagnostics* diag) const {
  const double number = speed * dt / grid_.spacing();
  if (number > cfl_limit_) {
    warn(diag, "CFL number " + std::to_string(number) + " exceeds " +
                   std::to_string(cfl_limit_));
  }
}

ScalarField ScaledSolver::step(const ScalarField& w, double dt, Diagnostics* diag) const {
  if (w.frame != Frame::scaled) throw Error("step_sv: field must be in the scaled frame");
  ScalarField half = semigroup_S(w, 0.5 * dt, diag);
  cfl_check(advect(half, dt), dt, diag);
  return semigroup_S(half, 0.5 * dt, diag);
}

ScalarField ScaledSolver::linearized_step(const ScalarField& r, double alpha,
                                          double dt, Diagnostics* diag) const {
  ScalarField half = semigroup_S(r, 0.5 * dt, diag);
  cfl_check(advect_linear(half, alpha, dt), dt, diag);
  return semigroup_S(half, 0.5 * dt, diag);
}

ScalarField step_sv(const ScalarField& w, double dt, Diagnostics* diag) {
  return ScaledSolver(w.grid).step(w, dt, diag);
}

ScalarField linearized_step(const ScalarField& r, double alpha, double dt,
                            Diagnostics* diag) {
  return ScaledSolver(r.grid).linearized_step(r, alpha, dt, diag);
}

std::vector<double> TrajectoryRecord::taus() const { return column("tau"); }

std::vector<std::string> TrajectoryRecord::residual_columns() const {
  std::vector<std::string> names;
  for (double m : norm_weights) {
    char buffer[48];
    std::snprintf(buffer, sizeof buffer, "res_m%g", m);
    names.emplace_back(buffer);
  }
  return names;
}

std::vector<double> TrajectoryRecord::column(const std::string& name) const {
  std::vector<double> out;
  out.reserve(samples.size());
  const auto residuals = residual_columns();
  const auto it = std::find(residuals.begin(), residuals.end(), name);
  for (const auto& s : samples) {
    if (it != residuals.end()) out.push_back(s.residual_norms[it - residuals.begin()]);
    else if (name == "tau") out.push_back(s.tau);
    else if (name == "alpha") out.push_back(s.moments.alpha);
    else if (name == "beta1") out.push_back(s.moments.beta1);
    else if (name == "beta2") out.push_back(s.moments.beta2);
    else if (name == "mu2") out.push_back(s.moments.mu2);
    else if (name == "phi") out.push_back(s.phi);
    else if (name == "H") out.push_back(s.H);
    else if (name == "I") out.push_back(s.I);
    else if (name == "min_w") out.push_back(s.min_w);
    else if (name == "max_w") out.push_back(s.max_w);
    else if (name == "l1_residual") out.push_back(s.l1_residual);
    else if (name == "grad_norm") out.push_back(s.grad_norm);
    else if (name == "t") out.push_back(s.t);
    else if (name == "t_sup") out.push_back(s.t_sup);
    else throw Error("trajectory: unknown column '" + name + "'");
  }
  return out;
}

namespace {

TrajectorySample make_sample(const ScalarField& w, const TrajectoryRecord& record,
                             bool entropy) {
  TrajectorySample s;
  s.tau = w.time;
  s.moments = moments(w);
  const ScalarField residual = w - record.alpha * gaussian_G(w.grid);
  for (double m : record.norm_weights) s.residual_norms.push_back(weighted_norm(residual, m));
  s.l1_residual = lp_norm(residual, 1.0);
  s.phi = phi(w).phi;
  s.H = s.I = std::numeric_limits<double>::quiet_NaN();
  if (entropy) {
    if (auto h = relative_entropy(w)) s.H = *h;
    if (auto i = fisher_information(w)) s.I = *i;
  }
  s.min_w = *std::min_element(w.values.begin(), w.values.end());
  s.max_w = *std::max_element(w.values.begin(), w.values.end());
  RealVector d1, d2;
  Spectral::for_grid(w.grid)->gradient(w.values, d1, d2);
  s.grad_norm = std::sqrt(w.grid.cell_area() * (kernels::dot(d1, d1) + kernels::dot(d2, d2)));
  return s;
}

long step_count(const SolverConfig& cfg, double& dt, Diagnostics& diag) {
  long steps = std::lround(cfg.end_tau / cfg.dt);
  if (steps < 1 || std::abs(steps * cfg.dt - cfg.end_tau) > 1e-9 * cfg.end_tau) {
    steps = std::max(1L, static_cast<long>(std::ceil(cfg.end_tau / cfg.dt)));
    dt = cfg.end_tau / steps;
    diag.warn("dt adjusted to " + std::to_string(dt) + " to land on end_tau");
  } else {
    dt = cfg.dt;
  }
  return steps;
}

}  // namespace

TrajectoryRecord simulate(const ScalarField& w0, const SolverConfig& cfg) {
  cfg.validate();
  if (w0.frame != Frame::scaled) throw Error("simulate: initial field must be in the scaled frame");
  require_finite(w0, "simulate");
  TrajectoryRecord record;
  record.norm_weights = cfg.norm_weights;
  record.initial = moments(w0);
  record.alpha = record.initial.alpha;
  double dt = cfg.dt;
  const long steps = step_count(cfg, dt, record.diagnostics);
  const ScaledSolver solver(w0.grid, cfg.dealias, cfg.cfl_limit);

  auto emit = [&](const ScalarField& w) {
    record.samples.push_back(make_sample(w, record, cfg.entropy));
    if (cfg.keep_snapshots) record.snapshots.push_back(w);
  };
  emit(w0);

  const double tau0 = w0.time;
  bool cfl_warned = false;
  ScalarField half = semigroup_S(w0, 0.5 * dt, &record.diagnostics);
  for (long s = 1; s <= steps; ++s) {
    const double speed = solver.advect(half, dt);
    if (!cfl_warned && speed * dt / w0.grid.spacing() > cfg.cfl_limit) {
      record.diagnostics.warn("CFL number " + std::to_string(speed * dt / w0.grid.spacing()) +
                              " exceeds " + std::to_string(cfg.cfl_limit) + " at step " +
                              std::to_string(s));
      cfl_warned = true;
    }
    if (!all_finite(half.values)) {
      record.aborted = true;
      record.abort_step = s;
      record.abort_reason = "non-finite value at step " + std::to_string(s);
      break;
    }
    const bool sample = s % cfg.record_every == 0 || s == steps;
    if (sample) {
      ScalarField w = semigroup_S(half, 0.5 * dt, &record.diagnostics);
      w.time = tau0 + s * dt;
      emit(w);
      if (s < steps) half = semigroup_S(w, 0.5 * dt, &record.diagnostics);
    } else {
      half = semigroup_S(half, dt, &record.diagnostics);
    }
  }
  return record;
}

ScalarField to_scaled_frame(const ScalarField& omega, const Grid2D& xi_grid,
                            Clock clock, Diagnostics* diag) {
  if (omega.frame != Frame::unscaled) throw Error("to_scaled_frame: expected an unscaled field");
  const double tau = tau_of(omega.time, clock);
  if (!std::isfinite(tau)) throw Error("to_scaled_frame: time outside the clock's range");
  ScalarField w = interpolate_to_grid(omega, xi_grid, std::exp(0.5 * tau), diag);
  for (double& v : w.values) v *= std::exp(tau);
  w.frame = Frame::scaled;
  w.time = tau;
  return w;
}

ScalarField to_unscaled_frame(const ScalarField& w, const Grid2D& x_grid,
                              Clock clock, Diagnostics* diag) {
  if (w.frame != Frame::scaled) throw Error("to_unscaled_frame: expected a scaled field");
  const double tau = w.time;
  ScalarField omega = interpolate_to_grid(w, x_grid, std::exp(-0.5 * tau), diag);
  for (double& v : omega.values) v *= std::exp(-tau);
  omega.frame = Frame::unscaled;
  omega.time = physical_time(tau, clock);
  return omega;
}

TrajectoryRecord simulate_unscaled(const ScalarField& omega0, const SolverConfig& cfg,
                                   const Grid2D& xi_grid) {
  cfg.validate();
  if (omega0.frame != Frame::unscaled) throw Error("simulate_unscaled: expected an unscaled field");
  if (!(omega0.time > 0.0)) throw Error("simulate_unscaled: initial time must be positive");
  require_finite(omega0, "simulate_unscaled");
  const Grid2D& grid = omega0.grid;
  const auto spec = Spectral::for_grid(grid);
  const bool dealias = cfg.dealias == Dealias::two_thirds;

  TrajectoryRecord record;
  record.norm_weights = cfg.norm_weights;
  double dtau = cfg.dt;
  const long steps = step_count(cfg, dtau, record.diagnostics);
  const double tau0 = tau_of(omega0.time, cfg.clock);
  const double tau_end = tau0 + steps * dtau;
  const double needed = xi_grid.half_width * std::exp(0.5 * tau_end);
  if (needed > grid.half_width) {
    record.diagnostics.warn("x-box half width " + std::to_string(grid.half_width) +
                            " is smaller than the remap needs (" + std::to_string(needed) + ")");
  }

  auto emit = [&](const ScalarField& omega) {
    ScalarField w = to_scaled_frame(omega, xi_grid, cfg.clock, &record.diagnostics);
    if (record.samples.empty()) {
      record.initial = moments(w);
      record.alpha = record.initial.alpha;
    }
    TrajectorySample s = make_sample(w, record, cfg.entropy);
    s.t = omega.time;
    const MomentSet xm = moments(omega);
    s.x_moment1 = xm.beta1;
    s.x_moment2 = xm.beta2;
    s.t_sup = omega.time * max_abs(omega);
    record.samples.push_back(std::move(s));
    if (cfg.keep_snapshots) record.snapshots.push_back(std::move(w));
  };

  // N(omega) = -u . grad omega, velocity split at core scale sqrt(t).
  auto tendency = [&](const ComplexVector& hat, const BiotSavart& biot, ComplexVector& out) {
    RealVector w, d1, d2, u1, u2;
    spec->inverse(hat, w);
    const MomentSet mom = span_moments(grid, w);
    ComplexVector masked = hat, tmp;
    if (dealias) kernels::scale_complex(masked, spec->dealias_mask());
    spec->derivative(masked, 0, tmp);
    spec->inverse(tmp, d1);
    spec->derivative(masked, 1, tmp);
    spec->inverse(tmp, d2);
    biot.velocity_from_spectrum(hat, mom, dealias, u1, u2);
    RealVector product(grid.size());
    kernels::advect(u1, u2, d1, d2, product);
    spec->forward(product, out);
    if (dealias) kernels::scale_complex(out, spec->dealias_mask());
    out[0] = 0.0;
  };

  ScalarField omega = omega0;
  emit(omega);
  ComplexVector hat;
  spec->forward(omega.values, hat);
  const auto ksq = spec->k_squared();
  const std::size_t size = hat.size();
  RealVector e_full(size), e_half(size);
  ComplexVector k1, k2, k3, k4, stage(size);
  bool cfl_warned = false;

  for (long s = 1; s <= steps; ++s) {
    const double t = physical_time(tau0 + (s - 1) * dtau, cfg.clock);
    const double t_next = physical_time(tau0 + s * dtau, cfg.clock);
    const double h = t_next - t;
    for (std::size_t k = 0; k < size; ++k) {
      e_full[k] = std::exp(-ksq[k] * h);
      e_half[k] = std::exp(-0.5 * ksq[k] * h);
    }
    const BiotSavart biot(grid, std::sqrt(t));
    tendency(hat, biot, k1);
    for (std::size_t k = 0; k < size; ++k) stage[k] = e_half[k] * (hat[k] + 0.5 * h * k1[k]);
    tendency(stage, biot, k2);
    for (std::size_t k = 0; k < size; ++k) stage[k] = e_half[k] * hat[k] + 0.5 * h * k2[k];
    tendency(stage, biot, k3);
    for (std::size_t k = 0; k < size; ++k) stage[k] = e_full[k] * hat[k] + h * e_half[k] * k3[k];
    tendency(stage, biot, k4);
    for (std::size_t k = 0; k < size; ++k) {
      hat[k] = e_full[k] * hat[k] +
               h / 6.0 * (e_full[k] * k1[k] + 2.0 * e_half[k] * (k2[k] + k3[k]) + k4[k]);
    }
    spec->inverse(hat, omega.values);
    omega.time = t_next;
    if (!all_finite(omega.values)) {
      record.aborted = true;
      record.abort_step = s;
      record.abort_reason = "non-finite value at step " + std::to_string(s);
      break;
    }
    if (!cfl_warned) {
      const VectorField u = biot.velocity(omega);
      double speed = 0.0;
      for (std::size_t k = 0; k < u.u1.size(); ++k) speed = std::max(speed, std::hypot(u.u1[k], u.u2[k]));
      if (speed * h / grid.spacing() > cfg.cfl_limit) {
        record.diagnostics.warn("CFL number exceeded at step " + std::to_string(s));
        cfl_warned = true;
      }
    }
    if (s % cfg.record_every == 0 || s == steps) emit(omega);
  }
  return record;
}

DecayFit fit_decay_rate(std::span<const double> taus, std::span<const double> values,
                        double tau_lo, double tau_hi) {
  if (taus.size() != values.size()) throw Error("fit_decay_rate: size mismatch");
  const double slack = 1e-9 * std::max(1.0, std::abs(tau_hi));
  std::vector<double> x, y;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (taus[k] < tau_lo - slack || taus[k] > tau_hi + slack) continue;
    if (!(values[k] > 0.0)) throw Error("fit_decay_rate: quantity must be positive on the window");
    x.push_back(taus[k]);
    y.push_back(std::log(values[k]));
  }
  if (x.size() < 4) throw Error("fit_decay_rate: fewer than 4 samples in the window");
  const double count = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (my + slope * (x[k] - mx));
    ssr += r * r;
  }
  DecayFit fit;
  fit.mu = -slope;
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.samples = static_cast<int>(x.size());
  return fit;
}

DecayFit fit_decay_rate(const TrajectoryRecord& record, const std::string& quantity,
                        double tau_lo, double tau_hi) {
  const auto taus = record.taus();
  const auto values = record.column(quantity);
  return fit_decay_rate(taus, values, tau_lo, tau_hi);
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record) {
  std::ofstream out(path);
  if (!out) throw Error("write_trajectory_csv: cannot open " + path.string());
  out << "tau,alpha,beta1,beta2,mu2,phi,H,I,min_w";
  for (const auto& name : record.residual_columns()) out << ',' << name;
  out << '\n';
  char buffer[64];
  auto put = [&](double v) {
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    out << buffer;
  };
  for (const auto& s : record.samples) {
    for (double v : {s.tau, s.moments.alpha, s.moments.beta1, s.moments.beta2,
                     s.moments.mu2, s.phi, s.H, s.I}) {
      put(v);
      out << ',';
    }
    put(s.min_w);
    for (double v : s.residual_norms) {
      out << ',';
      put(v);
    }
    out << '\n';
  }
}

}  // namespace vortexlab
