#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/biot_savart.hpp"
#include "vortexlab/fields.hpp"
#include "vortexlab/grid.hpp"

namespace vortexlab {

enum class Dealias { two_thirds, none };
enum class Scheme { strang_split, unscaled_remap };

/// Physical clock attached to tau: t = e^tau (tau = 0 <-> t = 1) or
/// t = e^tau - 1.
enum class Clock { exp, exp_minus_one };

std::string to_string(Dealias d);
std::string to_string(Scheme s);
std::string to_string(Clock c);
Dealias dealias_from_string(const std::string& text);
Scheme scheme_from_string(const std::string& text);
Clock clock_from_string(const std::string& text);

struct SolverConfig {
  double dt = 1e-2;  // tau units
  Dealias dealias = Dealias::two_thirds;
  Scheme scheme = Scheme::strang_split;
  int record_every = 10;
  double end_tau = 5.0;

  std::vector<double> norm_weights{0.0, 2.0};  // m for |w - alpha G|_m
  bool entropy = true;          // H and I at each sample when w >= 0
  bool keep_snapshots = false;  // store the field at each sample
  double cfl_limit = 1.0;

  // unscaled-remap only
  Clock clock = Clock::exp;
  int unscaled_points = 256;
  double unscaled_half_width = 0.0;  // 0: picked from end_tau

  void validate() const;
};

struct TrajectorySample {
  double tau = 0.0;
  MomentSet moments;
  std::vector<double> residual_norms;  // aligned with norm_weights
  double phi = 0.0;
  double H = 0.0, I = 0.0;  // NaN when not recorded or w not admissible
  double l1_residual = 0.0;  // |w - alpha G|_1
  double min_w = 0.0, max_w = 0.0;
  double grad_norm = 0.0;  // |grad w|_0

  // unscaled runs: physical time, first moments in x, t |omega|_inf
  double t = 0.0;
  double x_moment1 = 0.0, x_moment2 = 0.0;
  double t_sup = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> norm_weights;
  double alpha = 0.0;  // mass of the initial datum
  MomentSet initial;
  std::vector<TrajectorySample> samples;
  std::vector<ScalarField> snapshots;  // aligned with samples when kept
  bool aborted = false;
  long abort_step = -1;
  std::string abort_reason;
  Diagnostics diagnostics;

  std::vector<double> taus() const;
  /// Column by name: tau, alpha, beta1, beta2, mu2, phi, H, I, min_w,
  /// grad_norm, or res_m<m> for a recorded weight (e.g. "res_m0").
  std::vector<double> column(const std::string& name) const;
  std::vector<std::string> residual_columns() const;
};

/// Discrete L w = Delta w + (1/2) xi . grad w + w with spectral derivatives.
ScalarField apply_L(const ScalarField& w);

/// Lambda R = v^G . grad R + v^R . grad G, v^R by the split Biot-Savart law.
ScalarField apply_Lambda(const ScalarField& r);

/// Exact S(tau) = exp(tau L): in Fourier variables
/// S(tau)f^(k) = f^(k e^{-tau/2}) exp(-(1 - e^{-tau}) |k|^2), with f^ at
/// the dilated wavenumbers taken as the trapezoid-rule Fourier integral.
/// Mass is preserved exactly.
ScalarField semigroup_S(const ScalarField& f, double tau,
                        Diagnostics* diag = nullptr);

/// Strang-split integrator for the rescaled equation on one grid.
class ScaledSolver {
 public:
  ScaledSolver(const Grid2D& grid, Dealias dealias = Dealias::two_thirds,
               double cfl_limit = 1.0);

  const Grid2D& grid() const noexcept { return grid_; }

  /// S(dt/2), RK4 of -v . grad w over dt, S(dt/2).
  ScalarField step(const ScalarField& w, double dt, Diagnostics* diag = nullptr) const;

  /// Same splitting for dR/dtau = L R - alpha Lambda R.
  ScalarField linearized_step(const ScalarField& r, double alpha, double dt,
                              Diagnostics* diag = nullptr) const;

  /// The RK4 pieces on their own. Returns max |v| seen.
  double advect(ScalarField& w, double dt) const;
  double advect_linear(ScalarField& r, double alpha, double dt) const;

  /// -v . grad w, dealiased, with zero mean.
  void nonlinear_tendency(std::span<const double> w, RealVector& out,
                          double* max_speed = nullptr) const;
  void linear_tendency(std::span<const double> r, double alpha, RealVector& out) const;

 private:
  void cfl_check(double speed, double dt, Diagnostics* diag) const;
  void finish_tendency(RealVector& product, RealVector& out) const;

  Grid2D grid_;
  Dealias dealias_;
  double cfl_limit_;
  std::shared_ptr<const Spectral> spec_;
  std::shared_ptr<const BiotSavart> biot_;
  RealVector grad_g1_, grad_g2_;
};

ScalarField step_sv(const ScalarField& w, double dt, Diagnostics* diag = nullptr);
ScalarField linearized_step(const ScalarField& r, double alpha, double dt,
                            Diagnostics* diag = nullptr);

/// Integrates the rescaled equation from w0 (scaled frame, tau = w0.time)
/// to end_tau. Consecutive half-steps of S are fused between samples. On a
/// non-finite value the run stops and the samples so far are returned.
TrajectoryRecord simulate(const ScalarField& w0, const SolverConfig& cfg);

/// Integrates the physical equation for omega0 (unscaled frame at time t0
/// = omega0.time) on its own x-grid by integrating-factor RK4, stepping
/// geometrically in t so that samples fall on tau = tau0 + k dt. Each
/// sample is remapped to the scaled grid `xi_grid` by
/// w(xi, tau) = e^tau omega(xi e^{tau/2}, t(tau)).
TrajectoryRecord simulate_unscaled(const ScalarField& omega0,
                                   const SolverConfig& cfg,
                                   const Grid2D& xi_grid);

/// Remap of a physical field at time omega.time to the scaled frame.
ScalarField to_scaled_frame(const ScalarField& omega, const Grid2D& xi_grid,
                            Clock clock, Diagnostics* diag = nullptr);

/// The scaled datum w0 as a physical field at the time matching tau0.
ScalarField to_unscaled_frame(const ScalarField& w, const Grid2D& x_grid,
                              Clock clock, Diagnostics* diag = nullptr);

struct DecayFit {
  double mu = 0.0;  // minus the slope of log(quantity) against tau
  double r2 = 0.0;
  int samples = 0;
};

DecayFit fit_decay_rate(std::span<const double> taus,
                        std::span<const double> values, double tau_lo,
                        double tau_hi);
DecayFit fit_decay_rate(const TrajectoryRecord& record,
                        const std::string& quantity, double tau_lo,
                        double tau_hi);

/// Columns tau, alpha, beta1, beta2, mu2, phi, H, I, min_w, res_m<m>...
void write_trajectory_csv(const std::filesystem::path& path,
                          const TrajectoryRecord& record);

}  // namespace vortexlab
