#pragma once

#include <memory>

#include "vortexlab/fields.hpp"
#include "vortexlab/grid.hpp"
#include "vortexlab/spectral.hpp"

namespace vortexlab {

/// Relative boundary amplitude above which a field is considered cut off
/// by the box (see boundary_ratio).
inline constexpr double kTruncationTolerance = 1e-10;

/// Spectral Biot-Savart solver for one grid and one core scale s.
///
/// The vorticity is split as
///   w = alpha G_s + beta_j F_j,s + c_ab d_a d_b G_s + R
/// where G_s(x) = G(x/s)/s^2 and F_j,s = -d_j G_s. The Gaussian pieces
/// carry the mass, first and second moments and have closed-form
/// velocities. R has no moments up to order two, so its velocity decays
/// like |x|^-4 and the periodic images seen by the multiplier
/// i k^perp / |k|^2 are small.
/// Scaled-frame fields use s = 1; physical fields at time t use s = sqrt(t).
class BiotSavart {
 public:
  BiotSavart(const Grid2D& grid, double scale = 1.0);

  /// Shared scale-1 instance per grid.
  static std::shared_ptr<const BiotSavart> scaled(const Grid2D& grid);

  const Grid2D& grid() const noexcept { return grid_; }
  double scale() const noexcept { return scale_; }
  const Spectral& spectral() const noexcept { return *spec_; }

  VectorField velocity(const ScalarField& w, Diagnostics* diag = nullptr) const;

  /// Velocity from a precomputed forward transform of w and its moments.
  /// With `dealias` the remainder's spectrum is truncated by the 2/3 rule.
  void velocity_from_spectrum(const ComplexVector& w_hat, const MomentSet& mom,
                              bool dealias, RealVector& u1,
                              RealVector& u2) const;

  /// The closed-form pieces sampled on the grid.
  const ScalarField& core() const noexcept { return g_; }
  const ScalarField& dipole(int j) const noexcept { return f_[j]; }
  const VectorField& core_velocity() const noexcept { return vg_; }
  const VectorField& dipole_velocity(int j) const noexcept { return vf_[j]; }

 private:
  Grid2D grid_;
  double scale_;
  std::shared_ptr<const Spectral> spec_;
  ScalarField g_, f_[2];
  VectorField vg_, vf_[2];
  ComplexVector g_hat_, f_hat_[2];
  // d_1^2 G_s, d_1 d_2 G_s, d_2^2 G_s
  VectorField vq_[3];
  ComplexVector q_hat_[3];
};

/// v from w via the split above (scale chosen from the frame: 1 for the
/// scaled frame, sqrt(t) for the unscaled one). Records a warning when w
/// is not negligible at the box boundary.
VectorField velocity_spectral(const ScalarField& w, Diagnostics* diag = nullptr);

/// Largest grid accepted by velocity_direct.
inline constexpr int kDirectOracleCap = 64;

/// Literal quadrature of (1/2pi) int (xi - eta)^perp / |xi - eta|^2 w(eta):
/// punctured trapezoid rule with a local correction for the skipped
/// singular cell, Richardson-extrapolated against the stride-2 sublattice.
/// O(n^4); rejects n > cap.
VectorField velocity_direct(const ScalarField& w, int cap = kDirectOracleCap);

/// int (xi . v) w dxi.
double weighted_virial(const ScalarField& w, const VectorField& v);

}  // namespace vortexlab
