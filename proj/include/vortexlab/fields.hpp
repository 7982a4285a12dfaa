#pragma once

#include <array>
#include <filesystem>
#include <span>

#include <Eigen/Dense>

#include "vortexlab/grid.hpp"

namespace vortexlab {

/// Quadrature moments: total vorticity, first moments, second moment.
struct MomentSet {
  double alpha = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double mu2 = 0.0;
  // second moments int xi_a xi_b w
  double m11 = 0.0, m12 = 0.0, m22 = 0.0;
};

/// Per-grid coordinate tables xi_1, xi_2 and |xi|^2 (cached, immutable).
struct CoordinateTables {
  RealVector xi1, xi2, r2;
  RealVector xi11, xi12;  // xi_1^2, xi_1 xi_2
};
const CoordinateTables& coordinate_tables(const Grid2D& grid);

/// (sum h^2 (1 + |xi|^2)^m w^2)^(1/2). Nondecreasing in m.
double weighted_norm(const ScalarField& w, double m);

/// Riemann-sum L^p norm; pass p = infinity for the max norm.
double lp_norm(const ScalarField& w, double p);

MomentSet moments(const ScalarField& w);
MomentSet moments(const Grid2D& grid, std::span<const double> w);

/// Removes the components along G (level >= 0), F_1, F_2 (level >= 1) and
/// Delta G (level 2) using the biorthogonal moment functionals
/// int w, int xi_j w and int (|xi|^2 - 4) w / 4.
ScalarField project_subspace(const ScalarField& w, int level);

struct Recentered {
  ScalarField field;
  std::array<double, 2> shift{};  // b = (beta_1, beta_2) / alpha
};

/// Translates w so that its first moments vanish. Throws when
/// |alpha| < 1e-8 |w|_1.
Recentered recenter(const ScalarField& w);

/// Band-limited evaluation of w(xi * factor) on the same grid.
ScalarField resample(const ScalarField& w, double factor,
                     Diagnostics* diag = nullptr);

/// Band-limited evaluation of w(scale * xi) on the points of `target`.
/// Samples falling outside the source box are set to zero (the field is
/// taken to vanish there); a warning is recorded when the source field is
/// not negligible at its boundary in that case.
ScalarField interpolate_to_grid(const ScalarField& w, const Grid2D& target,
                                double scale, Diagnostics* diag = nullptr);

/// Rows: targets; columns: source nodes. Entry (t, p) is the weight of
/// sample p in the trigonometric interpolant evaluated at targets[t].
Eigen::MatrixXd trig_interpolation_matrix(const Grid2D& source,
                                          std::span<const double> targets);

/// Band-limited value of w at an arbitrary point.
double evaluate_at(const ScalarField& w, double x1, double x2);

/// Max |w| on the outermost ring of grid cells divided by max |w|.
double boundary_ratio(const ScalarField& w);

// Field dump container; layout documented in docs/field-format.md.
void write_field(const std::filesystem::path& path, const ScalarField& w);
ScalarField read_field(const std::filesystem::path& path);

}  // namespace vortexlab
