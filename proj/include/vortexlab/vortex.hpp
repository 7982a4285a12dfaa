#pragma once

#include <array>
#include <string>
#include <vector>

#include "vortexlab/grid.hpp"

namespace vortexlab {

/// Circulation Reynolds number of an Oseen vortex.
struct VortexParams {
  double alpha = 1.0;
};

// Closed forms of the Gaussian G(xi) = exp(-|xi|^2 / 4) / (4 pi) and its
// velocity v^G. Below this radius v^G uses its Taylor expansion.
inline constexpr double kVelocitySeriesRadius = 1e-4;

double gaussian_value(double x1, double x2);

/// v^G = xi^perp h(|xi|), h(r) = (1 - exp(-r^2/4)) / (2 pi r^2).
std::array<double, 2> oseen_velocity_value(double x1, double x2);

/// Velocity of F_j = -d_j G, i.e. -d_j v^G (j = 0 or 1).
std::array<double, 2> dipole_velocity_value(int j, double x1, double x2);

/// d_a d_b G and its velocity d_a d_b v^G (a, b in {0, 1}).
double quadrupole_value(int a, int b, double x1, double x2);
std::array<double, 2> quadrupole_velocity_value(int a, int b, double x1, double x2);

ScalarField gaussian_G(const Grid2D& grid);
VectorField oseen_velocity_vG(const Grid2D& grid);

/// Scaled copies G_s(x) = G(x/s)/s^2 and its velocity v^G(x/s)/s.
ScalarField gaussian_scaled(const Grid2D& grid, double scale);
VectorField oseen_velocity_scaled(const Grid2D& grid, double scale);

/// F_j,s(x) = -d_j G_s(x) and its velocity -d_j v^{G_s}.
ScalarField dipole_scaled(const Grid2D& grid, int j, double scale);
VectorField dipole_velocity_scaled(const Grid2D& grid, int j, double scale);

/// d_a d_b G_s(x) and its velocity d_a d_b v^{G_s}.
ScalarField quadrupole_scaled(const Grid2D& grid, int a, int b, double scale);
VectorField quadrupole_velocity_scaled(const Grid2D& grid, int a, int b, double scale);

struct FrozenEigenfunction {
  std::string name;
  double eigenvalue = 0.0;  // under the linearized operator, any alpha
  ScalarField field;
};

/// G, F_1, F_2, Delta G, (d_1^2 - d_2^2) G and d_1 d_2 G, evaluated in
/// closed form (eigenvalues 0, -1/2, -1/2, -1, -1, -1 of L).
std::vector<FrozenEigenfunction> frozen_eigenfunctions(const Grid2D& grid);

ScalarField dipole_F(const Grid2D& grid, int j);
ScalarField laplacian_G(const Grid2D& grid);

struct OseenState {
  ScalarField vorticity;
  VectorField velocity;
};

/// omega(x, t) = (alpha / t) G(x / sqrt t), u = (alpha / sqrt t) v^G(x / sqrt t).
OseenState oseen_unscaled(const Grid2D& grid, double t,
                          const VortexParams& params);

}  // namespace vortexlab
