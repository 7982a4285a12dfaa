#include "vortexlab/vortex.hpp"

#include <cmath>
#include <numbers>

namespace vortexlab {
namespace {

constexpr double kPi = std::numbers::pi;

// h(r) = (1 - exp(-r^2/4)) / (2 pi r^2)
double swirl(double r2) {
  if (r2 < kVelocitySeriesRadius * kVelocitySeriesRadius) {
    return (0.25 - r2 / 32.0) / (2.0 * kPi);
  }
  return -std::expm1(-0.25 * r2) / (2.0 * kPi * r2);
}

// h'(r) / r = [(r^2/2) e^{-r^2/4} - 2 (1 - e^{-r^2/4})] / (2 pi r^4)
double swirl_slope(double r2) {
  if (r2 < 1e-3) {
    // -1/16 + r^2/96 - r^4/1024 over 2 pi
    return (-1.0 / 16.0 + r2 / 96.0 - r2 * r2 / 1024.0) / (2.0 * kPi);
  }
  const double e = std::exp(-0.25 * r2);
  return (0.5 * r2 * e + 2.0 * std::expm1(-0.25 * r2)) / (2.0 * kPi * r2 * r2);
}

// phi''(rho) for phi(rho) = (1 - e^{-rho/4}) / (2 pi rho), rho = r^2
double swirl_curvature(double r2) {
  if (r2 < 4.0) {
    // sum_{k>=2} (-1)^k k (k-1) rho^{k-2} / (4^{k+1} (k+1)!)
    double term = 2.0 / (64.0 * 6.0), acc = 0.0;
    for (int k = 2; k < 40; ++k) {
      acc += term;
      term *= -r2 * (k + 1.0) / ((k - 1.0) * 4.0 * (k + 2.0));
    }
    return acc / (2.0 * kPi);
  }
  const double e = std::exp(-0.25 * r2);
  return (-r2 * r2 * e / 16.0 - 0.5 * r2 * e - 2.0 * std::expm1(-0.25 * r2)) /
         (2.0 * kPi * r2 * r2 * r2);
}

template <class F>
ScalarField sample(const Grid2D& grid, F&& f) {
  ScalarField out(grid);
  for (int i = 0; i < grid.n; ++i) {
    const double x1 = grid.coord(i);
    for (int j = 0; j < grid.n; ++j) out(i, j) = f(x1, grid.coord(j));
  }
  return out;
}

template <class F>
VectorField sample_vector(const Grid2D& grid, F&& f) {
  VectorField out(grid);
  for (int i = 0; i < grid.n; ++i) {
    const double x1 = grid.coord(i);
    for (int j = 0; j < grid.n; ++j) {
      const auto v = f(x1, grid.coord(j));
      out.u1[grid.index(i, j)] = v[0];
      out.u2[grid.index(i, j)] = v[1];
    }
  }
  return out;
}

}  // namespace

double gaussian_value(double x1, double x2) {
  return std::exp(-0.25 * (x1 * x1 + x2 * x2)) / (4.0 * kPi);
}

std::array<double, 2> oseen_velocity_value(double x1, double x2) {
  const double h = swirl(x1 * x1 + x2 * x2);
  return {-x2 * h, x1 * h};
}

std::array<double, 2> dipole_velocity_value(int j, double x1, double x2) {
  const double r2 = x1 * x1 + x2 * x2;
  const double h = swirl(r2);
  const double q = swirl_slope(r2);
  if (j == 0) return {x1 * x2 * q, -h - x1 * x1 * q};
  return {h + x2 * x2 * q, -x1 * x2 * q};
}

double quadrupole_value(int a, int b, double x1, double x2) {
  const double y[2] = {x1, x2};
  return gaussian_value(x1, x2) * (0.25 * y[a] * y[b] - (a == b ? 0.5 : 0.0));
}

std::array<double, 2> quadrupole_velocity_value(int a, int b, double x1, double x2) {
  // v^G = y^perp phi(|y|^2):
  // d_a d_b v = 2 phi' (y_b e_a^perp + y_a e_b^perp) + y^perp (2 delta_ab phi' + 4 y_a y_b phi'')
  const double r2 = x1 * x1 + x2 * x2;
  const double p1 = 0.5 * swirl_slope(r2);
  const double p2 = swirl_curvature(r2);
  const double y[2] = {x1, x2};
  const std::array<double, 2> perp[2] = {{0.0, 1.0}, {-1.0, 0.0}};
  const double c = 2.0 * (a == b ? p1 : 0.0) + 4.0 * y[a] * y[b] * p2;
  std::array<double, 2> v{-x2 * c, x1 * c};
  for (int k = 0; k < 2; ++k) v[k] += 2.0 * p1 * (y[b] * perp[a][k] + y[a] * perp[b][k]);
  return v;
}

ScalarField gaussian_G(const Grid2D& grid) { return gaussian_scaled(grid, 1.0); }

VectorField oseen_velocity_vG(const Grid2D& grid) {
  return oseen_velocity_scaled(grid, 1.0);
}

ScalarField gaussian_scaled(const Grid2D& grid, double scale) {
  const double inv = 1.0 / scale;
  return sample(grid, [&](double x1, double x2) {
    return gaussian_value(x1 * inv, x2 * inv) * inv * inv;
  });
}

VectorField oseen_velocity_scaled(const Grid2D& grid, double scale) {
  const double inv = 1.0 / scale;
  return sample_vector(grid, [&](double x1, double x2) {
    auto v = oseen_velocity_value(x1 * inv, x2 * inv);
    return std::array<double, 2>{v[0] * inv, v[1] * inv};
  });
}

ScalarField dipole_scaled(const Grid2D& grid, int j, double scale) {
  const double inv = 1.0 / scale;
  return sample(grid, [&](double x1, double x2) {
    const double y1 = x1 * inv, y2 = x2 * inv;
    const double xj = j == 0 ? y1 : y2;
    return 0.5 * xj * gaussian_value(y1, y2) * inv * inv * inv;
  });
}

VectorField dipole_velocity_scaled(const Grid2D& grid, int j, double scale) {
  const double inv = 1.0 / scale;
  return sample_vector(grid, [&](double x1, double x2) {
    auto v = dipole_velocity_value(j, x1 * inv, x2 * inv);
    return std::array<double, 2>{v[0] * inv * inv, v[1] * inv * inv};
  });
}

ScalarField quadrupole_scaled(const Grid2D& grid, int a, int b, double scale) {
  const double inv = 1.0 / scale;
  const double f = inv * inv * inv * inv;
  return sample(grid, [&](double x1, double x2) { return quadrupole_value(a, b, x1 * inv, x2 * inv) * f; });
}

VectorField quadrupole_velocity_scaled(const Grid2D& grid, int a, int b, double scale) {
  const double inv = 1.0 / scale;
  const double f = inv * inv * inv;
  return sample_vector(grid, [&](double x1, double x2) {
    auto v = quadrupole_velocity_value(a, b, x1 * inv, x2 * inv);
    return std::array<double, 2>{v[0] * f, v[1] * f};
  });
}

ScalarField dipole_F(const Grid2D& grid, int j) {
  return dipole_scaled(grid, j, 1.0);
}

ScalarField laplacian_G(const Grid2D& grid) {
  return sample(grid, [](double x1, double x2) {
    return 0.25 * (x1 * x1 + x2 * x2 - 4.0) * gaussian_value(x1, x2);
  });
}

std::vector<FrozenEigenfunction> frozen_eigenfunctions(const Grid2D& grid) {
  std::vector<FrozenEigenfunction> out;
  out.push_back({"G", 0.0, gaussian_G(grid)});
  out.push_back({"F1", -0.5, dipole_F(grid, 0)});
  out.push_back({"F2", -0.5, dipole_F(grid, 1)});
  out.push_back({"LaplacianG", -1.0, laplacian_G(grid)});
  out.push_back({"D11minusD22G", -1.0, sample(grid, [](double x1, double x2) {
                   return 0.25 * (x1 * x1 - x2 * x2) * gaussian_value(x1, x2);
                 })});
  out.push_back({"D12G", -1.0, sample(grid, [](double x1, double x2) {
                   return 0.25 * x1 * x2 * gaussian_value(x1, x2);
                 })});
  return out;
}

OseenState oseen_unscaled(const Grid2D& grid, double t,
                          const VortexParams& params) {
  if (!(t > 0.0)) throw Error("oseen_unscaled: time must be positive");
  const double s = std::sqrt(t);
  OseenState state{params.alpha * gaussian_scaled(grid, s),
                   oseen_velocity_scaled(grid, s)};
  state.vorticity.frame = Frame::unscaled;
  state.vorticity.time = t;
  for (double& v : state.velocity.u1) v *= params.alpha;
  for (double& v : state.velocity.u2) v *= params.alpha;
  return state;
}

}  // namespace vortexlab
