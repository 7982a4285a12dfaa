#include "vortexlab/biot_savart.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "vortexlab/kernels.hpp"
#include "vortexlab/vortex.hpp"

namespace vortexlab {

BiotSavart::BiotSavart(const Grid2D& grid, double scale)
    : grid_(grid), scale_(scale), spec_(Spectral::for_grid(grid)) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error("biot_savart: core scale must be positive");
  }
  g_ = gaussian_scaled(grid, scale);
  vg_ = oseen_velocity_scaled(grid, scale);
  spec_->forward(g_.values, g_hat_);
  for (int j = 0; j < 2; ++j) {
    f_[j] = dipole_scaled(grid, j, scale);
    vf_[j] = dipole_velocity_scaled(grid, j, scale);
    spec_->forward(f_[j].values, f_hat_[j]);
  }
  const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int q = 0; q < 3; ++q) {
    vq_[q] = quadrupole_velocity_scaled(grid, pairs[q][0], pairs[q][1], scale);
    spec_->forward(quadrupole_scaled(grid, pairs[q][0], pairs[q][1], scale).values, q_hat_[q]);
  }
}

void BiotSavart::velocity_from_spectrum(const ComplexVector& w_hat,
                                        const MomentSet& mom, bool dealias,
                                        RealVector& u1, RealVector& u2) const {
  const auto ksq = spec_->k_squared();
  const auto mask = spec_->dealias_mask();
  // int xi_a xi_b G_s = 2 s^2 delta_ab; int xi_a xi_b d_c d_d G_s is 1 for
  // each pairing of (a, b) with (c, d); F_j,s has no second moments.
  const double s2 = 2.0 * scale_ * scale_;
  const double c[3] = {0.5 * (mom.m11 - s2 * mom.alpha), mom.m12, 0.5 * (mom.m22 - s2 * mom.alpha)};
  ComplexVector psi(w_hat.size());
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const std::complex<double> r = w_hat[k] - mom.alpha * g_hat_[k] -
                                   mom.beta1 * f_hat_[0][k] -
                                   mom.beta2 * f_hat_[1][k] - c[0] * q_hat_[0][k] -
                                   c[1] * q_hat_[1][k] - c[2] * q_hat_[2][k];
    psi[k] = ksq[k] > 0.0 ? r / ksq[k] : 0.0;
    if (dealias) psi[k] *= mask[k];
  }
  // v = (d_2 psi, -d_1 psi) with -Delta psi = R.
  ComplexVector tmp;
  spec_->derivative(psi, 1, tmp);
  spec_->inverse(tmp, u1);
  spec_->derivative(psi, 0, tmp);
  spec_->inverse(tmp, u2);
  for (double& v : u2) v = -v;

  kernels::axpy(mom.alpha, vg_.u1, u1);
  kernels::axpy(mom.alpha, vg_.u2, u2);
  for (int j = 0; j < 2; ++j) {
    const double b = j == 0 ? mom.beta1 : mom.beta2;
    kernels::axpy(b, vf_[j].u1, u1);
    kernels::axpy(b, vf_[j].u2, u2);
  }
  for (int q = 0; q < 3; ++q) {
    kernels::axpy(c[q], vq_[q].u1, u1);
    kernels::axpy(c[q], vq_[q].u2, u2);
  }
}

VectorField BiotSavart::velocity(const ScalarField& w, Diagnostics* diag) const {
  if (!(w.grid == grid_)) throw Error("biot_savart: grid mismatch");
  require_finite(w, "velocity_spectral");
  const double edge = boundary_ratio(w);
  if (edge > kTruncationTolerance) {
    warn(diag, "velocity_spectral: field not negligible at the box boundary "
               "(ratio " + std::to_string(edge) + ")");
  }
  ComplexVector hat;
  spec_->forward(w.values, hat);
  VectorField v(grid_);
  velocity_from_spectrum(hat, moments(w), false, v.u1, v.u2);
  return v;
}

std::shared_ptr<const BiotSavart> BiotSavart::scaled(const Grid2D& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const BiotSavart>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{grid.n, grid.half_width}];
  if (!slot) slot = std::make_shared<const BiotSavart>(grid, 1.0);
  return slot;
}

VectorField velocity_spectral(const ScalarField& w, Diagnostics* diag) {
  double scale = 1.0;
  if (w.frame == Frame::unscaled) {
    if (!(w.time > 0.0)) throw Error("velocity_spectral: unscaled field needs t > 0");
    scale = std::sqrt(w.time);
  }
  if (scale == 1.0) return BiotSavart::scaled(w.grid)->velocity(w, diag);
  return BiotSavart(w.grid, scale).velocity(w, diag);
}

VectorField velocity_direct(const ScalarField& w, int cap) {
  const Grid2D& grid = w.grid;
  if (grid.n > cap) {
    throw Error("velocity_direct: grid n = " + std::to_string(grid.n) +
                " exceeds the oracle cap " + std::to_string(cap));
  }
  require_finite(w, "velocity_direct");
  const int n = grid.n;
  const double h = grid.spacing();
  RealVector g1, g2;
  Spectral::for_grid(grid)->gradient(w.values, g1, g2);

  // Punctured sum over the sublattice through the target with stride
  // `step`, plus the skipped cell: K(x)(-x . grad w) has angular mean
  // (d_2 w, -d_1 w) / (4 pi).
  auto punctured = [&](int i, int j, int step) {
    const double hs = h * step;
    double s1 = 0.0, s2 = 0.0;
    for (int p = i % step; p < n; p += step) {
      const double d1 = (i - p) * h;
      for (int q = j % step; q < n; q += step) {
        if (p == i && q == j) continue;
        const double d2 = (j - q) * h;
        const double wk = w(p, q) / (d1 * d1 + d2 * d2);
        s1 -= d2 * wk;
        s2 += d1 * wk;
      }
    }
    const double c = hs * hs / (2.0 * std::numbers::pi);
    const std::size_t k = grid.index(i, j);
    return std::array<double, 2>{c * (s1 + 0.5 * g2[k]), c * (s2 - 0.5 * g1[k])};
  };

  // What remains after the local correction is an h^4 lattice error;
  // one Richardson step against the stride-2 sublattice removes it.
  VectorField v(grid);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto fine = punctured(i, j, 1);
      const auto coarse = punctured(i, j, 2);
      v.u1[grid.index(i, j)] = (16.0 * fine[0] - coarse[0]) / 15.0;
      v.u2[grid.index(i, j)] = (16.0 * fine[1] - coarse[1]) / 15.0;
    }
  }
  return v;
}

double weighted_virial(const ScalarField& w, const VectorField& v) {
  if (!(w.grid == v.grid)) throw Error("weighted_virial: grid mismatch");
  const auto& t = coordinate_tables(w.grid);
  double acc = 0.0;
  for (std::size_t k = 0; k < w.grid.size(); ++k) {
    acc += (t.xi1[k] * v.u1[k] + t.xi2[k] * v.u2[k]) * w.values[k];
  }
  return w.grid.cell_area() * acc;
}

}  // namespace vortexlab
