#include "vortexlab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace vortexlab {
namespace {

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Spectral::Spectral(const Grid2D& grid) : grid_(grid) {
  const int n = grid_.n;
  const int nc = columns();
  const double dk = std::numbers::pi / grid_.half_width;

  k1_.resize(n);
  d1_.resize(n);
  for (int i = 0; i < n; ++i) {
    k1_[i] = dk * frequency1(i);
    d1_[i] = (i == n / 2) ? 0.0 : k1_[i];
  }
  k2_.resize(nc);
  d2_.resize(nc);
  for (int j = 0; j < nc; ++j) {
    k2_[j] = dk * j;
    d2_[j] = (j == n / 2) ? 0.0 : k2_[j];
  }

  const int cutoff = n / 3;
  ksq_.resize(spectrum_size());
  dealias_.resize(spectrum_size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nc; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * nc + j;
      ksq_[k] = k1_[i] * k1_[i] + k2_[j] * k2_[j];
      const bool keep = std::abs(frequency1(i)) <= cutoff && j <= cutoff;
      dealias_[k] = keep ? 1.0 : 0.0;
    }
  }

  RealVector real(grid_.size());
  ComplexVector spec(spectrum_size());
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_forward_ = fftw_plan_dft_r2c_2d(
      n, n, real.data(), reinterpret_cast<fftw_complex*>(spec.data()),
      FFTW_ESTIMATE);
  plan_inverse_ = fftw_plan_dft_c2r_2d(
      n, n, reinterpret_cast<fftw_complex*>(spec.data()), real.data(),
      FFTW_ESTIMATE);
  if (plan_forward_ == nullptr || plan_inverse_ == nullptr) {
    throw Error("spectral: FFTW planning failed");
  }
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

std::shared_ptr<const Spectral> Spectral::for_grid(const Grid2D& grid) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const Spectral>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = std::make_pair(grid.n, grid.half_width);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto made = std::make_shared<const Spectral>(grid);
  cache.emplace(key, made);
  return made;
}

void Spectral::forward(std::span<const double> in, ComplexVector& out) const {
  if (in.size() != grid_.size()) throw Error("spectral: size mismatch");
  RealVector buffer(in.begin(), in.end());
  out.resize(spectrum_size());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), buffer.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void Spectral::inverse(const ComplexVector& in, RealVector& out) const {
  if (in.size() != spectrum_size()) throw Error("spectral: size mismatch");
  ComplexVector buffer = in;  // c2r overwrites its input
  out.resize(grid_.size());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_),
                       reinterpret_cast<fftw_complex*>(buffer.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (double& v : out) v *= scale;
}

void Spectral::derivative(const ComplexVector& in, int axis,
                          ComplexVector& out) const {
  const int n = grid_.n;
  const int nc = columns();
  out.resize(spectrum_size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nc; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * nc + j;
      const double kk = axis == 0 ? d1_[i] : d2_[j];
      out[k] = std::complex<double>(-kk * in[k].imag(), kk * in[k].real());
    }
  }
}

void Spectral::gradient(std::span<const double> w, RealVector& d1,
                        RealVector& d2) const {
  ComplexVector hat, tmp;
  forward(w, hat);
  derivative(hat, 0, tmp);
  inverse(tmp, d1);
  derivative(hat, 1, tmp);
  inverse(tmp, d2);
}

void Spectral::laplacian(std::span<const double> w, RealVector& out) const {
  ComplexVector hat;
  forward(w, hat);
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= -ksq_[k];
  inverse(hat, out);
}

ScalarField translate(const ScalarField& w, std::array<double, 2> b) {
  auto spec = Spectral::for_grid(w.grid);
  ComplexVector hat;
  spec->forward(w.values, hat);
  const int n = w.grid.n;
  const int nc = spec->columns();
  const auto k1 = spec->k1();
  const auto k2 = spec->k2();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nc; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * nc + j;
      // The Nyquist coefficients carry no phase information for real data.
      if (i == n / 2 || j == n / 2) {
        hat[k] = 0.0;
        continue;
      }
      const double phase = k1[i] * b[0] + k2[j] * b[1];
      hat[k] *= std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  ScalarField out(w.grid, w.frame, w.time);
  spec->inverse(hat, out.values);
  return out;
}

double spectral_divergence_relative(const VectorField& v) {
  const Grid2D& grid = v.grid;
  auto spec = Spectral::for_grid(grid);
  const double r0 = 0.6 * grid.half_width;
  const double width = 0.8;
  const std::size_t size = grid.size();
  RealVector cu1(size), cu2(size), gx(size), gy(size), inside(size);
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      const std::size_t k = grid.index(i, j);
      const double x1 = grid.coord(i), x2 = grid.coord(j);
      const double r = std::hypot(x1, x2);
      const double t = (r - r0) / width;
      const double chi = 0.5 * std::erfc(t);
      // d chi / dr, so grad chi = chi' xi / r
      const double slope = -std::exp(-t * t) / (width * std::sqrt(std::numbers::pi));
      cu1[k] = chi * v.u1[k];
      cu2[k] = chi * v.u2[k];
      gx[k] = r > 0.0 ? slope * x1 / r : 0.0;
      gy[k] = r > 0.0 ? slope * x2 / r : 0.0;
      inside[k] = r <= r0 ? 1.0 : 0.0;
    }
  }
  RealVector d11, d12, d21, d22;
  spec->gradient(cu1, d11, d12);
  spec->gradient(cu2, d21, d22);
  double div = 0.0, grad = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    if (inside[k] == 0.0) continue;
    // d_a(chi u_b) - u_b d_a chi
    const double a11 = d11[k] - v.u1[k] * gx[k];
    const double a12 = d12[k] - v.u1[k] * gy[k];
    const double a21 = d21[k] - v.u2[k] * gx[k];
    const double a22 = d22[k] - v.u2[k] * gy[k];
    div = std::max(div, std::abs(a11 + a22));
    grad = std::max({grad, std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
  }
  return grad > 0.0 ? div / grad : 0.0;
}

}  // namespace vortexlab
