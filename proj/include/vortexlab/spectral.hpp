#pragma once

#include <array>
#include <memory>
#include <span>

#include "vortexlab/grid.hpp"

namespace vortexlab {

/// FFT plans and wavenumber tables for one periodic grid. Real-to-complex
/// layout: n rows (first axis, all frequencies) by n/2 + 1 columns (second
/// axis, non-negative frequencies). Instances are immutable after
/// construction and safe to share across threads.
class Spectral {
 public:
  explicit Spectral(const Grid2D& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  /// Cached instance per grid.
  static std::shared_ptr<const Spectral> for_grid(const Grid2D& grid);

  const Grid2D& grid() const noexcept { return grid_; }
  int columns() const noexcept { return grid_.n / 2 + 1; }
  std::size_t spectrum_size() const noexcept {
    return static_cast<std::size_t>(grid_.n) * columns();
  }

  /// Signed integer frequency of row i (Nyquist row reported as -n/2).
  int frequency1(int i) const noexcept { return i <= grid_.n / 2 - 1 ? i : i - grid_.n; }
  int frequency2(int j) const noexcept { return j; }

  std::span<const double> k1() const noexcept { return k1_; }
  std::span<const double> k2() const noexcept { return k2_; }
  /// |k|^2 per spectral coefficient.
  std::span<const double> k_squared() const noexcept { return ksq_; }
  /// 1 for retained coefficients of the two-thirds rule, else 0.
  std::span<const double> dealias_mask() const noexcept { return dealias_; }

  /// Unnormalized forward transform.
  void forward(std::span<const double> in, ComplexVector& out) const;
  /// Normalized inverse transform; `in` is not modified.
  void inverse(const ComplexVector& in, RealVector& out) const;

  /// out = i k_axis * in, with the Nyquist frequency of that axis removed.
  void derivative(const ComplexVector& in, int axis, ComplexVector& out) const;

  /// Spectral partial derivatives of a real field.
  void gradient(std::span<const double> w, RealVector& d1, RealVector& d2) const;

  /// Spectral Laplacian of a real field.
  void laplacian(std::span<const double> w, RealVector& out) const;

 private:
  Grid2D grid_;
  RealVector k1_, k2_, d1_, d2_, ksq_, dealias_;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
};

/// w(xi + b) by a spectral phase shift.
ScalarField translate(const ScalarField& w, std::array<double, 2> b);

/// max|div v| / max|grad v| on the disk |xi| <= 0.6 L. Velocities of
/// fields with nonzero circulation decay like 1/|xi| and are not periodic,
/// so the derivatives are taken of chi v for a smooth radial cutoff chi
/// and the known term grad chi . v is subtracted.
double spectral_divergence_relative(const VectorField& v);

}  // namespace vortexlab
