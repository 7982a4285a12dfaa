#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace vortexlab::kernels {

// Inner loops of the pseudo-spectral solver and the grid quadratures.
// Every entry has a scalar reference implementation; SIMD variants are
// selected once at startup from the CPU features and must agree with the
// reference to rounding (see tests/test_kernels.cpp).
struct KernelTable {
  std::string_view name;

  // out[i] = -(u[i] * wx[i] + v[i] * wy[i])
  void (*advect)(const double* u, const double* v, const double* wx,
                 const double* wy, double* out, std::size_t count);

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t count);

  // z[i] *= m[i]  (real Fourier multiplier applied to a complex spectrum)
  void (*scale_complex)(std::complex<double>* z, const double* m,
                        std::size_t count);

  // sum_i weight[i] * x[i]^2
  double (*weighted_sum_squares)(const double* weight, const double* x,
                                 std::size_t count);

  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t count);

  // sum_i x[i]
  double (*sum)(const double* x, std::size_t count);
};

const KernelTable& scalar_table() noexcept;

// Null when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

// The table used by the library. Chosen on first call: the best supported
// SIMD variant, unless VORTEXLAB_KERNELS=scalar|avx2|neon overrides it.
const KernelTable& active() noexcept;

// Force a variant by name ("scalar", "avx2", "neon"). Returns false and
// leaves the selection unchanged if the variant is unavailable.
bool select(std::string_view name) noexcept;

inline void advect(std::span<const double> u, std::span<const double> v,
                   std::span<const double> wx, std::span<const double> wy,
                   std::span<double> out) {
  active().advect(u.data(), v.data(), wx.data(), wy.data(), out.data(),
                  out.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), y.size());
}

inline void scale_complex(std::span<std::complex<double>> z,
                          std::span<const double> m) {
  active().scale_complex(z.data(), m.data(), z.size());
}

inline double weighted_sum_squares(std::span<const double> weight,
                                   std::span<const double> x) {
  return active().weighted_sum_squares(weight.data(), x.data(), x.size());
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline double sum(std::span<const double> x) {
  return active().sum(x.data(), x.size());
}

}  // namespace vortexlab::kernels
