#include "kernels_impl.hpp"

namespace vortexlab::kernels {
namespace {

void advect_scalar(const double* u, const double* v, const double* wx,
                   const double* wy, double* out, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = -(u[i] * wx[i] + v[i] * wy[i]);
  }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) y[i] += a * x[i];
}

void scale_complex_scalar(std::complex<double>* z, const double* m,
                          std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) z[i] *= m[i];
}

double weighted_sum_squares_scalar(const double* weight, const double* x,
                                   std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += weight[i] * x[i] * x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += x[i];
  return acc;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{
      "scalar",          advect_scalar, axpy_scalar, scale_complex_scalar,
      weighted_sum_squares_scalar, dot_scalar, sum_scalar};
  return table;
}

}  // namespace vortexlab::kernels
