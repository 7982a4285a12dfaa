#include "kernels_impl.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace vortexlab::kernels {
namespace {

void advect_neon(const double* u, const double* v, const double* wx,
                 const double* wy, double* out, std::size_t count) {
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    float64x2_t acc = vmulq_f64(vld1q_f64(u + i), vld1q_f64(wx + i));
    acc = vfmaq_f64(acc, vld1q_f64(v + i), vld1q_f64(wy + i));
    vst1q_f64(out + i, vnegq_f64(acc));
  }
  for (; i < count; ++i) out[i] = -(u[i] * wx[i] + v[i] * wy[i]);
}

void axpy_neon(double a, const double* x, double* y, std::size_t count) {
  std::size_t i = 0;
  const float64x2_t va = vdupq_n_f64(a);
  for (; i + 2 <= count; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < count; ++i) y[i] += a * x[i];
}

void scale_complex_neon(std::complex<double>* z, const double* m,
                        std::size_t count) {
  auto* zd = reinterpret_cast<double*>(z);
  for (std::size_t i = 0; i < count; ++i) {
    vst1q_f64(zd + 2 * i, vmulq_n_f64(vld1q_f64(zd + 2 * i), m[i]));
  }
}

double weighted_sum_squares_neon(const double* weight, const double* x,
                                 std::size_t count) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    float64x2_t x0 = vld1q_f64(x + i);
    float64x2_t x1 = vld1q_f64(x + i + 2);
    acc0 = vfmaq_f64(acc0, vmulq_f64(vld1q_f64(weight + i), x0), x0);
    acc1 = vfmaq_f64(acc1, vmulq_f64(vld1q_f64(weight + i + 2), x1), x1);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < count; ++i) acc += weight[i] * x[i] * x[i];
  return acc;
}

double dot_neon(const double* x, const double* y, std::size_t count) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < count; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_neon(const double* x, std::size_t count) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(x + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < count; ++i) acc += x[i];
  return acc;
}

}  // namespace

namespace detail {
const KernelTable* neon_table_compiled() noexcept {
  static const KernelTable table{
      "neon",        advect_neon, axpy_neon, scale_complex_neon,
      weighted_sum_squares_neon, dot_neon, sum_neon};
  return &table;
}
}  // namespace detail

}  // namespace vortexlab::kernels

#else

namespace vortexlab::kernels::detail {
const KernelTable* neon_table_compiled() noexcept { return nullptr; }
}  // namespace vortexlab::kernels::detail

#endif
