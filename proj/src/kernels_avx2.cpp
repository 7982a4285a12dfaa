// Compiled with -mavx2 -mfma on x86-64; only reached after a runtime
// feature check in kernels_dispatch.cpp.
#include "kernels_impl.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace vortexlab::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void advect_avx2(const double* u, const double* v, const double* wx,
                 const double* wy, double* out, std::size_t count) {
  std::size_t i = 0;
  const __m256d sign = _mm256_set1_pd(-0.0);
  for (; i + 4 <= count; i += 4) {
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(wx + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(wy + i), acc);
    _mm256_storeu_pd(out + i, _mm256_xor_pd(acc, sign));
  }
  for (; i < count; ++i) out[i] = -(u[i] * wx[i] + v[i] * wy[i]);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t count) {
  std::size_t i = 0;
  const __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= count; i += 4) {
    __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < count; ++i) y[i] += a * x[i];
}

void scale_complex_avx2(std::complex<double>* z, const double* m,
                        std::size_t count) {
  auto* zd = reinterpret_cast<double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    // (m0, m0, m1, m1)
    __m128d mm = _mm_loadu_pd(m + i);
    __m256d mult = _mm256_permute4x64_pd(_mm256_castpd128_pd256(mm),
                                         _MM_SHUFFLE(1, 1, 0, 0));
    __m256d zz = _mm256_loadu_pd(zd + 2 * i);
    _mm256_storeu_pd(zd + 2 * i, _mm256_mul_pd(zz, mult));
  }
  for (; i < count; ++i) z[i] *= m[i];
}

double weighted_sum_squares_avx2(const double* weight, const double* x,
                                 std::size_t count) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    __m256d x0 = _mm256_loadu_pd(x + i);
    __m256d x1 = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(weight + i), x0), x0, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(weight + i + 4), x1), x1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < count; ++i) acc += weight[i] * x[i] * x[i];
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t count) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < count; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_avx2(const double* x, std::size_t count) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < count; ++i) acc += x[i];
  return acc;
}

}  // namespace

namespace detail {
const KernelTable* avx2_table_compiled() noexcept {
  static const KernelTable table{
      "avx2",        advect_avx2, axpy_avx2, scale_complex_avx2,
      weighted_sum_squares_avx2, dot_avx2, sum_avx2};
  return &table;
}
}  // namespace detail

}  // namespace vortexlab::kernels

#else

namespace vortexlab::kernels::detail {
const KernelTable* avx2_table_compiled() noexcept { return nullptr; }
}  // namespace vortexlab::kernels::detail

#endif
