#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vortexlab/kernels.hpp"

using namespace vortexlab;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(gen);
  return v;
}

// Every compiled-in SIMD table against the scalar reference, on lengths
// that exercise the vector body and the scalar tail.
void compare(const kernels::KernelTable& simd) {
  const auto& ref = kernels::scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 31u, 64u, 1001u, 65536u}) {
    CAPTURE(n);
    const auto u = random_vector(n, 1), v = random_vector(n, 2), wx = random_vector(n, 3),
               wy = random_vector(n, 4), weight = random_vector(n, 5);
    std::vector<double> a(n), b(n);
    ref.advect(u.data(), v.data(), wx.data(), wy.data(), a.data(), n);
    simd.advect(u.data(), v.data(), wx.data(), wy.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-15));

    a = wx;
    b = wx;
    ref.axpy(0.37, u.data(), a.data(), n);
    simd.axpy(0.37, u.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-15));

    std::vector<std::complex<double>> za(n), zb(n);
    for (std::size_t i = 0; i < n; ++i) za[i] = zb[i] = {u[i], v[i]};
    ref.scale_complex(za.data(), weight.data(), n);
    simd.scale_complex(zb.data(), weight.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(za[i] == zb[i]);

    // Reductions reassociate; agreement to a few ulps of the magnitude.
    const double scale = static_cast<double>(n) + 1.0;
    CHECK(std::abs(simd.weighted_sum_squares(weight.data(), u.data(), n) -
                   ref.weighted_sum_squares(weight.data(), u.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(simd.dot(u.data(), v.data(), n) - ref.dot(u.data(), v.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(simd.sum(u.data(), n) - ref.sum(u.data(), n)) <= 1e-14 * scale);
  }
}

}  // namespace

TEST_CASE("scalar kernels compute the documented formulas") {
  const auto& k = kernels::scalar_table();
  const double u[] = {1, 2}, v[] = {3, 4}, wx[] = {5, 6}, wy[] = {7, 8};
  double out[2];
  k.advect(u, v, wx, wy, out, 2);
  CHECK(out[0] == -(1 * 5 + 3 * 7));
  CHECK(out[1] == -(2 * 6 + 4 * 8));
  CHECK(k.weighted_sum_squares(u, v, 2) == 1 * 9 + 2 * 16);
  CHECK(k.dot(u, v, 2) == 11);
  CHECK(k.sum(wy, 2) == 15);
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  const auto* t = kernels::avx2_table();
  if (t == nullptr) {
    MESSAGE("AVX2 variant unavailable on this machine; skipped");
    return;
  }
  compare(*t);
}

TEST_CASE("NEON kernels match the scalar reference") {
  const auto* t = kernels::neon_table();
  if (t == nullptr) {
    MESSAGE("NEON variant unavailable on this machine; skipped");
    return;
  }
  compare(*t);
}

TEST_CASE("runtime selection") {
  const std::string_view before = kernels::active().name;
  CHECK(kernels::select("scalar"));
  CHECK(kernels::active().name == "scalar");
  CHECK_FALSE(kernels::select("no-such-variant"));
  CHECK(kernels::active().name == "scalar");
  CHECK(kernels::select(before));
}
