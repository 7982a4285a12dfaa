#pragma once

// Reference quadrature written independently of the library: Gauss-Legendre
// nodes by Newton iteration on P_n, tensor/composite rules on boxes and
// radial integrals. Used to freeze expected values for the unit tests.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct Rule {
  std::vector<double> x, w;
};

inline Rule gauss_legendre(int n) {
  Rule r{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Composite rule on [a, b] with `panels` equal panels of `order` points.
template <class F>
double integrate(F f, double a, double b, int panels = 64, int order = 20) {
  const Rule r = gauss_legendre(order);
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int q = 0; q < order; ++q) acc += 0.5 * h * r.w[q] * f(mid + 0.5 * h * r.x[q]);
  }
  return acc;
}

// Tensor rule on [-L, L]^2.
template <class F>
double integrate_box(F f, double L, int panels = 48, int order = 16) {
  return integrate([&](double x) { return integrate([&](double y) { return f(x, y); }, -L, L, panels, order); },
                   -L, L, panels, order);
}

inline double G(double x, double y) {
  return std::exp(-(x * x + y * y) / 4.0) / (4.0 * std::numbers::pi);
}

}  // namespace oracle
