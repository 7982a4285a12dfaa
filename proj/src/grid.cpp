#include "vortexlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "vortexlab/kernels.hpp"

namespace vortexlab {

Grid2D::Grid2D(int points_per_axis, double half_width_)
    : n(points_per_axis), half_width(half_width_) {
  if (n < 4 || (n & (n - 1)) != 0) {
    throw Error("grid: points per axis must be a power of two >= 4, got " +
                std::to_string(n));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error("grid: half width must be positive and finite");
  }
}

std::string to_string(Frame frame) {
  return frame == Frame::scaled ? "scaled" : "unscaled";
}

Frame frame_from_string(const std::string& text) {
  if (text == "scaled") return Frame::scaled;
  if (text == "unscaled") return Frame::unscaled;
  throw Error("unknown frame '" + text + "'");
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw Error("field arithmetic on different grids");
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out += b;
  return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out -= b;
  return out;
}

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField out = a;
  for (double& v : out.values) v *= s;
  return out;
}

ScalarField& operator+=(ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  kernels::axpy(1.0, b.values, a.values);
  return a;
}

ScalarField& operator-=(ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  kernels::axpy(-1.0, b.values, a.values);
  return a;
}

void require_finite(const ScalarField& w, const char* context) {
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    if (!std::isfinite(w.values[k])) {
      const int i = static_cast<int>(k / w.grid.n);
      const int j = static_cast<int>(k % w.grid.n);
      throw Error(std::string(context) + ": non-finite value at (" +
                  std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
}

double max_abs_difference(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  }
  return m;
}

double max_abs(const ScalarField& w) {
  double m = 0.0;
  for (double v : w.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace vortexlab
