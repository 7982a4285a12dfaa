#pragma once

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortexlab {

/// Raised for invalid arguments and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T, std::size_t Alignment = 64>
struct AlignedAllocator {
  using value_type = T;

  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) noexcept {}

  T* allocate(std::size_t count) {
    std::size_t bytes = count * sizeof(T);
    bytes = (bytes + Alignment - 1) / Alignment * Alignment;
    void* p = std::aligned_alloc(Alignment, bytes == 0 ? Alignment : bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Alignment>&) const noexcept {
    return true;
  }
};

using RealVector = std::vector<double, AlignedAllocator<double>>;
using ComplexVector =
    std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

/// Uniform periodic grid on the square [-L, L)^2 with n points per axis.
/// Index (i, j) sits at (-L + i h, -L + j h); i runs along the first
/// coordinate and values are stored row-major as values[i * n + j].
struct Grid2D {
  int n = 0;
  double half_width = 0.0;

  Grid2D() = default;
  Grid2D(int points_per_axis, double half_width_);

  double spacing() const noexcept { return 2.0 * half_width / n; }
  double cell_area() const noexcept { return spacing() * spacing(); }
  double coord(int i) const noexcept { return -half_width + i * spacing(); }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
           static_cast<std::size_t>(j);
  }

  bool operator==(const Grid2D&) const = default;
};

/// Similarity-variable frame (xi, tau) or physical frame (x, t).
enum class Frame { scaled, unscaled };

std::string to_string(Frame frame);
Frame frame_from_string(const std::string& text);

struct ScalarField {
  Grid2D grid;
  RealVector values;
  Frame frame = Frame::scaled;
  double time = 0.0;  // tau in the scaled frame, t in the unscaled frame

  ScalarField() = default;
  explicit ScalarField(const Grid2D& g, Frame f = Frame::scaled, double t = 0.0)
      : grid(g), values(g.size(), 0.0), frame(f), time(t) {}

  double& operator()(int i, int j) noexcept { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const noexcept {
    return values[grid.index(i, j)];
  }
  std::span<double> span() noexcept { return values; }
  std::span<const double> span() const noexcept { return values; }
};

struct VectorField {
  Grid2D grid;
  RealVector u1;
  RealVector u2;

  VectorField() = default;
  explicit VectorField(const Grid2D& g)
      : grid(g), u1(g.size(), 0.0), u2(g.size(), 0.0) {}
};

/// Collects non-fatal numerical warnings (box truncation, CFL, ...).
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const noexcept { return warnings.empty(); }
};

inline void warn(Diagnostics* sink, std::string message) {
  if (sink != nullptr) sink->warn(std::move(message));
}

// Field arithmetic; operands must share a grid.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
ScalarField& operator+=(ScalarField& a, const ScalarField& b);
ScalarField& operator-=(ScalarField& a, const ScalarField& b);

/// Throws unless every value is finite.
void require_finite(const ScalarField& w, const char* context);

/// Max |a - b| over the grid.
double max_abs_difference(const ScalarField& a, const ScalarField& b);
double max_abs(const ScalarField& w);

}  // namespace vortexlab
