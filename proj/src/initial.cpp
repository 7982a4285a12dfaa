#include "vortexlab/initial.hpp"

#include <cmath>
#include <numbers>

#include "vortexlab/fields.hpp"
#include "vortexlab/spectral.hpp"
#include "vortexlab/vortex.hpp"

namespace vortexlab {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += W0;
    k[1] += W1;
  }
  return c;
}

ScalarField gaussian_noise(const Grid2D& grid, std::uint64_t seed, std::uint32_t stream) {
  ScalarField f(grid);
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                         static_cast<std::uint32_t>(seed >> 32)};
  const std::size_t total = grid.size();
  for (std::size_t p = 0; p < total; p += 2) {
    const auto r = philox4x32({static_cast<std::uint32_t>(p / 2), stream, 0, 0}, key);
    // 53-bit uniforms in (0, 1]
    const double u1 = ((static_cast<std::uint64_t>(r[0]) << 21 ^ r[1] >> 11) + 1.0) * 0x1p-53;
    const double u2 = ((static_cast<std::uint64_t>(r[2]) << 21 ^ r[3] >> 11) + 0.5) * 0x1p-53;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    f.values[p] = rad * std::cos(th);
    if (p + 1 < total) f.values[p + 1] = rad * std::sin(th);
  }
  return f;
}

ScalarField smooth_noise(const Grid2D& grid, std::uint64_t seed, double ell, bool even) {
  if (!(ell > 0.0)) throw Error("smooth_noise: correlation length must be positive");
  ScalarField f = gaussian_noise(grid, seed);
  const auto spec = Spectral::for_grid(grid);
  ComplexVector hat(spec->spectrum_size());
  spec->forward(f.values, hat);
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < spec->columns(); ++j) {
      const std::size_t q = static_cast<std::size_t>(i) * spec->columns() + j;
      hat[q] *= std::exp(-0.5 * spec->k_squared()[q] * ell * ell);
    }
  }
  // Nyquist rows/columns carry no sign-consistent phase; drop them.
  for (int j = 0; j < spec->columns(); ++j) hat[static_cast<std::size_t>(grid.n / 2) * spec->columns() + j] = 0.0;
  for (int i = 0; i < grid.n; ++i) hat[static_cast<std::size_t>(i) * spec->columns() + grid.n / 2] = 0.0;
  spec->inverse(hat, f.values);
  if (even) {
    // xi -> -xi maps index i to (n - i) mod n
    ScalarField g = f;
    const int n = grid.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = 0.5 * (f(i, j) + f((n - i) % n, (n - j) % n));
    f = std::move(g);
  }
  const double peak = max_abs(f);
  if (peak == 0.0) throw Error("smooth_noise: degenerate field");
  for (double& v : f.values) v /= peak;
  return f;
}

std::string to_string(Family f) {
  switch (f) {
    case Family::oseen: return "oseen";
    case Family::shifted_oseen: return "shifted-oseen";
    case Family::dipole: return "dipole";
    case Family::random_smooth: return "random-smooth";
    case Family::file: return "file";
  }
  return "oseen";
}

Family family_from_string(const std::string& text) {
  for (Family f : {Family::oseen, Family::shifted_oseen, Family::dipole, Family::random_smooth,
                   Family::file}) {
    if (to_string(f) == text) return f;
  }
  throw Error("unknown initial-condition family '" + text + "'");
}

void InitialCondition::validate() const {
  if (!std::isfinite(alpha)) throw Error("initial condition: alpha must be finite");
  if (!std::isfinite(shift[0]) || !std::isfinite(shift[1]))
    throw Error("initial condition: shift must be finite");
  if (family == Family::random_smooth) {
    if (!(correlation_length > 0.0)) throw Error("initial condition: correlation length must be positive");
    if (!std::isfinite(amplitude)) throw Error("initial condition: amplitude must be finite");
  }
  if (family == Family::file && path.empty()) throw Error("initial condition: file family needs a path");
}

namespace {

ScalarField shifted_gaussian(const Grid2D& grid, std::array<double, 2> a) {
  ScalarField g(grid);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) g(i, j) = gaussian_value(grid.coord(i) - a[0], grid.coord(j) - a[1]);
  return g;
}

}  // namespace

ScalarField make_initial(const Grid2D& grid, const InitialCondition& ic, Diagnostics* diag) {
  ic.validate();
  ScalarField w;
  switch (ic.family) {
    case Family::oseen:
      w = ic.alpha * gaussian_G(grid);
      break;
    case Family::shifted_oseen:
      w = ic.alpha * shifted_gaussian(grid, ic.shift);
      break;
    case Family::dipole:
      w = ic.alpha * gaussian_G(grid) + ic.amplitude * dipole_F(grid, 0);
      break;
    case Family::random_smooth: {
      w = ic.alpha * shifted_gaussian(grid, ic.shift);
      const ScalarField f = smooth_noise(grid, ic.seed, ic.correlation_length, ic.even);
      for (std::size_t p = 0; p < w.values.size(); ++p) w.values[p] *= 1.0 + ic.amplitude * f.values[p];
      // rescale so that the mass is alpha exactly
      const double mass = moments(w).alpha;
      if (mass != 0.0) w = (ic.alpha / mass) * w;
      break;
    }
    case Family::file: {
      ScalarField raw = read_field(ic.path);
      w = raw.grid == grid ? std::move(raw) : interpolate_to_grid(raw, grid, 1.0, diag);
      break;
    }
  }
  if (boundary_ratio(w) > 1e-12) {
    warn(diag, "initial condition: field not negligible at the box boundary (ratio " +
                   std::to_string(boundary_ratio(w)) + ")");
  }
  return w;
}

}  // namespace vortexlab
