#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "vortexlab/grid.hpp"

namespace vortexlab {

/// Philox4x32-10 block: counter and key in, four words out.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Standard normals, one per grid point, from Philox + Box-Muller. Point p
/// uses counter (p / 2, stream, 0, 0) so values do not depend on platform.
ScalarField gaussian_noise(const Grid2D& grid, std::uint64_t seed, std::uint32_t stream = 0);

/// Noise filtered by exp(-|k|^2 l^2 / 2) and scaled to max |f| = 1.
/// `even` symmetrizes f(xi) <- (f(xi) + f(-xi)) / 2 before scaling.
ScalarField smooth_noise(const Grid2D& grid, std::uint64_t seed, double correlation_length,
                         bool even = false);

enum class Family { oseen, shifted_oseen, dipole, random_smooth, file };

std::string to_string(Family f);
Family family_from_string(const std::string& text);

struct InitialCondition {
  Family family = Family::oseen;
  double alpha = 1.0;
  std::array<double, 2> shift{0.0, 0.0};
  double amplitude = 0.0;         // dipole weight, or eps in G (1 + eps f)
  double correlation_length = 1.0;
  std::uint64_t seed = 0;
  bool even = false;              // random-smooth: symmetrize f
  std::filesystem::path path;     // family file

  void validate() const;
};

/// oseen:          alpha G
/// shifted-oseen:  alpha G(xi - a)
/// dipole:         alpha G + amplitude F_1
/// random-smooth:  c G(xi - a) (1 + amplitude f), f = smooth_noise, c fixing
///                 the mass to alpha
/// file:           read_field(path), resampled onto grid if needed
ScalarField make_initial(const Grid2D& grid, const InitialCondition& ic,
                         Diagnostics* diag = nullptr);

}  // namespace vortexlab
