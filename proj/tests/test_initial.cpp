#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "vortexlab/fields.hpp"
#include "vortexlab/initial.hpp"
#include "vortexlab/vortex.hpp"

using namespace vortexlab;

TEST_CASE("philox known answers") {
  using W = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("gaussian noise") {
  const Grid2D grid(128, 5.0);
  const ScalarField a = gaussian_noise(grid, 42);
  const ScalarField b = gaussian_noise(grid, 42);
  CHECK(a.values == b.values);
  CHECK(gaussian_noise(grid, 43).values != a.values);
  CHECK(gaussian_noise(grid, 42, 1).values != a.values);
  double mean = 0.0, var = 0.0;
  for (double v : a.values) mean += v;
  mean /= a.values.size();
  for (double v : a.values) var += (v - mean) * (v - mean);
  var /= a.values.size();
  // 16384 samples: 5 sigma on mean and variance
  CHECK(std::abs(mean) <= 5.0 / 128.0);
  CHECK(std::abs(var - 1.0) <= 5.0 * std::sqrt(2.0) / 128.0);
  // same point, different grid size: counter depends only on the index
  CHECK(gaussian_noise(Grid2D(64, 5.0), 42).values[17] == a.values[17]);
}

TEST_CASE("smooth noise") {
  const Grid2D grid(64, 8.0);
  const ScalarField f = smooth_noise(grid, 7, 1.0);
  CHECK(max_abs(f) == doctest::Approx(1.0).epsilon(1e-15));
  const ScalarField e = smooth_noise(grid, 7, 1.0, true);
  double asym = 0.0;
  for (int i = 1; i < grid.n; ++i) {
    for (int j = 1; j < grid.n; ++j) asym = std::max(asym, std::abs(e(i, j) - e(grid.n - i, grid.n - j)));
  }
  CHECK(asym <= 1e-14);
  CHECK_THROWS_AS(smooth_noise(grid, 7, 0.0), Error);
}

TEST_CASE("families") {
  const Grid2D grid(128, 12.0);
  InitialCondition ic;
  ic.alpha = 2.5;
  CHECK(max_abs_difference(make_initial(grid, ic), 2.5 * gaussian_G(grid)) <= 1e-15);

  ic.family = Family::shifted_oseen;
  ic.shift = {0.5, -0.25};
  const MomentSet ms = moments(make_initial(grid, ic));
  CHECK(ms.alpha == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(ms.beta1 == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(ms.beta2 == doctest::Approx(-0.625).epsilon(1e-12));

  ic.family = Family::dipole;
  ic.amplitude = 0.7;
  const MomentSet md = moments(make_initial(grid, ic));
  CHECK(md.alpha == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(md.beta1 == doctest::Approx(0.7).epsilon(1e-12));

  ic.family = Family::random_smooth;
  ic.amplitude = 0.3;
  ic.seed = 9;
  ic.correlation_length = 1.0;
  Diagnostics diag;
  const ScalarField w = make_initial(grid, ic, &diag);
  CHECK(moments(w).alpha == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(*std::min_element(w.values.begin(), w.values.end()) >= 0.0);
  CHECK(boundary_ratio(w) <= 1e-12);
  CHECK(diag.empty());
  CHECK(make_initial(grid, ic).values == w.values);
  ic.even = true;
  ic.shift = {0.0, 0.0};
  CHECK(std::abs(moments(make_initial(grid, ic)).beta1) <= 1e-14);
}

TEST_CASE("file family round trip and resampling") {
  const auto dir = std::filesystem::temp_directory_path() / "vortexlab_test_initial";
  std::filesystem::create_directories(dir);
  const Grid2D grid(64, 10.0);
  const ScalarField g = gaussian_G(grid);
  write_field(dir / "g.vlf", g);
  InitialCondition ic;
  ic.family = Family::file;
  ic.path = dir / "g.vlf";
  CHECK(make_initial(grid, ic).values == g.values);
  const Grid2D other(128, 12.0);
  CHECK(max_abs_difference(make_initial(other, ic), gaussian_G(other)) <= 1e-10);
  std::filesystem::remove_all(dir);
}

TEST_CASE("family names and validation") {
  for (Family f : {Family::oseen, Family::shifted_oseen, Family::dipole, Family::random_smooth, Family::file}) {
    CHECK(family_from_string(to_string(f)) == f);
  }
  CHECK(to_string(Family::random_smooth) == "random-smooth");
  CHECK_THROWS_AS(family_from_string("lamb-oseen"), Error);
  InitialCondition ic;
  ic.family = Family::file;
  CHECK_THROWS_AS(ic.validate(), Error);
  ic = {};
  ic.family = Family::random_smooth;
  ic.correlation_length = -1.0;
  CHECK_THROWS_AS(ic.validate(), Error);
  ic = {};
  ic.alpha = std::nan("");
  CHECK_THROWS_AS(ic.validate(), Error);
}
