#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "vortexlab/fields.hpp"
#include "vortexlab/initial.hpp"
#include "vortexlab/lyapunov.hpp"
#include "vortexlab/spectral.hpp"
#include "vortexlab/vortex.hpp"

using namespace vortexlab;

namespace {

const Grid2D kGrid(128, 12.0);

ScalarField shifted(double a1, double a2) { return translate(gaussian_G(kGrid), {-a1, -a2}); }

ScalarField positive_random(std::uint64_t seed, double alpha = 1.0) {
  InitialCondition ic;
  ic.family = Family::random_smooth;
  ic.alpha = alpha;
  ic.amplitude = 0.5;
  ic.correlation_length = 0.7;
  ic.seed = seed;
  ic.shift = {0.4, 0.1};
  return make_initial(kGrid, ic);
}

SolverConfig entropy_run(double end_tau, int every) {
  SolverConfig c;
  c.dt = 0.01;
  c.end_tau = end_tau;
  c.record_every = every;
  c.keep_snapshots = true;
  return c;
}

}  // namespace

TEST_CASE("phi") {
  const PhiValue g = phi(gaussian_G(kGrid));
  CHECK(g.phi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.sign_definite());
  const PhiValue f = phi(dipole_F(kGrid, 0));
  CHECK(f.phi > 0.1);
  CHECK(f.abs_mass < 1e-14);
  CHECK_FALSE(f.sign_definite());
}

TEST_CASE("relative entropy: closed forms and the quadrature oracle") {
  CHECK(std::abs(*relative_entropy(gaussian_G(kGrid))) <= 1e-12);
  CHECK(*relative_entropy(2.0 * gaussian_G(kGrid)) == doctest::Approx(1.3862943611198906).epsilon(1e-12));
  const double inv_e = std::exp(-1.0);
  CHECK(*relative_entropy(inv_e * gaussian_G(kGrid)) == doctest::Approx(-inv_e).epsilon(1e-12));

  // w = G(. - a): H = |a|^2 / 4, frozen and checked by quadrature.
  const double oracle_H = oracle::integrate_box([](double x, double y) {
    const double w = oracle::G(x - 0.6, y - 0.8);
    return w * std::log(w / oracle::G(x, y));
  }, 12.0);
  CHECK(oracle_H == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(*relative_entropy(shifted(0.6, 0.8)) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("Fisher information") {
  CHECK(std::abs(*fisher_information(3.0 * gaussian_G(kGrid))) <= 1e-12);
  // grad log(w / G) = a / 2, so I = |a|^2 / 4 for unit mass.
  const double oracle_I = oracle::integrate_box([](double x, double y) {
    return 0.25 * oracle::G(x - 0.6, y - 0.8);
  }, 12.0);
  CHECK(oracle_I == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(*fisher_information(shifted(0.6, 0.8)) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("inequality chain on positive fields") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (double alpha : {0.3, 1.0, 4.0}) {
      CAPTURE(seed);
      CAPTURE(alpha);
      const ScalarField w = positive_random(seed, alpha);
      const EntropyReport r = inequality_suite(w);
      REQUIRE(r.valid);
      CHECK(r.alpha == doctest::Approx(alpha).epsilon(1e-12));
      CHECK(r.H >= -std::exp(-1.0));
      CHECK(r.I >= 0.0);
      CHECK(r.ck_gap >= 0.0);
      CHECK(r.logsob_gap >= 0.0);
    }
  }
  const EntropyReport g = inequality_suite(2.0 * gaussian_G(kGrid));
  REQUIRE(g.valid);
  CHECK(std::abs(g.ck_gap) <= 1e-12);
  CHECK(std::abs(g.logsob_gap) <= 1e-12);
  // shifted Gaussians saturate log-Sobolev
  const EntropyReport s = inequality_suite(shifted(0.6, 0.8));
  CHECK(std::abs(s.logsob_gap) <= 1e-8);
  CHECK(s.ck_gap > 0.0);
}

TEST_CASE("inadmissible fields") {
  CHECK(entropy_inadmissible(dipole_F(kGrid, 0)).has_value());
  CHECK_FALSE(relative_entropy(dipole_F(kGrid, 0)).has_value());
  CHECK_FALSE(fisher_information(-1.0 * gaussian_G(kGrid)).has_value());
  CHECK_FALSE(inequality_suite(dipole_F(kGrid, 1)).valid);
  // tiny undershoot below the floor is tolerated
  ScalarField w = gaussian_G(kGrid);
  w.values[5] = -1e-3 * kUndershootFloor * max_abs(w);
  CHECK_FALSE(entropy_inadmissible(w).has_value());
}

TEST_CASE("entropy along trajectories") {
  SUBCASE("stationary run: H and I stay at round-off") {
    const auto rec = simulate(gaussian_G(kGrid), entropy_run(0.5, 5));
    const DissipationCheck d = entropy_dissipation_check(rec);
    CHECK(d.max_I <= 1e-12);
    CHECK(d.max_increase <= 1e-13);
  }
  SUBCASE("shifted Gaussian: dH/dtau = -I, H decreasing, explicit bound, phi constant") {
    const auto rec = simulate(shifted(0.5, 0.0), entropy_run(2.0, 10));
    const DissipationCheck d = entropy_dissipation_check(rec);
    CHECK(d.max_defect <= 1e-2);
    CHECK(d.monotone);
    for (std::size_t k = 1; k < rec.samples.size(); ++k) CHECK(rec.samples[k].H < rec.samples[k - 1].H);
    for (const auto& b : explicit_bound(rec)) CHECK(b.lhs <= b.rhs);
    for (const auto& s : rec.samples) CHECK(s.phi == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("too short a record") {
    const auto rec = simulate(gaussian_G(kGrid), entropy_run(0.05, 5));
    REQUIRE(rec.samples.size() < 3);
    CHECK_THROWS_AS(entropy_dissipation_check(rec), Error);
  }
}
