#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "vortexlab/evolution.hpp"
#include "vortexlab/grid.hpp"

namespace vortexlab {

// Values in [-floor * max w, 0) count as zero in the log integrands.
inline constexpr double kUndershootFloor = 1e-6;
// The Fisher integrand is dropped where w < cutoff * max w.
inline constexpr double kFisherCutoff = 1e-14;

struct PhiValue {
  double phi = 0.0;       // int |w|
  double abs_mass = 0.0;  // |int w|
  /// Sign-definite up to quadrature round-off: phi == |alpha|.
  bool sign_definite() const noexcept {
    return phi - abs_mass <= 1e-12 * std::max(phi, 1e-300);
  }
};

PhiValue phi(const ScalarField& w);

/// Empty when w is not admissible: a value below -floor * max w, or
/// nonpositive mass.
std::optional<std::string> entropy_inadmissible(const ScalarField& w);

/// H(w) = int w log(w / G) with 0 log 0 = 0.
std::optional<double> relative_entropy(const ScalarField& w);

/// I(w) = int w |grad log(w / G)|^2 = int |grad w + xi w / 2|^2 / w.
std::optional<double> fisher_information(const ScalarField& w);

struct EntropyReport {
  bool valid = false;
  std::string reason;  // why not valid
  double alpha = 0.0;
  double H = 0.0;
  double I = 0.0;
  double phi = 0.0;
  double ck_lhs = 0.0;       // |w - alpha G|_1^2 / (2 alpha)
  double entropy_gap = 0.0;  // H - alpha log alpha
  double ck_gap = 0.0;       // entropy_gap - ck_lhs  (>= 0)
  double logsob_gap = 0.0;   // I - entropy_gap      (>= 0)
};

/// Csiszar-Kullback and log-Sobolev chain for one field.
EntropyReport inequality_suite(const ScalarField& w);

struct DissipationCheck {
  double max_defect = 0.0;  // max |dH/dtau + I| / max(I_max, floor)
  double max_I = 0.0;
  int worst_index = -1;
  bool monotone = true;      // H nonincreasing wherever I > floor
  double max_increase = 0.0; // largest H(k+1) - H(k)
};

/// Centered differences of the recorded H against -I at interior samples.
/// Needs at least three samples with H and I recorded.
DissipationCheck entropy_dissipation_check(const TrajectoryRecord& record,
                                           double floor = 1e-12);

struct ExplicitBoundSample {
  double tau = 0.0;
  double lhs = 0.0;  // |w(tau) - alpha G|_1
  double rhs = 0.0;  // sqrt(2 alpha (H(w0) - alpha log alpha)) e^{-(tau - tau0)/2}
};

/// |w(tau) - alpha G|_1 <= sqrt(2 alpha) (H(w0) - alpha log alpha)^{1/2}
/// e^{-tau/2} at every sample, H(w0) taken from the first sample.
std::vector<ExplicitBoundSample> explicit_bound(const TrajectoryRecord& record);

}  // namespace vortexlab
