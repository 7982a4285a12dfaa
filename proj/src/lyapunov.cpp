#include "vortexlab/lyapunov.hpp"

#include <cmath>
#include <numbers>

#include "vortexlab/fields.hpp"
#include "vortexlab/spectral.hpp"
#include "vortexlab/vortex.hpp"

namespace vortexlab {

PhiValue phi(const ScalarField& w) {
  return PhiValue{lp_norm(w, 1.0), std::abs(moments(w).alpha)};
}

std::optional<std::string> entropy_inadmissible(const ScalarField& w) {
  const double peak = *std::max_element(w.values.begin(), w.values.end());
  const double low = *std::min_element(w.values.begin(), w.values.end());
  if (!(peak > 0.0)) return "field has no positive values";
  if (low < -kUndershootFloor * peak) {
    return "field is materially negative (min " + std::to_string(low) + ")";
  }
  if (!(moments(w).alpha > 0.0)) return "total vorticity is not positive";
  return std::nullopt;
}

std::optional<double> relative_entropy(const ScalarField& w) {
  if (entropy_inadmissible(w)) return std::nullopt;
  const auto& t = coordinate_tables(w.grid);
  const double log4pi = std::log(4.0 * std::numbers::pi);
  double acc = 0.0;
  for (std::size_t k = 0; k < w.grid.size(); ++k) {
    const double v = w.values[k];
    if (v <= 0.0) continue;  // 0 log 0, and clamped undershoot
    acc += v * (std::log(v) + 0.25 * t.r2[k] + log4pi);
  }
  return w.grid.cell_area() * acc;
}

std::optional<double> fisher_information(const ScalarField& w) {
  if (entropy_inadmissible(w)) return std::nullopt;
  const auto& t = coordinate_tables(w.grid);
  RealVector d1, d2;
  Spectral::for_grid(w.grid)->gradient(w.values, d1, d2);
  const double cutoff = kFisherCutoff * max_abs(w);
  double acc = 0.0;
  for (std::size_t k = 0; k < w.grid.size(); ++k) {
    const double v = w.values[k];
    if (v < cutoff || v <= 0.0) continue;
    const double a = d1[k] + 0.5 * t.xi1[k] * v;
    const double b = d2[k] + 0.5 * t.xi2[k] * v;
    acc += (a * a + b * b) / v;
  }
  return w.grid.cell_area() * acc;
}

EntropyReport inequality_suite(const ScalarField& w) {
  EntropyReport report;
  report.alpha = moments(w).alpha;
  report.phi = lp_norm(w, 1.0);
  if (auto why = entropy_inadmissible(w)) {
    report.reason = *why;
    return report;
  }
  report.valid = true;
  report.H = *relative_entropy(w);
  report.I = *fisher_information(w);
  const double a = report.alpha;
  const double l1 = lp_norm(w - a * gaussian_G(w.grid), 1.0);
  report.ck_lhs = l1 * l1 / (2.0 * a);
  report.entropy_gap = report.H - a * std::log(a);
  report.ck_gap = report.entropy_gap - report.ck_lhs;
  report.logsob_gap = report.I - report.entropy_gap;
  return report;
}

DissipationCheck entropy_dissipation_check(const TrajectoryRecord& record, double floor) {
  std::vector<double> tau, h, i;
  for (const auto& s : record.samples) {
    if (!std::isfinite(s.H) || !std::isfinite(s.I)) continue;
    tau.push_back(s.tau);
    h.push_back(s.H);
    i.push_back(s.I);
  }
  if (tau.size() < 3) throw Error("entropy_dissipation_check: fewer than 3 samples with H and I");
  DissipationCheck check;
  check.max_I = *std::max_element(i.begin(), i.end());
  const double scale = std::max(check.max_I, floor);
  for (std::size_t k = 1; k + 1 < tau.size(); ++k) {
    const double dh = (h[k + 1] - h[k - 1]) / (tau[k + 1] - tau[k - 1]);
    const double defect = std::abs(dh + i[k]) / scale;
    if (defect > check.max_defect) {
      check.max_defect = defect;
      check.worst_index = static_cast<int>(k);
    }
  }
  for (std::size_t k = 0; k + 1 < tau.size(); ++k) {
    const double rise = h[k + 1] - h[k];
    check.max_increase = std::max(check.max_increase, rise);
    if (rise > 0.0 && i[k] > floor) check.monotone = false;
  }
  return check;
}

std::vector<ExplicitBoundSample> explicit_bound(const TrajectoryRecord& record) {
  if (record.samples.empty() || !std::isfinite(record.samples.front().H)) {
    throw Error("explicit_bound: the first sample has no entropy");
  }
  const double a = record.alpha;
  const double gap = record.samples.front().H - a * std::log(a);
  const double tau0 = record.samples.front().tau;
  std::vector<ExplicitBoundSample> out;
  for (const auto& s : record.samples) {
    ExplicitBoundSample b;
    b.tau = s.tau;
    b.lhs = s.l1_residual;
    b.rhs = std::sqrt(2.0 * a * std::max(gap, 0.0)) * std::exp(-0.5 * (s.tau - tau0));
    out.push_back(b);
  }
  return out;
}

}  // namespace vortexlab
