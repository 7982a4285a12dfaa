#include "vortexlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "vortexlab/evolution.hpp"
#include "vortexlab/fields.hpp"

namespace vortexlab {
namespace {

constexpr double kPi = std::numbers::pi;

// Monic generalized Laguerre recurrence at x up to degree m, kept in
// scaled form: returns log|pi_m(x)|, its sign, and pi_m / pi_m'.
struct MonicValue {
  double log_abs;
  double sign;
  double newton;  // pi_m(x) / pi_m'(x)
};

MonicValue monic_laguerre(double x, int m, double a) {
  double p0 = 1.0, p1 = x - (a + 1.0);
  double d0 = 0.0, d1 = 1.0;
  double log_scale = 0.0;
  if (m == 0) return {0.0, 1.0, 0.0};
  for (int k = 1; k < m; ++k) {
    const double c = x - (2.0 * k + a + 1.0);
    const double b = k * (k + a);
    const double p2 = c * p1 - b * p0;
    const double d2 = p1 + c * d1 - b * d0;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
    const double big = std::max(std::abs(p1), std::abs(d1));
    if (big > 1e100) {
      p0 /= big;
      p1 /= big;
      d0 /= big;
      d1 /= big;
      log_scale += std::log(big);
    }
  }
  return {log_scale + std::log(std::abs(p1)), p1 < 0.0 ? -1.0 : 1.0, p1 / d1};
}

// n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  x = eig.eigenvalues();
  w = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
}

std::shared_ptr<const RadialGrid> build_grid(int a, int N) {
  auto g = std::make_shared<RadialGrid>();
  g->a = a;
  g->N = N;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
  for (int k = 0; k < N; ++k) J(k, k) = 2.0 * k + a + 1.0;
  for (int k = 1; k < N; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k * (k + static_cast<double>(a)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J, Eigen::EigenvaluesOnly);
  g->s = eig.eigenvalues();
  for (int i = 0; i < N; ++i) {
    for (int it = 0; it < 3; ++it) g->s(i) -= monic_laguerre(g->s(i), N, a).newton;
  }
  const double base = std::lgamma(N + a + 1.0) + std::lgamma(N + 1.0);
  g->log_w.resize(N);
  g->sqrt_w.resize(N);
  g->r.resize(N);
  g->r_weights.resize(N);
  for (int i = 0; i < N; ++i) {
    const double x = g->s(i);
    g->log_w(i) = base + std::log(x) - 2.0 * monic_laguerre(x, N + 1, a).log_abs;
    g->sqrt_w(i) = std::exp(0.5 * g->log_w(i));
    g->r(i) = 2.0 * std::sqrt(x);
    // r dr = 2 ds
    g->r_weights(i) = 2.0 * std::exp(g->log_w(i) + x - a * std::log(x));
  }
  g->log_bary.resize(N);
  g->bary_sign.resize(N);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
      if (k != i) acc += std::log(std::abs(g->s(i) - g->s(k)));
    }
    g->log_bary(i) = -acc;
    g->bary_sign(i) = ((N - 1 - i) % 2 == 0) ? 1.0 : -1.0;
  }
  return g;
}

// Pieces of the mode-n operator that do not depend on alpha or the sign of n.
struct ModePieces {
  std::shared_ptr<const RadialGrid> grid;
  Eigen::MatrixXd L;       // L_n in y-coordinates
  Eigen::MatrixXd K;       // the Omega integral operator in y-coordinates
  Eigen::MatrixXd K_sym;   // its symmetric part, used inside Lambda
  Eigen::VectorXd phi;     // (1 - e^{-s}) / (8 pi s)
};

Eigen::MatrixXd laguerre_operator(const RadialGrid& g) {
  const int N = g.N;
  // D in y-coordinates: sqrt(W_i / W_j) (c_j / c_i) / (s_i - s_j).
  Eigen::MatrixXd D(N, N);
  for (int i = 0; i < N; ++i) {
    double diag = 0.0;
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double gap = g.s(i) - g.s(j);
      diag += 1.0 / gap;
      const double mag = std::exp(0.5 * (g.log_w(i) - g.log_w(j)) + g.log_bary(j) - g.log_bary(i));
      D(i, j) = g.bary_sign(i) * g.bary_sign(j) * mag / gap;
    }
    D(i, i) = diag;
  }
  // s p'' + (a + 1 - s) p' - (a/2) p
  const Eigen::MatrixXd D2 = D * D;
  Eigen::MatrixXd L(N, N);
  for (int i = 0; i < N; ++i) {
    L.row(i) = g.s(i) * D2.row(i) + (g.a + 1.0 - g.s(i)) * D.row(i);
    L(i, i) -= 0.5 * g.a;
  }
  return L;
}

// (K p)(s) = s^{-a} int_0^s t^a e^{-t} p dt + int_s^inf e^{-t} p dt, by
// composite Gauss-Legendre panels with the nodes as panel boundaries
// (the kernel has a kink at t = s), returned in y-coordinates.
Eigen::MatrixXd omega_operator(const RadialGrid& g) {
  const int N = g.N;
  const double a = g.a;
  constexpr int kPoints = 16;
  constexpr double kMaxPanel = 1.0;
  constexpr double kTail = 60.0;
  Eigen::VectorXd gx, gw;
  gauss_legendre(kPoints, gx, gw);

  struct Panel {
    double lo, hi;
  };
  std::vector<Panel> panels;
  std::vector<int> first_panel_above(N);  // panels [0, b_i) lie below s_i
  auto split = [&](double lo, double hi, double max_len) {
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_len)));
    for (int k = 0; k < pieces; ++k) {
      panels.push_back({lo + (hi - lo) * k / pieces, lo + (hi - lo) * (k + 1) / pieces});
    }
  };
  double prev = 0.0;
  for (int i = 0; i < N; ++i) {
    split(prev, g.s(i), kMaxPanel);
    first_panel_above[i] = static_cast<int>(panels.size());
    prev = g.s(i);
  }
  split(prev, prev + kTail, 2.0);

  const int P = static_cast<int>(panels.size());
  // inner[m][j] = int over panel m of t^a e^{-t} l_j(t) / sqrt(W_j)
  // outer[m][j] = int over panel m of e^{-t} l_j(t) / sqrt(W_j)
  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(P, N);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(P, N);
  for (int m = 0; m < P; ++m) {
    const double half = 0.5 * (panels[m].hi - panels[m].lo);
    const double mid = 0.5 * (panels[m].hi + panels[m].lo);
    for (int q = 0; q < kPoints; ++q) {
      const double t = mid + half * gx(q);
      const double wq = half * gw(q);
      // l(t) = prod (t - s_k); l_j(t) = l(t) c_j / (t - s_j)
      double log_l = 0.0;
      int above = 0;
      for (int k = 0; k < N; ++k) {
        log_l += std::log(std::abs(t - g.s(k)));
        if (g.s(k) > t) ++above;
      }
      const double sign_l = (above % 2 == 0) ? 1.0 : -1.0;
      const double log_in = a > 0.0 ? a * std::log(t) - t : -t;
      for (int j = 0; j < N; ++j) {
        const double d = t - g.s(j);
        const double base = log_l + g.log_bary(j) - std::log(std::abs(d)) - 0.5 * g.log_w(j);
        const double sign = sign_l * g.bary_sign(j) * (d < 0.0 ? -1.0 : 1.0);
        inner(m, j) += wq * sign * std::exp(base + log_in);
        outer(m, j) += wq * sign * std::exp(base - t);
      }
    }
  }

  // Prefix sums of the inner pieces and suffix sums of the outer ones.
  Eigen::MatrixXd K(N, N);
  Eigen::VectorXd below = Eigen::VectorXd::Zero(N);
  int done = 0;
  for (int i = 0; i < N; ++i) {
    for (; done < first_panel_above[i]; ++done) below += inner.row(done).transpose();
    const double left = std::exp(0.5 * g.log_w(i) - (a > 0.0 ? a * std::log(g.s(i)) : 0.0));
    K.row(i) = left * below.transpose();
  }
  Eigen::VectorXd above = Eigen::VectorXd::Zero(N);
  int next = P;
  for (int i = N - 1; i >= 0; --i) {
    for (; next > first_panel_above[i]; --next) above += outer.row(next - 1).transpose();
    K.row(i) += g.sqrt_w(i) * above.transpose();
  }
  return K;
}

std::shared_ptr<const ModePieces> mode_pieces(int abs_n, int N) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const ModePieces>> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find({abs_n, N});
    if (it != cache.end()) return it->second;
  }
  auto pieces = std::make_shared<ModePieces>();
  pieces->grid = radial_grid(abs_n, N);
  const RadialGrid& g = *pieces->grid;
  pieces->L = laguerre_operator(g);
  pieces->phi.resize(N);
  for (int i = 0; i < N; ++i) pieces->phi(i) = -std::expm1(-g.s(i)) / (8.0 * kPi * g.s(i));
  if (abs_n > 0) {
    pieces->K = omega_operator(g);
    // The continuous kernel is symmetric; quadrature leaves an O(1e-4)
    // antisymmetric residue at N = 120 which would spoil skew-adjointness.
    pieces->K_sym = 0.5 * (pieces->K + pieces->K.transpose());
  }
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.emplace(std::make_pair(abs_n, N), pieces);
  return it->second;
}

double profile_scale(int abs_n) { return std::ldexp(1.0, abs_n); }  // 2^|n|

}  // namespace

std::shared_ptr<const RadialGrid> radial_grid(int abs_n, int N) {
  if (abs_n < 0) throw Error("radial_grid: |n| must be nonnegative");
  if (N < 4) throw Error("radial_grid: need at least 4 nodes");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const RadialGrid>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{abs_n, N}];
  if (!slot) slot = build_grid(abs_n, N);
  return slot;
}

Eigen::VectorXcd profile_to_coords(const RadialProfile& profile) {
  const RadialGrid& g = *profile.grid;
  const double nu = 0.5 * g.a;
  Eigen::VectorXcd y(g.N);
  for (int i = 0; i < g.N; ++i) {
    const double f = std::exp(0.5 * g.log_w(i) + g.s(i) - nu * std::log(g.s(i)));
    y(i) = profile.values(i) * f / profile_scale(g.a);
  }
  return y;
}

RadialProfile coords_to_profile(int n, std::shared_ptr<const RadialGrid> grid,
                                const Eigen::VectorXcd& y) {
  const RadialGrid& g = *grid;
  if (g.a != std::abs(n)) throw Error("coords_to_profile: grid built for another |n|");
  const double nu = 0.5 * g.a;
  RadialProfile p{n, grid, Eigen::VectorXcd(g.N)};
  for (int i = 0; i < g.N; ++i) {
    const double f = std::exp(-0.5 * g.log_w(i) - g.s(i) + nu * std::log(g.s(i)));
    p.values(i) = y(i) * f * profile_scale(g.a);
  }
  return p;
}

RadialProfile mode_decompose(const ScalarField& w, int n,
                             std::shared_ptr<const RadialGrid> grid, int n_theta,
                             Diagnostics* diag) {
  if (grid->a != std::abs(n)) throw Error("mode_decompose: grid built for another |n|");
  if (n_theta < 4) throw Error("mode_decompose: need at least 4 angles");
  const double L = w.grid.half_width;
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> W(w.values.data(), w.grid.n, w.grid.n);
  RadialProfile out{n, grid, Eigen::VectorXcd::Zero(grid->N)};
  bool clipped = false;
  std::vector<double> x1(n_theta), x2(n_theta);
  for (int i = 0; i < grid->N; ++i) {
    const double r = grid->r(i);
    bool inside = true;
    for (int k = 0; k < n_theta; ++k) {
      const double t = 2.0 * kPi * k / n_theta;
      x1[k] = r * std::cos(t);
      x2[k] = r * std::sin(t);
      if (x1[k] < -L || x1[k] >= L || x2[k] < -L || x2[k] >= L) inside = false;
    }
    if (!inside) {
      clipped = true;
      continue;
    }
    const Eigen::MatrixXd A = trig_interpolation_matrix(w.grid, x1);
    const Eigen::MatrixXd B = trig_interpolation_matrix(w.grid, x2);
    const Eigen::MatrixXd AW = A * W;
    std::complex<double> acc = 0.0;
    for (int k = 0; k < n_theta; ++k) {
      const double value = AW.row(k).dot(B.row(k));
      const double t = 2.0 * kPi * k / n_theta;
      acc += value * std::polar(1.0, -n * t);
    }
    out.values(i) = acc / static_cast<double>(n_theta);
  }
  if (clipped && boundary_ratio(w) > 1e-10) {
    warn(diag, "mode_decompose: radial nodes beyond the box where the field is not negligible");
  }
  return out;
}

RadialProfile stream_omega(const RadialProfile& profile) {
  if (profile.n == 0) throw Error("stream_omega: n = 0 has no stream part (Lambda_0 = 0)");
  const int abs_n = std::abs(profile.n);
  const auto pieces = mode_pieces(abs_n, profile.grid->N);
  const RadialGrid& g = *pieces->grid;
  const Eigen::VectorXcd y = profile_to_coords(profile);
  const Eigen::VectorXcd ky = pieces->K * y;
  RadialProfile out{profile.n, profile.grid, Eigen::VectorXcd(g.N)};
  const double c = profile_scale(abs_n);
  for (int i = 0; i < g.N; ++i) {
    // Omega = (c / 2|n|) s^{|n|/2} (K p)(s), (K p)_i = (K y)_i / sqrt(W_i)
    const double f = std::exp(0.5 * abs_n * std::log(g.s(i)) - 0.5 * g.log_w(i));
    out.values(i) = c / (2.0 * abs_n) * f * ky(i);
  }
  return out;
}

OperatorMatrix assemble_operator(int n, double alpha, int N) {
  if (!std::isfinite(alpha)) throw Error("assemble_operator: alpha must be finite");
  const int abs_n = std::abs(n);
  const auto pieces = mode_pieces(abs_n, N);
  OperatorMatrix op;
  op.n = n;
  op.alpha = alpha;
  op.grid = pieces->grid;
  op.L = pieces->L;
  op.Lambda = Eigen::MatrixXcd::Zero(N, N);
  if (n != 0) {
    // Lambda_n = i n (phi - K / (8 pi |n|))
    const std::complex<double> in(0.0, static_cast<double>(n));
    Eigen::MatrixXd real = -pieces->K_sym / (8.0 * kPi * abs_n);
    real.diagonal() += pieces->phi;
    op.Lambda = in * real.cast<std::complex<double>>();
  }
  op.A = op.L.cast<std::complex<double>>() - alpha * op.Lambda;
  const double c = profile_scale(abs_n);
  op.gram = Eigen::VectorXd::Constant(N, 16.0 * kPi * kPi * c * c);
  return op;
}

double symmetry_defect(const OperatorMatrix& op) {
  const Eigen::MatrixXd S = op.gram.asDiagonal() * op.L;
  return (S - S.transpose()).norm() / S.norm();
}

double skew_defect(const OperatorMatrix& op) {
  const Eigen::MatrixXcd H = op.gram.cast<std::complex<double>>().asDiagonal() * op.Lambda;
  const double scale = H.norm();
  if (scale == 0.0) return 0.0;
  return (H + H.adjoint()).norm() / scale;
}

std::string to_string(Subspace s) {
  switch (s) {
    case Subspace::full: return "full";
    case Subspace::zero_mean: return "zero-mean";
    case Subspace::moment_free: return "moment-free";
    case Subspace::second_moment_free: return "second-moment-free";
  }
  return "full";
}

Subspace subspace_from_string(const std::string& text) {
  for (Subspace s : {Subspace::full, Subspace::zero_mean, Subspace::moment_free,
                     Subspace::second_moment_free}) {
    if (to_string(s) == text) return s;
  }
  throw Error("unknown subspace '" + text + "'");
}

Eigen::VectorXcd frozen_coords(const std::string& name, const RadialGrid& g) {
  Eigen::VectorXd y;
  if (name == "G" || name == "F" || name == "n2") {
    const int want = name == "G" ? 0 : (name == "F" ? 1 : 2);
    if (g.a != want) throw Error("frozen_coords: " + name + " lives at |n| = " + std::to_string(want));
    y = g.sqrt_w;
  } else if (name == "LaplacianG") {
    if (g.a != 0) throw Error("frozen_coords: LaplacianG lives at n = 0");
    y = g.sqrt_w.array() * (g.s.array() - 1.0);
  } else {
    throw Error("frozen_coords: unknown profile " + name);
  }
  y.normalize();
  return y.cast<std::complex<double>>();
}

std::vector<Eigen::VectorXcd> constraint_vectors(int n, const RadialGrid& grid, Subspace subspace) {
  std::vector<Eigen::VectorXcd> out;
  const int abs_n = std::abs(n);
  if (subspace == Subspace::full) return out;
  if (abs_n == 0) out.push_back(frozen_coords("G", grid));
  if (subspace == Subspace::zero_mean) return out;
  if (abs_n == 1) out.push_back(frozen_coords("F", grid));
  if (subspace == Subspace::moment_free) return out;
  if (abs_n == 0) out.push_back(frozen_coords("LaplacianG", grid));
  return out;
}

Eigen::MatrixXcd subspace_basis(int n, const RadialGrid& grid, Subspace subspace) {
  const auto vectors = constraint_vectors(n, grid, subspace);
  const int N = grid.N;
  if (vectors.empty()) return Eigen::MatrixXcd::Identity(N, N);
  Eigen::MatrixXcd C(N, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) C.col(static_cast<Eigen::Index>(k)) = vectors[k];
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(C);
  const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(N, N);
  return Q.rightCols(N - C.cols());
}

namespace {

struct Solved {
  std::vector<std::complex<double>> values;
  Eigen::MatrixXcd vectors;
};

Solved solve_restricted(int n, double alpha, Subspace subspace, int N, bool vectors) {
  const OperatorMatrix op = assemble_operator(n, alpha, N);
  const Eigen::MatrixXcd Z = subspace_basis(n, *op.grid, subspace);
  const Eigen::MatrixXcd B = Z.adjoint() * op.A * Z;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(B, vectors);
  if (eig.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
    const auto& sv = svd.singularValues();
    throw Error("eigen_spectrum: eigensolver failed for n = " + std::to_string(n) +
                ", alpha = " + std::to_string(alpha) + " (condition estimate " +
                std::to_string(sv(0) / sv(sv.size() - 1)) + ")");
  }
  std::vector<Eigen::Index> order(B.rows());
  for (Eigen::Index k = 0; k < B.rows(); ++k) order[k] = k;
  const auto& ev = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    if (ev(x).real() != ev(y).real()) return ev(x).real() > ev(y).real();
    return ev(x).imag() > ev(y).imag();
  });
  Solved out;
  for (auto k : order) out.values.push_back(ev(k));
  if (vectors) {
    out.vectors.resize(N, B.rows());
    for (Eigen::Index c = 0; c < B.rows(); ++c) out.vectors.col(c) = Z * eig.eigenvectors().col(order[c]);
  }
  return out;
}

}  // namespace

SpectrumResult eigen_spectrum(int n, double alpha, Subspace subspace, int N, int N_check,
                              bool keep_vectors) {
  SpectrumResult result;
  result.n = n;
  result.alpha = alpha;
  result.subspace = subspace;
  result.resolution = N;
  result.check_resolution = N_check;
  Solved fine = solve_restricted(n, alpha, subspace, N, keep_vectors);
  Solved coarse = solve_restricted(n, alpha, subspace, N_check, false);
  result.eigenvalues = fine.values;
  result.check_eigenvalues = coarse.values;
  result.eigenvectors = std::move(fine.vectors);
  result.trusted.assign(fine.values.size(), false);
  std::vector<bool> used(coarse.values.size(), false);
  for (std::size_t k = 0; k < fine.values.size(); ++k) {
    const auto lambda = fine.values[k];
    double best = 1e300;
    std::size_t pick = coarse.values.size();
    for (std::size_t c = 0; c < coarse.values.size(); ++c) {
      if (used[c]) continue;
      const double d = std::abs(coarse.values[c] - lambda);
      if (d < best) {
        best = d;
        pick = c;
      }
    }
    if (pick < coarse.values.size() && best <= kTrustTolerance * std::max(1.0, std::abs(lambda))) {
      used[pick] = true;
      result.trusted[k] = true;
    }
  }
  return result;
}

BoundsReport verify_bounds(const std::vector<SpectrumResult>& results, double m, double tol) {
  BoundsReport report;
  report.m = m;
  const double b_zero = std::max(-0.5, 0.5 * (1.0 - m));
  const double b_moment = std::max(-1.0, 0.5 * (1.0 - m));
  std::map<std::pair<int, double>, BoundsReport::Extreme> extremes;
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
      if (!r.trusted[k]) continue;
      ++report.checked;
      const auto lambda = r.eigenvalues[k];
      const auto key = std::make_pair(static_cast<int>(r.subspace), r.alpha);
      auto it = extremes.find(key);
      if (it == extremes.end() || lambda.real() > it->second.max_re) {
        extremes[key] = {r.subspace, r.alpha, lambda.real(), r.n};
      }
      bool bad = false;
      double bound = 0.0;
      switch (r.subspace) {
        case Subspace::full:
          bound = tol;
          bad = lambda.real() > tol;
          break;
        case Subspace::zero_mean:
          bound = b_zero;
          bad = lambda.real() > b_zero + tol;
          break;
        case Subspace::moment_free:
          bound = b_moment;
          bad = lambda.real() > b_moment + tol;
          break;
        case Subspace::second_moment_free:
          bound = -1.0;
          bad = r.alpha != 0.0 ? !(lambda.real() < -1.0) : lambda.real() > -1.0 + tol;
          break;
      }
      if (bad) report.violations.push_back({r.n, r.alpha, r.subspace, lambda, bound});
    }
  }
  for (auto& [key, e] : extremes) report.extremes.push_back(e);
  return report;
}

DecayShape eigenfunction_decay_check(int n, const RadialGrid& g, const Eigen::VectorXcd& y,
                                     double R, double kappa_limit, double gamma_limit) {
  DecayShape shape;
  const double nu = 0.5 * std::abs(n);
  double peak = 0.0;
  for (int i = 0; i < g.N; ++i) {
    if (g.r(i) >= 2.0 * R / 3.0 && g.r(i) <= R) peak = std::max(peak, std::abs(y(i)));
  }
  std::vector<double> rr, zz;
  for (int i = 0; i < g.N; ++i) {
    const double r = g.r(i);
    if (r < 2.0 * R / 3.0 || r > R) continue;
    const double mag = std::abs(y(i));
    if (!(mag > 1e-12 * peak)) continue;
    rr.push_back(r);
    // log|omega| + r^2/4 = log 2^|n| + nu log s + log|p|
    zz.push_back(std::abs(n) * std::log(2.0) + nu * std::log(g.s(i)) + std::log(mag) -
                 0.5 * g.log_w(i));
  }
  shape.points = static_cast<int>(rr.size());
  if (shape.points < 4) {
    shape.flagged = true;
    shape.reason = "fewer than 4 usable nodes in the fit window";
    return shape;
  }
  Eigen::MatrixXd X(shape.points, 3);
  Eigen::VectorXd z(shape.points);
  for (int k = 0; k < shape.points; ++k) {
    X(k, 0) = std::log(1.0 + rr[k] * rr[k]);
    X(k, 1) = 1.0;
    X(k, 2) = rr[k] * rr[k];
    z(k) = zz[k];
  }
  const Eigen::Vector3d beta = X.colPivHouseholderQr().solve(z);
  shape.gamma = beta(0);
  shape.c = beta(1);
  shape.kappa = beta(2);
  if (std::abs(shape.kappa) > kappa_limit) {
    shape.flagged = true;
    shape.reason = "residual quadratic term " + std::to_string(shape.kappa) + " in the tail";
  } else if (std::abs(shape.gamma) > gamma_limit) {
    shape.flagged = true;
    shape.reason = "unbounded polynomial prefactor (gamma " + std::to_string(shape.gamma) + ")";
  }
  return shape;
}

SemigroupDecay semigroup_decay(const OperatorMatrix& op, Subspace subspace,
                               const Eigen::VectorXcd& y0, double tau_end, int samples) {
  if (!(tau_end > 0.0) || samples < 8) throw Error("semigroup_decay: bad sampling");
  const Eigen::MatrixXcd Z = subspace_basis(op.n, *op.grid, subspace);
  const Eigen::MatrixXcd B = Z.adjoint() * op.A * Z;
  const double dt = tau_end / samples;
  const Eigen::MatrixXcd step = (dt * B).exp();
  Eigen::VectorXcd z = Z.adjoint() * y0;
  SemigroupDecay out;
  const double g = std::sqrt(op.gram(0));
  for (int k = 0; k <= samples; ++k) {
    out.taus.push_back(k * dt);
    out.norms.push_back(g * z.norm());
    z = step * z;
  }
  const DecayFit fit = fit_decay_rate(out.taus, out.norms, 0.5 * tau_end, tau_end);
  out.rate = fit.mu;
  out.r2 = fit.r2;
  return out;
}

void write_spectrum_csv(const std::filesystem::path& path, const std::vector<SpectrumResult>& results) {
  std::ofstream out(path);
  if (!out) throw Error("write_spectrum_csv: cannot open " + path.string());
  out << "n,alpha,re_lambda,im_lambda,trusted,subspace,resolution\n";
  char buffer[160];
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
      std::snprintf(buffer, sizeof buffer, "%d,%.17g,%.17g,%.17g,%d,%s,%d\n", r.n, r.alpha,
                    r.eigenvalues[k].real(), r.eigenvalues[k].imag(), r.trusted[k] ? 1 : 0,
                    to_string(r.subspace).c_str(), r.resolution);
      out << buffer;
    }
  }
}

}  // namespace vortexlab
