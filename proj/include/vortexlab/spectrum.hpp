#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vortexlab/grid.hpp"

namespace vortexlab {

// Azimuthal modes are discretized in s = r^2 / 4 with
//   omega_n(r) = 2^|n| s^{|n|/2} e^{-s} p(s),
// p collocated at the N generalized Gauss-Laguerre nodes for the weight
// s^|n| e^{-s}. Matrices act on y_i = sqrt(W_i) p(s_i), where W_i are the
// quadrature weights; in these coordinates the inner product of X
// restricted to mode n is a constant multiple of the Euclidean one.

/// Generalized Gauss-Laguerre nodes and weights for parameter a = |n|.
struct RadialGrid {
  int a = 0;  // |n|
  int N = 0;
  Eigen::VectorXd s, r;   // nodes, r = 2 sqrt(s)
  Eigen::VectorXd log_w;  // log W_i for int s^a e^{-s} f(s) ds
  Eigen::VectorXd sqrt_w;
  Eigen::VectorXd r_weights;  // for int_0^inf f(r) r dr
  Eigen::VectorXd log_bary;   // log |barycentric weight|
  Eigen::VectorXd bary_sign;

  double r_max() const { return r(N - 1); }
};

/// Cached per (|n|, N).
std::shared_ptr<const RadialGrid> radial_grid(int abs_n, int N);

/// One azimuthal Fourier mode sampled at the radial nodes.
struct RadialProfile {
  int n = 0;
  std::shared_ptr<const RadialGrid> grid;
  Eigen::VectorXcd values;  // omega_n(r_k)
};

/// y-coordinates of a profile and back.
Eigen::VectorXcd profile_to_coords(const RadialProfile& profile);
RadialProfile coords_to_profile(int n, std::shared_ptr<const RadialGrid> grid,
                                const Eigen::VectorXcd& y);

/// omega_n(r) = (1/2pi) int w(r cos t, r sin t) e^{-int} dt by the
/// trapezoid rule on n_theta angles and band-limited point values.
/// Nodes outside the box get zero; a warning is recorded if the field is
/// not negligible at the box boundary.
RadialProfile mode_decompose(const ScalarField& w, int n,
                             std::shared_ptr<const RadialGrid> grid,
                             int n_theta = 128, Diagnostics* diag = nullptr);

/// Omega(r) = (1/4|n|) (int_0^r (z/r)^|n| z omega dz + int_r^inf (r/z)^|n| z omega dz)
/// at every node. Rejects n = 0.
RadialProfile stream_omega(const RadialProfile& profile);

/// L_n - alpha Lambda_n in y-coordinates.
struct OperatorMatrix {
  int n = 0;
  double alpha = 0.0;
  std::shared_ptr<const RadialGrid> grid;
  Eigen::MatrixXcd A;
  Eigen::MatrixXd L;        // L_n
  Eigen::MatrixXcd Lambda;  // Lambda_n
  /// Diagonal of the X inner product in y-coordinates:
  /// <omega_1, omega_2>_X = sum gram_i conj(y1_i) y2_i.
  Eigen::VectorXd gram;
};

OperatorMatrix assemble_operator(int n, double alpha, int N);

/// |gram L - (gram L)^T| / |gram L| (Frobenius).
double symmetry_defect(const OperatorMatrix& op);
/// |H + H^*| / |H| for H = gram Lambda.
double skew_defect(const OperatorMatrix& op);

enum class Subspace { full, zero_mean, moment_free, second_moment_free };
std::string to_string(Subspace s);
Subspace subspace_from_string(const std::string& text);

/// Frozen eigenvectors (y-coordinates, unit Euclidean norm) removed for a
/// subspace at mode n: G (n = 0) for zero-mean, plus F (|n| = 1) for
/// moment-free, plus Delta G (n = 0) for second-moment-free.
std::vector<Eigen::VectorXcd> constraint_vectors(int n, const RadialGrid& grid,
                                                 Subspace subspace);

/// Orthonormal basis of the complement of the constraint vectors.
Eigen::MatrixXcd subspace_basis(int n, const RadialGrid& grid, Subspace subspace);

/// Frozen profiles in y-coordinates: "G", "F", "LaplacianG", "n2".
Eigen::VectorXcd frozen_coords(const std::string& name, const RadialGrid& grid);

struct SpectrumResult {
  int n = 0;
  double alpha = 0.0;
  Subspace subspace = Subspace::full;
  int resolution = 0;         // N of the reported eigenvalues
  int check_resolution = 0;   // N of the comparison run
  std::vector<std::complex<double>> eigenvalues;  // descending real part
  std::vector<bool> trusted;
  std::vector<std::complex<double>> check_eigenvalues;
  Eigen::MatrixXcd eigenvectors;  // full-space y-coordinates, column k
  double condition_estimate = 0.0;
};

inline constexpr double kTrustTolerance = 1e-6;

/// Eigenvalues on the subspace at resolutions N and N_check. A value is
/// trusted when it matches (greedily, nearest first) an unused value of the
/// other run within kTrustTolerance * max(1, |lambda|).
SpectrumResult eigen_spectrum(int n, double alpha, Subspace subspace,
                              int N = 120, int N_check = 80,
                              bool keep_vectors = false);

struct BoundViolation {
  int n = 0;
  double alpha = 0.0;
  Subspace subspace = Subspace::full;
  std::complex<double> eigenvalue;
  double bound = 0.0;
};

struct BoundsReport {
  double m = 4.0;
  int checked = 0;  // trusted eigenvalues examined
  std::vector<BoundViolation> violations;
  /// Largest trusted real part per (subspace, alpha), over all modes.
  struct Extreme {
    Subspace subspace;
    double alpha;
    double max_re;
    int n;
  };
  std::vector<Extreme> extremes;
  bool ok() const { return violations.empty(); }
};

/// zero-mean:  Re lambda <= max(-1/2, (1-m)/2) + tol
/// moment-free: Re lambda <= max(-1, (1-m)/2) + tol
/// second-moment-free with alpha != 0: Re lambda < -1 strictly.
BoundsReport verify_bounds(const std::vector<SpectrumResult>& results, double m = 4.0,
                           double tol = 1e-6);

struct DecayShape {
  double gamma = 0.0;  // power of (1 + r^2)
  double kappa = 0.0;  // leftover r^2 coefficient; 0 for Gaussian decay
  double c = 0.0;
  int points = 0;
  bool flagged = false;
  std::string reason;
};

/// Fits log|omega(r)| + r^2/4 = gamma log(1 + r^2) + c + kappa r^2 on
/// r in [2R/3, R], using nodes where |y| is above 1e-12 of its maximum.
/// Flags the vector when |kappa| > kappa_limit, |gamma| > gamma_limit or
/// fewer than four nodes are usable.
DecayShape eigenfunction_decay_check(int n, const RadialGrid& grid,
                                     const Eigen::VectorXcd& y, double R = 16.0,
                                     double kappa_limit = 0.02,
                                     double gamma_limit = 40.0);

struct SemigroupDecay {
  double rate = 0.0;
  double r2 = 0.0;
  std::vector<double> taus, norms;  // X-norm samples
};

/// Propagates y0 by exp(tau B) on the subspace (B = Z^* A Z, y0 projected
/// onto it) and fits the decay rate of the X-norm over [tau_end/2, tau_end].
SemigroupDecay semigroup_decay(const OperatorMatrix& op, Subspace subspace,
                               const Eigen::VectorXcd& y0, double tau_end,
                               int samples = 40);

/// Columns n, alpha, re_lambda, im_lambda, trusted, subspace, resolution.
void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<SpectrumResult>& results);

}  // namespace vortexlab
