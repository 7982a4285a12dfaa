#include "vortexlab/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "vortexlab/kernels.hpp"
#include "vortexlab/spectral.hpp"
#include "vortexlab/vortex.hpp"

namespace vortexlab {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

const CoordinateTables& coordinate_tables(const Grid2D& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::unique_ptr<CoordinateTables>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{grid.n, grid.half_width}];
  if (!slot) {
    auto t = std::make_unique<CoordinateTables>();
    t->xi1.resize(grid.size());
    t->xi2.resize(grid.size());
    t->r2.resize(grid.size());
    t->xi11.resize(grid.size());
    t->xi12.resize(grid.size());
    for (int i = 0; i < grid.n; ++i) {
      for (int j = 0; j < grid.n; ++j) {
        const std::size_t k = grid.index(i, j);
        t->xi1[k] = grid.coord(i);
        t->xi2[k] = grid.coord(j);
        t->r2[k] = t->xi1[k] * t->xi1[k] + t->xi2[k] * t->xi2[k];
        t->xi11[k] = t->xi1[k] * t->xi1[k];
        t->xi12[k] = t->xi1[k] * t->xi2[k];
      }
    }
    slot = std::move(t);
  }
  return *slot;
}

double weighted_norm(const ScalarField& w, double m) {
  if (!(m >= 0.0)) throw Error("weighted_norm: m must be nonnegative");
  require_finite(w, "weighted_norm");
  const auto& tables = coordinate_tables(w.grid);
  RealVector weight(w.grid.size());
  for (std::size_t k = 0; k < weight.size(); ++k) {
    weight[k] = m == 0.0 ? 1.0 : std::pow(1.0 + tables.r2[k], m);
  }
  return std::sqrt(w.grid.cell_area() *
                   kernels::weighted_sum_squares(weight, w.values));
}

double lp_norm(const ScalarField& w, double p) {
  if (!(p >= 1.0)) throw Error("lp_norm: p must be >= 1");
  if (std::isinf(p)) return max_abs(w);
  double acc = 0.0;
  if (p == 1.0) {
    for (double v : w.values) acc += std::abs(v);
    return w.grid.cell_area() * acc;
  }
  if (p == 2.0) {
    return std::sqrt(w.grid.cell_area() * kernels::dot(w.values, w.values));
  }
  for (double v : w.values) acc += std::pow(std::abs(v), p);
  return std::pow(w.grid.cell_area() * acc, 1.0 / p);
}

MomentSet moments(const Grid2D& grid, std::span<const double> w) {
  const auto& t = coordinate_tables(grid);
  const double a = grid.cell_area();
  MomentSet m{a * kernels::sum(w), a * kernels::dot(t.xi1, w), a * kernels::dot(t.xi2, w),
              a * kernels::dot(t.r2, w)};
  m.m11 = a * kernels::dot(t.xi11, w);
  m.m12 = a * kernels::dot(t.xi12, w);
  m.m22 = m.mu2 - m.m11;
  return m;
}

MomentSet moments(const ScalarField& w) { return moments(w.grid, w.values); }

ScalarField project_subspace(const ScalarField& w, int level) {
  if (level < 0 || level > 2) throw Error("project_subspace: level must be 0, 1 or 2");
  ScalarField out = w;
  const MomentSet mom = moments(w);
  kernels::axpy(-mom.alpha, gaussian_G(w.grid).values, out.values);
  if (level >= 1) {
    kernels::axpy(-mom.beta1, dipole_F(w.grid, 0).values, out.values);
    kernels::axpy(-mom.beta2, dipole_F(w.grid, 1).values, out.values);
  }
  if (level == 2) {
    // int (|xi|^2 - 4) w / 4 of the original field; G, F_j are annihilated
    // by this functional so it is unchanged by the removals above.
    const double c = 0.25 * (mom.mu2 - 4.0 * mom.alpha);
    kernels::axpy(-c, laplacian_G(w.grid).values, out.values);
  }
  return out;
}

Recentered recenter(const ScalarField& w) {
  const MomentSet mom = moments(w);
  const double l1 = lp_norm(w, 1.0);
  if (!(std::abs(mom.alpha) >= 1e-8 * l1) || l1 == 0.0) {
    throw Error("recenter undefined for zero total vorticity");
  }
  const std::array<double, 2> b{mom.beta1 / mom.alpha, mom.beta2 / mom.alpha};
  return Recentered{translate(w, b), b};
}

Eigen::MatrixXd trig_interpolation_matrix(const Grid2D& source,
                                          std::span<const double> targets) {
  const int n = source.n;
  const double h = source.spacing();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(targets.size()), n);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (int p = 0; p < n; ++p) {
      // u = (x - x_p) / h; kernel sin(pi u) cot(pi u / n) / n
      double u = (targets[t] - source.coord(p)) / h;
      u -= n * std::round(u / n);  // periodic image closest to the node
      double value;
      if (std::abs(u) < 1e-12) {
        value = 1.0;
      } else {
        const double a = std::numbers::pi * u;
        value = std::sin(a) / (n * std::tan(a / n));
      }
      m(static_cast<Eigen::Index>(t), p) = value;
    }
  }
  return m;
}

double boundary_ratio(const ScalarField& w) {
  const int n = w.grid.n;
  double edge = 0.0;
  for (int k = 0; k < n; ++k) {
    edge = std::max({edge, std::abs(w(0, k)), std::abs(w(n - 1, k)),
                     std::abs(w(k, 0)), std::abs(w(k, n - 1))});
  }
  const double peak = max_abs(w);
  return peak > 0.0 ? edge / peak : 0.0;
}

ScalarField interpolate_to_grid(const ScalarField& w, const Grid2D& target,
                                double scale, Diagnostics* diag) {
  if (!(scale > 0.0)) throw Error("interpolate_to_grid: scale must be positive");
  std::vector<double> targets(target.n);
  bool outside = false;
  for (int i = 0; i < target.n; ++i) {
    targets[i] = scale * target.coord(i);
    if (targets[i] < -w.grid.half_width || targets[i] >= w.grid.half_width) {
      outside = true;
    }
  }
  if (outside && boundary_ratio(w) > 1e-10) {
    warn(diag, "interpolation samples outside the source box where the field "
               "is not negligible at the boundary (ratio " +
                   std::to_string(boundary_ratio(w)) + ")");
  }
  Eigen::MatrixXd m = trig_interpolation_matrix(w.grid, targets);
  for (int i = 0; i < target.n; ++i) {
    if (targets[i] < -w.grid.half_width || targets[i] >= w.grid.half_width) {
      m.row(i).setZero();
    }
  }
  Eigen::Map<const RowMatrix> src(w.values.data(), w.grid.n, w.grid.n);
  ScalarField out(target, w.frame, w.time);
  Eigen::Map<RowMatrix> dst(out.values.data(), target.n, target.n);
  dst.noalias() = m * src * m.transpose();
  return out;
}

ScalarField resample(const ScalarField& w, double factor, Diagnostics* diag) {
  if (!(factor > 0.0)) throw Error("resample: factor must be positive");
  if (factor == 1.0) return w;
  return interpolate_to_grid(w, w.grid, factor, diag);
}

double evaluate_at(const ScalarField& w, double x1, double x2) {
  const std::array<double, 1> t1{x1};
  const std::array<double, 1> t2{x2};
  const Eigen::MatrixXd a = trig_interpolation_matrix(w.grid, t1);
  const Eigen::MatrixXd b = trig_interpolation_matrix(w.grid, t2);
  Eigen::Map<const RowMatrix> src(w.values.data(), w.grid.n, w.grid.n);
  return (a * src * b.transpose())(0, 0);
}

namespace {

constexpr const char* kMagic = "VORTEXLAB-FIELD 1";

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_field: cannot open " + path.string());
  out << kMagic << '\n'
      << "frame " << to_string(w.frame) << '\n'
      << "time " << format_double(w.time) << '\n'
      << "n " << w.grid.n << '\n'
      << "half_width " << format_double(w.grid.half_width) << '\n'
      << "endianness little\n"
      << "precision float64\n"
      << "end_header\n";
  for (double v : w.values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap64(bits);
    }
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw Error("write_field: write failed for " + path.string());
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_field: cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMagic) throw Error("read_field: bad magic in " + path.string());
  std::map<std::string, std::string> header;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream fields(line);
    std::string key, value;
    fields >> key >> value;
    header[key] = value;
  }
  for (const char* key : {"frame", "time", "n", "half_width", "endianness", "precision"}) {
    if (!header.count(key)) throw Error(std::string("read_field: missing header key ") + key);
  }
  if (header["precision"] != "float64") throw Error("read_field: unsupported precision");
  const bool little = header["endianness"] == "little";
  if (!little && header["endianness"] != "big") throw Error("read_field: bad endianness");
  const Grid2D grid(std::stoi(header["n"]), std::stod(header["half_width"]));
  ScalarField w(grid, frame_from_string(header["frame"]), std::stod(header["time"]));
  const bool swap = little != (std::endian::native == std::endian::little);
  for (double& v : w.values) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if (swap) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  if (!in) throw Error("read_field: truncated payload in " + path.string());
  return w;
}

}  // namespace vortexlab
