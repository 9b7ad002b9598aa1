#pragma once

// Spatial grids, the discretized polymer and monomer fields, and whole-field
// quadratures (weighted norms, the r-eta total Lambda_1, the tail map).

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "rodflow/error.hpp"
#include "rodflow/length_grid.hpp"
#include "rodflow/model_params.hpp"
#include "rodflow/sphere_geometry.hpp"

namespace rodflow {

/// Cell-centred spatial grid. Homogeneous mode is a single node standing in
/// for a y-independent state over a region of the given volume.
struct SpatialGrid {
  enum class Kind { Homogeneous, PeriodicCube, ClosedCube };
  Kind kind = Kind::Homogeneous;
  std::array<int, 3> n{1, 1, 1};
  double length = 1.0;
  double volume = 1.0;
  std::array<double, 3> h{1.0, 1.0, 1.0};
  std::vector<Vec3> centers;

  static SpatialGrid homogeneous(double volume, const Vec3& reference_point) {
    require(volume > 0.0, ErrorKind::NonPositiveCoefficient, "domain volume must be > 0");
    SpatialGrid g;
    g.kind = Kind::Homogeneous;
    g.volume = volume;
    g.length = std::cbrt(volume);
    g.h = {g.length, g.length, g.length};
    g.centers = {reference_point};
    return g;
  }

  static SpatialGrid cube(Kind kind, double length, std::array<int, 3> n) {
    require(kind != Kind::Homogeneous, ErrorKind::InvalidConfig, "cube kind expected");
    require(length > 0.0, ErrorKind::NonPositiveCoefficient, "domain length must be > 0");
    for (int c : n) require(c >= 1, ErrorKind::InvalidConfig, "cell counts must be >= 1");
    SpatialGrid g;
    g.kind = kind;
    g.n = n;
    g.length = length;
    g.volume = length * length * length;
    for (int d = 0; d < 3; ++d) g.h[d] = length / n[d];
    for (int iz = 0; iz < n[2]; ++iz)
      for (int iy = 0; iy < n[1]; ++iy)
        for (int ix = 0; ix < n[0]; ++ix)
          g.centers.emplace_back((ix + 0.5) * g.h[0], (iy + 0.5) * g.h[1], (iz + 0.5) * g.h[2]);
    return g;
  }

  bool is_homogeneous() const { return kind == Kind::Homogeneous; }
  bool periodic() const { return kind == Kind::PeriodicCube; }
  std::size_t size() const { return centers.size(); }
  double cell_volume() const { return volume / static_cast<double>(size()); }
  double min_spacing() const { return std::min({h[0], h[1], h[2]}); }

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(iz) * n[1] + iy) * n[0] + ix;
  }
};

struct Discretization {
  LengthGrid length;
  SphereGrid sphere;
  SpatialGrid space;

  std::size_t n_r() const { return length.size(); }
  std::size_t n_eta() const { return sphere.size(); }
  std::size_t n_y() const { return space.size(); }
  std::size_t column_count() const { return n_eta() * n_y(); }
  std::size_t field_size() const { return n_r() * column_count(); }
};

/// psi on the (r, eta, y) tensor grid; storage order y-major, then eta, with r
/// contiguous so every (eta, y) column is a span.
struct PolymerField {
  std::size_t n_r = 0;
  std::size_t n_eta = 0;
  std::size_t n_y = 0;
  std::vector<double> values;

  PolymerField() = default;
  explicit PolymerField(const Discretization& d)
      : n_r(d.n_r()), n_eta(d.n_eta()), n_y(d.n_y()), values(d.field_size(), 0.0) {}

  std::size_t offset(std::size_t y, std::size_t i) const { return (y * n_eta + i) * n_r; }
  double& at(std::size_t y, std::size_t i, std::size_t j) { return values[offset(y, i) + j]; }
  double at(std::size_t y, std::size_t i, std::size_t j) const { return values[offset(y, i) + j]; }
  std::span<double> column(std::size_t y, std::size_t i) { return {values.data() + offset(y, i), n_r}; }
  std::span<const double> column(std::size_t y, std::size_t i) const {
    return {values.data() + offset(y, i), n_r};
  }
  std::span<double> block(std::size_t y) { return {values.data() + offset(y, 0), n_r * n_eta}; }
  std::span<const double> block(std::size_t y) const {
    return {values.data() + offset(y, 0), n_r * n_eta};
  }
};

/// phi per spatial node.
struct MonomerField {
  std::vector<double> values;

  MonomerField() = default;
  explicit MonomerField(const Discretization& d) : values(d.n_y(), 0.0) {}

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

enum class NormKind { L2alpha, V, V1 };

/// Squared weighted norms with measure e^{alpha r} dr deta dy:
///   L2alpha: int f^2;  V: int A |grad_eta f|^2 + (1 + r) f^2;  V1: V + int |d_r f|^2.
inline double weighted_norm_sq(const PolymerField& f, const Discretization& d, NormKind which,
                               const LengthWeight& a_weight = {}) {
  const auto& lg = d.length;
  const auto& sg = d.sphere;
  const double dv = d.space.cell_volume();
  double total = 0.0;
  std::vector<double> shell(d.n_eta());
  for (std::size_t y = 0; y < d.n_y(); ++y) {
    for (std::size_t j = 0; j < d.n_r(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < d.n_eta(); ++i) {
        shell[i] = f.at(y, i, j);
        s += sg.weights[i] * shell[i] * shell[i];
      }
      const double radial = which == NormKind::L2alpha ? 1.0 : 1.0 + lg.r[j];
      double grad = 0.0;
      if (which != NormKind::L2alpha) {
        const auto g = surface_gradient(shell, sg);
        for (std::size_t i = 0; i < d.n_eta(); ++i) grad += sg.weights[i] * g[i].squaredNorm();
        grad *= a_weight(lg.r[j]);
      }
      total += dv * lg.trap[j] * lg.weight[j] * (radial * s + grad);
    }
    if (which == NormKind::V1) {
      for (std::size_t i = 0; i < d.n_eta(); ++i) {
        const auto col = f.column(y, i);
        for (std::size_t j = 0; j + 1 < d.n_r(); ++j) {
          const double slope = (col[j + 1] - col[j]) / lg.dr;
          const double w = std::exp(lg.alpha * 0.5 * (lg.r[j] + lg.r[j + 1]));
          total += dv * sg.weights[i] * lg.dr * w * slope * slope;
        }
      }
    }
  }
  return total;
}

/// Lambda_1[psi](y) = int psi dr deta with the given eta weights.
inline std::vector<double> total_integral(const PolymerField& psi, const Discretization& d,
                                          std::span<const double> eta_weights) {
  std::vector<double> out(d.n_y(), 0.0);
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i)
      out[y] += eta_weights[i] * d.length.integrate(psi.column(y, i));
  return out;
}

inline std::vector<double> total_integral(const PolymerField& psi, const Discretization& d) {
  return total_integral(psi, d, d.sphere.weights);
}

/// Lambda_2 applied column by column.
inline PolymerField tail_integral(const PolymerField& psi, const Discretization& d,
                                  bool checked = true) {
  PolymerField out(d);
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i) {
      if (checked) d.length.check_tail(psi.column(y, i));
      d.length.tail_into(psi.column(y, i), out.column(y, i));
    }
  return out;
}

}  // namespace rodflow
