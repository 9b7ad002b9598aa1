#pragma once

// Prescribed incompressible velocity fields, the per-step characteristic maps
// (forward x_n, backward z_n) with a volume-preservation certificate, and the
// trilinear pullback of cell-centred fields along z_n.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rodflow/error.hpp"
#include "rodflow/fields.hpp"

namespace rodflow {

/// Closed-form steady velocity field. Gradient convention: (grad u)_{ij} = d u_i / d y_j.
struct VelocityField {
  enum class Kind { Zero, RigidRotation, PeriodicShear, TaylorGreen };
  Kind kind = Kind::Zero;
  Vec3 omega = Vec3::Zero();  // rigid rotation angular velocity
  double shear_rate = 0.0;    // periodic shear amplitude of du1/dy2
  double k = 1.0;             // wavenumber (shear, Taylor-Green)
  double amplitude = 0.0;     // Taylor-Green amplitude
  // In homogeneous mode u is identically zero and the gradient is frozen at
  // the reference point (linear-flow approximation).
  bool homogeneous = false;
  Vec3 reference_point = Vec3::Zero();

  std::string name() const {
    switch (kind) {
      case Kind::Zero: return "zero";
      case Kind::RigidRotation: return "rigid_rotation";
      case Kind::PeriodicShear: return "periodic_shear";
      case Kind::TaylorGreen: return "taylor_green";
    }
    return "?";
  }

  Vec3 analytic_velocity(const Vec3& y) const {
    switch (kind) {
      case Kind::Zero: return Vec3::Zero();
      case Kind::RigidRotation: return omega.cross(y);
      case Kind::PeriodicShear: return {shear_rate * std::sin(k * y[1]) / k, 0.0, 0.0};
      case Kind::TaylorGreen:
        return {amplitude * std::sin(k * y[0]) * std::cos(k * y[1]),
                -amplitude * std::cos(k * y[0]) * std::sin(k * y[1]), 0.0};
    }
    return Vec3::Zero();
  }

  Mat3 analytic_gradient(const Vec3& y) const {
    Mat3 g = Mat3::Zero();
    switch (kind) {
      case Kind::Zero: break;
      case Kind::RigidRotation:
        g << 0.0, -omega[2], omega[1], omega[2], 0.0, -omega[0], -omega[1], omega[0], 0.0;
        break;
      case Kind::PeriodicShear: g(0, 1) = shear_rate * std::cos(k * y[1]); break;
      case Kind::TaylorGreen: {
        const double c1 = std::cos(k * y[0]), s1 = std::sin(k * y[0]);
        const double c2 = std::cos(k * y[1]), s2 = std::sin(k * y[1]);
        const double ak = amplitude * k;
        g(0, 0) = ak * c1 * c2;
        g(0, 1) = -ak * s1 * s2;
        g(1, 0) = ak * s1 * s2;
        g(1, 1) = -ak * c1 * c2;
        break;
      }
    }
    return g;
  }

  Vec3 velocity(double /*t*/, const Vec3& y) const {
    return homogeneous ? Vec3::Zero() : analytic_velocity(y);
  }
  Mat3 gradient(double /*t*/, const Vec3& y) const {
    return analytic_gradient(homogeneous ? reference_point : y);
  }
  double divergence(double t, const Vec3& y) const { return gradient(t, y).trace(); }

  bool is_zero() const { return homogeneous || kind == Kind::Zero; }

  /// Upper bound of |u| over points within `radius` of the origin (rotation) or
  /// over the whole domain (periodic fields).
  double speed_bound(double radius) const {
    if (homogeneous) return 0.0;
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::RigidRotation: return omega.norm() * radius;
      case Kind::PeriodicShear: return std::abs(shear_rate / k);
      case Kind::TaylorGreen: return std::abs(amplitude);
    }
    return 0.0;
  }

  /// Upper bound of the Frobenius norm of grad u.
  double gradient_bound() const {
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::RigidRotation: return std::sqrt(2.0) * omega.norm();
      case Kind::PeriodicShear: return std::abs(shear_rate);
      case Kind::TaylorGreen: return std::sqrt(2.0) * std::abs(amplitude * k);
    }
    return 0.0;
  }

  /// Mean normal velocity over the axis-aligned face {y_axis = pos} x
  /// [lo, hi] in the two remaining axes. Exact face integrals, so the discrete
  /// divergence of a cell vanishes to round-off.
  double face_flux(int axis, double pos, const std::array<double, 3>& lo,
                   const std::array<double, 3>& hi) const {
    if (homogeneous) return 0.0;
    // mean of sin(k s) and cos(k s) over [a, b]
    auto mean_sin = [this](double a, double b) {
      return (std::cos(k * a) - std::cos(k * b)) / (k * (b - a));
    };
    auto mean_cos = [this](double a, double b) {
      return (std::sin(k * b) - std::sin(k * a)) / (k * (b - a));
    };
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::RigidRotation:
        throw Error(ErrorKind::UnsupportedDomainPairing, "rigid rotation has no cube face fluxes");
      case Kind::PeriodicShear:
        return axis == 0 ? shear_rate / k * mean_sin(lo[1], hi[1]) : 0.0;
      case Kind::TaylorGreen:
        if (axis == 0) return amplitude * std::sin(k * pos) * mean_cos(lo[1], hi[1]);
        if (axis == 1) return -amplitude * std::sin(k * pos) * mean_cos(lo[0], hi[0]);
        return 0.0;
    }
    return 0.0;
  }
};

/// Builds a velocity field and checks it against the domain it will run on.
inline VelocityField builtin_field(VelocityField field, const SpatialGrid& space) {
  using K = VelocityField::Kind;
  for (double v : {field.omega.norm(), field.shear_rate, field.k, field.amplitude})
    require(std::isfinite(v), ErrorKind::InvalidConfig, "flow parameters must be finite");
  constexpr double pi = std::numbers::pi;
  auto is_integer = [](double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, x); };
  if (space.is_homogeneous()) {
    field.homogeneous = true;
    field.reference_point = space.centers.front();
    return field;
  }
  switch (field.kind) {
    case K::Zero: break;
    case K::RigidRotation:
      throw Error(ErrorKind::UnsupportedDomainPairing,
                  "rigid rotation is tangential only on a ball; use the homogeneous domain");
    case K::PeriodicShear:
      require(field.k > 0.0, ErrorKind::InvalidConfig, "shear wavenumber must be > 0");
      require(space.periodic() && is_integer(field.k * space.length / (2.0 * pi)),
              ErrorKind::UnsupportedDomainPairing,
              "periodic shear needs a periodic cube with k L / (2 pi) integer");
      break;
    case K::TaylorGreen: {
      require(field.k > 0.0, ErrorKind::InvalidConfig, "Taylor-Green wavenumber must be > 0");
      const double periods = field.k * space.length / pi;
      const bool ok = space.periodic() ? is_integer(periods / 2.0) : is_integer(periods);
      require(ok, ErrorKind::UnsupportedDomainPairing,
              "Taylor-Green wavenumber incompatible with the cube length");
      break;
    }
  }
  return field;
}

/// Largest |u . n| over sampled points of the cube boundary (zero for
/// periodic cubes, whose faces are identified).
inline double boundary_normal_flux(const VelocityField& u, const SpatialGrid& space, int samples = 16) {
  if (space.is_homogeneous() || space.periodic()) return 0.0;
  double worst = 0.0;
  for (int axis = 0; axis < 3; ++axis)
    for (double side : {0.0, space.length})
      for (int a = 0; a <= samples; ++a)
        for (int b = 0; b <= samples; ++b) {
          Vec3 p;
          p[axis] = side;
          p[(axis + 1) % 3] = space.length * a / samples;
          p[(axis + 2) % 3] = space.length * b / samples;
          worst = std::max(worst, std::abs(u.velocity(0.0, p)[axis]));
        }
  return worst;
}

struct FlowMap {
  long step = 0;
  std::vector<Vec3> forward;   // x_n(y)
  std::vector<Vec3> backward;  // z_n(y)
  double max_det_deviation = 0.0;
  double max_round_trip = 0.0;
  int substeps = 0;
  bool identity = false;
};

struct FlowMapTolerance {
  double round_trip = 1e-8;
  double det = 1e-6;
};

namespace detail {

struct OdeState {
  Vec3 x;
  Mat3 jac;
};

// RK4 for x' = s u(x), J' = s grad u(x) J over `steps` substeps of size h.
inline OdeState integrate_characteristic(const VelocityField& u, double t, const Vec3& y, double sign,
                                         double h, int steps) {
  OdeState st{y, Mat3::Identity()};
  auto rhs = [&](const OdeState& s) {
    return OdeState{sign * u.velocity(t, s.x), sign * u.gradient(t, s.x) * s.jac};
  };
  for (int n = 0; n < steps; ++n) {
    const OdeState k1 = rhs(st);
    const OdeState k2 = rhs({st.x + 0.5 * h * k1.x, st.jac + 0.5 * h * k1.jac});
    const OdeState k3 = rhs({st.x + 0.5 * h * k2.x, st.jac + 0.5 * h * k2.jac});
    const OdeState k4 = rhs({st.x + h * k3.x, st.jac + h * k3.jac});
    st.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    st.jac += h / 6.0 * (k1.jac + 2.0 * k2.jac + 2.0 * k3.jac + k4.jac);
  }
  return st;
}

}  // namespace detail

/// Characteristics of the frozen field u^n = u(t_now, .) over [t_prev, t_now].
/// Substeps satisfy |u|_inf h <= cell_size / 4 and |grad u| h <= 5e-3.
inline FlowMap compute_flow_map(const VelocityField& u, double t_prev, double t_now,
                                std::span<const Vec3> nodes, double cell_size, long step = 0,
                                FlowMapTolerance tol = {}) {
  const double dt = t_now - t_prev;
  require(dt > 0.0, ErrorKind::InvalidConfig, "flow map needs t_now > t_prev");
  FlowMap map;
  map.step = step;
  if (u.is_zero()) {
    map.forward.assign(nodes.begin(), nodes.end());
    map.backward.assign(nodes.begin(), nodes.end());
    map.identity = true;
    return map;
  }
  double radius = 0.0;
  for (const auto& y : nodes) radius = std::max(radius, y.norm());
  const double speed = u.speed_bound(radius);
  double h = dt;
  if (speed > 0.0) h = std::min(h, cell_size / (4.0 * speed));
  if (u.gradient_bound() > 0.0) h = std::min(h, 5e-3 / u.gradient_bound());
  const int steps = std::max(1, static_cast<int>(std::ceil(dt / h - 1e-12)));
  const double hs = dt / steps;
  map.substeps = steps;
  map.forward.resize(nodes.size());
  map.backward.resize(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const auto fwd = detail::integrate_characteristic(u, t_now, nodes[n], 1.0, hs, steps);
    const auto bwd = detail::integrate_characteristic(u, t_now, nodes[n], -1.0, hs, steps);
    const auto back = detail::integrate_characteristic(u, t_now, fwd.x, -1.0, hs, steps);
    map.forward[n] = fwd.x;
    map.backward[n] = bwd.x;
    map.max_round_trip = std::max(map.max_round_trip, (back.x - nodes[n]).norm());
    map.max_det_deviation = std::max({map.max_det_deviation, std::abs(fwd.jac.determinant() - 1.0),
                                      std::abs(bwd.jac.determinant() - 1.0)});
  }
  if (map.max_round_trip > tol.round_trip)
    throw Error(ErrorKind::OdeToleranceExceeded,
                "flow map round trip error " + std::to_string(map.max_round_trip));
  if (map.max_det_deviation > tol.det)
    throw Error(ErrorKind::OdeToleranceExceeded,
                "flow map Jacobian determinant deviates by " + std::to_string(map.max_det_deviation));
  return map;
}

/// Eight-point trilinear stencil per spatial node for evaluating a cell-centred
/// field at z_n(y).
struct PullbackStencil {
  std::vector<std::array<std::size_t, 8>> nodes;
  std::vector<std::array<double, 8>> weights;
  bool identity = false;
};

inline PullbackStencil make_pullback_stencil(const FlowMap& map, const SpatialGrid& space,
                                             double tolerance = 1e-9) {
  PullbackStencil st;
  const std::size_t count = map.backward.size();
  if (map.identity || space.is_homogeneous()) {
    st.identity = true;
    return st;
  }
  st.nodes.resize(count);
  st.weights.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    const Vec3& z = map.backward[p];
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    std::array<double, 3> frac{};
    for (int d = 0; d < 3; ++d) {
      const int n = space.n[d];
      double s = z[d] / space.h[d] - 0.5;
      if (space.periodic()) {
        const double fl = std::floor(s);
        frac[d] = s - fl;
        const long i0 = static_cast<long>(fl);
        lo[d] = static_cast<int>(((i0 % n) + n) % n);
        hi[d] = (lo[d] + 1) % n;
      } else {
        if (z[d] < -tolerance || z[d] > space.length + tolerance)
          throw Error(ErrorKind::PointLeftDomain, "backward characteristic left the domain");
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        const int i0 = std::min(static_cast<int>(std::floor(s)), std::max(n - 2, 0));
        lo[d] = i0;
        hi[d] = std::min(i0 + 1, n - 1);
        frac[d] = n == 1 ? 0.0 : s - i0;
      }
    }
    for (int c = 0; c < 8; ++c) {
      const int bx = c & 1, by = (c >> 1) & 1, bz = (c >> 2) & 1;
      st.nodes[p][c] = space.index(bx ? hi[0] : lo[0], by ? hi[1] : lo[1], bz ? hi[2] : lo[2]);
      st.weights[p][c] = (bx ? frac[0] : 1.0 - frac[0]) * (by ? frac[1] : 1.0 - frac[1]) *
                         (bz ? frac[2] : 1.0 - frac[2]);
    }
  }
  return st;
}

/// f(z_n(y)) for a scalar field on the spatial grid.
inline std::vector<double> pullback(std::span<const double> field, const PullbackStencil& st) {
  if (st.identity) return {field.begin(), field.end()};
  std::vector<double> out(st.nodes.size(), 0.0);
  for (std::size_t p = 0; p < out.size(); ++p)
    for (int c = 0; c < 8; ++c) out[p] += st.weights[p][c] * field[st.nodes[p][c]];
  return out;
}

/// psi(r, eta, z_n(y)) for every (r, eta).
inline PolymerField pullback(const PolymerField& psi, const PullbackStencil& st) {
  if (st.identity) return psi;
  PolymerField out = psi;
  std::fill(out.values.begin(), out.values.end(), 0.0);
  const std::size_t block = psi.n_r * psi.n_eta;
  for (std::size_t p = 0; p < st.nodes.size(); ++p) {
    double* dst = out.values.data() + p * block;
    for (int c = 0; c < 8; ++c) {
      const double w = st.weights[p][c];
      if (w == 0.0) continue;
      const double* src = psi.values.data() + st.nodes[p][c] * block;
      for (std::size_t k = 0; k < block; ++k) dst[k] += w * src[k];
    }
  }
  return out;
}

}  // namespace rodflow
