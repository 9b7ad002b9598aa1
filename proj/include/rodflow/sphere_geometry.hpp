#pragma once

// Unit-sphere machinery: a pole-offset latitude-longitude grid with an
// interpolatory quadrature, tangent projection, the flow-gradient drift and
// its divergence, finite-difference surface gradient/divergence and the
// control-volume faces used by the orientation operator.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "rodflow/error.hpp"

namespace rodflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline Vec3 unit_radial(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}
inline Vec3 unit_theta(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
}
inline Vec3 unit_phi(double phi) { return {-std::sin(phi), std::cos(phi), 0.0}; }

/// One interface between two orientation cells. `normal` is the unit tangent
/// vector at `center` pointing from `lo` into `hi`.
struct SphereFace {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double length = 0.0;       // arc length of the face
  double diffusion = 0.0;    // length / centre-to-centre distance
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

/// Latitude-longitude grid with colatitudes (a + 1/2) pi / n_theta, so no node
/// sits on a pole. Quadrature: Fejer's first rule in cos(theta) times the
/// trapezoid rule in phi; it is interpolatory in theta, hence integrates
/// spherical harmonics of degree < n_theta exactly. Cell areas of the
/// (theta, phi) control volumes are kept separately for the conservative
/// orientation operator.
struct SphereGrid {
  int n_theta = 0;
  int n_phi = 0;
  double dtheta = 0.0;
  double dphi = 0.0;
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  std::vector<double> cell_areas;
  std::vector<SphereFace> faces;

  std::size_t size() const { return nodes.size(); }
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(n_phi) +
           static_cast<std::size_t>(b);
  }

  static SphereGrid make(int n_theta, int n_phi) {
    require(n_theta >= 2, ErrorKind::InvalidConfig, "n_theta must be >= 2");
    require(n_phi >= 4 && n_phi % 2 == 0, ErrorKind::InvalidConfig,
            "n_phi must be even and >= 4");
    constexpr double pi = std::numbers::pi;
    SphereGrid g;
    g.n_theta = n_theta;
    g.n_phi = n_phi;
    g.dtheta = pi / n_theta;
    g.dphi = 2.0 * pi / n_phi;
    for (int a = 0; a < n_theta; ++a) g.theta.push_back((a + 0.5) * g.dtheta);
    for (int b = 0; b < n_phi; ++b) g.phi.push_back(b * g.dphi);

    // Fejer first rule on x = cos(theta) in [-1, 1].
    std::vector<double> wtheta(n_theta);
    for (int a = 0; a < n_theta; ++a) {
      double s = 0.0;
      for (int j = 1; j <= n_theta / 2; ++j)
        s += std::cos(2.0 * j * g.theta[a]) / (4.0 * j * j - 1.0);
      wtheta[a] = 2.0 / n_theta * (1.0 - 2.0 * s);
    }

    for (int a = 0; a < n_theta; ++a) {
      const double area_band = std::cos(a * g.dtheta) - std::cos((a + 1) * g.dtheta);
      for (int b = 0; b < n_phi; ++b) {
        g.nodes.push_back(unit_radial(g.theta[a], g.phi[b]));
        g.weights.push_back(wtheta[a] * g.dphi);
        g.cell_areas.push_back(area_band * g.dphi);
      }
    }

    // Latitude faces (between rings a and a+1); polar faces have zero length.
    for (int a = 0; a + 1 < n_theta; ++a) {
      const double tf = (a + 1) * g.dtheta;
      for (int b = 0; b < n_phi; ++b) {
        SphereFace f;
        f.lo = g.index(a, b);
        f.hi = g.index(a + 1, b);
        f.length = std::sin(tf) * g.dphi;
        f.diffusion = f.length / g.dtheta;
        f.center = unit_radial(tf, g.phi[b]);
        f.normal = unit_theta(tf, g.phi[b]);
        g.faces.push_back(f);
      }
    }
    // Meridian faces (between b and b+1, periodic).
    for (int a = 0; a < n_theta; ++a) {
      for (int b = 0; b < n_phi; ++b) {
        const double pf = (b + 0.5) * g.dphi;
        SphereFace f;
        f.lo = g.index(a, b);
        f.hi = g.index(a, (b + 1) % n_phi);
        f.length = g.dtheta;
        f.diffusion = g.dtheta / (std::sin(g.theta[a]) * g.dphi);
        f.center = unit_radial(g.theta[a], pf);
        f.normal = unit_phi(pf);
        g.faces.push_back(f);
      }
    }
    return g;
  }

  double integrate(std::span<const double> values) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * values[i];
    return sum;
  }
};

/// P_{eta-perp} z = z - (z . eta) eta.
inline Vec3 project_tangent(const Vec3& z, const Vec3& eta) { return z - z.dot(eta) * eta; }

/// Jeffery-type orientation drift P_{eta-perp}(grad_u eta).
inline Vec3 projected_drift(const Mat3& grad_u, const Vec3& eta) {
  return project_tangent(grad_u * eta, eta);
}

/// Surface divergence of eta -> P_{eta-perp}(M eta) in frame-free form:
/// M e_theta.e_theta + M e_phi.e_phi - 2 M e_r.e_r = tr(M) - 3 eta.M eta.
inline double divergence_of_projected_drift(const Mat3& m, const Vec3& eta) {
  return m.trace() - 3.0 * eta.dot(m * eta);
}

namespace detail {

// Value at ring a (possibly -1 or n_theta, i.e. across a pole), longitude b.
// Rings beyond a pole map to the antipodal longitude of the adjacent ring.
inline std::size_t wrapped_node(const SphereGrid& g, int a, int b) {
  if (a < 0) return g.index(0, (b + g.n_phi / 2) % g.n_phi);
  if (a >= g.n_theta) return g.index(g.n_theta - 1, (b + g.n_phi / 2) % g.n_phi);
  return g.index(a, ((b % g.n_phi) + g.n_phi) % g.n_phi);
}

}  // namespace detail

/// Centred-difference surface gradient; returns tangent 3-vectors per node.
inline std::vector<Vec3> surface_gradient(std::span<const double> f, const SphereGrid& g) {
  std::vector<Vec3> out(g.size());
  for (int a = 0; a < g.n_theta; ++a) {
    const double th = g.theta[a];
    for (int b = 0; b < g.n_phi; ++b) {
      const double ft = (f[detail::wrapped_node(g, a + 1, b)] -
                         f[detail::wrapped_node(g, a - 1, b)]) /
                        (2.0 * g.dtheta);
      const double fp = (f[detail::wrapped_node(g, a, b + 1)] -
                         f[detail::wrapped_node(g, a, b - 1)]) /
                        (2.0 * g.dphi);
      out[g.index(a, b)] = ft * unit_theta(th, g.phi[b]) + fp / std::sin(th) * unit_phi(g.phi[b]);
    }
  }
  return out;
}

/// Centred-difference surface divergence with the metric terms
/// d_theta F_theta + cot(theta) F_theta + (1/sin theta) d_phi F_phi + 2 F_r.
/// Components across a pole are taken in the continued frame at theta < 0
/// (or theta > pi), which is where the ghost node lives.
inline std::vector<double> surface_divergence(std::span<const Vec3> field, const SphereGrid& g) {
  std::vector<double> out(g.size());
  for (int a = 0; a < g.n_theta; ++a) {
    const double th = g.theta[a];
    const double th_up = th + g.dtheta;
    const double th_dn = th - g.dtheta;
    for (int b = 0; b < g.n_phi; ++b) {
      const double ph = g.phi[b];
      const Vec3& here = field[g.index(a, b)];
      const double ft_up = field[detail::wrapped_node(g, a + 1, b)].dot(unit_theta(th_up, ph));
      const double ft_dn = field[detail::wrapped_node(g, a - 1, b)].dot(unit_theta(th_dn, ph));
      const double fp_e =
          field[detail::wrapped_node(g, a, b + 1)].dot(unit_phi(g.phi[(b + 1) % g.n_phi]));
      const double fp_w = field[detail::wrapped_node(g, a, b - 1)].dot(
          unit_phi(g.phi[(b + g.n_phi - 1) % g.n_phi]));
      const double f_theta = here.dot(unit_theta(th, ph));
      const double f_r = here.dot(g.nodes[g.index(a, b)]);
      out[g.index(a, b)] = (ft_up - ft_dn) / (2.0 * g.dtheta) + std::cos(th) / std::sin(th) * f_theta +
                           (fp_e - fp_w) / (2.0 * g.dphi * std::sin(th)) + 2.0 * f_r;
    }
  }
  return out;
}

/// Net outward face flux of the drift field per unit cell area (the discrete
/// divergence seen by the control-volume orientation operator).
inline std::vector<double> control_volume_drift_divergence(const Mat3& grad_u, const SphereGrid& g) {
  std::vector<double> div(g.size(), 0.0);
  for (const auto& f : g.faces) {
    const double flux = projected_drift(grad_u, f.center).dot(f.normal) * f.length;
    div[f.lo] += flux;
    div[f.hi] -= flux;
  }
  for (std::size_t i = 0; i < div.size(); ++i) div[i] /= g.cell_areas[i];
  return div;
}

}  // namespace rodflow
