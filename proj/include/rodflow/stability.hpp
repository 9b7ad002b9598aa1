#pragma once

// Step-size guard and envelope bookkeeping: k1, k2, k3, the C_n recursion
// toward C_inf, and the energy budgets, with C_P, C_D (and g_hi when not
// supplied) measured by sampling the flow over (t, y, eta).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rodflow/error.hpp"
#include "rodflow/fields.hpp"
#include "rodflow/flow.hpp"
#include "rodflow/model_params.hpp"
#include "rodflow/sphere_geometry.hpp"

namespace rodflow {

struct FlowBounds {
  double c_p = 0.0;       // sup |P_{eta-perp}(grad u eta)|
  double c_d = 0.0;       // sup |div_eta P_{eta-perp}(grad u eta)|, analytic and discrete
  double g_max = 0.0;     // sup of the raw g closure
  double g_min = 0.0;     // inf of the raw g closure
};

/// Samples the drift bounds on the run's flow envelope: time levels {0, T},
/// every spatial node, every sphere node and sphere face centre.
inline FlowBounds measure_flow_bounds(const ModelParams& params, const Discretization& d,
                                      const VelocityField& u) {
  FlowBounds b;
  b.g_min = std::numeric_limits<double>::infinity();
  std::vector<Vec3> etas = d.sphere.nodes;
  for (const auto& f : d.sphere.faces) etas.push_back(f.center);
  for (double t : {0.0, params.t_final}) {
    for (const auto& y : d.space.centers) {
      const Mat3 m = u.gradient(t, y);
      const Vec3 v = u.velocity(t, y);
      for (const auto& eta : etas) {
        b.c_p = std::max(b.c_p, projected_drift(m, eta).norm());
        b.c_d = std::max(b.c_d, std::abs(divergence_of_projected_drift(m, eta)));
        const double g = params.g_rate.raw(m, v, eta);
        b.g_max = std::max(b.g_max, g);
        b.g_min = std::min(b.g_min, g);
      }
      for (double div : control_volume_drift_divergence(m, d.sphere))
        b.c_d = std::max(b.c_d, std::abs(div));
    }
  }
  return b;
}

struct StabilityLedger {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double c0 = 0.0;
  double cn = 0.0;
  double c_inf = 0.0;
  double c_p = 0.0;
  double c_d = 0.0;
  double c_a = 1.0;
  double g_hi = 0.0;
  double g_lo = 0.0;
  double phi0_inf = 0.0;
  double dt = 0.0;
  double t_final = 0.0;
  long n_steps = 0;
  long step = 0;

  double growth() const { return (1.0 + k1 * dt) / (1.0 - k2 * dt); }

  /// C_0 growth^n.
  double closed_form(long n) const { return c0 * std::pow(growth(), static_cast<double>(n)); }

  /// Rejects the run before any step when the step size is outside the
  /// admissible range.
  void precheck() const {
    if (!(k2 * dt < 1.0))
      throw Error(ErrorKind::TimestepTooLarge,
                  "k2 dt = " + std::to_string(k2 * dt) + " must be < 1");
    if (!(k3 * dt < 1.0))
      throw Error(ErrorKind::TimestepTooLarge,
                  "k3 dt = " + std::to_string(k3 * dt) + " must be < 1");
    if (!(closed_form(n_steps) <= c_inf))
      throw Error(ErrorKind::TimestepTooLarge, "envelope C_N exceeds C_inf");
  }

  /// C_n = growth * C_{n-1}.
  void advance() {
    cn *= growth();
    ++step;
    if (cn > c_inf * (1.0 + 1e-12)) throw InvariantBreachError("Cn <= C_inf", step, cn - c_inf);
  }

  double psi_energy_bound(double psi0_norm_sq) const {
    return 4.0 * std::exp(k3 * t_final) * psi0_norm_sq;
  }
  static double phi_energy_bound(double phi0_norm_sq) { return 2.0 * phi0_norm_sq; }
};

inline StabilityLedger make_ledger(const ModelParams& params, const FlowBounds& bounds,
                                   double domain_volume, double phi0_inf, double c0, double dt,
                                   long n_steps) {
  constexpr double sphere_area = 4.0 * std::numbers::pi;
  StabilityLedger l;
  l.c_p = bounds.c_p;
  l.c_d = bounds.c_d;
  l.c_a = params.c_a();
  l.g_lo = params.g_lo();
  // Without a declared upper bound, g_hi is the sampled supremum of g.
  l.g_hi = std::isfinite(params.g_hi()) ? params.g_hi() : std::max(bounds.g_max, params.g_lo());
  l.phi0_inf = phi0_inf;
  l.c0 = c0;
  l.cn = c0;
  l.dt = dt;
  l.n_steps = n_steps;
  l.t_final = dt * static_cast<double>(n_steps);
  const double a = params.alpha;
  l.k1 = 2.0 * l.g_hi / a;
  l.k2 = a * params.tau0 * phi0_inf + l.c_d * l.c_a;
  l.c_inf = 2.0 * c0 * std::exp((l.k1 + l.k2) * l.t_final);
  l.k3 = a * params.tau0 * phi0_inf + l.c_p * l.c_p * l.c_a / params.d1 +
         4.0 * l.g_hi * std::pow(a, -1.5) * l.c_inf * std::sqrt(domain_volume * sphere_area);
  return l;
}

}  // namespace rodflow
