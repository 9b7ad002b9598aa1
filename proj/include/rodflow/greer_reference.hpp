#pragma once

// Independent solver for the zero-flow, spatially homogeneous reduction
//   d_t f + tau0 phi d_r f + g0 r f = 2 g0 int_r^inf f dr',   d_t phi = -tau0 phi int f dr,
// with f the (eta, y)-average of psi times |S^2|. It shares grids with the
// full solver but none of its assembly: a tridiagonal Thomas solve per step.

#include <cmath>
#include <string>
#include <vector>

#include "rodflow/config.hpp"
#include "rodflow/error.hpp"
#include "rodflow/length_grid.hpp"
#include "rodflow/simulation.hpp"

namespace rodflow {

struct GreerState {
  std::vector<double> f;  // on the length nodes, f[0] = f[n-1] = 0
  double phi = 0.0;
  double tau0 = 0.0;
  double g0 = 0.0;
};

struct GreerGrid {
  std::vector<double> r;
  double dr = 0.0;
  double alpha = 1.0;
  double eps = 0.0;
};

namespace greer_detail {

inline double trapezoid(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) s += 0.5 * h * (v[j] + v[j + 1]);
  return s;
}

}  // namespace greer_detail

/// Backward-Euler step with upwind transport at phi^{n-1}, implicit loss,
/// explicit cumulative-sum gain and the eps term, then the monomer update with
/// the previous polymer total.
inline GreerState greer_step(const GreerState& s, const GreerGrid& grid, double dt) {
  require(s.phi >= 0.0, ErrorKind::NegativeMonomerInput, "phi must be >= 0");
  if (s.tau0 * s.phi * grid.alpha * dt >= 1.0)
    throw Error(ErrorKind::TimestepTooLarge, "alpha tau0 phi dt must be < 1");
  const std::size_t n = s.f.size();
  const double h = grid.dr;
  const double v = s.tau0 * s.phi / h;

  // gain: G_j = 2 g0 int_{r_j}^{r_max} f
  std::vector<double> gain(n, 0.0);
  for (std::size_t j = n - 1; j-- > 0;) gain[j] = gain[j + 1] + 0.5 * h * (s.f[j] + s.f[j + 1]);

  const std::size_t m = n - 2;  // unknowns j = 1 .. n-2
  std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + 1;
    const double rj = grid.r[j];
    double dg = 1.0 / dt + v + s.g0 * rj;
    double lo = -v;
    double up = 0.0;
    if (grid.eps > 0.0) {
      const double w = grid.eps * std::exp(-grid.alpha * rj) / (h * h);
      const double ap = std::exp(grid.alpha * (rj + 0.5 * h));
      const double am = std::exp(grid.alpha * (rj - 0.5 * h));
      dg += w * (ap + am);
      lo -= w * am;
      up -= w * ap;
    }
    diag[k] = dg;
    lower[k] = lo;
    upper[k] = up;
    rhs[k] = s.f[j] / dt + 2.0 * s.g0 * gain[j];
  }
  // Thomas algorithm
  for (std::size_t k = 1; k < m; ++k) {
    const double w = lower[k] / diag[k - 1];
    diag[k] -= w * upper[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  GreerState out = s;
  out.f.assign(n, 0.0);
  out.f[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) out.f[k + 1] = (rhs[k] - upper[k] * out.f[k + 2]) / diag[k];

  const double total = greer_detail::trapezoid(s.f, h);
  out.phi = s.phi / (1.0 + dt * s.tau0 * total);
  return out;
}

struct GreerComparison {
  double max_discrepancy = 0.0;   // max over steps of the L2(dr) norm of f_full - f_ref
  double max_phi_discrepancy = 0.0;
  long steps = 0;
  std::vector<double> per_step;
};

/// Throws ConfigurationNotDegenerate unless the config is the zero-flow,
/// constant-g, homogeneous, orientation-uniform reduction.
inline void require_degenerate(const RunConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::ConfigurationNotDegenerate, why); };
  if (c.flow.kind != VelocityField::Kind::Zero) fail("flow must be zero");
  if (c.model.g_rate.kind != ScissionRate::Kind::Constant) fail("g must be the constant closure");
  if (c.domain_kind != SpatialGrid::Kind::Homogeneous) fail("domain must be homogeneous");
  if (c.psi0.anisotropy != 0.0) fail("initial psi must be orientation-uniform");
  if (c.psi0.spatial_amplitude != 0.0) fail("initial psi must be spatially uniform");
  if (c.phi0.kind != InitialPhi::Kind::Constant) fail("initial phi must be constant");
  if (!c.model.kernel.is_uniform()) fail("kernel must be uniform");
}

/// f = (1/|Omega|) int psi deta dy from a full-solver state (own quadrature).
inline std::vector<double> averaged_density(const PolymerField& psi, const Discretization& d) {
  std::vector<double> f(d.n_r(), 0.0);
  const double dv = d.space.cell_volume() / d.space.volume;
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i)
      for (std::size_t j = 0; j < d.n_r(); ++j) f[j] += dv * d.sphere.weights[i] * psi.at(y, i, j);
  return f;
}

/// Runs both solvers side by side for `steps` steps (all configured steps
/// when negative) and reports the discrepancy of the averaged density.
inline GreerComparison compare_with_full(const RunConfig& cfg, long steps = -1) {
  require_degenerate(cfg);
  Simulation sim(cfg);
  const auto& d = sim.discretization();
  GreerGrid grid{d.length.r, d.length.dr, d.length.alpha, sim.epsilon()};
  GreerState ref;
  ref.f = averaged_density(sim.state().psi, d);
  ref.phi = sim.state().phi.values[0];
  ref.tau0 = cfg.model.tau0;
  ref.g0 = cfg.model.g_lo();

  GreerComparison out;
  const long n_steps = steps < 0 ? cfg.n_steps : std::min(steps, cfg.n_steps);
  for (long n = 0; n < n_steps; ++n) {
    sim.step();
    ref = greer_step(ref, grid, cfg.dt);
    const auto full = averaged_density(sim.state().psi, d);
    double s = 0.0;
    for (std::size_t j = 0; j < full.size(); ++j) {
      const double e = full[j] - ref.f[j];
      s += d.length.trap[j] * e * e;
    }
    out.per_step.push_back(std::sqrt(s));
    out.max_discrepancy = std::max(out.max_discrepancy, std::sqrt(s));
    out.max_phi_discrepancy =
        std::max(out.max_phi_discrepancy, std::abs(sim.state().phi.values[0] - ref.phi));
  }
  out.steps = n_steps;
  return out;
}

/// Standalone reference run with the diagnostics schema (homogeneous record).
inline std::vector<DiagnosticsRecord> run_greer(const RunConfig& cfg) {
  require_degenerate(cfg);
  const auto d = make_discretization(cfg);
  const auto psi0 = initial_psi(cfg, d);
  GreerGrid grid{d.length.r, d.length.dr, d.length.alpha,
                 cfg.epsilon ? *cfg.epsilon : d.length.dr * d.length.dr};
  GreerState s;
  s.f = averaged_density(psi0, d);
  s.phi = cfg.phi0.value;
  s.tau0 = cfg.model.tau0;
  s.g0 = cfg.model.g_lo();
  const double vol = d.space.volume;
  std::vector<DiagnosticsRecord> out;
  auto record = [&](long n) {
    DiagnosticsRecord r;
    r.step = n;
    r.t = static_cast<double>(n) * cfg.dt;
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < s.f.size(); ++j) {
      m0 += d.length.trap[j] * s.f[j];
      m1 += d.length.trap[j] * d.length.r[j] * s.f[j];
      m2 += d.length.trap[j] * d.length.r[j] * d.length.r[j] * s.f[j];
    }
    r.polymer_count = vol * m0;
    r.polymer_mass = vol * m1;
    r.monomer_total = vol * s.phi;
    r.total_mass = r.polymer_mass + r.monomer_total;
    r.stress = Mat3::Identity() * (m2 / 3.0);
    r.psi_min = *std::min_element(s.f.begin(), s.f.end());
    r.phi_min = r.phi_max = s.phi;
    r.envelope_margin = std::numeric_limits<double>::quiet_NaN();
    r.cn = std::numeric_limits<double>::quiet_NaN();
    r.psi_energy_lhs = r.psi_energy_bound = r.phi_energy_lhs = r.phi_energy_bound =
        std::numeric_limits<double>::quiet_NaN();
    out.push_back(r);
  };
  record(0);
  for (long n = 1; n <= cfg.n_steps; ++n) {
    s = greer_step(s, grid, cfg.dt);
    if (n % cfg.output.diagnostics_every == 0 || n == cfg.n_steps) record(n);
  }
  return out;
}

}  // namespace rodflow
