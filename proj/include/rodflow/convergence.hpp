#pragma once

// Refinement study: level l halves dt and dr of level l-1 (nested length
// grids, n_r -> 2 (n_r - 1) + 1). Observed orders come from successive
// differences restricted to the coarsest grid,
//   p_l = log2(|u_l - u_{l+1}| / |u_{l+1} - u_{l+2}|),
// which for a first-order scheme tends to 1 without the bias of comparing
// against a finest level that is itself in error.

#include <cmath>
#include <string>
#include <vector>

#include "rodflow/config.hpp"
#include "rodflow/diagnostics.hpp"
#include "rodflow/simulation.hpp"

namespace rodflow {

struct ConvergenceLevel {
  int n_r = 0;
  double dt = 0.0;
  long steps = 0;
  double mass_drift = 0.0;     // |rho(T) - rho(0)| / rho(0)
  double psi_difference = 0.0; // L2_alpha distance to the next level, coarse nodes
  double phi_difference = 0.0; // L2 distance to the next level
};

struct ConvergenceTable {
  std::vector<ConvergenceLevel> levels;
  std::vector<double> psi_order;
  std::vector<double> phi_order;
  std::vector<double> drift_order;
  double runtime_seconds = 0.0;
};

/// Config of level `level`: dt / 2^level and a nested length grid.
inline nlohmann::json refined_config(const nlohmann::json& base, int level) {
  nlohmann::json j = base;
  long n_r = j.at("grid").at("n_r").get<long>();
  for (int l = 0; l < level; ++l) n_r = 2 * (n_r - 1) + 1;
  j["grid"]["n_r"] = n_r;
  auto& time = j["time"];
  if (time.contains("dt")) {
    time["dt"] = time["dt"].get<double>() / std::pow(2.0, level);
  } else {
    time["steps"] = time["steps"].get<long>() << level;
  }
  if (j.contains("solver") && j["solver"].contains("epsilon") && !j["solver"]["epsilon"].is_null())
    j["solver"]["epsilon"] = j["solver"]["epsilon"].get<double>() / std::pow(4.0, level);
  return j;
}

inline ConvergenceTable convergence_study(const RunConfig& base, int levels) {
  require(levels >= 3, ErrorKind::InvalidConfig, "convergence study needs at least 3 levels");
  ConvergenceTable table;
  struct Final {
    PolymerField psi;
    MonomerField phi;
  };
  std::vector<Final> finals;
  Discretization coarse;
  for (int l = 0; l < levels; ++l) {
    auto cfg = config_from_json(refined_config(base.source, l));
    Simulation sim(cfg);
    double rho0 = 0.0;
    double rho_end = 0.0;
    sim.run(false, [&](const DiagnosticsRecord& r) {
      if (r.step == 0) rho0 = r.total_mass;
      rho_end = r.total_mass;
    });
    ConvergenceLevel lev;
    lev.n_r = cfg.n_r;
    lev.dt = cfg.dt;
    lev.steps = cfg.n_steps;
    lev.mass_drift = rho0 != 0.0 ? std::abs(rho_end - rho0) / std::abs(rho0) : std::abs(rho_end);
    table.levels.push_back(lev);
    if (l == 0) coarse = sim.discretization();
    // restrict to the coarse length nodes
    const auto& d = sim.discretization();
    const std::size_t stride = (d.n_r() - 1) / (coarse.n_r() - 1);
    Final fin{PolymerField(coarse), sim.state().phi};
    for (std::size_t y = 0; y < coarse.n_y(); ++y)
      for (std::size_t i = 0; i < coarse.n_eta(); ++i)
        for (std::size_t j = 0; j < coarse.n_r(); ++j)
          fin.psi.at(y, i, j) = sim.state().psi.at(y, i, j * stride);
    finals.push_back(std::move(fin));
  }
  for (int l = 0; l + 1 < levels; ++l) {
    PolymerField diff = finals[l].psi;
    for (std::size_t k = 0; k < diff.values.size(); ++k) diff.values[k] -= finals[l + 1].psi.values[k];
    table.levels[l].psi_difference = std::sqrt(weighted_norm_sq(diff, coarse, NormKind::L2alpha));
    std::vector<double> dphi(finals[l].phi.values.size());
    for (std::size_t c = 0; c < dphi.size(); ++c)
      dphi[c] = finals[l].phi.values[c] - finals[l + 1].phi.values[c];
    table.levels[l].phi_difference = std::sqrt(monomer_norm_sq(coarse.space, dphi));
  }
  auto order = [](double a, double b) {
    return (a > 0.0 && b > 0.0) ? std::log2(a / b) : std::numeric_limits<double>::quiet_NaN();
  };
  for (int l = 0; l + 2 < levels; ++l) {
    table.psi_order.push_back(order(table.levels[l].psi_difference, table.levels[l + 1].psi_difference));
    table.phi_order.push_back(order(table.levels[l].phi_difference, table.levels[l + 1].phi_difference));
  }
  for (int l = 0; l + 1 < levels; ++l)
    table.drift_order.push_back(order(table.levels[l].mass_drift, table.levels[l + 1].mass_drift));
  return table;
}

}  // namespace rodflow
