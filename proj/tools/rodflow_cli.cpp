#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rodflow/rodflow.hpp"

namespace {

using namespace rodflow;

void print_ledger(const Simulation& sim) {
  const auto& l = sim.ledger();
  const double dt = sim.config().dt;
  std::printf("ledger: k1 = %.6g, k2 = %.6g, k3 = %.6g [1/time]\n", l.k1, l.k2, l.k3);
  std::printf("        k2 dt = %.6g, k3 dt = %.6g (both must be < 1)\n", l.k2 * dt, l.k3 * dt);
  std::printf("        C0 = %.6g, C_N = %.6g, C_inf = %.6g\n", l.c0, l.closed_form(l.n_steps), l.c_inf);
  std::printf("        C_P = %.6g, C_D = %.6g [1/time], g in [%.6g, %.6g] [1/(length time)]\n", l.c_p,
              l.c_d, l.g_lo, l.g_hi);
  std::printf("        epsilon = %.6g [length^2/time]\n", sim.epsilon());
}

void print_summary(const Simulation& sim) {
  const auto& s = sim.summary();
  std::printf("checked steps: %ld\n", s.checked_steps);
  std::printf("negative part ratio: %.3e\n", s.negative_ratio);
  std::printf("envelope excess: %.3e\n", s.envelope_excess);
  std::printf("phi below 0: %.3e, above max: %.3e\n", s.phi_below, s.phi_above);
  std::printf("energy ratios: psi %.3e, phi %.3e\n", s.psi_energy_ratio, s.phi_energy_ratio);
  std::printf("coercivity margin at step 1: %.3e\n", s.coercivity_margin);
  std::printf("max Krylov iterations: %d\n", s.max_krylov_iterations);
}

int cmd_describe(const std::string& path) {
  const auto cfg = load_config(path);
  const auto& m = cfg.model;
  std::printf("config %s  hash %s\n", path.c_str(), hash_hex(cfg.hash).c_str());
  std::printf("model:\n");
  std::printf("  tau0    = %-12.6g [1/(concentration time)]  polymerization rate\n", m.tau0);
  std::printf("  alpha   = %-12.6g [1/length]                exponential weight\n", m.alpha);
  std::printf("  d1      = %-12.6g [1/time]                  rotational diffusion\n", m.d1);
  std::printf("  d2      = %-12.6g [length^2/time]           monomer diffusion\n", m.d2);
  std::printf("  T       = %-12.6g [time]                    horizon\n", m.t_final);
  std::printf("  g       = %s, g_lo = %.6g [1/(length time)], c = %.6g\n", m.g_rate.name().c_str(),
              m.g_lo(), m.g_rate.c);
  std::printf("  kernel  = %s\n", m.kernel.is_uniform() ? "uniform" : "tabulated");
  std::printf("  A(r)    = %s, C_A = %.6g\n", m.a_weight.name().c_str(), m.c_a());
  std::printf("grid:\n");
  std::printf("  n_r = %d, r_max = %.6g [length], dr = %.6g\n", cfg.n_r, cfg.r_max,
              cfg.r_max / (cfg.n_r - 1));
  std::printf("  sphere %d x %d (theta x phi)\n", cfg.n_theta, cfg.n_phi);
  if (cfg.domain_kind == SpatialGrid::Kind::Homogeneous)
    std::printf("  domain homogeneous, volume %.6g [length^3]\n", cfg.volume);
  else
    std::printf("  domain %s cube, L = %.6g [length], cells %d x %d x %d\n",
                cfg.domain_kind == SpatialGrid::Kind::PeriodicCube ? "periodic" : "closed", cfg.length,
                cfg.cells[0], cfg.cells[1], cfg.cells[2]);
  std::printf("  flow %s\n", cfg.flow.name().c_str());
  std::printf("time: dt = %.6g [time], steps = %ld\n", cfg.dt, cfg.n_steps);
  try {
    Simulation sim(cfg);
    print_ledger(sim);
  } catch (const Error& e) {
    std::printf("ledger: not admissible (%s)\n", e.what());
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto cfg = load_config(path);
  Simulation sim(cfg);
  print_ledger(sim);
  std::printf("config %s is valid (hash %s)\n", path.c_str(), hash_hex(cfg.hash).c_str());
  return 0;
}

int cmd_run(const std::string& path) {
  const auto cfg = load_config(path);
  Simulation sim(cfg);
  print_ledger(sim);
  sim.run(true);
  print_summary(sim);
  std::printf("wrote %s\n", cfg.output.directory.c_str());
  return 0;
}

int cmd_greer(const std::string& path) {
  const auto cfg = load_config(path);
  const auto records = run_greer(cfg);
  const std::filesystem::path dir = cfg.output.directory;
  std::filesystem::create_directories(dir);
  CsvWriter csv(dir / "greer.csv", cfg.hash);
  for (const auto& r : records) csv.write(r);
  const double rho0 = records.front().total_mass;
  const double drift = rho0 != 0.0 ? (records.back().total_mass - rho0) / rho0 : 0.0;
  std::printf("reference run: %zu records, relative mass drift %.3e\n", records.size(), drift);
  std::printf("wrote %s\n", (dir / "greer.csv").string().c_str());
  return 0;
}

int cmd_converge(const std::string& path) {
  const auto cfg = load_config(path);
  const auto table = convergence_study(cfg, cfg.convergence_levels);
  const std::filesystem::path dir = cfg.output.directory;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "convergence.csv", std::ios::binary);
  out << "# rodflow-convergence v1 config_hash=" << hash_hex(cfg.hash) << "\n";
  out << "level,n_r,dt,steps,mass_drift,psi_difference,phi_difference\n";
  std::printf("%5s %7s %12s %12s %14s %14s\n", "level", "n_r", "dt", "drift", "psi diff", "phi diff");
  for (std::size_t l = 0; l < table.levels.size(); ++l) {
    const auto& v = table.levels[l];
    char row[256];
    std::snprintf(row, sizeof row, "%zu,%d,%.17g,%ld,%.17g,%.17g,%.17g\n", l, v.n_r, v.dt, v.steps,
                  v.mass_drift, v.psi_difference, v.phi_difference);
    out << row;
    std::printf("%5zu %7d %12.5g %12.4e %14.4e %14.4e\n", l, v.n_r, v.dt, v.mass_drift,
                v.psi_difference, v.phi_difference);
  }
  for (std::size_t k = 0; k < table.psi_order.size(); ++k)
    std::printf("order %zu: psi %.3f  phi %.3f\n", k, table.psi_order[k], table.phi_order[k]);
  for (std::size_t k = 0; k < table.drift_order.size(); ++k)
    std::printf("drift order %zu: %.3f\n", k, table.drift_order[k]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rodflow: rod-like polymer and monomer transport simulator"};
  app.require_subcommand(1);
  std::string config;
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const std::string&);
  };
  const Command commands[] = {
      {"run", "run a simulation and write diagnostics and snapshots", cmd_run},
      {"greer", "run the one-dimensional reference solver", cmd_greer},
      {"validate", "check a config and its stability ledger without stepping", cmd_validate},
      {"describe", "print the parameters of a config with units", cmd_describe},
      {"converge", "run a refinement study and report observed orders", cmd_converge},
  };
  int (*selected)(const std::string&) = nullptr;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("config", config, "JSON run configuration")->required();
    sub->callback([&selected, fn = c.fn] { selected = fn; });
  }
  CLI11_PARSE(app, argc, argv);
  try {
    return selected(config);
  } catch (const rodflow::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return rodflow::exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: InvalidConfig: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
