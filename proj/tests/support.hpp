#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rodflow/rodflow.hpp"

namespace rodflow::testing {

/// Zero-flow, homogeneous, orientation-uniform run over T = 1.
inline nlohmann::json homogeneous_config(int n_r = 64, double dt = 1e-2) {
  return {
      {"model",
       {{"tau0", 0.2},
        {"alpha", 1.0},
        {"d1", 1.0},
        {"d2", 1.0},
        {"t_final", 1.0},
        {"g_rate", {{"kind", "constant"}, {"g0", 1.0}}}}},
      {"grid", {{"n_r", n_r}, {"r_max", 30.0}, {"n_theta", 4}, {"n_phi", 8}}},
      {"domain", {{"kind", "homogeneous"}, {"volume", 1.0}}},
      {"flow", {{"kind", "zero"}}},
      {"initial",
       {{"psi", {{"kind", "smooth"}, {"amplitude", 0.05}, {"decay", 1.5}, {"rise", 1.0}}},
        {"phi", {{"kind", "constant"}, {"value", 1.0}}}}},
      {"time", {{"dt", dt}}},
      {"solver", {{"epsilon", 0.0}}},
      {"output", {{"directory", "rodflow_test_out"}}}};
}

/// Periodic shear on a 4 x 4 x 1 cube with strain-rate scission, anisotropic
/// and spatially varying initial data.
inline nlohmann::json shear_config(long steps = 500, int n_r = 48, int n_theta = 6, int n_phi = 12) {
  return {
      {"model",
       {{"tau0", 0.5},
        {"alpha", 2.0},
        {"d1", 1.0},
        {"d2", 0.1},
        {"t_final", 1.0},
        {"g_rate", {{"kind", "strain_rate"}, {"g_lo", 0.5}, {"c", 0.25}}}}},
      {"grid", {{"n_r", n_r}, {"r_max", 12.0}, {"n_theta", n_theta}, {"n_phi", n_phi}}},
      {"domain", {{"kind", "periodic_cube"}, {"length", 1.0}, {"n", {4, 4, 1}}}},
      {"flow", {{"kind", "periodic_shear"}, {"shear_rate", 1.0}}},
      {"initial",
       {{"psi",
         {{"kind", "smooth"},
          {"amplitude", 0.2},
          {"decay", 2.5},
          {"rise", 0.5},
          {"anisotropy", 2.0},
          {"axis", {1.0, 1.0, 0.0}},
          {"spatial_amplitude", 0.5}}},
        {"phi", {{"kind", "cosine"}, {"value", 1.0}, {"amplitude", 0.5}}}}},
      {"time", {{"steps", steps}}},
      {"output", {{"directory", "rodflow_test_out"}}}};
}

/// Fragmentation-only zero-flow problem for refinement studies.
inline nlohmann::json fragmentation_config(int n_r = 241, double dt = 0.05) {
  auto j = homogeneous_config(n_r, dt);
  j["model"]["tau0"] = 0.0;
  j["grid"]["n_theta"] = 2;
  j["grid"]["n_phi"] = 4;
  return j;
}

inline Discretization make_grid(int n_r, double r_max, double alpha, int n_theta = 4, int n_phi = 8) {
  Discretization d;
  d.length = LengthGrid::make(n_r, r_max, alpha);
  d.sphere = SphereGrid::make(n_theta, n_phi);
  d.space = SpatialGrid::homogeneous(1.0, Vec3::Zero());
  return d;
}

/// Smooth decaying column with psi(0) = 0 and a negligible value at r_max.
inline std::vector<double> random_decaying_column(const LengthGrid& lg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(0.2, 2.0);
  std::uniform_real_distribution<double> rate(1.2, 3.0);
  std::uniform_real_distribution<double> wiggle(0.0, 0.8);
  std::uniform_real_distribution<double> freq(0.5, 3.0);
  const double a = amp(rng), l = rate(rng) * lg.alpha, b = wiggle(rng), w = freq(rng);
  std::vector<double> col(lg.size());
  for (std::size_t j = 0; j < col.size(); ++j) {
    const double r = lg.r[j];
    col[j] = a * r * std::exp(-l * r) * (1.0 + b * std::sin(w * r));
  }
  col.back() = 0.0;
  return col;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rodflow_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rodflow::testing
