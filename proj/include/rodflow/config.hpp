#pragma once

// Run configuration: one JSON document holding the model, grids, domain,
// flow, initial data, time stepping, solver and output sections. Every output
// carries a 64-bit FNV-1a hash of the canonical (key-sorted) document.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rodflow/error.hpp"
#include "rodflow/fields.hpp"
#include "rodflow/flow.hpp"
#include "rodflow/model_params.hpp"
#include "rodflow/polymer_step.hpp"

namespace rodflow {

struct InitialPsi {
  enum class Kind { Zero, Exponential, Smooth };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;  // A
  double decay = 1.0;      // lambda >= alpha
  double rise = 1.0;       // ell, smooth kind only
  double anisotropy = 0.0; // a >= 0: factor (1 + a (eta.d)^2) / (1 + a)
  Vec3 axis = Vec3::UnitZ();
  double spatial_amplitude = 0.0;  // b in [0, 1): factor (1 + b cos(2 pi y1 / L)) / (1 + b)
};

struct InitialPhi {
  enum class Kind { Constant, Cosine };
  Kind kind = Kind::Constant;
  double value = 0.0;
  double amplitude = 0.0;  // cosine: value (1 + amplitude cos(2 pi y1 / L)), |amplitude| <= 1
};

struct OutputOptions {
  std::string directory = "rodflow_out";
  long diagnostics_every = 1;
  long snapshot_every = 0;  // 0: final snapshot only
  long check_every = 1;
  bool strict = true;
};

struct RunConfig {
  nlohmann::json source;
  std::uint64_t hash = 0;

  ModelParams model;
  int n_r = 0;
  double r_max = 0.0;
  int n_theta = 0;
  int n_phi = 0;

  SpatialGrid::Kind domain_kind = SpatialGrid::Kind::Homogeneous;
  double volume = 1.0;
  Vec3 reference_point = Vec3::Zero();
  double length = 1.0;
  std::array<int, 3> cells{1, 1, 1};

  VelocityField flow;
  InitialPsi psi0;
  InitialPhi phi0;
  std::optional<double> c0;

  double dt = 0.0;
  long n_steps = 0;
  SolverOptions solver;
  std::optional<double> epsilon;
  OutputOptions output;
  int convergence_levels = 4;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the canonical document without output.directory, so the same run
/// written to two places keeps one provenance.
inline std::uint64_t config_hash(nlohmann::json j) {
  if (j.is_object() && j.contains("output") && j["output"].is_object()) j["output"].erase("directory");
  return fnv1a64(j.dump());
}

namespace detail {

inline Vec3 vec3_or(const nlohmann::json& j, const char* key, Vec3 fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw Error(ErrorKind::InvalidConfig, std::string(key) + " must have 3 entries");
  return {v[0], v[1], v[2]};
}

inline const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  return j.contains(key) ? j.at(key) : empty;
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::number;
  using detail::number_or;
  using detail::string_or;
  RunConfig c;
  c.source = j;
  c.hash = config_hash(j);
  c.model = params_from_json(detail::field(j, "model", "config"));

  const auto& grid = detail::field(j, "grid", "config");
  c.n_r = static_cast<int>(number(grid, "n_r", "grid"));
  c.r_max = number(grid, "r_max", "grid");
  c.n_theta = static_cast<int>(number(grid, "n_theta", "grid"));
  c.n_phi = static_cast<int>(number(grid, "n_phi", "grid"));
  require(c.model.alpha * c.r_max >= 23.0, ErrorKind::InvalidConfig,
          "alpha * r_max must be >= 23 for the length truncation");

  const auto& dom = detail::section(j, "domain");
  const auto dkind = string_or(dom, "kind", "homogeneous");
  if (dkind == "homogeneous") {
    c.domain_kind = SpatialGrid::Kind::Homogeneous;
    c.volume = number_or(dom, "volume", 1.0);
    c.reference_point = detail::vec3_or(dom, "reference_point", Vec3::Zero());
  } else if (dkind == "periodic_cube" || dkind == "closed_cube") {
    c.domain_kind = dkind == "periodic_cube" ? SpatialGrid::Kind::PeriodicCube
                                             : SpatialGrid::Kind::ClosedCube;
    c.length = number_or(dom, "length", 1.0);
    const auto n = detail::field(dom, "n", "domain").get<std::vector<int>>();
    require(n.size() == 3, ErrorKind::InvalidConfig, "domain.n must have 3 entries");
    c.cells = {n[0], n[1], n[2]};
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown domain kind '" + dkind + "'");
  }

  const auto& flow = detail::section(j, "flow");
  const auto fkind = string_or(flow, "kind", "zero");
  if (fkind == "zero") {
    c.flow.kind = VelocityField::Kind::Zero;
  } else if (fkind == "rigid_rotation") {
    c.flow.kind = VelocityField::Kind::RigidRotation;
    c.flow.omega = detail::vec3_or(flow, "omega", Vec3::UnitZ());
  } else if (fkind == "periodic_shear") {
    c.flow.kind = VelocityField::Kind::PeriodicShear;
    c.flow.shear_rate = number(flow, "shear_rate", "flow");
    c.flow.k = number_or(flow, "k", 2.0 * std::numbers::pi);
  } else if (fkind == "taylor_green") {
    c.flow.kind = VelocityField::Kind::TaylorGreen;
    c.flow.amplitude = number(flow, "a", "flow");
    c.flow.k = number_or(flow, "k", 2.0 * std::numbers::pi);
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown flow kind '" + fkind + "'");
  }

  const auto& init = detail::section(j, "initial");
  const auto& psi = detail::section(init, "psi");
  const auto pkind = string_or(psi, "kind", "zero");
  if (pkind == "zero") {
    c.psi0.kind = InitialPsi::Kind::Zero;
  } else if (pkind == "exponential" || pkind == "smooth") {
    c.psi0.kind = pkind == "smooth" ? InitialPsi::Kind::Smooth : InitialPsi::Kind::Exponential;
    c.psi0.amplitude = number(psi, "amplitude", "initial.psi");
    c.psi0.decay = number(psi, "decay", "initial.psi");
    if (c.psi0.kind == InitialPsi::Kind::Smooth) c.psi0.rise = number(psi, "rise", "initial.psi");
    require(c.psi0.amplitude >= 0.0, ErrorKind::InvalidConfig, "initial psi amplitude must be >= 0");
    require(c.psi0.decay >= c.model.alpha, ErrorKind::InvalidConfig,
            "initial psi decay rate must be >= alpha");
    require(c.psi0.rise > 0.0, ErrorKind::InvalidConfig, "initial psi rise length must be > 0");
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown initial psi kind '" + pkind + "'");
  }
  c.psi0.anisotropy = number_or(psi, "anisotropy", 0.0);
  c.psi0.axis = detail::vec3_or(psi, "axis", Vec3::UnitZ());
  c.psi0.spatial_amplitude = number_or(psi, "spatial_amplitude", 0.0);
  require(c.psi0.anisotropy >= 0.0, ErrorKind::InvalidConfig, "anisotropy must be >= 0");
  require(c.psi0.axis.norm() > 0.0, ErrorKind::InvalidConfig, "anisotropy axis must be nonzero");
  c.psi0.axis.normalize();
  require(c.psi0.spatial_amplitude >= 0.0 && c.psi0.spatial_amplitude < 1.0,
          ErrorKind::InvalidConfig, "spatial_amplitude must lie in [0, 1)");

  const auto& phi = detail::section(init, "phi");
  const auto phkind = string_or(phi, "kind", "constant");
  c.phi0.kind = phkind == "cosine" ? InitialPhi::Kind::Cosine : InitialPhi::Kind::Constant;
  if (phkind != "constant" && phkind != "cosine")
    throw Error(ErrorKind::InvalidConfig, "unknown initial phi kind '" + phkind + "'");
  c.phi0.value = number_or(phi, "value", 0.0);
  c.phi0.amplitude = number_or(phi, "amplitude", 0.0);
  if (init.contains("c0") && !init.at("c0").is_null()) c.c0 = number(init, "c0", "initial");

  const auto& time = detail::field(j, "time", "config");
  const double t_final = c.model.t_final;
  if (time.contains("dt")) {
    c.dt = number(time, "dt", "time");
    require(c.dt > 0.0, ErrorKind::NonPositiveCoefficient, "dt must be > 0");
    c.n_steps = std::lround(t_final / c.dt);
    require(c.n_steps >= 1 && std::abs(c.n_steps * c.dt - t_final) <= 1e-9 * t_final,
            ErrorKind::InvalidConfig, "t_final must be an integer multiple of dt");
  } else {
    c.n_steps = static_cast<long>(number(time, "steps", "time"));
    require(c.n_steps >= 1, ErrorKind::InvalidConfig, "steps must be >= 1");
    c.dt = t_final / static_cast<double>(c.n_steps);
  }

  const auto& solver = detail::section(j, "solver");
  c.solver.tol = number_or(solver, "tol", 1e-12);
  c.solver.max_iter = static_cast<int>(number_or(solver, "max_iter", 2000));
  if (solver.contains("epsilon") && !solver.at("epsilon").is_null())
    c.epsilon = number(solver, "epsilon", "solver");

  const auto& out = detail::section(j, "output");
  c.output.directory = string_or(out, "directory", "rodflow_out");
  if (const char* env = std::getenv("RODFLOW_OUTPUT_DIR"); env && *env) c.output.directory = env;
  c.output.diagnostics_every = static_cast<long>(number_or(out, "diagnostics_every", 1));
  c.output.snapshot_every = static_cast<long>(number_or(out, "snapshot_every", 0));
  c.output.check_every = static_cast<long>(number_or(out, "check_every", 1));
  c.output.strict = out.contains("strict") ? out.at("strict").get<bool>() : true;
  require(c.output.diagnostics_every >= 1 && c.output.check_every >= 1 &&
              c.output.snapshot_every >= 0,
          ErrorKind::InvalidConfig, "output cadences must be positive");

  c.convergence_levels = static_cast<int>(number_or(detail::section(j, "convergence"), "levels", 4));
  return c;
}

inline RunConfig parse_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config does not parse: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline Discretization make_discretization(const RunConfig& c) {
  Discretization d;
  d.length = LengthGrid::make(c.n_r, c.r_max, c.model.alpha);
  d.sphere = SphereGrid::make(c.n_theta, c.n_phi);
  d.space = c.domain_kind == SpatialGrid::Kind::Homogeneous
                ? SpatialGrid::homogeneous(c.volume, c.reference_point)
                : SpatialGrid::cube(c.domain_kind, c.length, c.cells);
  return d;
}

inline PolymerField initial_psi(const RunConfig& c, const Discretization& d) {
  PolymerField psi(d);
  if (c.psi0.kind == InitialPsi::Kind::Zero) return psi;
  const auto& lg = d.length;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t y = 0; y < d.n_y(); ++y) {
    const double b = c.psi0.spatial_amplitude;
    const double sfac = (1.0 + b * std::cos(two_pi * d.space.centers[y][0] / d.space.length)) / (1.0 + b);
    for (std::size_t i = 0; i < d.n_eta(); ++i) {
      const double proj = d.sphere.nodes[i].dot(c.psi0.axis);
      const double a = c.psi0.anisotropy;
      const double efac = (1.0 + a * proj * proj) / (1.0 + a);
      auto col = psi.column(y, i);
      for (std::size_t j = 1; j + 1 < col.size(); ++j) {
        double radial = c.psi0.amplitude * std::exp(-c.psi0.decay * lg.r[j]);
        if (c.psi0.kind == InitialPsi::Kind::Smooth) radial *= 1.0 - std::exp(-lg.r[j] / c.psi0.rise);
        col[j] = radial * efac * sfac;
      }
    }
  }
  return psi;
}

inline MonomerField initial_phi(const RunConfig& c, const Discretization& d) {
  MonomerField phi(d);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t y = 0; y < d.n_y(); ++y) {
    double v = c.phi0.value;
    if (c.phi0.kind == InitialPhi::Kind::Cosine)
      v *= 1.0 + c.phi0.amplitude * std::cos(two_pi * d.space.centers[y][0] / d.space.length);
    phi.values[y] = v;
  }
  return phi;
}

/// Envelope constant max psi e^{alpha r} (padded by one part in 1e14 against
/// rounding) when the config leaves C0 open.
inline double envelope_constant(const PolymerField& psi, const Discretization& d) {
  double c0 = 0.0;
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i) {
      const auto col = psi.column(y, i);
      for (std::size_t j = 0; j < col.size(); ++j) c0 = std::max(c0, col[j] * d.length.weight[j]);
    }
  return c0 * (1.0 + 1e-14);
}

}  // namespace rodflow
