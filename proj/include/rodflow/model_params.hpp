#pragma once

// Constitutive constants and closures: polymerization rate, weight exponent,
// diffusivities, length mobility A(r), scission intensity g and the
// fragmentation kernel.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rodflow/error.hpp"

namespace rodflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Length-dependent mobility weight A(r) multiplying the orientation operator.
struct LengthWeight {
  enum class Kind { One, CubicDecay };
  Kind kind = Kind::One;

  double operator()(double r) const {
    switch (kind) {
      case Kind::One: return 1.0;
      case Kind::CubicDecay: {
        const double s = 1.0 + r;
        return 1.0 / (s * s * s);
      }
    }
    return 1.0;
  }

  /// ess-sup of A over r >= 0 (C_A).
  double bound() const { return 1.0; }

  std::string name() const { return kind == Kind::One ? "one" : "cubic_decay"; }
};

/// Scission intensity g(grad u, u, eta); the breakage rate is g * r.
struct ScissionRate {
  enum class Kind { Constant, StrainRate, Orientation };
  Kind kind = Kind::Constant;
  double g_lo = 1.0;  // g0 for the constant closure
  double c = 0.0;
  std::optional<double> g_hi;

  double raw(const Mat3& grad_u, const Vec3& /*u*/, const Vec3& eta) const {
    switch (kind) {
      case Kind::Constant: return g_lo;
      case Kind::StrainRate: {
        const Mat3 strain = grad_u + grad_u.transpose();
        return g_lo + c * strain.norm();
      }
      case Kind::Orientation: {
        const Mat3 strain = grad_u + grad_u.transpose();
        return g_lo + c * std::abs(eta.dot(strain * eta));
      }
    }
    return g_lo;
  }

  double upper() const {
    if (kind == Kind::Constant) return g_lo;
    return g_hi.value_or(std::numeric_limits<double>::infinity());
  }

  std::string name() const {
    switch (kind) {
      case Kind::Constant: return "constant";
      case Kind::StrainRate: return "strain_rate";
      case Kind::Orientation: return "orientation";
    }
    return "?";
  }
};

/// Daughter-length redistribution kernel kappa(r, r'), written in
/// self-similar form kappa = h(r / r') / r' with h on [0, 1].
/// The uniform kernel (h == 1) gives kappa = 1 / r' on 0 <= r <= r'.
class FragmentationKernel {
 public:
  static FragmentationKernel uniform() { return FragmentationKernel{}; }

  static FragmentationKernel tabulated(std::vector<double> h) {
    require(h.size() >= 2, ErrorKind::InvalidConfig, "tabulated kernel needs at least two values");
    FragmentationKernel k;
    k.table_ = std::move(h);
    return k;
  }

  bool is_uniform() const { return table_.empty(); }
  const std::vector<double>& table() const { return table_; }

  double shape(double s) const {
    if (s < 0.0 || s > 1.0) return 0.0;
    if (table_.empty()) return 1.0;
    const double x = s * static_cast<double>(table_.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(x), table_.size() - 2);
    const double t = x - static_cast<double>(i);
    return (1.0 - t) * table_[i] + t * table_[i + 1];
  }

  /// kappa(r, r'); zero outside 0 <= r <= r'. The r = 0 endpoint takes the
  /// right limit so grid quadratures see the continuous kernel.
  double operator()(double r, double r_parent) const {
    if (r_parent <= 0.0 || r < 0.0 || r > r_parent) return 0.0;
    return shape(r / r_parent) / r_parent;
  }

  /// Trapezoid integral of h over its own table (exact for the uniform kernel).
  double table_integral() const {
    if (table_.empty()) return 1.0;
    const double ds = 1.0 / static_cast<double>(table_.size() - 1);
    double sum = 0.5 * (table_.front() + table_.back());
    for (std::size_t i = 1; i + 1 < table_.size(); ++i) sum += table_[i];
    return sum * ds;
  }

  double symmetry_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < table_.size(); ++i)
      worst = std::max(worst, std::abs(table_[i] - table_[table_.size() - 1 - i]));
    return worst;
  }

  /// max over parents r_k of |trapezoid_{[0, r_k]} kappa(., r_k) - 1| on a node set.
  double grid_normalization_defect(const std::vector<double>& nodes) const {
    double worst = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double h = nodes[j + 1] - nodes[j];
        sum += 0.5 * h * ((*this)(nodes[j], nodes[k]) + (*this)(nodes[j + 1], nodes[k]));
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

  void validate(double tol = 1e-12) const {
    for (double v : table_)
      require(v >= 0.0 && std::isfinite(v), ErrorKind::KernelNormalizationFailure,
              "kernel table has negative or non-finite entries");
    const double integral = table_integral();
    require(std::abs(integral - 1.0) <= tol, ErrorKind::KernelNormalizationFailure,
            "kernel integrates to " + std::to_string(integral) + " instead of 1");
    require(symmetry_defect() <= tol, ErrorKind::KernelNormalizationFailure,
            "kernel is not symmetric under r -> r' - r");
  }

 private:
  std::vector<double> table_;
};

struct ModelParams {
  double tau0 = 0.0;   // polymerization rate coefficient [1/(concentration*time)]
  double alpha = 1.0;  // exponential weight exponent [1/length]
  double d1 = 1.0;     // rotational diffusion [1/time]
  double d2 = 1.0;     // monomer spatial diffusion [length^2/time]
  LengthWeight a_weight;
  ScissionRate g_rate;
  FragmentationKernel kernel;
  std::optional<double> rho0;  // total monomer-equivalent mass, if pinned by the config
  double t_final = 1.0;        // horizon T [time]

  double c_a() const { return a_weight.bound(); }
  double g_lo() const { return g_rate.g_lo; }
  double g_hi() const { return g_rate.upper(); }

  void validate() const {
    require(alpha > 0.0, ErrorKind::NonPositiveCoefficient, "alpha must be > 0");
    require(d1 > 0.0, ErrorKind::NonPositiveCoefficient, "d1 must be > 0");
    require(d2 > 0.0, ErrorKind::NonPositiveCoefficient, "d2 must be > 0");
    require(tau0 >= 0.0, ErrorKind::NonPositiveCoefficient, "tau0 must be >= 0");
    require(t_final > 0.0, ErrorKind::NonPositiveCoefficient, "t_final must be > 0");
    require(g_rate.g_lo > 0.0, ErrorKind::NonPositiveCoefficient, "g lower bound must be > 0");
    require(g_rate.c >= 0.0, ErrorKind::NonPositiveCoefficient, "g slope c must be >= 0");
    if (g_rate.g_hi)
      require(*g_rate.g_hi >= g_rate.g_lo, ErrorKind::NonPositiveCoefficient,
              "g upper bound below lower bound");
    kernel.validate();
  }

  /// A(r) in [0, C_A] on every node of a length grid.
  void validate_on_nodes(const std::vector<double>& r_nodes) const {
    for (double r : r_nodes) {
      const double a = a_weight(r);
      require(a >= 0.0 && a <= c_a(), ErrorKind::BoundViolation, "A(r) outside [0, C_A]");
    }
    if (kernel.is_uniform())
      require(kernel.grid_normalization_defect(r_nodes) <= 1e-12,
              ErrorKind::KernelNormalizationFailure, "kernel normalization fails on the length grid");
  }
};

/// g evaluated with its declared bounds enforced.
inline double evaluate_g(const ModelParams& params, const Mat3& grad_u, const Vec3& u,
                         const Vec3& eta) {
  require(std::abs(eta.norm() - 1.0) <= 1e-12, ErrorKind::BoundViolation,
          "orientation vector is not unit length");
  const double g = params.g_rate.raw(grad_u, u, eta);
  const double lo = params.g_lo();
  const double hi = params.g_hi();
  if (!(g >= lo * (1.0 - 1e-14) && g <= hi * (1.0 + 1e-14)))
    throw Error(ErrorKind::BoundViolation, "g = " + std::to_string(g) + " escapes [" +
                                               std::to_string(lo) + ", " + std::to_string(hi) +
                                               "]");
  return g;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key,
                                   const std::string& context) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null())
    throw Error(ErrorKind::MissingField, context + "." + key);
  return j.at(key);
}

inline double number(const nlohmann::json& j, const char* key, const std::string& context) {
  const auto& v = field(j, key, context);
  if (!v.is_number()) throw Error(ErrorKind::InvalidConfig, context + "." + key + " is not a number");
  return v.get<double>();
}

inline double number_or(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number())
    throw Error(ErrorKind::InvalidConfig, std::string(key) + " is not a number");
  return j.at(key).get<double>();
}

inline std::string string_or(const nlohmann::json& j, const char* key, std::string fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<std::string>();
}

}  // namespace detail

inline ModelParams params_from_json(const nlohmann::json& model) {
  using detail::number;
  const std::string ctx = "model";
  ModelParams p;
  p.tau0 = number(model, "tau0", ctx);
  p.alpha = number(model, "alpha", ctx);
  p.d1 = number(model, "d1", ctx);
  p.d2 = number(model, "d2", ctx);
  p.t_final = number(model, "t_final", ctx);
  if (model.contains("rho0") && !model.at("rho0").is_null()) p.rho0 = number(model, "rho0", ctx);

  if (model.contains("a_weight")) {
    const auto kind = detail::string_or(model.at("a_weight"), "kind", "one");
    if (kind == "one")
      p.a_weight.kind = LengthWeight::Kind::One;
    else if (kind == "cubic_decay")
      p.a_weight.kind = LengthWeight::Kind::CubicDecay;
    else
      throw Error(ErrorKind::InvalidConfig, "unknown a_weight kind '" + kind + "'");
  }

  const auto& g = detail::field(model, "g_rate", ctx);
  const auto gkind = detail::string_or(g, "kind", "constant");
  if (gkind == "constant") {
    p.g_rate.kind = ScissionRate::Kind::Constant;
    p.g_rate.g_lo = number(g, "g0", ctx + ".g_rate");
  } else if (gkind == "strain_rate" || gkind == "orientation") {
    p.g_rate.kind = gkind == "strain_rate" ? ScissionRate::Kind::StrainRate
                                           : ScissionRate::Kind::Orientation;
    p.g_rate.g_lo = number(g, "g_lo", ctx + ".g_rate");
    p.g_rate.c = number(g, "c", ctx + ".g_rate");
    if (g.contains("g_hi") && !g.at("g_hi").is_null())
      p.g_rate.g_hi = number(g, "g_hi", ctx + ".g_rate");
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown g_rate kind '" + gkind + "'");
  }

  if (model.contains("kernel")) {
    const auto& k = model.at("kernel");
    const auto kind = detail::string_or(k, "kind", "uniform");
    if (kind == "uniform") {
      p.kernel = FragmentationKernel::uniform();
    } else if (kind == "tabulated") {
      p.kernel = FragmentationKernel::tabulated(
          detail::field(k, "h", ctx + ".kernel").get<std::vector<double>>());
    } else {
      throw Error(ErrorKind::InvalidConfig, "unknown kernel kind '" + kind + "'");
    }
  }

  p.validate();
  return p;
}

/// Parses either a bare model object or a full run config holding a "model" key.
inline ModelParams load_params(std::string_view config_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config does not parse: ") + e.what());
  }
  if (j.is_object() && j.contains("model")) return params_from_json(j.at("model"));
  return params_from_json(j);
}

}  // namespace rodflow
