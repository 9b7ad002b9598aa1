#pragma once

// Monitored quantities computed by an independent quadrature pass (sphere
// quadrature weights, trapezoid in r, cell volumes in y): total mass, polymer
// count, stress, envelope margins and the discrete energy budgets.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rodflow/fields.hpp"
#include "rodflow/model_params.hpp"
#include "rodflow/monomer_step.hpp"

namespace rodflow {

struct DiagnosticsRecord {
  long step = 0;
  double t = 0.0;
  double total_mass = 0.0;
  double monomer_total = 0.0;
  double polymer_mass = 0.0;
  double polymer_count = 0.0;
  Mat3 stress = Mat3::Zero();  // domain average of int r^2 int eta (x) eta psi
  double envelope_margin = 0.0;
  double cn = 0.0;
  double psi_energy_lhs = 0.0;
  double psi_energy_bound = 0.0;
  double phi_energy_lhs = 0.0;
  double phi_energy_bound = 0.0;
  double psi_min = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
};

/// int r^k psi dr deta dy.
inline double polymer_moment(const PolymerField& psi, const Discretization& d, int k) {
  const auto& lg = d.length;
  const auto& sg = d.sphere;
  double total = 0.0;
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i) {
      const auto col = psi.column(y, i);
      double s = 0.0;
      for (std::size_t j = 0; j < col.size(); ++j) s += lg.trap[j] * std::pow(lg.r[j], k) * col[j];
      total += sg.weights[i] * s;
    }
  return total * d.space.cell_volume();
}

inline double monomer_total(const MonomerField& phi, const Discretization& d) {
  double s = 0.0;
  for (double v : phi.values) s += v;
  return s * d.space.cell_volume();
}

/// Stress per spatial node, S(y) = int r^2 int eta (x) eta psi deta dr.
inline std::vector<Mat3> stress_field(const PolymerField& psi, const Discretization& d) {
  const auto& lg = d.length;
  const auto& sg = d.sphere;
  std::vector<Mat3> out(d.n_y(), Mat3::Zero());
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i) {
      const auto col = psi.column(y, i);
      double m2 = 0.0;
      for (std::size_t j = 0; j < col.size(); ++j) m2 += lg.trap[j] * lg.r[j] * lg.r[j] * col[j];
      out[y] += sg.weights[i] * m2 * (sg.nodes[i] * sg.nodes[i].transpose());
    }
  return out;
}

inline Mat3 mean_stress(const PolymerField& psi, const Discretization& d) {
  Mat3 s = Mat3::Zero();
  for (const auto& m : stress_field(psi, d)) s += m;
  return s / static_cast<double>(d.n_y());
}

/// Smallest eigenvalue of a symmetric 3x3 matrix.
inline double min_eigenvalue(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

/// min over the grid of C e^{-alpha r} - psi.
inline double envelope_margin(const PolymerField& psi, const Discretization& d, double c) {
  const auto& lg = d.length;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i) {
      const auto col = psi.column(y, i);
      for (std::size_t j = 0; j < col.size(); ++j)
        margin = std::min(margin, c * std::exp(-lg.alpha * lg.r[j]) - col[j]);
    }
  return margin;
}

struct EnvelopeCheck {
  bool pass = true;
  double max_violation = 0.0;  // largest psi - C0 e^{-alpha r}, 0 when passing
  double margin = 0.0;         // min of C0 e^{-alpha r} - psi
  std::size_t y = 0, eta = 0, r = 0;  // witness of the smallest margin
};

inline EnvelopeCheck check_initial_envelope(const PolymerField& psi0, const Discretization& d,
                                            double c0) {
  EnvelopeCheck out;
  out.margin = std::numeric_limits<double>::infinity();
  const auto& lg = d.length;
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i)
      for (std::size_t j = 0; j < d.n_r(); ++j) {
        const double m = c0 * std::exp(-lg.alpha * lg.r[j]) - psi0.at(y, i, j);
        if (m < out.margin) {
          out.margin = m;
          out.y = y;
          out.eta = i;
          out.r = j;
        }
      }
  out.pass = out.margin >= 0.0;
  out.max_violation = out.pass ? 0.0 : -out.margin;
  return out;
}

inline double field_min(std::span<const double> v) {
  return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}
inline double field_max(std::span<const double> v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

/// Running left sides of the two discrete energy estimates:
///   max_n |psi^n|^2 + D1 dt sum |A^{1/2} grad_eta psi^n|^2 + 2 g_lo dt sum |r^{1/2} psi^n|^2
///     + sum |psi^n - psi^{n-1} o z_n|^2                      (weighted L2_alpha norms)
///   max_n |phi^n|^2 + sum |phi^n - phi^{n-1}|^2 + 2 D2 dt sum |grad phi^n|^2
struct EnergyTracker {
  double psi_max_norm = 0.0;
  double psi_sums = 0.0;
  double phi_max_norm = 0.0;
  double phi_sums = 0.0;

  void start(const PolymerField& psi0, const MonomerField& phi0, const Discretization& d) {
    psi_max_norm = weighted_norm_sq(psi0, d, NormKind::L2alpha);
    phi_max_norm = monomer_norm_sq(d.space, phi0.values);
    psi_sums = phi_sums = 0.0;
  }

  void update(const ModelParams& params, const Discretization& d, double dt,
              const PolymerField& psi, const PolymerField& psi_pulled_prev, const MonomerField& phi,
              const MonomerField& phi_prev, std::span<const CellFace> faces) {
    const double l2 = weighted_norm_sq(psi, d, NormKind::L2alpha);
    psi_max_norm = std::max(psi_max_norm, l2);
    // |A^{1/2} grad psi|^2 = V-norm minus its (1 + r) psi^2 part
    const double v = weighted_norm_sq(psi, d, NormKind::V, params.a_weight);
    PolymerField rpsi = psi;
    for (std::size_t y = 0; y < d.n_y(); ++y)
      for (std::size_t i = 0; i < d.n_eta(); ++i) {
        auto col = rpsi.column(y, i);
        for (std::size_t j = 0; j < col.size(); ++j) col[j] *= std::sqrt(d.length.r[j]);
      }
    const double r_part = weighted_norm_sq(rpsi, d, NormKind::L2alpha);
    const double grad = std::max(v - l2 - r_part, 0.0);
    PolymerField inc = psi;
    for (std::size_t k = 0; k < inc.values.size(); ++k) inc.values[k] -= psi_pulled_prev.values[k];
    psi_sums += params.d1 * dt * grad + 2.0 * params.g_lo() * dt * r_part +
                weighted_norm_sq(inc, d, NormKind::L2alpha);

    phi_max_norm = std::max(phi_max_norm, monomer_norm_sq(d.space, phi.values));
    std::vector<double> dphi(phi.values.size());
    for (std::size_t c = 0; c < dphi.size(); ++c) dphi[c] = phi.values[c] - phi_prev.values[c];
    phi_sums += monomer_norm_sq(d.space, dphi) +
                2.0 * params.d2 * dt * monomer_gradient_norm_sq(d.space, faces, phi.values);
  }

  double psi_lhs() const { return psi_max_norm + psi_sums; }
  double phi_lhs() const { return phi_max_norm + phi_sums; }
};

inline DiagnosticsRecord compute_diagnostics(long step, double t, const PolymerField& psi,
                                             const MonomerField& phi, const Discretization& d,
                                             double cn) {
  DiagnosticsRecord rec;
  rec.step = step;
  rec.t = t;
  rec.polymer_mass = polymer_moment(psi, d, 1);
  rec.polymer_count = polymer_moment(psi, d, 0);
  rec.monomer_total = monomer_total(phi, d);
  rec.total_mass = rec.monomer_total + rec.polymer_mass;
  rec.stress = mean_stress(psi, d);
  rec.cn = cn;
  rec.envelope_margin = envelope_margin(psi, d, cn);
  rec.psi_min = field_min(psi.values);
  rec.phi_min = field_min(phi.values);
  rec.phi_max = field_max(phi.values);
  return rec;
}

}  // namespace rodflow
