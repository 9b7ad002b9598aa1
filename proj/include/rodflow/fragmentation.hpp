#pragma once

// Scission operator with breakage rate beta = g r:
//   F psi = -g r psi + 2 int_r^inf beta(r') kappa(r, r') psi(r') dr'.
// For the uniform kernel kappa = 1/r' the r' factors cancel and the gain is a
// single backward cumulative sum, 2 g Lambda_2[psi].

#include <span>
#include <vector>

#include "rodflow/fields.hpp"
#include "rodflow/model_params.hpp"

namespace rodflow {

struct FragmentationTerms {
  PolymerField loss;       // -g r psi
  PolymerField gain;       // 2 g int_r^inf r' kappa(r, r') psi(r') dr'
  std::vector<double> g;   // per (y, eta) column, index y * n_eta + i
};

/// Gain column for an arbitrary kernel: O(n_r^2) trapezoid over parents.
inline void kernel_gain_column(std::span<const double> col, const LengthGrid& lg,
                               const FragmentationKernel& kernel, double g, std::span<double> out) {
  const std::size_t n = col.size();
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = j; k + 1 < n; ++k) {
      const double a = lg.r[k] * kernel(lg.r[j], lg.r[k]) * col[k];
      const double b = lg.r[k + 1] * kernel(lg.r[j], lg.r[k + 1]) * col[k + 1];
      s += 0.5 * lg.dr * (a + b);
    }
    out[j] = 2.0 * g * s;
  }
}

inline FragmentationTerms fragmentation_terms(const PolymerField& psi, std::span<const double> g_field,
                                              const Discretization& d,
                                              const FragmentationKernel& kernel = {}) {
  FragmentationTerms t{PolymerField(d), PolymerField(d), {g_field.begin(), g_field.end()}};
  const auto& lg = d.length;
  for (std::size_t y = 0; y < d.n_y(); ++y)
    for (std::size_t i = 0; i < d.n_eta(); ++i) {
      const double g = g_field[y * d.n_eta() + i];
      const auto col = psi.column(y, i);
      auto loss = t.loss.column(y, i);
      auto gain = t.gain.column(y, i);
      for (std::size_t j = 0; j < col.size(); ++j) loss[j] = -g * lg.r[j] * col[j];
      if (kernel.is_uniform()) {
        lg.tail_into(col, gain);
        for (double& v : gain) v *= 2.0 * g;
      } else {
        kernel_gain_column(col, lg, kernel, g, gain);
      }
    }
  return t;
}

inline PolymerField apply_fragmentation(const PolymerField& psi, std::span<const double> g_field,
                                        const Discretization& d,
                                        const FragmentationKernel& kernel = {}) {
  auto t = fragmentation_terms(psi, g_field, d, kernel);
  for (std::size_t k = 0; k < t.loss.values.size(); ++k) t.loss.values[k] += t.gain.values[k];
  return std::move(t.loss);
}

}  // namespace rodflow
