#pragma once

// Uniform truncated length axis r in [0, r_max] with the exponential weight
// e^{alpha r}. Column-level maps: trapezoid integral, the tail integral
// Lambda_2(r) = int_r^rmax psi dr', and the inflow-aware upwind r-derivative.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rodflow/error.hpp"

namespace rodflow {

struct LengthGrid {
  int n_r = 0;
  double r_max = 0.0;
  double dr = 0.0;
  double alpha = 1.0;
  std::vector<double> r;       // nodes, r[0] = 0, r[n_r - 1] = r_max
  std::vector<double> trap;    // trapezoid weights
  std::vector<double> weight;  // e^{alpha r_j}

  static LengthGrid make(int n_r, double r_max, double alpha) {
    require(n_r >= 3, ErrorKind::InvalidConfig, "n_r must be >= 3");
    require(r_max > 0.0, ErrorKind::NonPositiveCoefficient, "r_max must be > 0");
    require(alpha > 0.0, ErrorKind::NonPositiveCoefficient, "alpha must be > 0");
    LengthGrid g;
    g.n_r = n_r;
    g.r_max = r_max;
    g.alpha = alpha;
    g.dr = r_max / (n_r - 1);
    g.r.resize(n_r);
    g.trap.assign(n_r, g.dr);
    g.weight.resize(n_r);
    for (int j = 0; j < n_r; ++j) {
      g.r[j] = j == n_r - 1 ? r_max : j * g.dr;
      g.weight[j] = std::exp(alpha * g.r[j]);
    }
    g.trap.front() = g.trap.back() = 0.5 * g.dr;
    return g;
  }

  std::size_t size() const { return r.size(); }

  /// Trapezoid integral of a column.
  double integrate(std::span<const double> col) const {
    double s = 0.0;
    for (std::size_t j = 0; j < col.size(); ++j) s += trap[j] * col[j];
    return s;
  }

  /// Trapezoid integral of r^k * col.
  double moment(std::span<const double> col, int k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < col.size(); ++j) s += trap[j] * std::pow(r[j], k) * col[j];
    return s;
  }

  /// Throws TruncationTail when |psi(r_max)| > 1e-10 max|psi|.
  void check_tail(std::span<const double> col) const {
    double peak = 0.0;
    for (double v : col) peak = std::max(peak, std::abs(v));
    require(std::abs(col.back()) <= 1e-10 * peak, ErrorKind::TruncationTail,
            "field does not decay at r_max");
  }

  /// Lambda_2 column: out[j] = trapezoid integral of col over [r_j, r_max].
  void tail_into(std::span<const double> col, std::span<double> out) const {
    const std::size_t n = col.size();
    out[n - 1] = 0.0;
    for (std::size_t j = n - 1; j-- > 0;) out[j] = out[j + 1] + 0.5 * dr * (col[j] + col[j + 1]);
  }

  std::vector<double> tail_integral(std::span<const double> col, bool checked = true) const {
    if (checked) check_tail(col);
    std::vector<double> out(col.size());
    tail_into(col, out);
    return out;
  }

  /// Backward difference for rightward transport; the node r = 0 carries the
  /// inflow value 0 regardless of what the column stores there.
  std::vector<double> upwind_dr(std::span<const double> col) const {
    std::vector<double> out(col.size(), 0.0);
    for (std::size_t j = 1; j < col.size(); ++j) {
      const double left = j == 1 ? 0.0 : col[j - 1];
      out[j] = (col[j] - left) / dr;
    }
    return out;
  }
};

}  // namespace rodflow
