#pragma once

// One implicit polymer step per spatial node: a conservative (r, eta) system
// with mass 1/dt, upwind length transport tau0 phi^{n-1} d_r, breakage loss
// g r, the eps-regularization, and a control-volume orientation operator
// A(r) div_eta(P(grad u eta) psi - D1 grad_eta psi) with upwinded drift.
// Unknowns are the interior length nodes 1..n_r-2 of every eta cell; r = 0 is
// the inflow node and r_max carries the homogeneous Dirichlet truncation.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rodflow/error.hpp"
#include "rodflow/fields.hpp"
#include "rodflow/fragmentation.hpp"
#include "rodflow/model_params.hpp"

namespace rodflow {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct StepOperator {
  SparseRowMatrix matrix;
  std::vector<double> inner_weight;  // e^{alpha r} dr * cell area per unknown
  std::size_t n_eta = 0;
  std::size_t n_int = 0;
  double dt = 0.0;
  double eps = 0.0;

  std::size_t unknown(std::size_t i, std::size_t j) const { return i * n_int + (j - 1); }
  std::size_t size() const { return n_eta * n_int; }
};

/// Per-node physics entering the operator.
struct PolymerNodeInputs {
  Mat3 grad_u = Mat3::Zero();
  std::span<const double> g;  // g at every eta cell
  double phi_prev = 0.0;      // phi^{n-1} at this spatial node
};

inline StepOperator assemble_polymer_operator(const ModelParams& params, const Discretization& d,
                                              const PolymerNodeInputs& in, double dt, double eps) {
  require(dt > 0.0, ErrorKind::InvalidConfig, "dt must be > 0");
  require(eps >= 0.0, ErrorKind::InvalidConfig, "eps must be >= 0");
  require(in.phi_prev >= -1e-12, ErrorKind::NegativeMonomerInput,
          "phi^{n-1} = " + std::to_string(in.phi_prev) + " is negative");
  const auto& lg = d.length;
  const auto& sg = d.sphere;
  StepOperator op;
  op.n_eta = sg.size();
  op.n_int = lg.size() - 2;
  op.dt = dt;
  op.eps = eps;
  const std::size_t n_r = lg.size();
  const double dr = lg.dr;
  const double transport = params.tau0 * std::max(in.phi_prev, 0.0) / dr;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(op.size() * 9);
  op.inner_weight.resize(op.size());

  // Length direction, column by column.
  for (std::size_t i = 0; i < op.n_eta; ++i) {
    for (std::size_t j = 1; j + 1 < n_r; ++j) {
      const std::size_t row = op.unknown(i, j);
      op.inner_weight[row] = lg.weight[j] * dr * sg.cell_areas[i];
      double diag = 1.0 / dt + transport + in.g[i] * lg.r[j];
      if (j > 1) trip.emplace_back(row, op.unknown(i, j - 1), -transport);
      if (eps > 0.0) {
        const double scale = eps * std::exp(-lg.alpha * lg.r[j]) / (dr * dr);
        const double a_up = std::exp(lg.alpha * (lg.r[j] + 0.5 * dr));
        const double a_dn = std::exp(lg.alpha * (lg.r[j] - 0.5 * dr));
        diag += scale * (a_up + a_dn);
        if (j + 2 < n_r) trip.emplace_back(row, op.unknown(i, j + 1), -scale * a_up);
        if (j > 1) trip.emplace_back(row, op.unknown(i, j - 1), -scale * a_dn);
      }
      trip.emplace_back(row, row, diag);
    }
  }

  // Orientation fluxes through each sphere face, scaled by A(r_j).
  for (const auto& f : sg.faces) {
    const double v = projected_drift(in.grad_u, f.center).dot(f.normal) * f.length;
    const double vp = std::max(v, 0.0);
    const double vm = std::min(v, 0.0);
    const double diff = params.d1 * f.diffusion;
    const double inv_lo = 1.0 / sg.cell_areas[f.lo];
    const double inv_hi = 1.0 / sg.cell_areas[f.hi];
    for (std::size_t j = 1; j + 1 < n_r; ++j) {
      const double a = params.a_weight(lg.r[j]);
      if (a == 0.0) continue;
      const std::size_t lo = op.unknown(f.lo, j);
      const std::size_t hi = op.unknown(f.hi, j);
      // flux lo -> hi:  vp psi_lo + vm psi_hi - diff (psi_hi - psi_lo)
      trip.emplace_back(lo, lo, a * (vp + diff) * inv_lo);
      trip.emplace_back(lo, hi, a * (vm - diff) * inv_lo);
      trip.emplace_back(hi, lo, -a * (vp + diff) * inv_hi);
      trip.emplace_back(hi, hi, a * (diff - vm) * inv_hi);
    }
  }

  op.matrix.resize(static_cast<Eigen::Index>(op.size()), static_cast<Eigen::Index>(op.size()));
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

/// Right-hand side for one spatial node, over the full (eta, r) block:
/// psi^{n-1}(z_n(y)) / dt + gain of the previous state at y.
inline std::vector<double> polymer_rhs(std::span<const double> pulled_block,
                                       std::span<const double> prev_block,
                                       std::span<const double> g_eta, const Discretization& d,
                                       const FragmentationKernel& kernel, double dt) {
  const auto& lg = d.length;
  const std::size_t n_r = lg.size();
  std::vector<double> out(pulled_block.size());
  std::vector<double> gain(n_r);
  for (std::size_t i = 0; i < d.n_eta(); ++i) {
    const auto prev = prev_block.subspan(i * n_r, n_r);
    if (kernel.is_uniform()) {
      lg.tail_into(prev, gain);
      for (double& v : gain) v *= 2.0 * g_eta[i];
    } else {
      kernel_gain_column(prev, lg, kernel, g_eta[i], gain);
    }
    for (std::size_t j = 0; j < n_r; ++j)
      out[i * n_r + j] = pulled_block[i * n_r + j] / dt + gain[j];
  }
  return out;
}

struct PolymerSolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  double min_value = 0.0;
  double negative_mass = 0.0;  // sum of |negative entries|, reported not clipped
};

struct SolverOptions {
  double tol = 1e-12;
  int max_iter = 2000;
};

/// Solves the node system. `rhs_block` covers all (eta, r) entries; the result
/// carries zeros at r = 0 and r = r_max.
inline std::vector<double> solve_polymer_step(const StepOperator& op, std::span<const double> rhs_block,
                                              std::size_t n_r, const SolverOptions& opts,
                                              PolymerSolveReport* report = nullptr) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(op.size()));
  for (std::size_t i = 0; i < op.n_eta; ++i)
    for (std::size_t j = 1; j + 1 < n_r; ++j) b[op.unknown(i, j)] = rhs_block[i * n_r + j];

  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  PolymerSolveReport rep;
  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    Eigen::BiCGSTAB<SparseRowMatrix, Eigen::DiagonalPreconditioner<double>> solver;
    solver.setTolerance(opts.tol);
    solver.setMaxIterations(opts.max_iter);
    solver.compute(op.matrix);
    x = solver.solve(b);
    rep.iterations = static_cast<int>(solver.iterations());
    rep.relative_residual = (op.matrix * x - b).norm() / bnorm;
    if (solver.info() != Eigen::Success || !(rep.relative_residual <= 10.0 * opts.tol)) {
      // One restart from the current iterate before giving up.
      Eigen::VectorXd x2 = solver.solveWithGuess(b, x);
      const double res2 = (op.matrix * x2 - b).norm() / bnorm;
      if (!(res2 <= 10.0 * opts.tol))
        throw SolverDivergedError("polymer BiCGSTAB stalled at relative residual " +
                                      std::to_string(res2),
                                  {rep.relative_residual, res2});
      x = x2;
      rep.relative_residual = res2;
      rep.iterations += static_cast<int>(solver.iterations());
    }
  }

  std::vector<double> out(op.n_eta * n_r, 0.0);
  for (std::size_t i = 0; i < op.n_eta; ++i)
    for (std::size_t j = 1; j + 1 < n_r; ++j) {
      const double v = x[op.unknown(i, j)];
      out[i * n_r + j] = v;
      rep.min_value = std::min(rep.min_value, v);
      if (v < 0.0) rep.negative_mass -= v;
    }
  if (report) *report = rep;
  return out;
}

/// Smallest weighted Rayleigh quotient (x, A x)_W / (x, x)_W over `samples`
/// random fields drawn from a fixed seed.
inline double coercivity_witness(const StepOperator& op, int samples = 32,
                                 std::uint64_t seed = 0x5eed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(static_cast<Eigen::Index>(op.size()));
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = dist(rng);
    const Eigen::VectorXd ax = op.matrix * x;
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      num += op.inner_weight[k] * x[k] * ax[k];
      den += op.inner_weight[k] * x[k] * x[k];
    }
    worst = std::min(worst, num / den);
  }
  return worst;
}

}  // namespace rodflow
