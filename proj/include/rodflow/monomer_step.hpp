#pragma once

// One implicit monomer step: cell-centred finite volumes on the cube with
// upwind advection from exact face fluxes, two-point diffusion, no-flux walls
// (closed cube) or periodic faces, and the diagonal polymerization sink.
// A single homogeneous node reduces to phi^n = phi^{n-1} / (1 + dt sink).

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rodflow/error.hpp"
#include "rodflow/fields.hpp"
#include "rodflow/flow.hpp"

namespace rodflow {

/// Interior face of the spatial grid between cells lo and hi along `axis`.
struct CellFace {
  std::size_t lo = 0;
  std::size_t hi = 0;
  int axis = 0;
  double area = 0.0;
  double normal_velocity = 0.0;  // mean u . e_axis over the face
};

/// Faces carrying flux: all periodic faces, or interior faces of a closed
/// cube (walls carry none). Axes with a single periodic cell have no faces.
inline std::vector<CellFace> cell_faces(const SpatialGrid& s, const VelocityField& u) {
  std::vector<CellFace> faces;
  if (s.is_homogeneous()) return faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int n = s.n[axis];
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    const int count = s.periodic() ? (n > 1 ? n : 0) : n - 1;
    for (int iz = 0; iz < s.n[2]; ++iz)
      for (int iy = 0; iy < s.n[1]; ++iy)
        for (int ix = 0; ix < s.n[0]; ++ix) {
          std::array<int, 3> c{ix, iy, iz};
          if (c[axis] >= count) continue;
          std::array<int, 3> nb = c;
          nb[axis] = (c[axis] + 1) % n;
          std::array<double, 3> lo{}, hi{};
          for (int d = 0; d < 3; ++d) {
            lo[d] = c[d] * s.h[d];
            hi[d] = (c[d] + 1) * s.h[d];
          }
          CellFace f;
          f.lo = s.index(c[0], c[1], c[2]);
          f.hi = s.index(nb[0], nb[1], nb[2]);
          f.axis = axis;
          f.area = s.h[a1] * s.h[a2];
          f.normal_velocity = u.face_flux(axis, hi[axis], lo, hi);
          faces.push_back(f);
        }
  }
  return faces;
}

/// Net outward flux per unit volume of each cell (discrete divergence of u).
inline std::vector<double> discrete_divergence(const SpatialGrid& s, std::span<const CellFace> faces) {
  std::vector<double> div(s.size(), 0.0);
  const double vol = s.cell_volume();
  for (const auto& f : faces) {
    div[f.lo] += f.normal_velocity * f.area / vol;
    div[f.hi] -= f.normal_velocity * f.area / vol;
  }
  return div;
}

struct MonomerOperator {
  Eigen::SparseMatrix<double> matrix;  // column-major for the direct solver
  std::vector<double> diagonal_sink;
  double dt = 0.0;
  bool scalar = false;  // homogeneous node: 1/dt + sink
};

/// Sink check shared by both paths: tiny negative round-off is clamped.
inline std::vector<double> checked_sink(std::span<const double> sink) {
  std::vector<double> out(sink.begin(), sink.end());
  for (double& s : out) {
    if (s < -1e-12) throw Error(ErrorKind::NegativeSink, "sink " + std::to_string(s) + " < 0");
    s = std::max(s, 0.0);
  }
  return out;
}

inline MonomerOperator assemble_monomer_operator(double d2, const SpatialGrid& s,
                                                 std::span<const CellFace> faces,
                                                 std::span<const double> sink, double dt) {
  require(dt > 0.0, ErrorKind::InvalidConfig, "dt must be > 0");
  MonomerOperator op;
  op.dt = dt;
  op.diagonal_sink = checked_sink(sink);
  const std::size_t n = s.size();
  if (s.is_homogeneous()) {
    op.scalar = true;
    return op;
  }
  const double vol = s.cell_volume();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + 4 * faces.size());
  for (std::size_t c = 0; c < n; ++c) trip.emplace_back(c, c, 1.0 / dt + op.diagonal_sink[c]);
  for (const auto& f : faces) {
    const double v = f.normal_velocity * f.area / vol;
    const double vp = std::max(v, 0.0);
    const double vm = std::min(v, 0.0);
    const double diff = d2 * f.area / (s.h[f.axis] * vol);
    trip.emplace_back(f.lo, f.lo, vp + diff);
    trip.emplace_back(f.lo, f.hi, vm - diff);
    trip.emplace_back(f.hi, f.lo, -vp - diff);
    trip.emplace_back(f.hi, f.hi, diff - vm);
  }
  op.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

/// Applies the operator (for residual checks and oracle tests).
inline std::vector<double> apply_monomer_operator(const MonomerOperator& op, std::span<const double> phi) {
  if (op.scalar) return {(1.0 / op.dt + op.diagonal_sink[0]) * phi[0]};
  Eigen::Map<const Eigen::VectorXd> x(phi.data(), static_cast<Eigen::Index>(phi.size()));
  const Eigen::VectorXd y = op.matrix * x;
  return {y.data(), y.data() + y.size()};
}

/// Direct sparse solve of op phi^n = phi^{n-1} / dt.
inline MonomerField solve_monomer_step(const MonomerOperator& op, const MonomerField& prev,
                                       double tol = 1e-12) {
  MonomerField out = prev;
  if (op.scalar) {
    out.values[0] = prev.values[0] / (1.0 + op.dt * op.diagonal_sink[0]);
    return out;
  }
  Eigen::VectorXd b(static_cast<Eigen::Index>(prev.values.size()));
  for (Eigen::Index c = 0; c < b.size(); ++c) b[c] = prev.values[c] / op.dt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(op.matrix);
  if (lu.info() != Eigen::Success)
    throw SolverDivergedError("monomer factorization failed", {});
  const Eigen::VectorXd x = lu.solve(b);
  const double bnorm = b.norm();
  const double res = bnorm > 0.0 ? (op.matrix * x - b).norm() / bnorm : (op.matrix * x).norm();
  if (!(res <= std::max(tol, 1e-12)))
    throw SolverDivergedError("monomer solve residual " + std::to_string(res), {res});
  for (Eigen::Index c = 0; c < x.size(); ++c) out.values[c] = x[c];
  return out;
}

/// Squared L2 norm of phi and of its two-point gradient over flux faces.
inline double monomer_norm_sq(const SpatialGrid& s, std::span<const double> phi) {
  double sum = 0.0;
  for (double v : phi) sum += v * v;
  return sum * s.cell_volume();
}

inline double monomer_gradient_norm_sq(const SpatialGrid& s, std::span<const CellFace> faces,
                                       std::span<const double> phi) {
  double sum = 0.0;
  for (const auto& f : faces) {
    const double h = s.h[f.axis];
    const double slope = (phi[f.hi] - phi[f.lo]) / h;
    sum += f.area * h * slope * slope;
  }
  return sum;
}

}  // namespace rodflow
