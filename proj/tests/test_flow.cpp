#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace rodflow;

namespace {

constexpr double kPi = std::numbers::pi;

VelocityField rotation(const Vec3& omega) {
  VelocityField u;
  u.kind = VelocityField::Kind::RigidRotation;
  u.omega = omega;
  return u;
}

VelocityField shear(double rate, double k = 2.0 * kPi) {
  VelocityField u;
  u.kind = VelocityField::Kind::PeriodicShear;
  u.shear_rate = rate;
  u.k = k;
  return u;
}

VelocityField taylor_green(double a, double k) {
  VelocityField u;
  u.kind = VelocityField::Kind::TaylorGreen;
  u.amplitude = a;
  u.k = k;
  return u;
}

ErrorKind build_error(const VelocityField& u, const SpatialGrid& s) {
  try {
    builtin_field(u, s);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST(VelocityField, ZeroField) {
  VelocityField u;
  const Vec3 y(0.3, 0.2, 0.1);
  EXPECT_EQ(u.velocity(0.0, y), Vec3::Zero());
  EXPECT_EQ(u.gradient(0.0, y), Mat3::Zero());
}

TEST(VelocityField, RigidRotationAboutZ) {
  const auto u = rotation(Vec3::UnitZ());
  const Vec3 y(0.3, -0.4, 0.9);
  EXPECT_LE((u.velocity(0.0, y) - Vec3(-y[1], y[0], 0.0)).norm(), 1e-15);
  EXPECT_EQ(u.divergence(0.0, y), 0.0);
}

TEST(VelocityField, AnalyticGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  for (const auto& u : {rotation(Vec3(0.2, -0.5, 1.0)), shear(1.3), taylor_green(0.7, kPi)}) {
    for (int s = 0; s < 20; ++s) {
      const Vec3 y(pos(rng), pos(rng), pos(rng));
      const double h = 1e-6;
      Mat3 fd;
      for (int j = 0; j < 3; ++j) {
        Vec3 e = Vec3::Zero();
        e[j] = h;
        fd.col(j) = (u.velocity(0.0, y + e) - u.velocity(0.0, y - e)) / (2.0 * h);
      }
      EXPECT_LE((fd - u.gradient(0.0, y)).norm(), 1e-8);
    }
  }
}

TEST(VelocityField, TaylorGreenDivergenceFreeOnThousandPoints) {
  const auto u = taylor_green(0.8, 2.0 * kPi);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    const Vec3 y(pos(rng), pos(rng), pos(rng));
    EXPECT_LT(std::abs(u.divergence(0.0, y)), 1e-12);
  }
}

TEST(BuiltinField, DomainPairings) {
  const auto periodic = SpatialGrid::cube(SpatialGrid::Kind::PeriodicCube, 1.0, {4, 4, 1});
  const auto closed = SpatialGrid::cube(SpatialGrid::Kind::ClosedCube, 1.0, {4, 4, 1});
  EXPECT_EQ(build_error(rotation(Vec3::UnitZ()), periodic), ErrorKind::UnsupportedDomainPairing);
  EXPECT_EQ(build_error(shear(1.0), closed), ErrorKind::UnsupportedDomainPairing);
  EXPECT_EQ(build_error(shear(1.0, 3.0), periodic), ErrorKind::UnsupportedDomainPairing);
  EXPECT_EQ(build_error(taylor_green(1.0, kPi), periodic), ErrorKind::UnsupportedDomainPairing);
  EXPECT_NO_THROW(builtin_field(taylor_green(1.0, kPi), closed));
  EXPECT_NO_THROW(builtin_field(taylor_green(1.0, 2.0 * kPi), periodic));
  EXPECT_NO_THROW(builtin_field(shear(1.0), periodic));

  const auto homogeneous = SpatialGrid::homogeneous(1.0, Vec3(0.1, 0.2, 0.3));
  const auto u = builtin_field(rotation(Vec3::UnitZ()), homogeneous);
  EXPECT_TRUE(u.homogeneous);
  EXPECT_EQ(u.velocity(0.0, Vec3(1, 2, 3)), Vec3::Zero());
  EXPECT_NE(u.gradient(0.0, Vec3::Zero()), Mat3::Zero());
}

TEST(BuiltinField, ClosedTaylorGreenIsTangential) {
  const auto closed = SpatialGrid::cube(SpatialGrid::Kind::ClosedCube, 1.0, {6, 6, 1});
  const auto u = builtin_field(taylor_green(0.9, kPi), closed);
  EXPECT_LE(boundary_normal_flux(u, closed), 1e-10);
}

TEST(FlowMap, ZeroFlowIsIdentity) {
  const auto space = SpatialGrid::cube(SpatialGrid::Kind::PeriodicCube, 1.0, {3, 3, 3});
  const auto map = compute_flow_map(VelocityField{}, 0.0, 0.1, space.centers, space.min_spacing());
  EXPECT_TRUE(map.identity);
  for (std::size_t p = 0; p < space.size(); ++p) {
    EXPECT_EQ(map.forward[p], space.centers[p]);
    EXPECT_EQ(map.backward[p], space.centers[p]);
  }
}

TEST(FlowMap, RigidRotationMatchesAxisAngleRotation) {
  const Vec3 omega(0.3, -0.2, 1.0);
  const auto u = rotation(omega);
  std::vector<Vec3> nodes{{1.0, 0.0, 0.0}, {0.5, -0.3, 0.2}, {-1.0, 2.0, 0.5}};
  const double dt = 0.05;
  const auto map = compute_flow_map(u, 0.0, dt, nodes, 0.1);
  const Mat3 r = Eigen::AngleAxisd(omega.norm() * dt, omega.normalized()).toRotationMatrix();
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    EXPECT_LE((map.forward[p] - r * nodes[p]).norm(), 1e-10);
    EXPECT_LE((map.backward[p] - r.transpose() * nodes[p]).norm(), 1e-10);
  }
  EXPECT_LE(map.max_round_trip, 1e-8);
  EXPECT_LE(map.max_det_deviation, 1e-6);
}

TEST(FlowMap, RoundTripAndDisplacementForPeriodicFields) {
  const auto space = SpatialGrid::cube(SpatialGrid::Kind::PeriodicCube, 1.0, {8, 8, 2});
  const double dt = 0.02;
  for (const auto& u : {shear(2.0), taylor_green(0.9, 2.0 * kPi)}) {
    const auto map = compute_flow_map(u, 0.0, dt, space.centers, space.min_spacing());
    EXPECT_LE(map.max_round_trip, 1e-8);
    EXPECT_LE(map.max_det_deviation, 1e-6);
    const double speed = u.speed_bound(0.0);
    for (std::size_t p = 0; p < space.size(); ++p)
      EXPECT_LE((map.forward[p] - space.centers[p]).lpNorm<Eigen::Infinity>(), dt * speed + 1e-14);
  }
}

TEST(FlowMap, ToleranceBreachIsReported) {
  const auto space = SpatialGrid::cube(SpatialGrid::Kind::PeriodicCube, 1.0, {4, 4, 1});
  FlowMapTolerance strict;
  strict.round_trip = -1.0;
  try {
    compute_flow_map(shear(1.0), 0.0, 0.01, space.centers, space.min_spacing(), 1, strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OdeToleranceExceeded);
  }
}

TEST(Pullback, IdentityAndConstant) {
  const auto space = SpatialGrid::cube(SpatialGrid::Kind::PeriodicCube, 1.0, {6, 6, 1});
  std::vector<double> f(space.size());
  for (std::size_t p = 0; p < f.size(); ++p) f[p] = std::sin(3.0 * p);
  const auto id = compute_flow_map(VelocityField{}, 0.0, 0.1, space.centers, space.min_spacing());
  EXPECT_EQ(pullback(f, make_pullback_stencil(id, space)), f);

  const auto map = compute_flow_map(taylor_green(0.9, 2.0 * kPi), 0.0, 0.05, space.centers,
                                    space.min_spacing());
  const std::vector<double> c(space.size(), 1.75);
  for (double v : pullback(c, make_pullback_stencil(map, space))) EXPECT_NEAR(v, 1.75, 1e-14);
  const auto g = pullback(f, make_pullback_stencil(map, space));
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  for (double v : g) {
    EXPECT_GE(v, *lo - 1e-14);
    EXPECT_LE(v, *hi + 1e-14);
  }
}

TEST(Pullback, TranslationOfLinearRampIsExact) {
  const auto space = SpatialGrid::cube(SpatialGrid::Kind::PeriodicCube, 1.0, {8, 4, 1});
  const double shift = 0.3 * space.h[0];
  FlowMap map;
  map.forward = space.centers;
  map.backward = space.centers;
  for (auto& z : map.backward) z[0] -= shift;
  std::vector<double> ramp(space.size());
  for (std::size_t p = 0; p < ramp.size(); ++p) ramp[p] = 2.0 * space.centers[p][0] + 0.5;
  const auto out = pullback(ramp, make_pullback_stencil(map, space));
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (space.centers[p][0] - shift < 0.5 * space.h[0]) continue;  // wraps across the seam
    EXPECT_NEAR(out[p], 2.0 * (space.centers[p][0] - shift) + 0.5, 1e-14);
  }
}

TEST(Pullback, PointOutsideClosedCubeRejected) {
  const auto space = SpatialGrid::cube(SpatialGrid::Kind::ClosedCube, 1.0, {4, 4, 1});
  FlowMap map;
  map.forward = space.centers;
  map.backward = space.centers;
  map.backward[0][0] = -0.2;
  try {
    make_pullback_stencil(map, space);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PointLeftDomain);
  }
}

TEST(Pullback, NearlyPreservesL2NormUnderDivergenceFreeMap) {
  double prev = 0.0;
  for (int n : {16, 32}) {
    const auto space = SpatialGrid::cube(SpatialGrid::Kind::PeriodicCube, 1.0, {n, n, 1});
    std::vector<double> f(space.size());
    for (std::size_t p = 0; p < f.size(); ++p)
      f[p] = 1.0 + 0.5 * std::sin(2.0 * kPi * space.centers[p][0]) * std::cos(2.0 * kPi * space.centers[p][1]);
    const auto map = compute_flow_map(taylor_green(0.5, 2.0 * kPi), 0.0, 0.02, space.centers,
                                      space.min_spacing());
    const auto g = pullback(f, make_pullback_stencil(map, space));
    double nf = 0.0, ng = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) {
      nf += f[p] * f[p];
      ng += g[p] * g[p];
    }
    const double rel = std::abs(ng - nf) / nf;
    EXPECT_LE(rel, 1e-2);
    if (n == 32) EXPECT_LT(rel, 0.5 * prev);
    prev = rel;
  }
}
