#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace rodflow;
using rodflow::testing::homogeneous_config;
using rodflow::testing::shear_config;

namespace {

GreerGrid grid_for(int n_r, double r_max, double alpha) {
  const auto lg = LengthGrid::make(n_r, r_max, alpha);
  return {lg.r, lg.dr, alpha, 0.0};
}

double trapezoid_moment(const std::vector<double>& f, const GreerGrid& g, int k) {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < f.size(); ++j)
    s += 0.5 * g.dr * (std::pow(g.r[j], k) * f[j] + std::pow(g.r[j + 1], k) * f[j + 1]);
  return s;
}

GreerState smooth_state(const GreerGrid& g, double tau0, double g0, double phi) {
  GreerState s;
  s.f.resize(g.r.size());
  for (std::size_t j = 0; j < g.r.size(); ++j)
    s.f[j] = 0.5 * std::exp(-1.5 * g.r[j]) * (1.0 - std::exp(-g.r[j]));
  s.f.back() = 0.0;
  s.phi = phi;
  s.tau0 = tau0;
  s.g0 = g0;
  return s;
}

}  // namespace

TEST(GreerStep, NoPolymerLeavesMonomerUntouched) {
  const auto g = grid_for(65, 30.0, 1.0);
  GreerState s;
  s.f.assign(g.r.size(), 0.0);
  s.phi = 0.7;
  s.tau0 = 0.5;
  s.g0 = 1.0;
  const auto next = greer_step(s, g, 0.1);
  EXPECT_EQ(next.phi, 0.7);
  for (double v : next.f) EXPECT_EQ(v, 0.0);
}

TEST(GreerStep, FragmentationOnlyMassBalance) {
  // Implicit loss against explicit gain: m1^{n+1} - m1^n = dt g0 (m2^n - m2^{n+1}).
  const auto g = grid_for(241, 30.0, 1.0);
  auto s = smooth_state(g, 0.0, 1.0, 1.0);
  const double dt = 0.02;
  for (int n = 0; n < 50; ++n) {
    const double m1 = trapezoid_moment(s.f, g, 1);
    const double m2 = trapezoid_moment(s.f, g, 2);
    s = greer_step(s, g, dt);
    const double change = trapezoid_moment(s.f, g, 1) - m1;
    EXPECT_NEAR(change, dt * (m2 - trapezoid_moment(s.f, g, 2)), 1e-13 * m1);
  }
  EXPECT_EQ(s.phi, 1.0);
}

TEST(GreerStep, CountGrowsAtTheMassRate) {
  // d/dt int f = g0 int r f for fragmentation alone.
  const auto g = grid_for(1201, 30.0, 1.0);
  auto s = smooth_state(g, 0.0, 1.0, 1.0);
  const double dt = 1e-3;
  const double m0 = trapezoid_moment(s.f, g, 0);
  const double m1 = trapezoid_moment(s.f, g, 1);
  s = greer_step(s, g, dt);
  const double rate = (trapezoid_moment(s.f, g, 0) - m0) / dt;
  EXPECT_NEAR(rate, m1, 0.05 * m1);
}

TEST(GreerStep, TotalMassDriftIsFirstOrderSmall) {
  const auto g = grid_for(257, 30.0, 1.0);
  auto s = smooth_state(g, 0.2, 1.0, 1.0);
  const double rho0 = trapezoid_moment(s.f, g, 1) + s.phi;
  for (int n = 0; n < 1000; ++n) s = greer_step(s, g, 1e-3);
  EXPECT_LE(std::abs(trapezoid_moment(s.f, g, 1) + s.phi - rho0) / rho0, 1e-3);
  for (double v : s.f) EXPECT_GE(v, 0.0);
}

TEST(GreerStep, OversizedStepRejected) {
  const auto g = grid_for(65, 30.0, 1.0);
  auto s = smooth_state(g, 5.0, 1.0, 1.0);
  try {
    greer_step(s, g, 0.25);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TimestepTooLarge);
  }
}

TEST(GreerComparison, MatchesFullSolverOnDegenerateConfiguration) {
  const auto cfg = config_from_json(homogeneous_config(128, 1e-2));
  const auto cmp = compare_with_full(cfg, 100);
  EXPECT_EQ(cmp.steps, 100);
  EXPECT_LE(cmp.max_discrepancy, 1e-8);
  EXPECT_LE(cmp.max_phi_discrepancy, 1e-10);
}

TEST(GreerComparison, FragmentationOnlyAgreesToRoundOff) {
  auto j = homogeneous_config(65, 2e-2);
  j["model"]["tau0"] = 0.0;
  const auto cmp = compare_with_full(config_from_json(j), 50);
  EXPECT_LE(cmp.max_discrepancy, 1e-10);
}

TEST(GreerComparison, NonDegenerateConfigurationRejected) {
  try {
    compare_with_full(config_from_json(shear_config(5, 16, 4, 8)), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigurationNotDegenerate);
  }
  auto j = homogeneous_config(33, 0.1);
  j["initial"]["psi"]["anisotropy"] = 1.0;
  EXPECT_THROW(run_greer(config_from_json(j)), Error);
}

TEST(RunGreer, RecordsFollowTheCadence) {
  auto j = homogeneous_config(65, 0.05);
  j["output"]["diagnostics_every"] = 5;
  const auto recs = run_greer(config_from_json(j));
  ASSERT_EQ(recs.size(), 5u);
  EXPECT_EQ(recs.front().step, 0);
  EXPECT_EQ(recs.back().step, 20);
  for (const auto& r : recs) {
    EXPECT_NEAR(r.total_mass, r.polymer_mass + r.monomer_total, 1e-15);
    EXPECT_LE(r.phi_max, 1.0);
  }
}
