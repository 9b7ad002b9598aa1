#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace rodflow;

namespace {

nlohmann::json baseline_model() {
  return {{"tau0", 0.3},
          {"alpha", 1.0},
          {"d1", 1.0},
          {"d2", 1.0},
          {"t_final", 1.0},
          {"g_rate", {{"kind", "constant"}, {"g0", 1.0}}}};
}

ErrorKind load_error(const nlohmann::json& model) {
  try {
    load_params(model.dump());
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST(ModelParams, BaselineLoads) {
  const auto p = load_params(baseline_model().dump());
  EXPECT_DOUBLE_EQ(p.tau0, 0.3);
  EXPECT_DOUBLE_EQ(p.alpha, 1.0);
  EXPECT_DOUBLE_EQ(p.g_lo(), 1.0);
  EXPECT_DOUBLE_EQ(p.g_hi(), 1.0);
  EXPECT_TRUE(p.kernel.is_uniform());
}

TEST(ModelParams, LoadsFromFullRunConfig) {
  nlohmann::json run = {{"model", baseline_model()}};
  EXPECT_DOUBLE_EQ(load_params(run.dump()).tau0, 0.3);
}

TEST(ModelParams, ZeroAlphaRejected) {
  auto m = baseline_model();
  m["alpha"] = 0.0;
  EXPECT_EQ(load_error(m), ErrorKind::NonPositiveCoefficient);
}

TEST(ModelParams, NonPositiveDiffusionRejected) {
  auto m = baseline_model();
  m["d1"] = 0.0;
  EXPECT_EQ(load_error(m), ErrorKind::NonPositiveCoefficient);
  m = baseline_model();
  m["d2"] = -1.0;
  EXPECT_EQ(load_error(m), ErrorKind::NonPositiveCoefficient);
  m = baseline_model();
  m["tau0"] = -0.1;
  EXPECT_EQ(load_error(m), ErrorKind::NonPositiveCoefficient);
}

TEST(ModelParams, MissingFieldReported) {
  auto m = baseline_model();
  m.erase("d2");
  EXPECT_EQ(load_error(m), ErrorKind::MissingField);
  m = baseline_model();
  m.erase("g_rate");
  EXPECT_EQ(load_error(m), ErrorKind::MissingField);
}

TEST(ModelParams, UnparsableTextIsInvalidConfig) {
  try {
    load_params("{ not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
}

TEST(ModelParams, TabulatedKernelWithDeficitRejected) {
  // h = 0.97 on [0, 1] integrates to 0.97 by the trapezoid oracle.
  auto m = baseline_model();
  m["kernel"] = {{"kind", "tabulated"}, {"h", std::vector<double>(11, 0.97)}};
  EXPECT_EQ(load_error(m), ErrorKind::KernelNormalizationFailure);
}

TEST(ModelParams, AsymmetricKernelRejected) {
  auto m = baseline_model();
  m["kernel"] = {{"kind", "tabulated"}, {"h", {0.5, 1.0, 1.5}}};
  EXPECT_EQ(load_error(m), ErrorKind::KernelNormalizationFailure);
}

TEST(ModelParams, SymmetricTabulatedKernelAccepted) {
  // tent {0.5, 1.5, 0.5}: trapezoid integral 0.5 * (0.5 + 1.5 + 1.5 + 0.5) / 2 = 1
  auto m = baseline_model();
  m["kernel"] = {{"kind", "tabulated"}, {"h", {0.5, 1.5, 0.5}}};
  const auto p = load_params(m.dump());
  EXPECT_FALSE(p.kernel.is_uniform());
  EXPECT_NEAR(p.kernel.table_integral(), 1.0, 1e-15);
  EXPECT_EQ(p.kernel.symmetry_defect(), 0.0);
}

TEST(FragmentationKernel, UniformNormalizationSymmetryAndSupport) {
  const auto k = FragmentationKernel::uniform();
  const auto lg = LengthGrid::make(301, 30.0, 1.0);
  EXPECT_LE(k.grid_normalization_defect(lg.r), 1e-12);
  for (double rp : {0.5, 3.0, 17.25}) {
    for (double r : {0.1, 0.25 * rp, 0.5 * rp, rp}) {
      EXPECT_NEAR(k(r, rp), 1.0 / rp, 1e-15);
      EXPECT_NEAR(k(rp - r, rp), k(r, rp), 1e-15);
    }
    EXPECT_EQ(k(rp * 1.01, rp), 0.0);
  }
}

TEST(EvaluateG, ConstantClosureIgnoresInputs) {
  auto p = load_params(baseline_model().dump());
  Mat3 m;
  m << 1, 2, 3, 4, 5, 6, 7, 8, -6;
  EXPECT_DOUBLE_EQ(evaluate_g(p, m, Vec3(1, 2, 3), Vec3::UnitX()), 1.0);
}

TEST(EvaluateG, StrainClosureAtZeroFlowIsLowerBound) {
  ModelParams p;
  p.g_rate.kind = ScissionRate::Kind::StrainRate;
  p.g_rate.g_lo = 0.7;
  p.g_rate.c = 0.3;
  EXPECT_DOUBLE_EQ(evaluate_g(p, Mat3::Zero(), Vec3::Zero(), Vec3::UnitZ()), 0.7);
}

TEST(EvaluateG, StrainClosureOnSimpleShearUsesFrobeniusNorm) {
  // u = (y2, 0, 0): sigma + sigma^T has two unit off-diagonal entries,
  // Frobenius norm sqrt(2).
  ModelParams p;
  p.g_rate.kind = ScissionRate::Kind::StrainRate;
  p.g_rate.g_lo = 0.5;
  p.g_rate.c = 0.25;
  Mat3 grad = Mat3::Zero();
  grad(0, 1) = 1.0;
  const Vec3 eta = Vec3(1.0, 2.0, 2.0).normalized();
  EXPECT_NEAR(evaluate_g(p, grad, Vec3(0.3, 0, 0), eta), 0.5 + 0.25 * std::sqrt(2.0), 1e-15);
}

TEST(EvaluateG, OrientationClosure) {
  ModelParams p;
  p.g_rate.kind = ScissionRate::Kind::Orientation;
  p.g_rate.g_lo = 0.5;
  p.g_rate.c = 1.0;
  Mat3 grad = Mat3::Zero();
  grad(0, 1) = 1.0;
  // eta.(S) eta = 2 eta_x eta_y
  const Vec3 eta = Vec3(1.0, 1.0, 0.0).normalized();
  EXPECT_NEAR(evaluate_g(p, grad, Vec3::Zero(), eta), 1.5, 1e-15);
  EXPECT_NEAR(evaluate_g(p, grad, Vec3::Zero(), Vec3::UnitZ()), 0.5, 1e-15);
}

TEST(EvaluateG, EscapingUpperBoundIsBoundViolation) {
  ModelParams p;
  p.g_rate.kind = ScissionRate::Kind::StrainRate;
  p.g_rate.g_lo = 0.5;
  p.g_rate.c = 1.0;
  p.g_rate.g_hi = 0.6;
  Mat3 grad = Mat3::Zero();
  grad(0, 1) = 1.0;
  try {
    evaluate_g(p, grad, Vec3::Zero(), Vec3::UnitZ());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BoundViolation);
  }
}

TEST(EvaluateG, NonUnitOrientationRejected) {
  ModelParams p;
  EXPECT_THROW(evaluate_g(p, Mat3::Zero(), Vec3::Zero(), Vec3(1.0, 1.0, 0.0)), Error);
}

TEST(EvaluateG, DeterministicAndWithinBoundsOnSamples) {
  ModelParams p;
  p.g_rate.kind = ScissionRate::Kind::StrainRate;
  p.g_rate.g_lo = 0.5;
  p.g_rate.c = 0.2;
  p.g_rate.g_hi = 0.5 + 0.2 * 2.0 * std::sqrt(2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 200; ++s) {
    Mat3 grad = Mat3::Zero();
    grad(0, 1) = u(rng);
    grad(1, 0) = u(rng);
    const Vec3 eta = Vec3(u(rng), u(rng), u(rng)).normalized();
    const double g = evaluate_g(p, grad, Vec3::Zero(), eta);
    EXPECT_EQ(g, evaluate_g(p, grad, Vec3::Zero(), eta));
    EXPECT_GE(g, p.g_lo());
    EXPECT_LE(g, p.g_hi());
  }
}

TEST(LengthWeight, CubicDecayStaysInUnitInterval) {
  LengthWeight a;
  a.kind = LengthWeight::Kind::CubicDecay;
  ModelParams p;
  p.a_weight = a;
  const auto lg = LengthGrid::make(101, 20.0, 1.0);
  EXPECT_NO_THROW(p.validate_on_nodes(lg.r));
  EXPECT_DOUBLE_EQ(a(0.0), 1.0);
  EXPECT_DOUBLE_EQ(a(1.0), 0.125);
  EXPECT_DOUBLE_EQ(a.bound(), 1.0);
}
