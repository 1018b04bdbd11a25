#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "eitflow/gain.hpp"
#include "eitflow/presets.hpp"
#include "eitflow/quadrature.hpp"
#include "test_support.hpp"

using namespace eitflow;

TEST(Kronrod, ExactForHighDegreePolynomials) {
  const std::vector<double> pts{0.0, 1.0};
  // The embedded 10-point Gauss rule is exact to degree 19, so the error estimate vanishes there.
  const auto low = integrate_partition([](double x) { return std::pow(x, 19); }, pts, 1e-14, 1000);
  EXPECT_NEAR(low.value, 1.0 / 20.0, 1e-16);
  EXPECT_EQ(low.nodes, 21u);
  const auto high = integrate_partition([](double x) { return std::pow(x, 30); }, pts, 1e-14, 1000);
  EXPECT_NEAR(high.value, 1.0 / 31.0, 1e-16);
}

TEST(Adaptive, GaussianAndComplexIntegrands) {
  const std::vector<double> pts{-12.0, 0.0, 12.0};
  const auto g = integrate_checked([](double x) { return std::exp(-x * x); }, pts, 1e-13, 100000);
  EXPECT_NEAR(g.value, std::sqrt(constants::pi), 1e-13);
  const auto c = integrate_checked(
      [](double x) { return std::exp(Complex(-x * x, 2.0 * x)); }, pts, 1e-12, 100000);
  // Int exp(-x^2 + 2ix) = sqrt(pi) e^{-1}.
  EXPECT_LT(test::rel_diff(c.value, std::sqrt(constants::pi) * std::exp(-1.0)), 1e-12);
}

TEST(Adaptive, NarrowLorentzianNeedsBreakpointOrRefinement) {
  const double eps = 1e-6;
  const double exact = 2.0 / eps * std::atan(1.0 / eps);
  auto f = [eps](double x) { return 1.0 / (x * x + eps * eps); };
  const std::vector<double> split{-1.0, -10 * eps, 0.0, 10 * eps, 1.0};
  const auto r = integrate_checked(f, split, 1e-10, 200000);
  EXPECT_NEAR(r.value / exact, 1.0, 1e-10);
  const std::vector<double> plain{-1.0, 1.0};
  const auto r2 = integrate_checked(f, plain, 1e-10, 200000);
  EXPECT_NEAR(r2.value / exact, 1.0, 1e-9);
  EXPECT_GT(r2.nodes, r.nodes);
}

TEST(Adaptive, ReportsNonConvergenceWithBestEstimate) {
  const std::vector<double> pts{-1.0, 1.0};
  auto f = [](double x) { return 1.0 / (x * x + 1e-16); };
  const auto r = integrate_partition(f, pts, 1e-12, 200);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.nodes, 200u);
  try {
    integrate_checked(f, pts, 1e-12, 200);
    FAIL();
  } catch (const QuadratureFailure<double>& e) {
    EXPECT_EQ(e.kind(), ErrorKind::convergence_failure);
    EXPECT_GT(e.achieved_error, e.target_error);
    EXPECT_EQ(e.best.value, r.value);
  }
}

TEST(Adaptive, MirroredIntegrandOnMirroredPartitionAgrees) {
  auto f = [](double x) { return Complex(std::exp(-(x - 0.3) * (x - 0.3)), 1.0 / (1.0 + x * x)); };
  auto g = [&](double x) { return f(-x); };
  const std::vector<double> pts{-7.0, -0.4, 0.1, 2.0, 9.0};
  std::vector<double> mirrored;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) mirrored.push_back(-*it);
  const auto a = integrate_checked(f, pts, 1e-12, 100000);
  const auto b = integrate_checked(g, mirrored, 1e-12, 100000);
  EXPECT_LT(test::rel_diff(a.value, b.value), 1e-15);
  EXPECT_EQ(a.nodes, b.nodes);
}

TEST(Adaptive, FixedRuleReproducesAdaptiveValue) {
  auto f = [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); };
  const std::vector<double> pts{-6.0, 0.0, 6.0};
  MomentumRule rule;
  const auto r = integrate_checked(f, pts, 1e-12, 100000, &rule);
  EXPECT_EQ(rule.nodes.size(), r.intervals * 21);
  EXPECT_NEAR(apply_rule(f, rule), r.value, 1e-15);
  EXPECT_TRUE(std::is_sorted(rule.nodes.begin(), rule.nodes.end()));
}

TEST(Breakpoints, CoverThermalRangeAndResonances) {
  const ExperimentSpec s = presets::thermal_with_control();
  const DerivedScales d = derived_scales(s);
  const QuadratureSpec q;
  const auto centers = resonance_centers(s);
  const auto pts = momentum_breakpoints(s, d, q, centers);
  ASSERT_TRUE(std::is_sorted(pts.begin(), pts.end()));
  EXPECT_LE(pts.front(), d.p_bar - q.range_sigmas * d.delta_p);
  EXPECT_GE(pts.back(), d.p_bar + q.range_sigmas * d.delta_p);
  for (double c : centers) {
    if (c < pts.front() || c > pts.back()) continue;
    EXPECT_NE(std::find(pts.begin(), pts.end(), c), pts.end());
  }
}

TEST(Breakpoints, CentersAreBareResonances) {
  ExperimentSpec s = presets::diode();
  const DerivedScales d = derived_scales(s);
  const auto centers = resonance_centers(s);
  // Without control field every centre sets one of the two bare detunings to zero.
  for (double p : centers) {
    const ComplexRates t = complex_rates(s, d, p);
    const double closest = std::min(std::abs(t.t_ab_plus.imag()), std::abs(t.t_ab_minus.imag()));
    EXPECT_LT(closest, 1e-6 * s.atom.gamma_ab);
  }
}

TEST(Gain, QuadratureShiftIsBelowToleranceWhenNodeBudgetDoubles) {
  const ExperimentSpec s = presets::thermal_with_control();
  QuadratureSpec q;
  q.rel_tol = 1e-9;
  const GainPair a = linear_gain(s, q);
  q.max_nodes *= 2;
  const GainPair b = linear_gain(s, q);
  EXPECT_LT(test::rel_diff(a.g_plus, b.g_plus), 10 * q.rel_tol);
  EXPECT_LT(test::rel_diff(a.g_minus, b.g_minus), 10 * q.rel_tol);
}

TEST(QuadratureSpecValidation, RejectsBadSettings) {
  QuadratureSpec q;
  q.rel_tol = 0.0;
  EXPECT_THROW(validate(q), ValidationError);
  q = {};
  q.max_nodes = 10;
  EXPECT_THROW(validate(q), ValidationError);
  q = {};
  q.range_sigmas = 1.0;
  EXPECT_THROW(validate(q), ValidationError);
}
