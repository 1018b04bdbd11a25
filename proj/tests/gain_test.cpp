#include <gtest/gtest.h>

#include <random>

#include "eitflow/gain.hpp"
#include "eitflow/presets.hpp"
#include "test_support.hpp"

using namespace eitflow;

namespace {

QuadratureSpec tight(double tol = 1e-11) {
  QuadratureSpec q;
  q.rel_tol = tol;
  q.max_nodes = 2000000;
  return q;
}

void expect_close(const GainPair& a, const GainPair& b, double tol) {
  EXPECT_LT(test::rel_diff(a.g_plus, b.g_plus), tol) << a.g_plus << " vs " << b.g_plus;
  EXPECT_LT(test::rel_diff(a.g_minus, b.g_minus), tol) << a.g_minus << " vs " << b.g_minus;
}

}  // namespace

TEST(LinearGain, AgreesWithBruteForceSimpson) {
  const double wd100 = presets::base().atom.wavevector * 100.0;
  const std::vector<ExperimentSpec> cases{
      presets::thermal_no_control(), presets::thermal_with_control(),
      presets::velocimeter(100.0, 1.0, 2.0 * wd100), presets::velocimeter(50.0, 0.0, 0.5 * wd100)};
  for (const auto& s : cases) {
    const GainPair adaptive = linear_gain(s, tight(1e-10));
    const GainPair brute = test::brute_force_gain(s, 4000000);
    expect_close(adaptive, brute, 1e-7);
  }
}

TEST(LinearGain, ReducesToTwoLevelWithoutControl) {
  std::mt19937_64 rng(17);
  const ExperimentSpec base = presets::base();
  for (int i = 0; i < 10; ++i) {
    ExperimentSpec s = base;
    s.gas.mean_velocity = std::uniform_real_distribution<double>(-300.0, 300.0)(rng);
    s.drive.delta = test::log_uniform(rng, 1e-2, 1e2, true) * s.atom.gamma_ac;
    s.drive.delta_c = test::log_uniform(rng, 1e-2, 1e2, true) * s.atom.gamma_ac;
    s.gas.temperature = test::log_uniform(rng, 1e-3, 1.0, false);
    const QuadratureSpec q = tight(1e-10);
    expect_close(linear_gain(s, q), two_level_gain(s, q), 1e-12);
  }
}

TEST(LinearGain, ResonantColdGasAbsorbsAtTheBareRate) {
  ExperimentSpec s = presets::base();
  s.gas.temperature = 0.0;
  s.gas.mean_velocity = 0.0;
  s.atom.include_recoil = false;
  s.drive.delta = 0.0;
  const GainPair g = linear_gain(s, {});
  const double expected = -derived_scales(s).kappa_g / s.atom.gamma_ab;
  EXPECT_NEAR(g.g_plus.real() / expected, 1.0, 1e-10);
  EXPECT_NEAR(g.g_minus.real() / expected, 1.0, 1e-10);
  EXPECT_EQ(g.g_plus.imag(), 0.0);
}

TEST(LinearGain, ColdGasUsesTheMeanMomentumOnly) {
  ExperimentSpec s = presets::thermal_with_control();
  s.gas.temperature = 0.0;
  const DerivedScales d = derived_scales(s);
  const ComplexRates t = complex_rates(s, d, d.p_bar);
  const double ic = std::norm(s.drive.omega_c);
  const Complex bc = std::conj(t.t_bc_minus);
  const Complex expected_plus = d.kappa_g * (-1.0 * bc) / (t.t_ab_minus * bc + ic);
  const GainPair g = linear_gain(s, {});
  EXPECT_LT(test::rel_diff(g.g_plus, expected_plus), 1e-14);
}

TEST(LinearGain, RestingGasTreatsBothDirectionsAlike) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 6; ++i) {
    ExperimentSpec s = presets::base();
    s.gas.mean_velocity = 0.0;
    s.drive.delta = test::log_uniform(rng, 1e-2, 1e2, true) * s.atom.gamma_ac;
    s.drive.delta_c = test::log_uniform(rng, 1e-2, 1e2, true) * s.atom.gamma_ac;
    s.drive.omega_c = test::log_uniform(rng, 1e-2, 1e1, false) * s.atom.gamma_ac;
    s.gas.temperature = test::log_uniform(rng, 1e-3, 1.0, false);
    const GainPair g = linear_gain(s, tight());
    EXPECT_LT(test::rel_diff(g.g_plus, g.g_minus), 1e-10);

    s.gas.mean_velocity = std::uniform_real_distribution<double>(10.0, 300.0)(rng);
    const GainPair forward = linear_gain(s, tight());
    s.gas.mean_velocity = -s.gas.mean_velocity;
    const GainPair backward = linear_gain(s, tight());
    EXPECT_LT(test::rel_diff(forward.g_plus, backward.g_minus), 1e-10);
    EXPECT_LT(test::rel_diff(forward.g_minus, backward.g_plus), 1e-10);
  }
}

TEST(LinearGain, TwoPhotonResonantFamilyIsTransparent) {
  ExperimentSpec s = presets::base();
  s.atom.gamma_bc = 0.0;
  s.gas.temperature = 0.0;
  s.gas.mean_velocity = 100.0;
  s.drive.omega_c = s.atom.gamma_ac;
  s.drive.delta = 0.0;
  const DerivedScales d = derived_scales(s);
  // The +z probe couples to the p - hbar k family, resonant at Delta_c = Delta - omega_D + omega_r.
  s.drive.delta_c = s.drive.delta - d.omega_D + d.omega_r;
  const GainPair g = linear_gain(s, {});
  const double scale = d.kappa_g / s.atom.gamma_ab;
  EXPECT_LT(std::abs(g.g_plus.real()), 1e-6 * scale);
  EXPECT_GT(std::abs(g.g_minus.real()), 1e-3 * scale);
}

TEST(LinearGain, DiodeRegimeRectifies) {
  const GainPair g = linear_gain(presets::diode(300.0), {});
  EXPECT_GT(std::abs(g.g_minus.real()) / std::abs(g.g_plus.real()), 1e2);
  EXPECT_GT(std::abs(g.g_plus.imag()), 10.0 * std::abs(g.g_plus.real()));
  EXPECT_LT(g.g_minus.real(), 0.0);
}

TEST(LinearGain, DetuningMirrorConjugatesTheRestingTwoLevelGain) {
  ExperimentSpec s = presets::base();
  s.atom.include_recoil = false;
  s.gas.mean_velocity = 0.0;
  s.drive.delta = 2.5 * s.atom.gamma_ac;
  const GainPair up = two_level_gain(s, tight());
  s.drive.delta = -s.drive.delta;
  const GainPair down = two_level_gain(s, tight());
  EXPECT_LT(test::rel_diff(up.g_plus, std::conj(down.g_plus)), 1e-10);
}

TEST(TwoLevelGain, RejectsControlField) {
  EXPECT_THROW(two_level_gain(presets::thermal_with_control(), {}), ValidationError);
}

TEST(Susceptibility, AbsorptionHasPositiveImaginaryPart) {
  const GainPair g = linear_gain(presets::thermal_no_control(), {});
  ASSERT_LT(g.g_minus.real(), 0.0);
  const auto chi = susceptibility(g, presets::base().atom);
  EXPECT_GT(chi.chi_minus.imag(), 0.0);
  // G = i k chi / 2 recovers the gain.
  const double k = presets::base().atom.wavevector;
  EXPECT_LT(test::rel_diff(imag_unit * k * chi.chi_plus / 2.0, g.g_plus), 1e-15);
}

TEST(Transmission, ExponentialInCellLength) {
  EXPECT_DOUBLE_EQ(transmission({-10.0, 3.0}, 0.1), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(transmission({0.0, 5.0}, 1.0), 1.0);
}

TEST(GainDiagnostics, ReportsNodesAndErrors) {
  GainDiagnostics d;
  linear_gain(presets::thermal_with_control(), {}, &d);
  EXPECT_GT(d.nodes, 0u);
  EXPECT_GE(d.error_plus, 0.0);
}
