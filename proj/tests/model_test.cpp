#include <gtest/gtest.h>

#include <cmath>

#include "eitflow/model.hpp"
#include "eitflow/presets.hpp"
#include "test_support.hpp"

using namespace eitflow;

TEST(DerivedScales, RecoilAndDopplerForRubidiumAtTwoMicrons) {
  const ExperimentSpec s = presets::thermal_no_control();
  const DerivedScales d = derived_scales(s);
  // hbar k^2 / 2M with hbar = h / 2pi, k = 2pi / lambda: h pi / (lambda^2 M).
  const double expected_recoil = constants::planck * constants::pi / (4e-12 * s.atom.mass);
  EXPECT_NEAR(d.omega_r / expected_recoil, 1.0, 1e-14);
  EXPECT_NEAR(d.omega_D, constants::pi * 1e6 * 300.0, 1e-6);
  EXPECT_DOUBLE_EQ(d.p_bar, s.atom.mass * 300.0);
}

TEST(DerivedScales, CouplingConstantReducesToDensityTimesWavevector) {
  const ExperimentSpec s = presets::base();
  const DerivedScales d = derived_scales(s);
  // omega / c = k, so kappa_g = N k d^2 / (2 hbar eps0).
  const double k = s.atom.wavevector, dip = s.atom.dipole_moment;
  const double expected = s.atom.number_density * k * dip * dip /
                          (2.0 * constants::hbar * constants::vacuum_permittivity);
  EXPECT_NEAR(d.kappa_g / expected, 1.0, 1e-13);
  EXPECT_NEAR(d.kappa_g, 2.16e11, 0.01e11);
}

TEST(DerivedScales, RecoilCanBeSwitchedOff) {
  ExperimentSpec s = presets::base();
  s.atom.include_recoil = false;
  EXPECT_EQ(derived_scales(s).omega_r, 0.0);
}

TEST(DerivedScales, ReferenceDopplerRatio) {
  const ExperimentSpec s = presets::velocimeter(100.0, 0.0);
  EXPECT_NEAR(derived_scales(s).omega_D / s.atom.gamma_ac, 6.67, 1e-12);
}

TEST(MomentumDistribution, NormalizedWithMeanAtMassTimesVelocity) {
  for (double u : {0.0, 50.0, -300.0}) {
    ExperimentSpec s = presets::base();
    s.gas.mean_velocity = u;
    const DerivedScales d = derived_scales(s);
    const double a = d.p_bar - 10 * d.delta_p, b = d.p_bar + 10 * d.delta_p;
    const double norm = test::simpson([&](double p) { return momentum_distribution(d, p); }, a, b, 4000);
    const double mean =
        test::simpson([&](double p) { return p * momentum_distribution(d, p); }, a, b, 4000);
    const double second = test::simpson(
        [&](double p) { return (p - d.p_bar) * (p - d.p_bar) * momentum_distribution(d, p); }, a, b,
        4000);
    EXPECT_NEAR(norm, 1.0, 1e-12);
    EXPECT_NEAR(mean, d.p_bar, 1e-10 * d.delta_p);
    // Variance of exp(-x^2/dp^2) is dp^2 / 2 = M kB T.
    EXPECT_NEAR(second / (s.atom.mass * constants::boltzmann * s.gas.temperature), 1.0, 1e-10);
  }
}

TEST(MomentumDistribution, ZeroTemperatureIsRejected) {
  GasSpec gas;
  gas.temperature = 0.0;
  EXPECT_THROW(momentum_distribution(gas, AtomSpec{}, 0.0), ValidationError);
}

TEST(MomentumDistribution, VelocityWidth) {
  const double m = 87.0 * constants::atomic_mass_unit;
  EXPECT_NEAR(velocity_width(1.0, m), std::sqrt(constants::boltzmann / m), 1e-12);
}

TEST(Inversions, PopulationInGroundStateShiftsByPhotonMomentum) {
  ExperimentSpec s = presets::base();
  s.gas.mean_velocity = 20.0;
  const DerivedScales d = derived_scales(s);
  const double hk = constants::hbar * s.atom.wavevector;
  const double p = d.p_bar + 0.3 * d.delta_p;
  const Inversions w = inversions(s, d, p);
  EXPECT_DOUBLE_EQ(w.w_ab_plus, -momentum_distribution(d, p + hk));
  EXPECT_DOUBLE_EQ(w.w_ab_minus, -momentum_distribution(d, p - hk));
  EXPECT_EQ(w.w_ac, 0.0);
}

TEST(Inversions, MixedPopulations) {
  ExperimentSpec s = presets::base();
  s.gas.pop_a0 = 0.2;
  s.gas.pop_b0 = 0.5;
  s.gas.pop_c0 = 0.3;
  const DerivedScales d = derived_scales(s);
  const double f = momentum_distribution(d, 0.0);
  EXPECT_NEAR(inversions(s, d, 0.0).w_ac, -0.1 * f, 1e-15 * f);
  const Inversions delta = population_weights(s.gas);
  EXPECT_DOUBLE_EQ(delta.w_ab_plus, 0.2 - 0.5);
  EXPECT_DOUBLE_EQ(delta.w_ac, 0.2 - 0.3);
}

TEST(ComplexRates, DopplerShiftsAreOppositeForTheTwoFamilies) {
  ExperimentSpec s = presets::thermal_with_control();
  const DerivedScales d = derived_scales(s);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const double p = d.p_bar + test::log_uniform(rng, 1e-3, 10.0, true) * d.delta_p;
    const ComplexRates t = complex_rates(s, d, p);
    const double omega_p = s.atom.wavevector * p / s.atom.mass;
    EXPECT_NEAR((t.t_ab_plus - t.t_ab_minus).imag(), -2.0 * omega_p, 1e-6 * std::abs(omega_p));
    EXPECT_EQ(t.t_ab_plus.real(), s.atom.gamma_ab);
    EXPECT_EQ(t.t_bc_minus.real(), s.atom.gamma_bc);
    // Two-photon detunings add up to the control detuning.
    const double scale = std::abs(omega_p) + std::abs(s.drive.delta);
    EXPECT_NEAR((t.t_ab_plus + t.t_bc_plus).imag(), t.t_ac.imag(), 1e-14 * scale);
    EXPECT_NEAR((t.t_ab_minus + t.t_bc_minus).imag(), t.t_ac.imag(), 1e-14 * scale);
  }
}

TEST(ComplexRates, ResonantAtomIsAtRest) {
  ExperimentSpec s = presets::base();
  s.atom.include_recoil = false;
  s.drive.delta = 0.0;
  const ComplexRates t = complex_rates(s, 0.0);
  EXPECT_EQ(t.t_ab_plus, Complex(s.atom.gamma_ab, 0.0));
  EXPECT_EQ(t.t_ab_minus, Complex(s.atom.gamma_ab, 0.0));
}

TEST(RabiTilde, OverdampedRootIsImaginaryAndInverseRoundTrips) {
  const double g = 3.0;
  const Complex over = rabi_tilde(1.0, g);
  EXPECT_EQ(over.real(), 0.0);
  EXPECT_NEAR(over.imag(), std::sqrt(8.0), 1e-15);
  const double oc = control_for_rabi_tilde(4.0, g);
  EXPECT_NEAR(oc, 5.0, 1e-15);
  EXPECT_NEAR(rabi_tilde(oc, g).real(), 4.0, 1e-14);
}

TEST(Validation, RejectsInvalidSpecs) {
  auto expect_invalid = [](auto mutate) {
    ExperimentSpec s = presets::base();
    mutate(s);
    EXPECT_THROW(validate(s), ValidationError);
  };
  expect_invalid([](ExperimentSpec& s) { s.gas.pop_a0 = 0.1; });  // sums to 1.1
  expect_invalid([](ExperimentSpec& s) { s.atom.gamma_ab = 0.0; });
  expect_invalid([](ExperimentSpec& s) { s.atom.gamma_bc = -1.0; });
  expect_invalid([](ExperimentSpec& s) { s.atom.mass = -1.0; });
  expect_invalid([](ExperimentSpec& s) { s.gas.temperature = -1.0; });
  expect_invalid([](ExperimentSpec& s) { s.geometry.cell_length = 0.0; });
  expect_invalid([](ExperimentSpec& s) { s.drive.delta = std::nan(""); });
  expect_invalid([](ExperimentSpec& s) {
    s.gas.pop_b0 = 1.2;
    s.gas.pop_a0 = -0.2;
  });
  ExperimentSpec ok = presets::base();
  ok.atom.gamma_bc = 0.0;
  EXPECT_NO_THROW(validate(ok));
}
