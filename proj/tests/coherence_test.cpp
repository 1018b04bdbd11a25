#include <gtest/gtest.h>

#include <random>

#include "eitflow/coherence.hpp"
#include "test_support.hpp"

using namespace eitflow;

using test::Draw;
using test::random_draw;

TEST(CoherenceOracle, SolvesTheSystem) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Draw d = random_draw(rng);
    EXPECT_LT(coherence_residual(d.t, d.w, d.f, solve_coherences_oracle(d.t, d.w, d.f)), 1e-12);
  }
}

TEST(CoherenceClosedForm, MatchesDenseSolveOnRandomDraws) {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Draw d = random_draw(rng);
    const auto exact = solve_coherences_oracle(d.t, d.w, d.f);
    const auto closed = coherence_closed_form(d.t, d.w, intensities(d.f), d.f.omega_plus, d.f.omega_minus);
    worst = std::max({worst, test::rel_diff(closed.a_plus, exact.a_plus),
                      test::rel_diff(closed.a_minus, exact.a_minus)});
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(CoherenceClosedForm, WeakProbeLimitIsTheLinearCoherence) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Draw d = random_draw(rng);
    // Probes far below every other scale in the draw.
    d.f.omega_plus *= 1e-9 / std::abs(d.f.omega_plus);
    d.f.omega_minus *= 1e-9 / std::abs(d.f.omega_minus);
    const auto closed = coherence_closed_form(d.t, d.w, intensities(d.f), d.f.omega_plus, d.f.omega_minus);
    const Complex lin_plus = coherence_linear(d.t, d.w, d.f.omega_c, d.f.omega_minus, Branch::plus);
    const Complex lin_minus = coherence_linear(d.t, d.w, d.f.omega_c, d.f.omega_plus, Branch::minus);
    EXPECT_LT(test::rel_diff(closed.a_plus, lin_plus), 1e-6);
    EXPECT_LT(test::rel_diff(closed.a_minus, lin_minus), 1e-6);
  }
}

TEST(CoherenceLinear, WithoutControlReducesToTwoLevelResponse) {
  ComplexRates t;
  t.t_ab_plus = {2.0, -1.0};
  t.t_ab_minus = {2.0, 3.0};
  t.t_bc_plus = {0.5, 1.0};
  t.t_bc_minus = {0.5, -4.0};
  t.t_ac = {1.0, 0.0};
  const Inversions w{-0.7, -0.4, 0.0};
  const Complex probe{0.3, 0.1};
  const Complex a = coherence_linear(t, w, 0.0, probe, Branch::minus);
  EXPECT_LT(test::rel_diff(a, -imag_unit * probe * w.w_ab_minus / t.t_ab_minus), 1e-15);
}

TEST(CoherenceLinear, CachedFactorsAgreeWithDirectEvaluation) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Draw d = random_draw(rng);
    const FieldIntensities in = intensities(d.f);
    const auto via_factors = coherence_closed_form(coherence_factors(d.t, d.w, in.i_c), in.i_plus,
                                                   in.i_minus, d.f.omega_plus, d.f.omega_minus);
    const auto direct = coherence_closed_form(d.t, d.w, in, d.f.omega_plus, d.f.omega_minus);
    EXPECT_EQ(via_factors.a_plus, direct.a_plus);
    EXPECT_EQ(via_factors.a_minus, direct.a_minus);
  }
}

TEST(CoherenceDegeneracy, VanishingDenominatorIsReported) {
  ComplexRates t;
  t.t_ab_plus = {1.0, 0.0};
  t.t_ab_minus = {1.0, 0.0};
  t.t_bc_plus = {0.0, 0.0};  // lossless two-photon resonance
  t.t_bc_minus = {0.0, 0.0};
  t.t_ac = {1.0, 0.0};
  const Inversions w{-1.0, -1.0, 0.0};
  EXPECT_THROW(coherence_factors(t, w, 0.0), DegenerateParameters);
  EXPECT_THROW(coherence_linear(t, w, 0.0, 1.0, Branch::plus), DegenerateParameters);
  try {
    coherence_linear(t, w, 0.0, 1.0, Branch::minus);
    FAIL();
  } catch (const DegenerateParameters& e) {
    EXPECT_NE(std::string(e.what()).find("J-"), std::string::npos);
  }
}

TEST(CoherenceDegeneracy, OracleNamesTheSingularUnknown) {
  ComplexRates t{};  // all rates zero
  const Inversions w{};
  ProbeFields f;
  f.omega_c = 0.0;
  EXPECT_THROW(solve_coherences_oracle(t, w, f), DegenerateParameters);
  t.t_ab_plus = t.t_ab_minus = t.t_ac = {1.0, 0.0};
  try {
    solve_coherences_oracle(t, w, f);
    FAIL();
  } catch (const DegenerateParameters& e) {
    EXPECT_NE(std::string(e.what()).find("B+"), std::string::npos);
  }
}
