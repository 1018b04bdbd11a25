#include <gtest/gtest.h>

#include "eitflow/presets.hpp"
#include "eitflow/transistor.hpp"

using namespace eitflow;

namespace {

ExperimentSpec right_only_point(double u) {
  const double wd = presets::base().atom.wavevector * std::abs(u);
  ExperimentSpec s = presets::velocimeter(u, 0.0, 2.0 * wd);
  s.drive.delta = presets::base().atom.wavevector * u;
  return s;
}

}  // namespace

TEST(Classify, ZeroGainIsTransparentBothWays) {
  EXPECT_EQ(classify({0.0, 0.0}, {}), DirectionalState::both_transparent);
}

TEST(Classify, ThresholdBands) {
  const ClassifierSpec cls;  // L = 0.1 m
  const Complex open{-1.0, 0.0}, closed{-50.0, 0.0}, between{-10.0, 0.0};
  EXPECT_EQ(classify({closed, closed}, cls), DirectionalState::both_blocked);
  EXPECT_EQ(classify({open, closed}, cls), DirectionalState::right_only);
  EXPECT_EQ(classify({closed, open}, cls), DirectionalState::left_only);
  EXPECT_EQ(classify({between, open}, cls), DirectionalState::indeterminate);
  EXPECT_STREQ(to_string(DirectionalState::right_only), "RightOnly");
}

TEST(Classify, RejectsInvalidThresholds) {
  ClassifierSpec cls;
  cls.tau_low = 0.6;
  EXPECT_THROW(classify({}, cls), ValidationError);
}

TEST(Transistor, CoPropagatingEitPointIsRightOnlyAndMirrors) {
  const GainPair right = linear_gain(right_only_point(100.0), {});
  EXPECT_EQ(classify(right, {}), DirectionalState::right_only);
  ExperimentSpec mirrored = right_only_point(100.0);
  mirrored.gas.mean_velocity = -100.0;
  EXPECT_EQ(classify(linear_gain(mirrored, {}), {}), DirectionalState::left_only);
}

TEST(Transistor, RestingGasRows) {
  const ExperimentSpec base = presets::velocimeter(0.0, 0.0, 0.0);
  const double wd100 = base.atom.wavevector * 100.0;
  const TruthTable t = truth_table(base, {0.0, 3.0 * wd100}, {0.0}, {}, {}, 2);
  EXPECT_EQ(t.at(0, 0).state, DirectionalState::both_blocked);
  EXPECT_EQ(t.at(1, 0).state, DirectionalState::both_transparent);
}

TEST(TruthTable, SingleCellEqualsClassify) {
  const ExperimentSpec s = right_only_point(100.0);
  const TruthTable t = truth_table(s, {s.drive.omega_c.real()}, {100.0}, {}, {});
  ASSERT_EQ(t.cells.size(), 1u);
  EXPECT_EQ(t.cells[0].state, classify(linear_gain(s, {}), {}));
  EXPECT_FALSE(t.cells[0].failed);
}

TEST(TruthTable, MirrorAntisymmetryAndThresholdMonotonicity) {
  ExperimentSpec base = presets::velocimeter(0.0, 0.0, 0.0);
  const double wd = base.atom.wavevector * 100.0;
  const std::vector<double> controls{0.0, wd, 2.0 * wd, 3.0 * wd};
  const std::vector<double> velocities{-100.0, -50.0, 0.0, 50.0, 100.0};
  ClassifierSpec loose;
  const TruthTable t = truth_table(base, controls, velocities, loose, {}, 3);
  auto mirror = [](DirectionalState s) {
    if (s == DirectionalState::right_only) return DirectionalState::left_only;
    if (s == DirectionalState::left_only) return DirectionalState::right_only;
    return s;
  };
  for (std::size_t ic = 0; ic < controls.size(); ++ic)
    for (std::size_t iu = 0; iu < velocities.size(); ++iu)
      EXPECT_EQ(t.at(ic, iu).state, mirror(t.at(ic, velocities.size() - 1 - iu).state));

  ClassifierSpec strict = loose;
  strict.tau_high = 0.9;
  const TruthTable s = truth_table(base, controls, velocities, strict, {}, 3);
  auto right_open = [](DirectionalState st) {
    return st == DirectionalState::both_transparent || st == DirectionalState::right_only;
  };
  auto left_open = [](DirectionalState st) {
    return st == DirectionalState::both_transparent || st == DirectionalState::left_only;
  };
  for (std::size_t k = 0; k < s.cells.size(); ++k) {
    if (right_open(s.cells[k].state)) {
      EXPECT_TRUE(right_open(t.cells[k].state));
    }
    if (left_open(s.cells[k].state)) {
      EXPECT_TRUE(left_open(t.cells[k].state));
    }
  }
}
