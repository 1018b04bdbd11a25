#ifndef EITFLOW_TRANSISTOR_HPP
#define EITFLOW_TRANSISTOR_HPP

#include <cmath>
#include <string>
#include <vector>

#include "eitflow/gain.hpp"
#include "eitflow/parallel.hpp"

namespace eitflow {

/// Directional output state. "Right" is the probe travelling along +z.
enum class DirectionalState { both_blocked, both_transparent, right_only, left_only, indeterminate };

inline const char* to_string(DirectionalState s) {
  switch (s) {
    case DirectionalState::both_blocked: return "BothBlocked";
    case DirectionalState::both_transparent: return "BothTransparent";
    case DirectionalState::right_only: return "RightOnly";
    case DirectionalState::left_only: return "LeftOnly";
    case DirectionalState::indeterminate: return "Indeterminate";
  }
  return "?";
}

struct ClassifierSpec {
  double tau_high = 0.5;
  double tau_low = 0.1;
  double cell_length = 0.1;  // m
};

inline void validate(const ClassifierSpec& c) {
  if (!(0.0 < c.tau_low && c.tau_low < c.tau_high && c.tau_high < 1.0))
    throw ValidationError("classifier thresholds must satisfy 0 < tau_low < tau_high < 1");
  if (!(c.cell_length > 0.0)) throw ValidationError("classifier cell_length must be > 0");
}

inline DirectionalState classify(const GainPair& gain, const ClassifierSpec& cls) {
  validate(cls);
  enum class Level { open, closed, between };
  auto level = [&](Complex g) {
    const double t = transmission(g, cls.cell_length);
    if (t >= cls.tau_high) return Level::open;
    if (t <= cls.tau_low) return Level::closed;
    return Level::between;
  };
  const Level right = level(gain.g_plus), left = level(gain.g_minus);
  if (right == Level::between || left == Level::between) return DirectionalState::indeterminate;
  if (right == Level::open && left == Level::open) return DirectionalState::both_transparent;
  if (right == Level::closed && left == Level::closed) return DirectionalState::both_blocked;
  return right == Level::open ? DirectionalState::right_only : DirectionalState::left_only;
}

struct TruthTableCell {
  double omega_c = 0.0;
  double mean_velocity = 0.0;
  DirectionalState state = DirectionalState::indeterminate;
  double t_plus = 0.0, t_minus = 0.0;
  GainPair gain{};
  bool failed = false;
  std::string message;
};

struct TruthTable {
  std::vector<double> control_values, velocity_values;
  std::vector<TruthTableCell> cells;  // row-major [control][velocity]
  const TruthTableCell& at(std::size_t ic, std::size_t iu) const {
    return cells[ic * velocity_values.size() + iu];
  }
};

inline TruthTable truth_table(const ExperimentSpec& base, const std::vector<double>& control_values,
                              const std::vector<double>& velocity_values, const ClassifierSpec& cls,
                              const QuadratureSpec& quad, unsigned threads = 1) {
  validate(cls);
  TruthTable table;
  table.control_values = control_values;
  table.velocity_values = velocity_values;
  const std::size_t nu = velocity_values.size();
  table.cells.resize(control_values.size() * nu);
  parallel_for(table.cells.size(), threads, [&](std::size_t k) {
    auto& cell = table.cells[k];
    cell.omega_c = control_values[k / nu];
    cell.mean_velocity = velocity_values[k % nu];
    ExperimentSpec spec = base;
    spec.drive.omega_c = cell.omega_c;
    spec.gas.mean_velocity = cell.mean_velocity;
    try {
      cell.gain = linear_gain(spec, quad);
      cell.t_plus = transmission(cell.gain.g_plus, cls.cell_length);
      cell.t_minus = transmission(cell.gain.g_minus, cls.cell_length);
      cell.state = classify(cell.gain, cls);
    } catch (const Error& e) {
      cell.failed = true;
      cell.message = e.what();
    }
  });
  return table;
}

}  // namespace eitflow

#endif
