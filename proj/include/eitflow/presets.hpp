#ifndef EITFLOW_PRESETS_HPP
#define EITFLOW_PRESETS_HPP

// Reference parameter sets. Shared numbers: 87Rb mass,
// probe wavelength 2 um, T = 1 K, gamma_bc = 0.1 gamma_ac, L = 0.1 m, and
// gamma_ac fixed by omega_D / gamma_ac = 6.67 at u = 100 m/s.

#include <cmath>

#include "eitflow/model.hpp"

namespace eitflow::presets {

inline constexpr double reference_velocity = 100.0;      // m/s
inline constexpr double doppler_to_gamma_ratio = 6.67;   // omega_D / gamma_ac at reference_velocity

inline ExperimentSpec base() {
  ExperimentSpec s;
  s.atom.mass = 87.0 * constants::atomic_mass_unit;
  s.atom.wavevector = constants::two_pi / 2e-6;
  s.atom.gamma_ac = s.atom.wavevector * reference_velocity / doppler_to_gamma_ratio;
  s.atom.gamma_ab = s.atom.gamma_ac;
  s.atom.gamma_bc = 0.1 * s.atom.gamma_ac;
  s.atom.dipole_moment = 3.584e-29;
  s.atom.number_density = 1e17;
  s.gas.temperature = 1.0;
  s.gas.pop_a0 = 0.0;
  s.gas.pop_b0 = 1.0;
  s.gas.pop_c0 = 0.0;
  s.geometry.cell_length = 0.1;
  const double probe = 1e-3 * s.atom.gamma_ac;
  s.drive.omega_plus_in = probe;
  s.drive.omega_minus_in = probe;
  return s;
}

/// Polar-plot regime without control field: u = 300 m/s, Delta = 0.
inline ExperimentSpec thermal_no_control() {
  ExperimentSpec s = base();
  s.gas.mean_velocity = 300.0;
  s.drive.delta = 0.0;
  s.drive.delta_c = 0.0;
  s.drive.omega_c = 0.0;
  return s;
}

/// Polar-plot regime with Delta = Delta_c = k u and Omega_tilde = omega_D.
inline ExperimentSpec thermal_with_control() {
  ExperimentSpec s = thermal_no_control();
  const double omega_D = s.atom.wavevector * s.gas.mean_velocity;
  s.drive.delta = omega_D;
  s.drive.delta_c = omega_D;
  s.drive.omega_c = control_for_rabi_tilde(omega_D, s.atom.gamma_ac);
  return s;
}

/// Optical-diode regime: Omega_c = 0, Delta = -omega_D.
inline ExperimentSpec diode(double mean_velocity = 300.0) {
  ExperimentSpec s = base();
  s.gas.mean_velocity = mean_velocity;
  s.drive.delta = -s.atom.wavevector * mean_velocity;
  s.drive.delta_c = s.drive.delta;
  return s;
}

/// Velocimeter maps: resonant control (Delta_c = 0), probe detuning
/// Delta = doppler_multiple * k u.
inline ExperimentSpec velocimeter(double mean_velocity, double doppler_multiple,
                                  double omega_c = 0.0) {
  ExperimentSpec s = base();
  s.gas.mean_velocity = mean_velocity;
  s.drive.delta = doppler_multiple * s.atom.wavevector * mean_velocity;
  s.drive.delta_c = 0.0;
  s.drive.omega_c = omega_c;
  return s;
}

}  // namespace eitflow::presets

#endif
