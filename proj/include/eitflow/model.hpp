#ifndef EITFLOW_MODEL_HPP
#define EITFLOW_MODEL_HPP

// Physical parameter set of the moving Lambda gas and the per-momentum
// quantities every other module is built from: momentum distribution,
// population inversions and Doppler/recoil shifted complex decoherences.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "eitflow/constants.hpp"
#include "eitflow/error.hpp"

namespace eitflow {

using Complex = std::complex<double>;
inline constexpr Complex imag_unit{0.0, 1.0};

/// Probe-transition atom. Rates are coherence decay rates in rad/s.
struct AtomSpec {
  double mass = 87.0 * constants::atomic_mass_unit;  // kg
  double wavevector = constants::pi * 1e6;           // rad/m, probe transition
  double gamma_ab = 0.0;                             // rad/s
  double gamma_bc = 0.0;                             // rad/s
  double gamma_ac = 0.0;                             // rad/s
  double dipole_moment = 3.584e-29;                  // C m
  double number_density = 1e17;                      // m^-3
  bool include_recoil = true;  // false drops the photon momentum: no recoil shift, no displaced b

  bool operator==(const AtomSpec&) const = default;
};

struct DriveSpec {
  double delta = 0.0;    // probe detuning, rad/s
  double delta_c = 0.0;  // control detuning, rad/s
  Complex omega_c{};     // control Rabi frequency
  Complex omega_plus_in{};
  Complex omega_minus_in{};

  bool operator==(const DriveSpec&) const = default;
};

struct GasSpec {
  double temperature = 1.0;    // K; 0 selects the delta-distribution mode
  double mean_velocity = 0.0;  // m/s along +z
  double pop_a0 = 0.0;
  double pop_b0 = 1.0;
  double pop_c0 = 0.0;

  bool operator==(const GasSpec&) const = default;
};

struct GeometrySpec {
  double cell_length = 0.1;     // m
  double relative_phase = 0.0;  // rad, phase of the minus arm at the combiner

  bool operator==(const GeometrySpec&) const = default;
};

struct ExperimentSpec {
  AtomSpec atom;
  DriveSpec drive;
  GasSpec gas;
  GeometrySpec geometry;

  bool delta_mode() const { return gas.temperature == 0.0; }
  bool operator==(const ExperimentSpec&) const = default;
};

struct DerivedScales {
  double omega_r = 0.0;   // recoil shift hbar k^2 / 2M, rad/s
  double p_bar = 0.0;     // mean momentum, kg m/s
  double delta_p = 0.0;   // momentum width sqrt(2 M kB T)
  double omega_D = 0.0;   // mean Doppler shift k u
  double kappa_g = 0.0;   // coupling, rad/(s m)
  Complex rabi_tilde{};   // sqrt(Omega_c^2 - gamma_ac^2)
  double linewidth_p = 0.0;  // gamma_ab M / k, width of a bare resonance in momentum
};

/// Complex decoherences at one momentum. "plus"/"minus" label the p +/- hbar k family.
struct ComplexRates {
  Complex t_ab_plus, t_ab_minus;
  Complex t_bc_plus, t_bc_minus;
  Complex t_ac;
};

struct Inversions {
  double w_ab_plus = 0.0;
  double w_ab_minus = 0.0;
  double w_ac = 0.0;
};

/// Splitting-parameter of the dressed upper level. The principal root is
/// purely imaginary in the overdamped regime |Omega_c| < gamma_ac.
inline Complex rabi_tilde(Complex omega_c, double gamma_ac) {
  return std::sqrt(omega_c * omega_c - Complex(gamma_ac * gamma_ac, 0.0));
}

/// Real control Rabi frequency producing a given real splitting parameter.
inline double control_for_rabi_tilde(double rabi_tilde_value, double gamma_ac) {
  return std::hypot(rabi_tilde_value, gamma_ac);
}

inline void validate(const ExperimentSpec& spec) {
  const auto& a = spec.atom;
  const auto& g = spec.gas;
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  auto finite = [](double v) { return std::isfinite(v); };
  require(finite(a.mass) && a.mass > 0.0, "atom.mass must be > 0");
  require(finite(a.wavevector) && a.wavevector > 0.0, "atom.wavevector must be > 0");
  require(finite(a.gamma_ab) && a.gamma_ab > 0.0, "atom.gamma_ab must be > 0");
  require(finite(a.gamma_bc) && a.gamma_bc >= 0.0, "atom.gamma_bc must be >= 0");
  require(finite(a.gamma_ac) && a.gamma_ac > 0.0, "atom.gamma_ac must be > 0");
  require(finite(a.dipole_moment) && a.dipole_moment >= 0.0, "atom.dipole_moment must be >= 0");
  require(finite(a.number_density) && a.number_density > 0.0, "atom.number_density must be > 0");
  require(finite(g.temperature) && g.temperature >= 0.0, "gas.temperature must be >= 0");
  require(finite(g.mean_velocity), "gas.mean_velocity must be finite");
  for (double pop : {g.pop_a0, g.pop_b0, g.pop_c0})
    require(finite(pop) && pop >= 0.0 && pop <= 1.0, "gas populations must lie in [0, 1]");
  require(std::abs(g.pop_a0 + g.pop_b0 + g.pop_c0 - 1.0) <= 1e-12,
          "gas populations must sum to 1");
  require(finite(spec.geometry.cell_length) && spec.geometry.cell_length > 0.0,
          "geometry.cell_length must be > 0");
  const auto& d = spec.drive;
  for (Complex v : {d.omega_c, d.omega_plus_in, d.omega_minus_in})
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), "drive fields must be finite");
  require(finite(d.delta) && finite(d.delta_c), "drive detunings must be finite");
}

inline DerivedScales derived_scales(const ExperimentSpec& spec) {
  using namespace constants;
  const auto& a = spec.atom;
  DerivedScales s;
  s.omega_r = a.include_recoil ? hbar * a.wavevector * a.wavevector / (2.0 * a.mass) : 0.0;
  s.p_bar = a.mass * spec.gas.mean_velocity;
  s.delta_p = std::sqrt(2.0 * a.mass * boltzmann * spec.gas.temperature);
  s.omega_D = a.wavevector * spec.gas.mean_velocity;
  const double omega = speed_of_light * a.wavevector;
  s.kappa_g = a.number_density * omega * a.dipole_moment * a.dipole_moment /
              (2.0 * hbar * vacuum_permittivity * speed_of_light);
  s.rabi_tilde = rabi_tilde(spec.drive.omega_c, a.gamma_ac);
  s.linewidth_p = a.gamma_ab * a.mass / a.wavevector;
  return s;
}

/// Thermal velocity width sqrt(kB T / M).
inline double velocity_width(double temperature, double mass) {
  return std::sqrt(constants::boltzmann * temperature / mass);
}

/// Normalised Gaussian momentum distribution, 1/(kg m/s). Requires T > 0.
inline double momentum_distribution(const DerivedScales& s, double p) {
  const double x = (p - s.p_bar) / s.delta_p;
  return std::exp(-x * x) / (std::sqrt(constants::pi) * s.delta_p);
}

inline double momentum_distribution(const GasSpec& gas, const AtomSpec& atom, double p) {
  if (!(gas.temperature > 0.0))
    throw ValidationError("momentum_distribution needs T > 0; T = 0 uses the delta mode");
  ExperimentSpec spec;
  spec.atom = atom;
  spec.gas = gas;
  return momentum_distribution(derived_scales(spec), p);
}

/// Populations frozen at their initial values; b is displaced by the photon momentum.
inline Inversions inversions(const ExperimentSpec& spec, const DerivedScales& s, double p) {
  const auto& g = spec.gas;
  const double hk = spec.atom.include_recoil ? constants::hbar * spec.atom.wavevector : 0.0;
  const double f = momentum_distribution(s, p);
  Inversions w;
  w.w_ab_plus = g.pop_a0 * f - g.pop_b0 * momentum_distribution(s, p + hk);
  w.w_ab_minus = g.pop_a0 * f - g.pop_b0 * momentum_distribution(s, p - hk);
  w.w_ac = (g.pop_a0 - g.pop_c0) * f;
  return w;
}

/// Delta-distribution mode: f is replaced by the bare population fractions.
inline Inversions population_weights(const GasSpec& g) {
  return {g.pop_a0 - g.pop_b0, g.pop_a0 - g.pop_b0, g.pop_a0 - g.pop_c0};
}

inline ComplexRates complex_rates(const ExperimentSpec& spec, const DerivedScales& s, double p) {
  const auto& a = spec.atom;
  const auto& d = spec.drive;
  const double omega_p = a.wavevector * p / a.mass;
  const double shift_plus = d.delta + omega_p + s.omega_r;
  const double shift_minus = d.delta - omega_p + s.omega_r;
  ComplexRates t;
  t.t_ab_plus = {a.gamma_ab, -shift_plus};
  t.t_ab_minus = {a.gamma_ab, -shift_minus};
  t.t_bc_plus = {a.gamma_bc, -(d.delta_c - shift_plus)};
  t.t_bc_minus = {a.gamma_bc, -(d.delta_c - shift_minus)};
  t.t_ac = {a.gamma_ac, -d.delta_c};
  return t;
}

inline ComplexRates complex_rates(const ExperimentSpec& spec, double p) {
  return complex_rates(spec, derived_scales(spec), p);
}

}  // namespace eitflow

#endif
