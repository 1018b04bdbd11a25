#ifndef EITFLOW_GAIN_HPP
#define EITFLOW_GAIN_HPP

// Weak-probe complex gains of the two counter-propagating probes,
//   G(+-) = kappa_g * Int [w_ab(-+) T_bc*(-+) - w_ac Ic / T_ac*] / J(-+) dp,
// so that W(+-)(z) = W(+-)(0) exp(G(+-) z).

#include <cmath>
#include <complex>
#include <cstddef>

#include "eitflow/coherence.hpp"
#include "eitflow/model.hpp"
#include "eitflow/quadrature.hpp"

namespace eitflow {

struct GainPair {
  Complex g_plus;   // 1/m, probe travelling along +z
  Complex g_minus;  // 1/m, probe travelling along -z
};

struct GainDiagnostics {
  std::size_t nodes = 0;
  double error_plus = 0.0;
  double error_minus = 0.0;
};

struct Susceptibility {
  Complex chi_plus;
  Complex chi_minus;
};

namespace detail {

// The probe travelling along +z drives the minus family and vice versa.
inline Branch family_of_probe(bool plus_probe) { return plus_probe ? Branch::minus : Branch::plus; }

// Integrand per unit kappa_g for the probe gain; equals i A / W.
inline Complex linear_gain_density(const ComplexRates& t, const Inversions& w, Complex omega_c,
                                   Branch family) {
  if (std::norm(omega_c) == 0.0) {
    const bool plus = family == Branch::plus;
    const Complex t_ab = plus ? t.t_ab_plus : t.t_ab_minus;
    const Complex t_bc = plus ? t.t_bc_plus : t.t_bc_minus;
    // J = T_ab T_bc* cancels against the numerator only when T_bc vanishes.
    if (t_bc == Complex{}) return (plus ? w.w_ab_plus : w.w_ab_minus) / t_ab;
  }
  return imag_unit * coherence_linear(t, w, omega_c, Complex(1.0, 0.0), family);
}

inline Complex two_level_gain_density(const ComplexRates& t, const Inversions& w, Branch family) {
  return family == Branch::plus ? w.w_ab_plus / t.t_ab_plus : w.w_ab_minus / t.t_ab_minus;
}

template <class Density>
GainPair integrate_gain(const ExperimentSpec& spec, const QuadratureSpec& quad, Density density,
                        GainDiagnostics* diagnostics) {
  validate(spec);
  const DerivedScales scales = derived_scales(spec);
  if (spec.delta_mode()) {
    const Inversions w = population_weights(spec.gas);
    const ComplexRates t = complex_rates(spec, scales, scales.p_bar);
    if (diagnostics) *diagnostics = {};
    return {scales.kappa_g * density(t, w, family_of_probe(true)),
            scales.kappa_g * density(t, w, family_of_probe(false))};
  }
  const auto centers = resonance_centers(spec);
  auto branch_integral = [&](bool plus_probe) {
    const Branch family = family_of_probe(plus_probe);
    auto integrand = [&](double p) {
      return density(complex_rates(spec, scales, p), inversions(spec, scales, p), family);
    };
    return integrate_momentum(integrand, spec, scales, quad, centers);
  };
  const auto plus = branch_integral(true);
  const auto minus = branch_integral(false);
  if (diagnostics) {
    diagnostics->nodes = plus.nodes + minus.nodes;
    diagnostics->error_plus = scales.kappa_g * plus.error;
    diagnostics->error_minus = scales.kappa_g * minus.error;
  }
  return {scales.kappa_g * plus.value, scales.kappa_g * minus.value};
}

}  // namespace detail

/// Linear-regime gains. Valid for |W+-|^2 << |Wc|^2, |T_ab|^2; not enforced.
inline GainPair linear_gain(const ExperimentSpec& spec, const QuadratureSpec& quad,
                            GainDiagnostics* diagnostics = nullptr) {
  const Complex omega_c = spec.drive.omega_c;
  return detail::integrate_gain(
      spec, quad,
      [omega_c](const ComplexRates& t, const Inversions& w, Branch family) {
        return detail::linear_gain_density(t, w, omega_c, family);
      },
      diagnostics);
}

/// Gains without control field: G(+-) = kappa_g Int w_ab(-+) / T_ab(-+) dp.
inline GainPair two_level_gain(const ExperimentSpec& spec, const QuadratureSpec& quad,
                               GainDiagnostics* diagnostics = nullptr) {
  if (spec.drive.omega_c != Complex{})
    throw ValidationError("two_level_gain requires omega_c = 0");
  return detail::integrate_gain(
      spec, quad,
      [](const ComplexRates& t, const Inversions& w, Branch family) {
        return detail::two_level_gain_density(t, w, family);
      },
      diagnostics);
}

/// Linear susceptibility from G = i k chi / 2, i.e. chi = -2 i G / k.
/// Absorption (Re G < 0) maps to Im chi > 0.
inline Susceptibility susceptibility(const GainPair& gain, double wavevector) {
  const Complex factor = -2.0 * imag_unit / wavevector;
  return {factor * gain.g_plus, factor * gain.g_minus};
}

inline Susceptibility susceptibility(const GainPair& gain, const AtomSpec& atom) {
  return susceptibility(gain, atom.wavevector);
}

/// Transmission of each probe through a cell of the given length.
inline double transmission(Complex gain, double length) { return std::exp(gain.real() * length); }

}  // namespace eitflow

#endif
