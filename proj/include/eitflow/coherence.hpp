#ifndef EITFLOW_COHERENCE_HPP
#define EITFLOW_COHERENCE_HPP

// Quasi-steady-state coherences at a single momentum.
//
// Unknowns A+, A-, B+, B-, C satisfy
//   T_ab(+-)  A(+-) = i B(+-) Wc - i W(-+) w_ab(+-)
//   T_bc*(+-) B(+-) = i Wc* A(+-) - i W(-+) C
//   T_ac*     C     = i Wc* w_ac - i W+* B- - i W-* B+
// where W+-, Wc are the probe and control Rabi frequencies.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "eitflow/error.hpp"
#include "eitflow/model.hpp"

namespace eitflow {

struct ProbeFields {
  Complex omega_plus{};
  Complex omega_minus{};
  Complex omega_c{};
};

struct FieldIntensities {
  double i_plus = 0.0;
  double i_minus = 0.0;
  double i_c = 0.0;
};

inline FieldIntensities intensities(const ProbeFields& f) {
  return {std::norm(f.omega_plus), std::norm(f.omega_minus), std::norm(f.omega_c)};
}

struct CoherenceSolution {
  Complex a_plus, a_minus, b_plus, b_minus, c_coh;
};

enum class Branch { plus, minus };

namespace detail {

inline double operand_scale(std::initializer_list<double> magnitudes) {
  double s = 0.0;
  for (double m : magnitudes) s = std::max(s, m);
  return s;
}

// Denominators smaller than this fraction of their operand scale are exact
// cancellations for any physical parameter set.
inline constexpr double degeneracy_threshold = 1e-30;

inline void check_denominator(Complex value, double scale, const char* name) {
  if (!(std::abs(value) > degeneracy_threshold * scale) || !std::isfinite(std::abs(value)))
    throw DegenerateParameters(std::string("vanishing denominator ") + name);
}

}  // namespace detail

/// Coefficient matrix and right-hand side of the five coherence equations,
/// unknown order (A+, A-, B+, B-, C).
struct CoherenceSystem {
  std::array<std::array<Complex, 5>, 5> matrix{};
  std::array<Complex, 5> rhs{};
};

inline CoherenceSystem coherence_system(const ComplexRates& t, const Inversions& w,
                                        const ProbeFields& f) {
  const Complex i = imag_unit;
  CoherenceSystem s;
  auto& m = s.matrix;
  m[0][0] = t.t_ab_plus;
  m[0][2] = -i * f.omega_c;
  s.rhs[0] = -i * f.omega_minus * w.w_ab_plus;
  m[1][1] = t.t_ab_minus;
  m[1][3] = -i * f.omega_c;
  s.rhs[1] = -i * f.omega_plus * w.w_ab_minus;
  m[2][2] = std::conj(t.t_bc_plus);
  m[2][0] = -i * std::conj(f.omega_c);
  m[2][4] = i * f.omega_minus;
  m[3][3] = std::conj(t.t_bc_minus);
  m[3][1] = -i * std::conj(f.omega_c);
  m[3][4] = i * f.omega_plus;
  m[4][4] = std::conj(t.t_ac);
  m[4][3] = i * std::conj(f.omega_plus);
  m[4][2] = i * std::conj(f.omega_minus);
  s.rhs[4] = i * std::conj(f.omega_c) * w.w_ac;
  return s;
}

/// Direct dense solve (Gaussian elimination, partial pivoting). Used as the
/// reference for the closed form.
inline CoherenceSolution solve_coherences_oracle(const ComplexRates& t, const Inversions& w,
                                                 const ProbeFields& f) {
  static constexpr const char* unknown_names[5] = {"A+", "A-", "B+", "B-", "C"};
  auto [m, b] = coherence_system(t, w, f);
  double scale = 0.0;
  for (const auto& row : m)
    for (Complex v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw DegenerateParameters("coherence system is identically zero");

  std::array<int, 5> column_of{0, 1, 2, 3, 4};
  for (int k = 0; k < 5; ++k) {
    int pivot = k;
    for (int r = k + 1; r < 5; ++r)
      if (std::abs(m[r][k]) > std::abs(m[pivot][k])) pivot = r;
    if (!(std::abs(m[pivot][k]) > detail::degeneracy_threshold * scale))
      throw DegenerateParameters(std::string("singular coherence system: vanishing pivot for ") +
                                 unknown_names[column_of[k]]);
    std::swap(m[k], m[pivot]);
    std::swap(b[k], b[pivot]);
    for (int r = k + 1; r < 5; ++r) {
      const Complex factor = m[r][k] / m[k][k];
      if (factor == Complex{}) continue;
      for (int c = k; c < 5; ++c) m[r][c] -= factor * m[k][c];
      b[r] -= factor * b[k];
    }
  }
  std::array<Complex, 5> x{};
  for (int k = 4; k >= 0; --k) {
    Complex acc = b[k];
    for (int c = k + 1; c < 5; ++c) acc -= m[k][c] * x[c];
    x[k] = acc / m[k][k];
  }
  return {x[0], x[1], x[2], x[3], x[4]};
}

/// Largest equation residual divided by the largest term magnitude.
inline double coherence_residual(const ComplexRates& t, const Inversions& w, const ProbeFields& f,
                                 const CoherenceSolution& s) {
  const auto [m, b] = coherence_system(t, w, f);
  const std::array<Complex, 5> x{s.a_plus, s.a_minus, s.b_plus, s.b_minus, s.c_coh};
  double worst = 0.0;
  for (int r = 0; r < 5; ++r) {
    Complex lhs{};
    double terms = std::abs(b[r]);
    for (int c = 0; c < 5; ++c) {
      lhs += m[r][c] * x[c];
      terms = std::max(terms, std::abs(m[r][c] * x[c]));
    }
    if (terms > 0.0) worst = std::max(worst, std::abs(lhs - b[r]) / terms);
  }
  return worst;
}

struct ProbeCoherences {
  Complex a_plus, a_minus;
};

/// Intensity-independent part of the closed-form solution at one momentum.
struct CoherenceFactors {
  Complex t_ab_plus, t_ab_minus;
  Complex bc_plus, bc_minus;  // conjugated T_bc
  Complex ac;                 // conjugated T_ac
  Complex j_plus, j_minus;
  double w_ab_plus = 0.0, w_ab_minus = 0.0, w_ac = 0.0;
  double i_c = 0.0;
};

inline CoherenceFactors coherence_factors(const ComplexRates& t, const Inversions& w, double i_c) {
  CoherenceFactors c;
  c.t_ab_plus = t.t_ab_plus;
  c.t_ab_minus = t.t_ab_minus;
  c.bc_plus = std::conj(t.t_bc_plus);
  c.bc_minus = std::conj(t.t_bc_minus);
  c.ac = std::conj(t.t_ac);
  const Complex prod_p = c.t_ab_plus * c.bc_plus;
  const Complex prod_m = c.t_ab_minus * c.bc_minus;
  c.j_plus = prod_p + i_c;
  c.j_minus = prod_m + i_c;
  detail::check_denominator(c.j_plus, detail::operand_scale({std::abs(prod_p), i_c}), "J+");
  detail::check_denominator(c.j_minus, detail::operand_scale({std::abs(prod_m), i_c}), "J-");
  c.w_ab_plus = w.w_ab_plus;
  c.w_ab_minus = w.w_ab_minus;
  c.w_ac = w.w_ac;
  c.i_c = i_c;
  return c;
}

/// Exact solution for A+ and A- including the probe-intensity nonlinearity.
///
///   A(-+) = -i W(+-)/Y [ I(-+) (w(-+) T_ab(+-) T_bc*(-+) + w(+-) Ic) / (J+ J-)
///                        + w(-+) I(+-) / J(-+)
///                        + (w(-+) T_ac* T_bc*(-+) - w_ac Ic) / J(-+) ]
///   Y     = T_ac* + I- T_ab+ / J+ + I+ T_ab- / J-
///   J(+-) = T_ab(+-) T_bc*(+-) + Ic
///
/// Both summands of the last term share the J(-+) denominator; with the "+"
/// reading of the superscripts in Y this agrees with the dense solve to
/// rounding on random parameters.
inline ProbeCoherences coherence_closed_form(const CoherenceFactors& c, double i_plus,
                                             double i_minus, Complex omega_plus,
                                             Complex omega_minus) {
  const Complex ups_a = i_minus * c.t_ab_plus / c.j_plus;
  const Complex ups_b = i_plus * c.t_ab_minus / c.j_minus;
  const Complex upsilon = c.ac + ups_a + ups_b;
  detail::check_denominator(upsilon,
                            detail::operand_scale({std::abs(c.ac), std::abs(ups_a), std::abs(ups_b)}),
                            "Upsilon");
  const Complex jj = c.j_plus * c.j_minus;
  const double ic = c.i_c;
  // A- is driven by W+, A+ by W-.
  const Complex bracket_minus =
      i_minus * (c.w_ab_minus * c.t_ab_plus * c.bc_minus + c.w_ab_plus * ic) / jj +
      c.w_ab_minus * i_plus / c.j_minus + (c.w_ab_minus * c.ac * c.bc_minus - c.w_ac * ic) / c.j_minus;
  const Complex bracket_plus =
      i_plus * (c.w_ab_plus * c.t_ab_minus * c.bc_plus + c.w_ab_minus * ic) / jj +
      c.w_ab_plus * i_minus / c.j_plus + (c.w_ab_plus * c.ac * c.bc_plus - c.w_ac * ic) / c.j_plus;
  ProbeCoherences a;
  a.a_minus = -imag_unit * omega_plus / upsilon * bracket_minus;
  a.a_plus = -imag_unit * omega_minus / upsilon * bracket_plus;
  return a;
}

inline ProbeCoherences coherence_closed_form(const ComplexRates& t, const Inversions& w,
                                             const FieldIntensities& in, Complex omega_plus,
                                             Complex omega_minus) {
  return coherence_closed_form(coherence_factors(t, w, in.i_c), in.i_plus, in.i_minus, omega_plus,
                               omega_minus);
}

/// Weak-probe coherence of one family, driven by the opposite probe:
/// A(+-) = -i W(-+) / J(+-) [w_ab(+-) T_bc*(+-) - w_ac Ic / T_ac*].
inline Complex coherence_linear(const ComplexRates& t, const Inversions& w, Complex omega_c,
                                Complex probe_amplitude, Branch branch) {
  const bool plus = branch == Branch::plus;
  const Complex t_ab = plus ? t.t_ab_plus : t.t_ab_minus;
  const Complex bc = std::conj(plus ? t.t_bc_plus : t.t_bc_minus);
  const double w_ab = plus ? w.w_ab_plus : w.w_ab_minus;
  const double ic = std::norm(omega_c);
  const Complex prod = t_ab * bc;
  const Complex j = prod + ic;
  detail::check_denominator(j, detail::operand_scale({std::abs(prod), ic}), plus ? "J+" : "J-");
  const Complex ac = std::conj(t.t_ac);
  Complex numerator = w_ab * bc;
  if (w.w_ac != 0.0 && ic != 0.0) numerator -= w.w_ac * ic / ac;
  return -imag_unit * probe_amplitude / j * numerator;
}

}  // namespace eitflow

#endif
