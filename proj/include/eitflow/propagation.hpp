#ifndef EITFLOW_PROPAGATION_HPP
#define EITFLOW_PROPAGATION_HPP

// Evolution of the two probe Rabi frequencies along the cell. Both fields
// are treated as an initial-value problem from z = 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eitflow/coherence.hpp"
#include "eitflow/gain.hpp"
#include "eitflow/model.hpp"
#include "eitflow/quadrature.hpp"

namespace eitflow {

struct PropagationTrace {
  std::vector<double> z;
  std::vector<Complex> omega_plus, omega_minus;
  std::vector<double> amp_plus, amp_minus;
  std::vector<double> phase_plus, phase_minus;  // unwrapped
  // Nonlinear path only.
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t rule_builds = 0;
  std::size_t rule_nodes = 0;
  double error_estimate = 0.0;  // accumulated local error bound at z = L, rad/s
};

struct OdeSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-9;  // rad/s
  std::size_t max_steps = 100000;

  bool operator==(const OdeSpec&) const = default;
};

inline void validate(const OdeSpec& o) {
  if (!(o.rel_tol > 0.0) || !(o.abs_tol > 0.0))
    throw ValidationError("ode tolerances must be positive");
  if (o.max_steps == 0) throw ValidationError("ode max_steps must be positive");
}

inline void validate_grid(std::span<const double> z) {
  if (z.empty()) throw ValidationError("z grid is empty");
  if (!(z.front() >= 0.0) || !std::isfinite(z.back()))
    throw ValidationError("z grid must start at z >= 0 and be finite");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1])) throw ValidationError("z grid must be strictly increasing");
}

/// `count` evenly spaced points on [0, length], endpoints exact.
inline std::vector<double> uniform_grid(double length, std::size_t count) {
  if (count < 2) return {0.0};
  std::vector<double> z(count);
  for (std::size_t i = 0; i < count; ++i)
    z[i] = length * static_cast<double>(i) / static_cast<double>(count - 1);
  z.back() = length;
  return z;
}

namespace detail {

inline void unwrap_phases(std::vector<double>& phase) {
  for (std::size_t i = 1; i < phase.size(); ++i) {
    const double jump = phase[i] - phase[i - 1];
    phase[i] -= constants::two_pi * std::round(jump / constants::two_pi);
  }
}

inline void fill_amplitudes(PropagationTrace& trace) {
  const std::size_t n = trace.z.size();
  trace.amp_plus.resize(n);
  trace.amp_minus.resize(n);
  trace.phase_plus.resize(n);
  trace.phase_minus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    trace.amp_plus[i] = std::abs(trace.omega_plus[i]);
    trace.amp_minus[i] = std::abs(trace.omega_minus[i]);
    trace.phase_plus[i] = std::arg(trace.omega_plus[i]);
    trace.phase_minus[i] = std::arg(trace.omega_minus[i]);
  }
  unwrap_phases(trace.phase_plus);
  unwrap_phases(trace.phase_minus);
}

}  // namespace detail

/// Exact weak-probe solution W(z) = W(z0) exp(G (z - z0)) with z0 = z_grid.front().
inline PropagationTrace propagate_linear(const GainPair& gain, Complex entry_plus,
                                         Complex entry_minus, std::span<const double> z_grid) {
  validate_grid(z_grid);
  PropagationTrace t;
  const double z0 = z_grid.front();
  const std::size_t n = z_grid.size();
  t.z.assign(z_grid.begin(), z_grid.end());
  t.omega_plus.resize(n);
  t.omega_minus.resize(n);
  t.amp_plus.resize(n);
  t.amp_minus.resize(n);
  t.phase_plus.resize(n);
  t.phase_minus.resize(n);
  const double phase0_plus = std::arg(entry_plus);
  const double phase0_minus = std::arg(entry_minus);
  for (std::size_t i = 0; i < n; ++i) {
    const double dz = z_grid[i] - z0;
    t.amp_plus[i] = std::abs(entry_plus) * std::exp(gain.g_plus.real() * dz);
    t.amp_minus[i] = std::abs(entry_minus) * std::exp(gain.g_minus.real() * dz);
    t.phase_plus[i] = phase0_plus + gain.g_plus.imag() * dz;
    t.phase_minus[i] = phase0_minus + gain.g_minus.imag() * dz;
    t.omega_plus[i] = std::polar(t.amp_plus[i], t.phase_plus[i]);
    t.omega_minus[i] = std::polar(t.amp_minus[i], t.phase_minus[i]);
  }
  return t;
}

/// The two probe amplitudes as one ODE state.
struct FieldPair {
  Complex plus{};
  Complex minus{};
  friend FieldPair operator+(FieldPair a, FieldPair b) { return {a.plus + b.plus, a.minus + b.minus}; }
  friend FieldPair operator-(FieldPair a, FieldPair b) { return {a.plus - b.plus, a.minus - b.minus}; }
  friend FieldPair operator*(double s, FieldPair a) { return {s * a.plus, s * a.minus}; }
  friend FieldPair operator*(Complex s, FieldPair a) { return {s * a.plus, s * a.minus}; }
};

inline double magnitude(const FieldPair& f) { return std::max(std::abs(f.plus), std::abs(f.minus)); }

/// Right-hand side dW(+-)/dz = i kappa_g Int A(-+)(p; I+, I-) dp.
///
/// The momentum rule and every intensity-independent factor at its nodes are
/// cached. The rule is rebuilt adaptively only when the probe intensities move
/// by more than a quarter of their size, relative to Ic + gamma_ab^2, compared
/// with the intensities it was built for; below a nonlinearity of 1e-3 the
/// integrand shape no longer depends on them.
class NonlinearRhs {
 public:
  NonlinearRhs(const ExperimentSpec& spec, const QuadratureSpec& quad)
      : spec_(spec), quad_(quad), scales_(derived_scales(spec)) {
    validate(spec_);
    validate(quad_);
    i_c_ = std::norm(spec_.drive.omega_c);
    saturation_ = i_c_ + spec_.atom.gamma_ab * spec_.atom.gamma_ab;
    if (!spec_.delta_mode()) {
      const auto centers = resonance_centers(spec_);
      breakpoints_ = momentum_breakpoints(spec_, scales_, quad_, centers);
    }
  }

  /// Called at accepted steps; rebuilds the rule if the intensities moved.
  void prepare(const FieldPair& fields) {
    const double eta = nonlinearity(fields);
    const bool stale = factors_.empty() ||
                       (std::max(eta, eta_ref_) > 1e-3 &&
                        std::abs(eta - eta_ref_) > 0.25 * std::max(eta, eta_ref_));
    if (stale) build(fields);
  }

  FieldPair operator()(const FieldPair& fields) const {
    ++evaluations_;
    const double ip = std::norm(fields.plus);
    const double im = std::norm(fields.minus);
    detail::CompensatedSum pr, pi, mr, mi;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const auto a = coherence_closed_form(factors_[k], ip, im, fields.plus, fields.minus);
      const double wk = weights_[k];
      pr.add(wk * a.a_minus.real());
      pi.add(wk * a.a_minus.imag());
      mr.add(wk * a.a_plus.real());
      mi.add(wk * a.a_plus.imag());
    }
    const Complex factor = imag_unit * scales_.kappa_g;
    return {factor * Complex(pr.value(), pi.value()), factor * Complex(mr.value(), mi.value())};
  }

  std::size_t evaluations() const { return evaluations_; }
  std::size_t builds() const { return builds_; }
  std::size_t nodes() const { return factors_.size(); }

 private:
  double nonlinearity(const FieldPair& f) const {
    return (std::norm(f.plus) + std::norm(f.minus)) / saturation_;
  }

  void build(const FieldPair& fields) {
    ++builds_;
    eta_ref_ = nonlinearity(fields);
    factors_.clear();
    weights_.clear();
    if (spec_.delta_mode()) {
      const auto t = complex_rates(spec_, scales_, scales_.p_bar);
      factors_.push_back(coherence_factors(t, population_weights(spec_.gas), i_c_));
      weights_.push_back(1.0);
      return;
    }
    const double ip = std::norm(fields.plus);
    const double im = std::norm(fields.minus);
    // Build on the strength-independent shape: unit drive in both families.
    const Complex unit_plus = fields.plus == Complex{} ? Complex(1.0) : fields.plus / std::abs(fields.plus);
    const Complex unit_minus =
        fields.minus == Complex{} ? Complex(1.0) : fields.minus / std::abs(fields.minus);
    auto integrand = [&](double p) {
      const auto c = coherence_factors(complex_rates(spec_, scales_, p),
                                       inversions(spec_, scales_, p), i_c_);
      const auto a = coherence_closed_form(c, ip, im, unit_plus, unit_minus);
      return FieldPair{a.a_minus, a.a_plus};
    };
    MomentumRule rule;
    integrate_checked(integrand, breakpoints_, quad_.rel_tol, quad_.max_nodes, &rule);
    factors_.reserve(rule.nodes.size());
    for (double p : rule.nodes)
      factors_.push_back(coherence_factors(complex_rates(spec_, scales_, p),
                                           inversions(spec_, scales_, p), i_c_));
    weights_ = std::move(rule.weights);
  }

  ExperimentSpec spec_;
  QuadratureSpec quad_;
  DerivedScales scales_;
  double i_c_ = 0.0;
  double saturation_ = 1.0;
  double eta_ref_ = 0.0;
  std::vector<double> breakpoints_;
  std::vector<CoherenceFactors> factors_;
  std::vector<double> weights_;
  mutable std::size_t evaluations_ = 0;
  std::size_t builds_ = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  // Dense output (Hairer & Wanner, DOPRI5 continuous extension).
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

}  // namespace detail

/// Adaptive Dormand-Prince integration of the cross-coupled probe equations.
/// Each right-hand side performs the momentum sums for both probes with the
/// closed-form coherences at the current intensities. Output nodes are
/// sampled by dense interpolation, so the step sequence does not depend on
/// the output grid.
inline PropagationTrace propagate_nonlinear(const ExperimentSpec& spec, const QuadratureSpec& quad,
                                            const OdeSpec& ode, std::span<const double> z_grid) {
  validate_grid(z_grid);
  validate(ode);
  using DP = detail::DormandPrince;
  NonlinearRhs rhs(spec, quad);

  PropagationTrace trace;
  trace.z.assign(z_grid.begin(), z_grid.end());
  trace.omega_plus.resize(z_grid.size());
  trace.omega_minus.resize(z_grid.size());

  FieldPair y{spec.drive.omega_plus_in, spec.drive.omega_minus_in};
  double z = 0.0;
  const double z_end = z_grid.back();
  std::size_t out = 0;
  while (out < z_grid.size() && z_grid[out] <= 0.0) {
    trace.omega_plus[out] = y.plus;
    trace.omega_minus[out] = y.minus;
    ++out;
  }

  auto error_norm = [&](const FieldPair& err, const FieldPair& y0, const FieldPair& y1) {
    const double sp = ode.abs_tol + ode.rel_tol * std::max(std::abs(y0.plus), std::abs(y1.plus));
    const double sm = ode.abs_tol + ode.rel_tol * std::max(std::abs(y0.minus), std::abs(y1.minus));
    const double ep = std::abs(err.plus) / sp, em = std::abs(err.minus) / sm;
    return std::sqrt(0.5 * (ep * ep + em * em));
  };

  rhs.prepare(y);
  FieldPair k1 = rhs(y);
  double h;
  {
    const double scale = ode.abs_tol + ode.rel_tol * magnitude(y);
    const double ratio = magnitude(k1) > 0.0 ? 0.01 * (magnitude(y) + scale) / magnitude(k1) : z_end;
    h = std::min({ratio, z_end, 0.01 * z_end + ratio});
    if (!(h > 0.0)) h = z_end;
  }

  while (z < z_end) {
    if (trace.steps + trace.rejected_steps >= ode.max_steps)
      throw StiffnessError("ode step budget exhausted at z = " + std::to_string(z), z, h);
    if (h < 1e-14 * std::max(z_end, 1e-300))
      throw StiffnessError("ode step size underflow at z = " + std::to_string(z) +
                               ", |W+| = " + std::to_string(std::abs(y.plus)) +
                               ", |W-| = " + std::to_string(std::abs(y.minus)),
                           z, h);
    const bool last = z + h >= z_end;
    const double step = last ? z_end - z : h;

    const FieldPair k2 = rhs(y + step * (DP::a21 * k1));
    const FieldPair k3 = rhs(y + step * (DP::a31 * k1 + DP::a32 * k2));
    const FieldPair k4 = rhs(y + step * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3));
    const FieldPair k5 =
        rhs(y + step * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4));
    const FieldPair k6 = rhs(
        y + step * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5));
    const FieldPair y1 =
        y + step * (DP::a71 * k1 + DP::a73 * k3 + DP::a74 * k4 + DP::a75 * k5 + DP::a76 * k6);
    const FieldPair k7 = rhs(y1);
    const FieldPair err = step * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 +
                                  DP::e6 * k6 + DP::e7 * k7);
    const double norm = error_norm(err, y, y1);

    if (!std::isfinite(norm)) throw StiffnessError("non-finite ode error estimate", z, step);
    if (norm <= 1.0) {
      const double z1 = last ? z_end : z + step;
      // Dense output on (z, z1].
      const FieldPair r2 = y1 - y;
      const FieldPair r3 = step * k1 - r2;
      const FieldPair r4 = r2 - step * k7 - r3;
      const FieldPair r5 = step * (DP::d1 * k1 + DP::d3 * k3 + DP::d4 * k4 + DP::d5 * k5 +
                                   DP::d6 * k6 + DP::d7 * k7);
      while (out < z_grid.size() && z_grid[out] <= z1) {
        FieldPair v;
        if (z_grid[out] == z1) {
          v = y1;
        } else {
          const double th = (z_grid[out] - z) / step;
          const double th1 = 1.0 - th;
          v = y + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
        }
        trace.omega_plus[out] = v.plus;
        trace.omega_minus[out] = v.minus;
        ++out;
      }
      trace.error_estimate += magnitude(err);
      ++trace.steps;
      z = z1;
      y = y1;
      const std::size_t builds_before = rhs.builds();
      rhs.prepare(y);
      k1 = rhs.builds() == builds_before ? k7 : rhs(y);
    } else {
      ++trace.rejected_steps;
    }
    const double factor =
        norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, norm <= 1.0 ? 5.0 : 1.0);
    h = step * factor;
  }
  while (out < z_grid.size()) {
    trace.omega_plus[out] = y.plus;
    trace.omega_minus[out] = y.minus;
    ++out;
  }
  trace.rhs_evaluations = rhs.evaluations();
  trace.rule_builds = rhs.builds();
  trace.rule_nodes = rhs.nodes();
  detail::fill_amplitudes(trace);
  return trace;
}

}  // namespace eitflow

#endif
