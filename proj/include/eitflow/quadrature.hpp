#ifndef EITFLOW_QUADRATURE_HPP
#define EITFLOW_QUADRATURE_HPP

// Global adaptive Gauss-Kronrod (10/21) integration over momentum.
//
// The integrand may be any value type V with V+V, V-V, double*V and an
// overload magnitude(V). Convergence is judged against rel_tol times the
// integral of the integrand's magnitude, so integrals that cancel to zero
// still terminate. Summation runs left to right over the sorted final
// partition with Neumaier compensation, and each Kronrod rule sums mirrored
// node pairs first, so an integrand and its mirror image p -> 2c - p produce
// identical partitions and results.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "eitflow/error.hpp"
#include "eitflow/model.hpp"

namespace eitflow {

struct QuadratureSpec {
  double range_sigmas = 8.0;        // half-width of the base domain in units of delta_p
  double rel_tol = 1e-8;
  std::size_t max_nodes = 200000;   // integrand evaluations
  double resonance_padding = 10.0;  // linewidths kept around each resonance centre

  bool operator==(const QuadratureSpec&) const = default;
};

inline void validate(const QuadratureSpec& q) {
  if (!(q.range_sigmas >= 4.0)) throw ValidationError("quadrature range_sigmas must be >= 4");
  if (!(q.rel_tol > 0.0 && q.rel_tol < 1.0))
    throw ValidationError("quadrature rel_tol must lie in (0, 1)");
  if (q.max_nodes < 64) throw ValidationError("quadrature max_nodes must be >= 64");
  if (!(q.resonance_padding >= 0.0))
    throw ValidationError("quadrature resonance_padding must be >= 0");
}

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(Complex v) { return std::abs(v); }

template <class V>
struct QuadratureResult {
  V value{};
  double error = 0.0;
  double l1 = 0.0;  // integral of magnitude(integrand)
  std::size_t nodes = 0;
  std::size_t intervals = 0;
  bool converged = false;
};

/// Fixed nodes and weights of a finished adaptive partition, for reuse with
/// integrands of the same shape.
struct MomentumRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <class V>
class QuadratureFailure : public ConvergenceFailure {
 public:
  QuadratureFailure(const std::string& what, const QuadratureResult<V>& best, double target)
      : ConvergenceFailure(what, magnitude(best.value), best.error, target), best(best) {}
  QuadratureResult<V> best;
};

namespace detail {

inline constexpr double kronrod_x[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr double kronrod_w[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600217015138, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for kronrod_x[1], [3], ..., [9].
inline constexpr double gauss_w[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};
inline constexpr std::size_t nodes_per_interval = 21;

template <class V>
struct Interval {
  double a, b;
  V value;
  double error;
  double l1;
};

template <class V, class F>
Interval<V> kronrod21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const V fc = f(center);
  V kronrod = kronrod_w[10] * fc;
  V gauss{};
  double l1 = kronrod_w[10] * magnitude(fc);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kronrod_x[j];
    const V left = f(center - dx);
    const V right = f(center + dx);
    const V pair = left + right;
    kronrod = kronrod + kronrod_w[j] * pair;
    if (j % 2 == 1) gauss = gauss + gauss_w[j / 2] * pair;
    l1 += kronrod_w[j] * (magnitude(left) + magnitude(right));
  }
  kronrod = half * kronrod;
  gauss = half * gauss;
  return {a, b, kronrod, magnitude(kronrod - gauss), std::abs(half) * l1};
}

// Neumaier-compensated running sum for real or complex-like values.
struct CompensatedSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

template <class V>
V compensated_total(const std::vector<Interval<V>>& parts);

template <>
inline double compensated_total<double>(const std::vector<Interval<double>>& parts) {
  CompensatedSum s;
  for (const auto& p : parts) s.add(p.value);
  return s.value();
}

template <>
inline Complex compensated_total<Complex>(const std::vector<Interval<Complex>>& parts) {
  CompensatedSum re, im;
  for (const auto& p : parts) {
    re.add(p.value.real());
    im.add(p.value.imag());
  }
  return {re.value(), im.value()};
}

// Generic fallback: plain left-to-right sum.
template <class V>
V compensated_total(const std::vector<Interval<V>>& parts) {
  V total{};
  for (const auto& p : parts) total = total + p.value;
  return total;
}

}  // namespace detail

/// Adaptive integration over the partition defined by sorted breakpoints.
/// Never throws on non-convergence; inspect result.converged.
template <class F, class V = std::invoke_result_t<F&, double>>
QuadratureResult<V> integrate_partition(F&& f, std::span<const double> breakpoints, double rel_tol,
                                        std::size_t max_nodes, MomentumRule* rule = nullptr) {
  using detail::Interval;
  QuadratureResult<V> result;
  if (breakpoints.size() < 2) {
    result.converged = true;
    return result;
  }
  std::vector<Interval<V>> done;
  auto worse = [](const Interval<V>& x, const Interval<V>& y) {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;
  };
  std::priority_queue<Interval<V>, std::vector<Interval<V>>, decltype(worse)> heap(worse);

  double error_sum = 0.0, l1_sum = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    auto part = detail::kronrod21<V>(f, breakpoints[i], breakpoints[i + 1]);
    result.nodes += detail::nodes_per_interval;
    error_sum += part.error;
    l1_sum += part.l1;
    heap.push(part);
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto target = [&] { return std::max(rel_tol, 50.0 * eps) * l1_sum; };

  while (!heap.empty() && error_sum > target()) {
    if (result.nodes + 2 * detail::nodes_per_interval > max_nodes) break;
    Interval<V> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Cannot be bisected further; its error stays in the budget.
      done.push_back(worst);
      continue;
    }
    auto left = detail::kronrod21<V>(f, worst.a, mid);
    auto right = detail::kronrod21<V>(f, mid, worst.b);
    result.nodes += 2 * detail::nodes_per_interval;
    error_sum += left.error + right.error - worst.error;
    l1_sum += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  std::sort(done.begin(), done.end(), [](const auto& x, const auto& y) { return x.a < y.a; });

  detail::CompensatedSum err, l1;
  for (const auto& p : done) {
    err.add(p.error);
    l1.add(p.l1);
  }
  result.value = detail::compensated_total(done);
  result.error = err.value();
  result.l1 = l1.value();
  result.intervals = done.size();
  result.converged = result.error <= std::max(rel_tol, 50.0 * eps) * result.l1;

  if (rule) {
    rule->nodes.clear();
    rule->weights.clear();
    rule->nodes.reserve(done.size() * detail::nodes_per_interval);
    rule->weights.reserve(done.size() * detail::nodes_per_interval);
    for (const auto& p : done) {
      const double center = 0.5 * (p.a + p.b);
      const double half = 0.5 * (p.b - p.a);
      for (int j = 0; j < 10; ++j) {
        rule->nodes.push_back(center - half * detail::kronrod_x[j]);
        rule->weights.push_back(half * detail::kronrod_w[j]);
      }
      rule->nodes.push_back(center);
      rule->weights.push_back(half * detail::kronrod_w[10]);
      for (int j = 9; j >= 0; --j) {
        rule->nodes.push_back(center + half * detail::kronrod_x[j]);
        rule->weights.push_back(half * detail::kronrod_w[j]);
      }
    }
  }
  return result;
}

/// As integrate_partition, but throws QuadratureFailure<V> when rel_tol is
/// not reached within max_nodes.
template <class F, class V = std::invoke_result_t<F&, double>>
QuadratureResult<V> integrate_checked(F&& f, std::span<const double> breakpoints, double rel_tol,
                                      std::size_t max_nodes, MomentumRule* rule = nullptr) {
  auto result = integrate_partition(f, breakpoints, rel_tol, max_nodes, rule);
  if (!result.converged) {
    const double target = rel_tol * result.l1;
    throw QuadratureFailure<V>("momentum quadrature did not converge: error " +
                                   std::to_string(result.error) + " > target " +
                                   std::to_string(target) + " after " +
                                   std::to_string(result.nodes) + " nodes",
                               result, target);
  }
  return result;
}

/// Apply a fixed rule, summing left to right with compensation.
template <class F, class V = std::invoke_result_t<F&, double>>
V apply_rule(F&& f, const MomentumRule& rule) {
  std::vector<detail::Interval<V>> terms;
  terms.reserve(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    terms.push_back({rule.nodes[i], rule.nodes[i], rule.weights[i] * f(rule.nodes[i]), 0.0, 0.0});
  return detail::compensated_total(terms);
}

/// Momentum values where a denominator of the weak-probe coherence comes
/// close to zero, for either photon-momentum family. With the family shift
/// s = Delta +- omega_p + omega_r these are s = 0, s = +-|Re Omega_tilde|,
/// the lossless dressed roots s (s - Delta_c) = |Omega_c|^2 and the two-photon
/// resonance s = Delta_c.
inline std::vector<double> resonance_centers(const ExperimentSpec& spec) {
  const DerivedScales scales = derived_scales(spec);
  const double ic = std::norm(spec.drive.omega_c);
  const double dc = spec.drive.delta_c;
  std::vector<double> shifts{0.0};
  if (ic > 0.0) {
    const double tilde = scales.rabi_tilde.real();
    if (tilde > 0.0) {
      shifts.push_back(tilde);
      shifts.push_back(-tilde);
    }
    const double root = std::sqrt(dc * dc + 4.0 * ic);
    shifts.push_back(0.5 * (dc + root));
    shifts.push_back(0.5 * (dc - root));
    shifts.push_back(dc);
  }
  const double to_p = spec.atom.mass / spec.atom.wavevector;
  std::vector<double> centers;
  for (double s : shifts) {
    const double offset = (s - spec.drive.delta - scales.omega_r) * to_p;
    centers.push_back(offset);
    centers.push_back(-offset);
  }
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  return centers;
}

/// Sorted breakpoints covering p_bar +- range_sigmas delta_p, widened to keep
/// every resonance centre plus padding inside, and split at each centre.
inline std::vector<double> momentum_breakpoints(const ExperimentSpec& spec,
                                                const DerivedScales& scales,
                                                const QuadratureSpec& quad,
                                                std::span<const double> centers) {
  const double width = scales.linewidth_p;
  const double narrow = spec.atom.gamma_bc * spec.atom.mass / spec.atom.wavevector;
  const double pad = quad.resonance_padding * width;
  const double mid = scales.p_bar;
  double half = quad.range_sigmas * scales.delta_p;
  for (double c : centers) half = std::max(half, std::abs(c - mid) + pad);

  constexpr int base_intervals = 16;
  std::vector<double> points;
  for (int i = 0; i <= base_intervals; ++i)
    points.push_back(mid + half * (static_cast<double>(2 * i - base_intervals) / base_intervals));
  const double lo = mid - half, hi = mid + half;
  auto add = [&](double p) {
    if (p > lo && p < hi) points.push_back(p);
  };
  for (double c : centers) {
    add(c);
    add(c - width);
    add(c + width);
    if (narrow > 0.0 && narrow < width) {
      add(c - narrow);
      add(c + narrow);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

/// Integrate a momentum-space integrand for an experiment: builds the domain
/// and resonance breakpoints, then runs the checked adaptive rule.
template <class F, class V = std::invoke_result_t<F&, double>>
QuadratureResult<V> integrate_momentum(F&& f, const ExperimentSpec& spec,
                                       const DerivedScales& scales, const QuadratureSpec& quad,
                                       std::span<const double> centers,
                                       MomentumRule* rule = nullptr) {
  validate(quad);
  const auto points = momentum_breakpoints(spec, scales, quad, centers);
  return integrate_checked(f, points, quad.rel_tol, quad.max_nodes, rule);
}

}  // namespace eitflow

#endif
