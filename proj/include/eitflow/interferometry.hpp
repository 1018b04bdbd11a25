#ifndef EITFLOW_INTERFEROMETRY_HPP
#define EITFLOW_INTERFEROMETRY_HPP

// Velocimeter observables built from the combined output of both probes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "eitflow/error.hpp"
#include "eitflow/gain.hpp"
#include "eitflow/parallel.hpp"
#include "eitflow/propagation.hpp"

namespace eitflow {

struct InterferenceTrace {
  std::vector<double> z;
  std::vector<double> intensity;   // |W+ + e^{i phi} W-|^2, (rad/s)^2
  std::vector<double> normalized;  // intensity / intensity(z0)
};

/// Total field W+ + e^{i phi} W- at each node.
inline InterferenceTrace interference_signal(const PropagationTrace& trace,
                                             double relative_phase = 0.0) {
  InterferenceTrace out;
  out.z = trace.z;
  const Complex rotate = std::polar(1.0, relative_phase);
  const std::size_t n = trace.z.size();
  out.intensity.resize(n);
  out.normalized.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.intensity[i] = std::norm(trace.omega_plus[i] + rotate * trace.omega_minus[i]);
  const double first = n ? out.intensity[0] : 0.0;
  for (std::size_t i = 0; i < n; ++i)
    out.normalized[i] = first > 0.0 ? out.intensity[i] / first : 0.0;
  return out;
}

/// Equal-amplitude linear model |e^{G+ z} + e^{i phi} e^{G- z}|^2 / |1 + e^{i phi}|^2.
inline double normalized_intensity(const GainPair& gain, double z, double relative_phase = 0.0) {
  const Complex rotate = std::polar(1.0, relative_phase);
  const double first = std::norm(1.0 + rotate);
  return std::norm(std::exp(gain.g_plus * z) + rotate * std::exp(gain.g_minus * z)) / first;
}

/// e^{-2bz} [4 e^{-cz} cos^2(az/2) + (e^{-cz} - 1)^2], the expanded form of
/// |e^{-bz} e^{iaz} + e^{-(b+c)z}|^2.
inline double closed_interference_model(double a, double b, double c, double z) {
  const double ec = std::exp(-c * z);
  const double cosine = std::cos(0.5 * a * z);
  return std::exp(-2.0 * b * z) * (4.0 * ec * cosine * cosine + (ec - 1.0) * (ec - 1.0));
}

/// Spatial beat rate of the combined intensity, rad/m.
inline double beat_frequency(const GainPair& gain) {
  return std::abs((gain.g_plus - gain.g_minus).imag());
}

/// Peak-to-trough of normalized(z) after dividing out the envelope
/// |W+(z)| |W-(z)| / (|W+(0)| |W-(0)|); zero means no beating.
inline double oscillation_amplitude(const PropagationTrace& trace, double relative_phase = 0.0) {
  const auto signal = interference_signal(trace, relative_phase);
  const std::size_t n = trace.z.size();
  if (n == 0) return 0.0;
  const double a0 = trace.amp_plus[0] * trace.amp_minus[0];
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double envelope = trace.amp_plus[i] * trace.amp_minus[i] / a0;
    const double v = signal.normalized[i] / envelope;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

/// Same metric evaluated in closed form from the gains on [0, z_max]:
/// the detrended signal is [2 cosh(db z) + 2 cos(da z)] / 4 with db, da the
/// differences of the real and imaginary parts of G+ and G-.
inline double oscillation_amplitude(const GainPair& gain, double z_max, std::size_t samples = 2001) {
  const Complex diff = gain.g_plus - gain.g_minus;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = z_max * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double v = 0.5 * (std::cosh(diff.real() * z) + std::cos(diff.imag() * z));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

/// Distance over which the detrending envelope e^{(Re G+ + Re G-) z} falls by e^{-2}.
inline double absorption_window(const GainPair& gain, double fallback) {
  const double decay = std::abs((gain.g_plus + gain.g_minus).real());
  return decay > 0.0 ? 2.0 / decay : fallback;
}

/// Beating visible within the absorption window; independent of the density.
inline double channel_metric(const GainPair& gain, double fallback_length) {
  return oscillation_amplitude(gain, absorption_window(gain, fallback_length));
}

/// Velocity resolution lambda * dOmega_c / (2 pi).
inline double sensitivity(double wavelength, double delta_omega_c) {
  if (!(wavelength > 0.0) || !(delta_omega_c >= 0.0))
    throw ValidationError("sensitivity needs wavelength > 0 and delta_omega_c >= 0");
  return wavelength * delta_omega_c / constants::two_pi;
}

// ---------------------------------------------------------------------------
// Parameter scans

enum class ScanAxis { omega_c, mean_velocity, z, delta };

inline const char* to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::omega_c: return "omega_c";
    case ScanAxis::mean_velocity: return "mean_velocity";
    case ScanAxis::z: return "z";
    case ScanAxis::delta: return "delta";
  }
  return "?";
}

struct AxisSweep {
  ScanAxis axis = ScanAxis::z;
  std::vector<double> values;
};

struct ScanMap {
  AxisSweep axis1, axis2;
  std::vector<double> values;    // normalized intensity, row-major [i1 * n2 + i2]
  std::vector<GainPair> gains;   // per cell
  std::vector<unsigned char> failed;
  std::vector<std::string> messages;
  std::size_t failures = 0;

  double at(std::size_t i1, std::size_t i2) const { return values[i1 * axis2.values.size() + i2]; }
  const GainPair& gain_at(std::size_t i1, std::size_t i2) const {
    return gains[i1 * axis2.values.size() + i2];
  }
};

inline void apply_axis(ExperimentSpec& spec, ScanAxis axis, double value) {
  switch (axis) {
    case ScanAxis::omega_c: spec.drive.omega_c = value; break;
    case ScanAxis::mean_velocity: spec.gas.mean_velocity = value; break;
    case ScanAxis::delta: spec.drive.delta = value; break;
    case ScanAxis::z: break;
  }
}

inline void validate(const AxisSweep& s) {
  if (s.values.empty()) throw ValidationError(std::string("scan axis ") + to_string(s.axis) + " is empty");
  for (std::size_t i = 1; i < s.values.size(); ++i)
    if (!(s.values[i] > s.values[i - 1]))
      throw ValidationError(std::string("scan axis ") + to_string(s.axis) + " must be strictly increasing");
}

/// Normalized interference over a two-parameter grid. Cells whose gain
/// computation fails are flagged; more than 10% failures fails the scan.
inline ScanMap scan_map(const ExperimentSpec& base, const AxisSweep& axis1, const AxisSweep& axis2,
                        double z_eval, const QuadratureSpec& quad, unsigned threads = 1) {
  validate(axis1);
  validate(axis2);
  if (axis1.axis == axis2.axis) throw ValidationError("scan axes must differ");
  ScanMap map;
  map.axis1 = axis1;
  map.axis2 = axis2;
  const std::size_t n1 = axis1.values.size(), n2 = axis2.values.size();
  const std::size_t cells = n1 * n2;
  map.values.assign(cells, 0.0);
  map.gains.assign(cells, GainPair{});
  map.failed.assign(cells, 0);
  map.messages.assign(cells, std::string());

  // A z axis reuses the gain of its parameter point.
  const bool z1 = axis1.axis == ScanAxis::z, z2 = axis2.axis == ScanAxis::z;
  const std::size_t points = z1 ? n2 : (z2 ? n1 : cells);
  std::vector<GainPair> gains(points);
  std::vector<std::string> errors(points);
  parallel_for(points, threads, [&](std::size_t k) {
    ExperimentSpec spec = base;
    if (z1) {
      apply_axis(spec, axis2.axis, axis2.values[k]);
    } else if (z2) {
      apply_axis(spec, axis1.axis, axis1.values[k]);
    } else {
      apply_axis(spec, axis1.axis, axis1.values[k / n2]);
      apply_axis(spec, axis2.axis, axis2.values[k % n2]);
    }
    try {
      gains[k] = linear_gain(spec, quad);
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });

  const double phase = base.geometry.relative_phase;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const std::size_t cell = i * n2 + j;
      const std::size_t k = z1 ? j : (z2 ? i : cell);
      const double z = z1 ? axis1.values[i] : (z2 ? axis2.values[j] : z_eval);
      map.gains[cell] = gains[k];
      if (!errors[k].empty()) {
        map.failed[cell] = 1;
        map.messages[cell] = errors[k];
        map.values[cell] = std::numeric_limits<double>::quiet_NaN();
        ++map.failures;
      } else {
        map.values[cell] = normalized_intensity(gains[k], z, phase);
      }
    }
  }
  if (map.failures * 10 > cells)
    throw Error(ErrorKind::convergence_failure,
                "scan failed in " + std::to_string(map.failures) + " of " + std::to_string(cells) +
                    " cells");
  return map;
}

// ---------------------------------------------------------------------------
// Mean-velocity estimation

struct VelocityEstimate {
  double u_hat = 0.0;
  double residual = 0.0;  // normalized least-squares objective at u_hat
  std::size_t iterations = 0;
  std::pair<double, double> bracket{0.0, 0.0};  // refinement bracket
};

struct EstimatorSpec {
  std::size_t coarse_points = 64;
  int refine_bits = 40;        // Brent tolerance, ~2^-bits relative
  std::size_t max_iterations = 200;
};

/// Normalized interference predicted at mean velocity u.
inline std::vector<double> model_normalized(const ExperimentSpec& known, double u,
                                            std::span<const double> z, const QuadratureSpec& quad) {
  ExperimentSpec spec = known;
  spec.gas.mean_velocity = u;
  const GainPair g = linear_gain(spec, quad);
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    out[i] = normalized_intensity(g, z[i] - z.front(), known.geometry.relative_phase);
  return out;
}

/// Noise-free or noisy synthetic measurement. Noise is multiplicative
/// Gaussian, drawn from std::mt19937_64 seeded with `seed`, on z > z0.
inline InterferenceTrace synthetic_observation(const ExperimentSpec& spec,
                                               std::span<const double> z,
                                               const QuadratureSpec& quad, double noise = 0.0,
                                               std::uint64_t seed = 0) {
  InterferenceTrace obs;
  obs.z.assign(z.begin(), z.end());
  obs.normalized = model_normalized(spec, spec.gas.mean_velocity, z, quad);
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 1; i < obs.normalized.size(); ++i) obs.normalized[i] *= 1.0 + noise * gauss(rng);
  }
  const double i0 = std::norm(spec.drive.omega_plus_in + std::polar(1.0, spec.geometry.relative_phase) *
                                                             spec.drive.omega_minus_in);
  obs.intensity.resize(obs.normalized.size());
  for (std::size_t i = 0; i < obs.normalized.size(); ++i) obs.intensity[i] = obs.normalized[i] * i0;
  return obs;
}

/// Fit the mean velocity to an observed normalized interference trace.
///
/// Coarse scan of the least-squares objective over the bracket, then Brent
/// (parabolic with golden-section fallback) refinement around the best
/// coarse point. Rejected as unidentifiable when the objective is flat, when
/// the first-order sensitivity of the model vanishes at the optimum, or when
/// the mirrored velocity fits equally well.
inline VelocityEstimate estimate_mean_velocity(const InterferenceTrace& observed,
                                               const ExperimentSpec& known,
                                               std::pair<double, double> bracket,
                                               const QuadratureSpec& quad,
                                               const EstimatorSpec& est = {},
                                               unsigned threads = 1) {
  const auto [lo, hi] = bracket;
  if (!(hi > lo)) throw ValidationError("velocity bracket must satisfy lo < hi");
  if (est.coarse_points < 64) throw ValidationError("estimator needs >= 64 coarse points");
  if (observed.z.size() < 2 || observed.normalized.size() != observed.z.size())
    throw ValidationError("observed trace needs >= 2 samples with matching columns");

  const std::span<const double> z(observed.z);
  double norm_obs = 0.0;
  for (double v : observed.normalized) norm_obs += v * v;
  if (!(norm_obs > 0.0)) throw ValidationError("observed trace is identically zero");

  std::size_t evaluations = 0;
  auto objective_of = [&](const std::vector<double>& model) {
    double s = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      const double d = model[i] - observed.normalized[i];
      s += d * d;
    }
    return s / norm_obs;
  };
  auto objective = [&](double u) {
    ++evaluations;
    return objective_of(model_normalized(known, u, z, quad));
  };

  const std::size_t n = est.coarse_points;
  std::vector<double> grid(n), values(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  parallel_for(n, threads, [&](std::size_t i) {
    values[i] = objective_of(model_normalized(known, grid[i], z, quad));
  });
  evaluations += n;

  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*max_it - *min_it <= 1e-12 * std::max(1.0, *max_it))
    throw Unidentifiable("objective is flat over the bracket: mean velocity is unidentifiable");
  const std::size_t best = static_cast<std::size_t>(min_it - values.begin());
  if (best == 0 || best == n - 1)
    throw BracketTooSmall("objective minimum lies at the bracket edge u = " +
                          std::to_string(grid[best]));

  boost::uintmax_t iterations = est.max_iterations;
  const auto refined = boost::math::tools::brent_find_minima(objective, grid[best - 1],
                                                             grid[best + 1], est.refine_bits,
                                                             iterations);
  VelocityEstimate out;
  out.u_hat = refined.first;
  out.residual = refined.second;
  out.iterations = static_cast<std::size_t>(iterations);
  out.bracket = {grid[best - 1], grid[best + 1]};

  // Local identifiability: the first-order response of the model to u must
  // not vanish relative to the second-order response.
  const double h = 1e-3 * (hi - lo);
  const auto m0 = model_normalized(known, out.u_hat, z, quad);
  const auto mp = model_normalized(known, out.u_hat + h, z, quad);
  const auto mm = model_normalized(known, out.u_hat - h, z, quad);
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < m0.size(); ++i) {
    first += std::pow(0.5 * (mp[i] - mm[i]), 2);
    second += std::pow(0.5 * (mp[i] + mm[i]) - m0[i], 2);
  }
  if (std::sqrt(first) <= 1e-3 * std::sqrt(second))
    throw Unidentifiable("model has no first-order sensitivity to the mean velocity at u = " +
                         std::to_string(out.u_hat));

  const double mirror = -out.u_hat;
  if (mirror > lo && mirror < hi && std::abs(out.u_hat) > 2.0 * h) {
    const double mirrored = objective(mirror);
    if (mirrored <= out.residual * (1.0 + 1e-6) + 1e-14)
      throw Unidentifiable("mirrored velocity fits equally well: the sign of u is unidentifiable");
  }
  return out;
}

}  // namespace eitflow

#endif
