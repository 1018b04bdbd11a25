#ifndef EITFLOW_IO_TASKS_HPP
#define EITFLOW_IO_TASKS_HPP

// Orchestration of the command-line tasks. Every task produces its files in
// memory first; writing is a separate, single-threaded step.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eitflow/eitflow.hpp"
#include "eitflow/io/config.hpp"
#include "eitflow/io/output.hpp"

namespace eitflow::io {

inline constexpr const char* tool_name = "eitflow";
inline constexpr const char* tool_version = "0.1.0";
inline constexpr const char* rng_name = "std::mt19937_64";

struct RunOptions {
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string config_text;  // hashed into the manifest
};

struct TaskOutput {
  std::string task;
  std::map<std::string, std::string> files;  // file name -> content
  Json results;
  Json diagnostics;
};

namespace detail {

inline std::vector<double> linspace(double from, double to, std::size_t n) {
  if (n == 1) return {from};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = to;
  return v;
}

inline ScanAxis axis_from_name(const std::string& name) {
  if (name == "omega_c") return ScanAxis::omega_c;
  if (name == "mean_velocity") return ScanAxis::mean_velocity;
  if (name == "z") return ScanAxis::z;
  if (name == "delta") return ScanAxis::delta;
  throw ValidationError("unknown scan axis '" + name + "' (omega_c, mean_velocity, z, delta)");
}

inline Json gain_json(const GainPair& g, const AtomSpec& atom, double length) {
  const auto chi = susceptibility(g, atom);
  return Json{{"g_plus_per_m", complex_json(g.g_plus)},
              {"g_minus_per_m", complex_json(g.g_minus)},
              {"chi_plus", complex_json(chi.chi_plus)},
              {"chi_minus", complex_json(chi.chi_minus)},
              {"transmission_plus", number(transmission(g.g_plus, length))},
              {"transmission_minus", number(transmission(g.g_minus, length))}};
}

inline std::vector<std::string> trace_header() {
  return {"z_m",      "re_omega_plus", "im_omega_plus", "re_omega_minus", "im_omega_minus",
          "amp_plus", "phase_plus",    "amp_minus",     "phase_minus"};
}

inline std::string trace_csv(const PropagationTrace& t) {
  CsvTable csv(trace_header());
  for (std::size_t i = 0; i < t.z.size(); ++i)
    csv.add_row({t.z[i], t.omega_plus[i].real(), t.omega_plus[i].imag(), t.omega_minus[i].real(),
                 t.omega_minus[i].imag(), t.amp_plus[i], t.phase_plus[i], t.amp_minus[i],
                 t.phase_minus[i]});
  return csv.str();
}

inline void require_points(std::size_t n, std::size_t minimum, const std::string& key) {
  if (n < minimum) throw ValidationError(key + " must be >= " + std::to_string(minimum));
}

struct TraceRun {
  PropagationTrace trace;
  GainPair gain{};
  bool linear = true;
};

inline TraceRun run_trace(const RunConfig& cfg, Json& diagnostics) {
  const auto& t = cfg.task;
  require_points(t.z_points, 2, "task.z_points");
  if (t.mode != "linear" && t.mode != "nonlinear")
    throw ValidationError("task.mode must be \"linear\" or \"nonlinear\"");
  const auto z = uniform_grid(cfg.experiment.geometry.cell_length, t.z_points);
  TraceRun run;
  run.linear = t.mode == "linear";
  if (run.linear) {
    GainDiagnostics gd;
    run.gain = linear_gain(cfg.experiment, cfg.quadrature, &gd);
    run.trace = propagate_linear(run.gain, cfg.experiment.drive.omega_plus_in,
                                 cfg.experiment.drive.omega_minus_in, z);
    diagnostics["quadrature_nodes"] = gd.nodes;
  } else {
    run.trace = propagate_nonlinear(cfg.experiment, cfg.quadrature, cfg.ode, z);
    diagnostics["ode_steps"] = run.trace.steps;
    diagnostics["ode_rejected_steps"] = run.trace.rejected_steps;
    diagnostics["rhs_evaluations"] = run.trace.rhs_evaluations;
    diagnostics["rule_builds"] = run.trace.rule_builds;
    diagnostics["rule_nodes"] = run.trace.rule_nodes;
    diagnostics["ode_error_estimate"] = run.trace.error_estimate;
  }
  return run;
}

inline Json endpoint_json(const PropagationTrace& t) {
  return Json{{"z_m", t.z.back()},
              {"omega_plus", complex_json(t.omega_plus.back())},
              {"omega_minus", complex_json(t.omega_minus.back())}};
}

inline void task_gain(const RunConfig& cfg, const RunOptions& opts, TaskOutput& out) {
  const auto& t = cfg.task;
  require_points(t.delta_points, 1, "task.delta_points");
  const bool sweep = t.present.count("delta_points") && t.delta_points > 1;
  const std::vector<double> deltas =
      sweep ? linspace(t.delta_from, t.delta_to, t.delta_points)
            : std::vector<double>{cfg.experiment.drive.delta};
  std::vector<GainPair> gains(deltas.size());
  std::vector<GainDiagnostics> diags(deltas.size());
  parallel_for(deltas.size(), opts.threads, [&](std::size_t i) {
    ExperimentSpec s = cfg.experiment;
    s.drive.delta = deltas[i];
    gains[i] = linear_gain(s, cfg.quadrature, &diags[i]);
  });
  const auto& atom = cfg.experiment.atom;
  const double length = cfg.experiment.geometry.cell_length;
  CsvTable csv({"delta_rad_s", "delta_gamma_ac", "re_g_plus", "im_g_plus", "re_g_minus",
                "im_g_minus", "re_chi_plus", "im_chi_plus", "re_chi_minus", "im_chi_minus",
                "t_plus", "t_minus"});
  Json points = Json::array();
  std::size_t nodes = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto chi = susceptibility(gains[i], atom);
    csv.add_row({deltas[i], deltas[i] / atom.gamma_ac, gains[i].g_plus.real(),
                 gains[i].g_plus.imag(), gains[i].g_minus.real(), gains[i].g_minus.imag(),
                 chi.chi_plus.real(), chi.chi_plus.imag(), chi.chi_minus.real(),
                 chi.chi_minus.imag(), transmission(gains[i].g_plus, length),
                 transmission(gains[i].g_minus, length)});
    Json p = gain_json(gains[i], atom, length);
    p["delta_rad_s"] = deltas[i];
    points.push_back(p);
    nodes += diags[i].nodes;
  }
  const DerivedScales d = derived_scales(cfg.experiment);
  out.results["kappa_g_per_m_s"] = d.kappa_g;
  out.results["two_level_reference_per_m"] = d.kappa_g / atom.gamma_ab;
  out.results["points"] = points;
  out.diagnostics["quadrature_nodes"] = nodes;
  out.files["gain.csv"] = csv.str();
}

inline void task_propagate(const RunConfig& cfg, const RunOptions&, TaskOutput& out) {
  const TraceRun run = run_trace(cfg, out.diagnostics);
  out.results["mode"] = cfg.task.mode;
  out.results["endpoint"] = endpoint_json(run.trace);
  if (run.linear)
    out.results["gain"] = gain_json(run.gain, cfg.experiment.atom, cfg.experiment.geometry.cell_length);
  out.files["propagate.csv"] = trace_csv(run.trace);
}

inline void task_polar(const RunConfig& cfg, const RunOptions&, TaskOutput& out) {
  const auto& d = cfg.experiment.drive;
  if (std::abs(d.omega_plus_in) == 0.0 || std::abs(d.omega_minus_in) == 0.0)
    throw ValidationError("polar needs nonzero omega_plus_in and omega_minus_in");
  RunConfig linear = cfg;
  linear.task.mode = "linear";
  const TraceRun run = run_trace(linear, out.diagnostics);
  const auto& t = run.trace;
  // Amplitudes relative to the entry amplitude of each probe.
  CsvTable csv({"z_m", "amp_plus", "phase_plus", "amp_minus", "phase_minus"});
  for (std::size_t i = 0; i < t.z.size(); ++i)
    csv.add_row({t.z[i], t.amp_plus[i] / t.amp_plus[0], t.phase_plus[i],
                 t.amp_minus[i] / t.amp_minus[0], t.phase_minus[i]});
  out.results["gain"] = gain_json(run.gain, cfg.experiment.atom, cfg.experiment.geometry.cell_length);
  out.results["endpoint"] = endpoint_json(t);
  out.files["polar.csv"] = csv.str();
}

inline void task_interfere(const RunConfig& cfg, const RunOptions&, TaskOutput& out) {
  const TraceRun run = run_trace(cfg, out.diagnostics);
  const double phase = cfg.experiment.geometry.relative_phase;
  const auto signal = interference_signal(run.trace, phase);
  CsvTable csv({"z_m", "intensity", "normalized"});
  for (std::size_t i = 0; i < signal.z.size(); ++i)
    csv.add_row({signal.z[i], signal.intensity[i], signal.normalized[i]});
  out.results["mode"] = cfg.task.mode;
  out.results["oscillation_amplitude"] = number(oscillation_amplitude(run.trace, phase));
  if (run.linear) {
    out.results["gain"] = gain_json(run.gain, cfg.experiment.atom, cfg.experiment.geometry.cell_length);
    out.results["beat_frequency_rad_m"] = number(beat_frequency(run.gain));
    out.results["absorption_window_m"] =
        number(absorption_window(run.gain, cfg.experiment.geometry.cell_length));
    out.results["channel_metric"] =
        number(channel_metric(run.gain, cfg.experiment.geometry.cell_length));
  }
  out.files["interfere.csv"] = csv.str();
}

inline void task_scan(const RunConfig& cfg, const RunOptions& opts, TaskOutput& out) {
  const auto& t = cfg.task;
  const double length = cfg.experiment.geometry.cell_length;
  auto sweep = [&](const std::string& name, double from, double to, std::size_t points,
                   bool from_set, bool to_set, const std::string& key) {
    AxisSweep s;
    s.axis = axis_from_name(name);
    require_points(points, 1, "task." + key + "_points");
    if (s.axis == ScanAxis::z) {
      if (!from_set) from = 0.0;
      if (!to_set) to = length;
    } else if (!from_set || !to_set) {
      throw ValidationError("task." + key + "_from and task." + key + "_to are required for axis " +
                            name);
    }
    s.values = linspace(from, to, points);
    return s;
  };
  const AxisSweep a1 = sweep(t.axis1, t.axis1_from, t.axis1_to, t.axis1_points,
                             t.present.count("axis1_from"), t.present.count("axis1_to"), "axis1");
  const AxisSweep a2 = sweep(t.axis2, t.axis2_from, t.axis2_to, t.axis2_points,
                             t.present.count("axis2_from"), t.present.count("axis2_to"), "axis2");
  const double z_eval = t.present.count("z_eval") ? t.z_eval : length;
  const ScanMap map = scan_map(cfg.experiment, a1, a2, z_eval, cfg.quadrature, opts.threads);

  const std::string n1 = t.axis1, n2 = t.axis2;
  CsvTable longform({n1, n2, "normalized", "re_g_plus", "im_g_plus", "re_g_minus", "im_g_minus",
                     "failed"});
  std::vector<std::string> matrix_header{n1 + "\\" + n2};
  for (double v : a2.values) matrix_header.push_back(format_double(v));
  CsvTable matrix(matrix_header);
  for (std::size_t i = 0; i < a1.values.size(); ++i) {
    std::vector<CsvTable::Cell> row{a1.values[i]};
    for (std::size_t j = 0; j < a2.values.size(); ++j) {
      const GainPair& g = map.gain_at(i, j);
      const std::size_t cell = i * a2.values.size() + j;
      longform.add_row({a1.values[i], a2.values[j], map.at(i, j), g.g_plus.real(), g.g_plus.imag(),
                        g.g_minus.real(), g.g_minus.imag(), map.failed[cell] ? 1.0 : 0.0});
      row.push_back(map.at(i, j));
    }
    matrix.add_row(row);
  }
  out.files["scan.csv"] = longform.str();
  out.files["scan_matrix.csv"] = matrix.str();
  out.results["axis1"] = n1;
  out.results["axis2"] = n2;
  out.results["cells"] = map.values.size();
  out.results["failures"] = map.failures;
  if (map.failures) {
    Json failed = Json::array();
    for (std::size_t c = 0; c < map.failed.size(); ++c)
      if (map.failed[c]) failed.push_back(Json{{"cell", c}, {"message", map.messages[c]}});
    out.results["failed_cells"] = failed;
  }

  // With one spatial axis, summarize the beating along z for each value of the other axis.
  const bool z1 = a1.axis == ScanAxis::z, z2 = a2.axis == ScanAxis::z;
  if (z1 != z2) {
    const AxisSweep& other = z1 ? a2 : a1;
    CsvTable channel({z1 ? n2 : n1, "channel_metric", "beat_frequency_rad_m", "absorption_window_m"});
    double best_value = 0.0, best_metric = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < other.values.size(); ++k) {
      const GainPair& g = z1 ? map.gain_at(0, k) : map.gain_at(k, 0);
      const bool failed = z1 ? map.failed[k] : map.failed[k * a2.values.size()];
      const double metric = failed ? std::numeric_limits<double>::quiet_NaN() : channel_metric(g, length);
      channel.add_row({other.values[k], metric, beat_frequency(g), absorption_window(g, length)});
      if (!failed && metric < best_metric) {
        best_metric = metric;
        best_value = other.values[k];
      }
    }
    out.files["scan_channel.csv"] = channel.str();
    out.results["channel_minimum"] = Json{{"axis", z1 ? n2 : n1},
                                          {"value", best_value},
                                          {"channel_metric", number(best_metric)}};
  }
}

inline void task_transistor(const RunConfig& cfg, const RunOptions& opts, TaskOutput& out) {
  const auto& t = cfg.task;
  const std::vector<double> controls =
      t.control_values.empty() ? std::vector<double>{cfg.experiment.drive.omega_c.real()}
                               : t.control_values;
  const std::vector<double> velocities =
      t.velocity_values.empty() ? std::vector<double>{cfg.experiment.gas.mean_velocity}
                                : t.velocity_values;
  ClassifierSpec cls;
  cls.tau_high = t.tau_high;
  cls.tau_low = t.tau_low;
  cls.cell_length = cfg.experiment.geometry.cell_length;
  const TruthTable table =
      truth_table(cfg.experiment, controls, velocities, cls, cfg.quadrature, opts.threads);
  CsvTable csv({"omega_c_rad_s", "mean_velocity_m_s", "state", "t_plus", "t_minus", "re_g_plus",
                "im_g_plus", "re_g_minus", "im_g_minus", "failed"});
  Json cells = Json::array();
  std::size_t failures = 0;
  for (const auto& c : table.cells) {
    const std::string state = c.failed ? "Failed" : to_string(c.state);
    csv.add_row({c.omega_c, c.mean_velocity, state, c.t_plus, c.t_minus, c.gain.g_plus.real(),
                 c.gain.g_plus.imag(), c.gain.g_minus.real(), c.gain.g_minus.imag(),
                 c.failed ? 1.0 : 0.0});
    Json j{{"omega_c_rad_s", c.omega_c}, {"mean_velocity_m_s", c.mean_velocity}, {"state", state},
           {"t_plus", number(c.t_plus)}, {"t_minus", number(c.t_minus)}};
    if (c.failed) {
      j["message"] = c.message;
      ++failures;
    }
    cells.push_back(j);
  }
  out.results["tau_high"] = cls.tau_high;
  out.results["tau_low"] = cls.tau_low;
  out.results["cells"] = cells;
  out.results["failures"] = failures;
  out.files["transistor.csv"] = csv.str();
}

inline InterferenceTrace read_observation(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("z", 0) != 0)
    throw ValidationError("observation file needs a header line 'z,normalized'");
  InterferenceTrace obs;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double z = 0.0, v = 0.0;
    const char* end = line.data() + line.size();
    const auto r1 = std::from_chars(line.data(), line.data() + (comma == std::string::npos ? 0 : comma), z);
    const auto r2 = comma == std::string::npos ? r1 : std::from_chars(line.data() + comma + 1, end, v);
    if (comma == std::string::npos || r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != end)
      throw ParseError("observation row must be 'z,normalized'", row, 1);
    obs.z.push_back(z);
    obs.normalized.push_back(v);
  }
  return obs;
}

inline void task_estimate(const RunConfig& cfg, const RunOptions& opts, TaskOutput& out) {
  const auto& t = cfg.task;
  if (!t.present.count("bracket_lo") || !t.present.count("bracket_hi"))
    throw ValidationError("estimate needs task.bracket_lo and task.bracket_hi (m/s)");
  if (!(t.noise >= 0.0)) throw ValidationError("task.noise must be >= 0");
  InterferenceTrace observed;
  const bool synthetic = t.observation.empty();
  if (synthetic) {
    require_points(t.z_points, 2, "task.z_points");
    const auto z = uniform_grid(cfg.experiment.geometry.cell_length, t.z_points);
    observed = synthetic_observation(cfg.experiment, z, cfg.quadrature, t.noise, opts.seed);
  } else {
    observed = read_observation(t.observation);
  }
  EstimatorSpec est;
  est.coarse_points = t.coarse_points;
  const VelocityEstimate fit = estimate_mean_velocity(
      observed, cfg.experiment, {t.bracket_lo, t.bracket_hi}, cfg.quadrature, est, opts.threads);
  const auto fitted = model_normalized(cfg.experiment, fit.u_hat, observed.z, cfg.quadrature);
  CsvTable csv({"z_m", "observed", "fitted"});
  for (std::size_t i = 0; i < observed.z.size(); ++i)
    csv.add_row({observed.z[i], observed.normalized[i], fitted[i]});
  out.results["u_hat_m_s"] = fit.u_hat;
  out.results["residual"] = fit.residual;
  out.results["refinement_bracket_m_s"] = Json::array({fit.bracket.first, fit.bracket.second});
  out.results["synthetic"] = synthetic;
  if (synthetic) {
    out.results["true_velocity_m_s"] = cfg.experiment.gas.mean_velocity;
    out.results["noise"] = t.noise;
    out.results["rng"] = rng_name;
    out.results["seed"] = opts.seed;
  }
  out.diagnostics["brent_iterations"] = fit.iterations;
  out.files["estimate.csv"] = csv.str();
}

inline void task_sensitivity(const RunConfig& cfg, const RunOptions&, TaskOutput& out) {
  const auto& t = cfg.task;
  const double du = sensitivity(t.wavelength, t.delta_omega_c);
  CsvTable csv({"wavelength_m", "delta_omega_c_rad_s", "delta_u_m_s"});
  csv.add_row({t.wavelength, t.delta_omega_c, du});
  out.results["wavelength_m"] = t.wavelength;
  out.results["delta_omega_c_rad_s"] = t.delta_omega_c;
  out.results["delta_u_m_s"] = du;
  out.files["sensitivity.csv"] = csv.str();
}

}  // namespace detail

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"gain",      "propagate",  "polar",    "interfere",
                                              "scan",      "transistor", "estimate", "sensitivity"};
  return names;
}

/// Runs one task. The results document and CSV content depend only on the
/// configuration and seed, never on the thread count.
inline TaskOutput run_task(const RunConfig& cfg, const std::string& task, const RunOptions& opts) {
  check_task_keys(cfg.task, task);
  if (opts.threads == 0) throw ValidationError("--threads must be >= 1");
  TaskOutput out;
  out.task = task;
  out.results = Json::object();
  out.diagnostics = Json::object();
  if (task == "gain") detail::task_gain(cfg, opts, out);
  else if (task == "propagate") detail::task_propagate(cfg, opts, out);
  else if (task == "polar") detail::task_polar(cfg, opts, out);
  else if (task == "interfere") detail::task_interfere(cfg, opts, out);
  else if (task == "scan") detail::task_scan(cfg, opts, out);
  else if (task == "transistor") detail::task_transistor(cfg, opts, out);
  else if (task == "estimate") detail::task_estimate(cfg, opts, out);
  else detail::task_sensitivity(cfg, opts, out);

  Json doc{{"tool", tool_name}, {"version", tool_version}, {"task", task}};
  doc["results"] = out.results;
  out.files[task + "_results.json"] = doc.dump(2) + "\n";
  return out;
}

/// Probe intensity relative to |Omega_c|^2 + gamma_ab^2; small values mean
/// the linear-regime gains apply.
inline double linear_regime_parameter(const ExperimentSpec& s) {
  const double probe = std::max(std::norm(s.drive.omega_plus_in), std::norm(s.drive.omega_minus_in));
  return probe / (std::norm(s.drive.omega_c) + s.atom.gamma_ab * s.atom.gamma_ab);
}

inline Json run_manifest(const RunConfig& cfg, const TaskOutput& out, const RunOptions& opts,
                         double wall_seconds) {
  Json files = Json::object();
  for (const auto& [name, content] : out.files) files[name] = Json{{"fnv1a64", fnv1a64(content)}};
  Json defaults = Json::object();
  for (const auto& [key, value] : cfg.defaulted) defaults[key] = value;
  return Json{
      {"tool", tool_name},
      {"version", tool_version},
      {"task", out.task},
      {"config", {{"path", opts.config_path}, {"fnv1a64", fnv1a64(opts.config_text)}}},
      {"threads", opts.threads},
      {"seed", opts.seed},
      {"rng", rng_name},
      {"experiment", {{"si", experiment_si(cfg.experiment)},
                      {"gamma_ac_units", experiment_normalized(cfg.experiment)}}},
      {"quadrature", quadrature_json(cfg.quadrature)},
      {"ode", ode_json(cfg.ode)},
      {"defaults", defaults},
      {"linear_regime_parameter", linear_regime_parameter(cfg.experiment)},
      {"diagnostics", out.diagnostics},
      {"outputs", files},
      {"wall_clock_seconds", wall_seconds},
  };
}

inline void write_outputs(const std::filesystem::path& dir, const TaskOutput& out,
                          const Json& manifest) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "'");
  for (const auto& [name, content] : out.files) atomic_write(dir / name, content);
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

/// Machine-readable description of a failed run.
inline Json error_document(const std::string& task, ErrorKind kind, const std::string& message,
                           int exit_code, const ParseError* parse = nullptr) {
  Json e{{"kind", to_string(kind)}, {"message", message}, {"exit_code", exit_code}};
  if (parse) {
    e["line"] = parse->line();
    e["column"] = parse->column();
  }
  return Json{{"tool", tool_name}, {"version", tool_version}, {"task", task}, {"error", e}};
}

}  // namespace eitflow::io

#endif
