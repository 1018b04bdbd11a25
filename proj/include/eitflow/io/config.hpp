#ifndef EITFLOW_IO_CONFIG_HPP
#define EITFLOW_IO_CONFIG_HPP

// Run configuration: a TOML-style document with the sections
// [atom] [drive] [gas] [geometry] [numerics] [task].
//
// Supported syntax is the subset needed for flat parameter files: comments,
// section headers, `key = value` with numbers, "strings", true/false and
// single-line arrays. Frequencies are strings carrying a unit tag:
//   "4.7e7 rad_s"   SI angular frequency
//   "0.1 gamma_ac"  multiple of the resolved atom.gamma_ac
//   "1 omega_d"     multiple of the mean Doppler shift k * gas.mean_velocity
// Masses are tagged "87 u" or "1.44e-25 kg"; everything else is a bare SI number.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "eitflow/error.hpp"
#include "eitflow/model.hpp"
#include "eitflow/presets.hpp"
#include "eitflow/propagation.hpp"
#include "eitflow/quadrature.hpp"

namespace eitflow::io {

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ValidationError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                        ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Value {
  enum class Type { number, boolean, string, array };
  Type type = Type::number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<Value> items;
  int line = 0, column = 0;
};

struct Document {
  // section -> key -> value; keys outside any section are rejected.
  std::map<std::string, std::map<std::string, Value>> sections;
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Document parse() {
    Document doc;
    std::string section;
    while (pos_ < text_.size()) {
      skip_blank();
      if (at_end_of_line()) {
        consume_line_end();
        continue;
      }
      const char c = text_[pos_];
      if (c == '[') {
        const int col = column();
        ++pos_;
        skip_blank();
        const std::string name = identifier("section name");
        skip_blank();
        expect(']');
        section = name;
        if (doc.sections.count(section))
          throw ParseError("duplicate section [" + section + "]", line_, col);
        doc.sections[section];
      } else {
        const int col = column();
        const std::string key = identifier("key");
        if (section.empty()) throw ParseError("key '" + key + "' outside of a section", line_, col);
        skip_blank();
        expect('=');
        skip_blank();
        Value v = value();
        auto& table = doc.sections[section];
        if (table.count(key))
          throw ParseError("duplicate key '" + key + "' in [" + section + "]", line_, col);
        table[key] = std::move(v);
      }
      skip_blank();
      if (!at_end_of_line()) throw ParseError("unexpected trailing text", line_, column());
      consume_line_end();
    }
    return doc;
  }

 private:
  int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

  bool at_end_of_line() const {
    return pos_ >= text_.size() || text_[pos_] == '\n' || text_[pos_] == '\r' || text_[pos_] == '#';
  }

  void consume_line_end() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    if (pos_ < text_.size()) ++pos_;
    ++line_;
    line_start_ = pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c)
      throw ParseError(std::string("expected '") + c + "'", line_, column());
    ++pos_;
  }

  std::string identifier(const char* what) {
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')
        ++pos_;
      else
        break;
    }
    if (pos_ == start) throw ParseError(std::string("expected ") + what, line_, column());
    return std::string(text_.substr(start, pos_ - start));
  }

  Value value() {
    Value v;
    v.line = line_;
    v.column = column();
    if (pos_ >= text_.size()) throw ParseError("missing value", line_, column());
    const char c = text_[pos_];
    if (c == '"') {
      v.type = Value::Type::string;
      v.text = string_literal();
    } else if (c == '[') {
      v.type = Value::Type::array;
      ++pos_;
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        skip_blank();
        v.items.push_back(value());
        if (v.items.back().type == Value::Type::array)
          throw ParseError("nested arrays are not supported", v.items.back().line,
                           v.items.back().column);
        skip_blank();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        expect(']');
        break;
      }
    } else if (text_.substr(pos_, 4) == "true") {
      v.type = Value::Type::boolean;
      v.boolean = true;
      pos_ += 4;
    } else if (text_.substr(pos_, 5) == "false") {
      v.type = Value::Type::boolean;
      pos_ += 5;
    } else {
      v.type = Value::Type::number;
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::string_view("+-.0123456789eE_").find(text_[pos_]) !=
                                        std::string_view::npos)
        ++pos_;
      std::string token(text_.substr(start, pos_ - start));
      std::erase(token, '_');
      if (!token.empty() && token[0] == '+') token.erase(0, 1);
      double parsed = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), parsed);
      if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size() ||
          !std::isfinite(parsed))
        throw ParseError("invalid value", v.line, v.column);
      v.number = parsed;
    }
    return v;
  }

  std::string string_literal() {
    const int col = column();
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n')
        throw ParseError("unterminated string", line_, col);
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) throw ParseError("unterminated string", line_, col);
        const char e = text_[pos_++];
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: throw ParseError(std::string("unknown escape \\") + e, line_, column() - 2);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
};

}  // namespace detail

inline Document parse_document(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Typed configuration

/// Task parameters. Only keys present in the file are serialized back.
struct TaskParams {
  std::string kind;
  std::size_t z_points = 201;
  std::string mode = "linear";  // propagate / interfere: linear | nonlinear
  // gain: optional detuning sweep
  double delta_from = 0.0, delta_to = 0.0;
  std::size_t delta_points = 1;
  // scan
  std::string axis1 = "omega_c", axis2 = "z";
  double axis1_from = 0.0, axis1_to = 0.0, axis2_from = 0.0, axis2_to = 0.0;
  std::size_t axis1_points = 200, axis2_points = 201;
  double z_eval = 0.1;
  // transistor
  std::vector<double> control_values, velocity_values;
  double tau_high = 0.5, tau_low = 0.1;
  // estimate
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double noise = 0.0;
  std::size_t coarse_points = 64;
  std::string observation;  // CSV with columns z,normalized; empty = synthetic
  // sensitivity
  double wavelength = 2e-6;
  double delta_omega_c = 3e4;

  std::set<std::string> present;

  bool operator==(const TaskParams&) const = default;
};

struct RunConfig {
  ExperimentSpec experiment;
  QuadratureSpec quadrature;
  OdeSpec ode;
  TaskParams task;
  std::map<std::string, std::string> defaulted;  // "section.key" -> serialized default
};

/// Equality of everything a config file specifies; the defaults record is excluded.
inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.experiment == b.experiment && a.quadrature == b.quadrature && a.ode == b.ode &&
         a.task == b.task;
}

/// Task keys each task accepts (besides `kind`).
inline const std::map<std::string, std::set<std::string>>& task_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"gain", {"delta_from", "delta_to", "delta_points"}},
      {"propagate", {"z_points", "mode"}},
      {"polar", {"z_points"}},
      {"interfere", {"z_points", "mode"}},
      {"scan", {"axis1", "axis1_from", "axis1_to", "axis1_points", "axis2", "axis2_from",
                "axis2_to", "axis2_points", "z_eval"}},
      {"transistor", {"control_values", "velocity_values", "tau_high", "tau_low"}},
      {"estimate", {"z_points", "bracket_lo", "bracket_hi", "noise", "coarse_points", "observation"}},
      {"sensitivity", {"wavelength", "delta_omega_c"}},
  };
  return keys;
}

/// Rejects task keys that the selected task does not read.
inline void check_task_keys(const TaskParams& t, const std::string& task) {
  const auto& all = task_keys();
  const auto it = all.find(task);
  if (it == all.end()) throw ValidationError("unknown task '" + task + "'");
  if (!t.kind.empty() && t.kind != task)
    throw ValidationError("config [task] kind = \"" + t.kind + "\" does not match task '" + task + "'");
  for (const auto& key : t.present)
    if (key != "kind" && !it->second.count(key))
      throw ValidationError("task key '" + key + "' is not used by task '" + task + "'");
}

namespace detail {

enum class Quantity { frequency, mass, number, count, boolean, text, frequency_list, number_list };

struct KeyInfo {
  const char* name;
  Quantity quantity;
};

inline const std::map<std::string, std::vector<KeyInfo>>& schema() {
  using Q = Quantity;
  static const std::map<std::string, std::vector<KeyInfo>> s{
      {"atom",
       {{"mass", Q::mass}, {"wavevector", Q::number}, {"gamma_ab", Q::frequency},
        {"gamma_bc", Q::frequency}, {"gamma_ac", Q::frequency}, {"dipole_moment", Q::number},
        {"number_density", Q::number}, {"include_recoil", Q::boolean}}},
      {"drive",
       {{"delta", Q::frequency}, {"delta_c", Q::frequency}, {"omega_c", Q::frequency},
        {"omega_c_imag", Q::frequency}, {"omega_plus_in", Q::frequency},
        {"omega_plus_in_imag", Q::frequency}, {"omega_minus_in", Q::frequency},
        {"omega_minus_in_imag", Q::frequency}}},
      {"gas",
       {{"temperature", Q::number}, {"mean_velocity", Q::number}, {"pop_a", Q::number},
        {"pop_b", Q::number}, {"pop_c", Q::number}}},
      {"geometry", {{"cell_length", Q::number}, {"relative_phase", Q::number}}},
      {"numerics",
       {{"quad_rel_tol", Q::number}, {"quad_max_nodes", Q::count},
        {"quad_range_sigmas", Q::number}, {"quad_resonance_padding", Q::number},
        {"ode_rel_tol", Q::number}, {"ode_abs_tol", Q::number}, {"ode_max_steps", Q::count}}},
      {"task",
       {{"kind", Q::text}, {"z_points", Q::count}, {"mode", Q::text},
        {"delta_from", Q::frequency}, {"delta_to", Q::frequency}, {"delta_points", Q::count},
        {"axis1", Q::text}, {"axis1_from", Q::text}, {"axis1_to", Q::text},
        {"axis1_points", Q::count}, {"axis2", Q::text}, {"axis2_from", Q::text},
        {"axis2_to", Q::text}, {"axis2_points", Q::count}, {"z_eval", Q::number},
        {"control_values", Q::frequency_list}, {"velocity_values", Q::number_list},
        {"tau_high", Q::number}, {"tau_low", Q::number}, {"bracket_lo", Q::number},
        {"bracket_hi", Q::number}, {"noise", Q::number}, {"coarse_points", Q::count},
        {"observation", Q::text}, {"wavelength", Q::number}, {"delta_omega_c", Q::frequency}}},
  };
  return s;
}

struct UnitScales {
  double gamma_ac = 0.0;
  double omega_d = 0.0;
};

inline ParseError value_error(const Value& v, const std::string& what) {
  return ParseError(what, v.line, v.column);
}

inline double number_of(const Value& v, const std::string& key) {
  if (v.type != Value::Type::number) throw value_error(v, key + " must be a number");
  return v.number;
}

// Splits "<number> <unit>" into its parts.
inline std::pair<double, std::string> tagged(const Value& v, const std::string& key,
                                             const char* units) {
  if (v.type != Value::Type::string)
    throw value_error(v, key + " needs a unit-tagged string such as \"1.5 " +
                             std::string(units) + "\"");
  std::istringstream in(v.text);
  std::string number, unit, extra;
  in >> number >> unit >> extra;
  double parsed = 0.0;
  const auto res = std::from_chars(number.data(), number.data() + number.size(), parsed);
  if (number.empty() || res.ec != std::errc() || res.ptr != number.data() + number.size() ||
      !std::isfinite(parsed) || unit.empty() || !extra.empty())
    throw value_error(v, key + ": expected \"<number> <unit>\" with unit one of " + units);
  return {parsed, unit};
}

inline double frequency_of(const Value& v, const std::string& key, const UnitScales& u,
                           bool allow_gamma_ac = true) {
  const auto [x, unit] = tagged(v, key, "rad_s, gamma_ac, omega_d");
  if (unit == "rad_s") return x;
  if (unit == "gamma_ac") {
    if (!allow_gamma_ac) throw value_error(v, key + " cannot be given in units of gamma_ac");
    return x * u.gamma_ac;
  }
  if (unit == "omega_d") return x * u.omega_d;
  throw value_error(v, key + ": unknown frequency unit '" + unit + "' (rad_s, gamma_ac, omega_d)");
}

inline double mass_of(const Value& v, const std::string& key) {
  const auto [x, unit] = tagged(v, key, "u, kg");
  if (unit == "kg") return x;
  if (unit == "u") return x * constants::atomic_mass_unit;
  throw value_error(v, key + ": unknown mass unit '" + unit + "' (u, kg)");
}

inline std::size_t count_of(const Value& v, const std::string& key) {
  const double x = number_of(v, key);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e15)
    throw value_error(v, key + " must be a non-negative integer");
  return static_cast<std::size_t>(x);
}

inline std::string text_of(const Value& v, const std::string& key) {
  if (v.type != Value::Type::string) throw value_error(v, key + " must be a string");
  return v.text;
}

inline bool bool_of(const Value& v, const std::string& key) {
  if (v.type != Value::Type::boolean) throw value_error(v, key + " must be true or false");
  return v.boolean;
}

}  // namespace detail

/// Builds a fully resolved SI configuration from a parsed document.
inline RunConfig resolve_config(const Document& doc) {
  using namespace detail;
  const auto& sch = schema();
  for (const auto& [section, table] : doc.sections) {
    const auto it = sch.find(section);
    if (it == sch.end()) {
      const Value* first = table.empty() ? nullptr : &table.begin()->second;
      throw ParseError("unknown section [" + section + "]", first ? first->line : 1, 1);
    }
    for (const auto& [key, value] : table) {
      bool known = false;
      for (const auto& info : it->second) known = known || key == info.name;
      if (!known)
        throw ParseError("unknown key '" + key + "' in [" + section + "]", value.line, 1);
    }
  }

  RunConfig cfg;
  cfg.experiment = presets::base();
  ExperimentSpec& s = cfg.experiment;
  auto find = [&](const std::string& section, const std::string& key) -> const Value* {
    const auto sec = doc.sections.find(section);
    if (sec == doc.sections.end()) return nullptr;
    const auto it = sec->second.find(key);
    return it == sec->second.end() ? nullptr : &it->second;
  };
  auto defaulted = [&](const std::string& section, const std::string& key, const std::string& v) {
    cfg.defaulted[section + "." + key] = v;
  };

  // Scales needed by unit tags come first.
  UnitScales units;
  if (const Value* v = find("atom", "gamma_ac"))
    s.atom.gamma_ac = frequency_of(*v, "atom.gamma_ac", units, false);
  else
    defaulted("atom", "gamma_ac", format_double(s.atom.gamma_ac) + " rad_s");
  if (const Value* v = find("atom", "wavevector")) s.atom.wavevector = number_of(*v, "atom.wavevector");
  else defaulted("atom", "wavevector", format_double(s.atom.wavevector));
  if (const Value* v = find("gas", "mean_velocity")) s.gas.mean_velocity = number_of(*v, "gas.mean_velocity");
  else defaulted("gas", "mean_velocity", format_double(s.gas.mean_velocity));
  units.gamma_ac = s.atom.gamma_ac;
  units.omega_d = s.atom.wavevector * s.gas.mean_velocity;

  auto freq = [&](const std::string& section, const std::string& key, double& target) {
    if (const Value* v = find(section, key)) target = frequency_of(*v, section + "." + key, units);
    else defaulted(section, key, format_double(target) + " rad_s");
  };
  auto num = [&](const std::string& section, const std::string& key, double& target) {
    if (const Value* v = find(section, key)) target = number_of(*v, section + "." + key);
    else defaulted(section, key, format_double(target));
  };
  auto cnt = [&](const std::string& section, const std::string& key, std::size_t& target) {
    if (const Value* v = find(section, key)) target = count_of(*v, section + "." + key);
    else defaulted(section, key, std::to_string(target));
  };
  auto cplx = [&](const std::string& section, const std::string& key, Complex& target) {
    double re = target.real(), im = target.imag();
    freq(section, key, re);
    freq(section, key + "_imag", im);
    target = {re, im};
  };

  if (const Value* v = find("atom", "mass")) s.atom.mass = mass_of(*v, "atom.mass");
  else defaulted("atom", "mass", format_double(s.atom.mass) + " kg");
  freq("atom", "gamma_ab", s.atom.gamma_ab);
  freq("atom", "gamma_bc", s.atom.gamma_bc);
  num("atom", "dipole_moment", s.atom.dipole_moment);
  num("atom", "number_density", s.atom.number_density);
  if (const Value* v = find("atom", "include_recoil")) s.atom.include_recoil = bool_of(*v, "atom.include_recoil");
  else defaulted("atom", "include_recoil", s.atom.include_recoil ? "true" : "false");

  freq("drive", "delta", s.drive.delta);
  freq("drive", "delta_c", s.drive.delta_c);
  cplx("drive", "omega_c", s.drive.omega_c);
  cplx("drive", "omega_plus_in", s.drive.omega_plus_in);
  cplx("drive", "omega_minus_in", s.drive.omega_minus_in);

  num("gas", "temperature", s.gas.temperature);
  num("gas", "pop_a", s.gas.pop_a0);
  num("gas", "pop_b", s.gas.pop_b0);
  num("gas", "pop_c", s.gas.pop_c0);
  num("geometry", "cell_length", s.geometry.cell_length);
  num("geometry", "relative_phase", s.geometry.relative_phase);

  num("numerics", "quad_rel_tol", cfg.quadrature.rel_tol);
  cnt("numerics", "quad_max_nodes", cfg.quadrature.max_nodes);
  num("numerics", "quad_range_sigmas", cfg.quadrature.range_sigmas);
  num("numerics", "quad_resonance_padding", cfg.quadrature.resonance_padding);
  num("numerics", "ode_rel_tol", cfg.ode.rel_tol);
  num("numerics", "ode_abs_tol", cfg.ode.abs_tol);
  cnt("numerics", "ode_max_steps", cfg.ode.max_steps);

  // Task keys are optional and only recorded when present.
  TaskParams& t = cfg.task;
  if (const auto sec = doc.sections.find("task"); sec != doc.sections.end()) {
    for (const auto& [key, v] : sec->second) {
      const std::string name = "task." + key;
      t.present.insert(key);
      if (key == "kind") t.kind = text_of(v, name);
      else if (key == "z_points") t.z_points = count_of(v, name);
      else if (key == "mode") t.mode = text_of(v, name);
      else if (key == "delta_from") t.delta_from = frequency_of(v, name, units);
      else if (key == "delta_to") t.delta_to = frequency_of(v, name, units);
      else if (key == "delta_points") t.delta_points = count_of(v, name);
      else if (key == "axis1") t.axis1 = text_of(v, name);
      else if (key == "axis2") t.axis2 = text_of(v, name);
      else if (key == "axis1_points") t.axis1_points = count_of(v, name);
      else if (key == "axis2_points") t.axis2_points = count_of(v, name);
      else if (key == "z_eval") t.z_eval = number_of(v, name);
      else if (key == "control_values" || key == "velocity_values") {
        if (v.type != Value::Type::array) throw value_error(v, name + " must be an array");
        auto& out = key == "control_values" ? t.control_values : t.velocity_values;
        for (const auto& item : v.items)
          out.push_back(key == "control_values" ? frequency_of(item, name, units)
                                                : number_of(item, name));
      } else if (key == "tau_high") t.tau_high = number_of(v, name);
      else if (key == "tau_low") t.tau_low = number_of(v, name);
      else if (key == "bracket_lo") t.bracket_lo = number_of(v, name);
      else if (key == "bracket_hi") t.bracket_hi = number_of(v, name);
      else if (key == "noise") t.noise = number_of(v, name);
      else if (key == "coarse_points") t.coarse_points = count_of(v, name);
      else if (key == "observation") t.observation = text_of(v, name);
      else if (key == "wavelength") t.wavelength = number_of(v, name);
      else if (key == "delta_omega_c") t.delta_omega_c = frequency_of(v, name, units);
    }
    // Axis bounds depend on the axis quantity: frequencies need a unit tag,
    // velocities (m/s) and positions (m) are bare numbers.
    auto bound = [&](const std::string& key, const std::string& axis, double& target) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) return;
      const bool frequency = axis == "omega_c" || axis == "delta";
      target = frequency ? frequency_of(it->second, "task." + key, units)
                         : number_of(it->second, "task." + key);
    };
    bound("axis1_from", t.axis1, t.axis1_from);
    bound("axis1_to", t.axis1, t.axis1_to);
    bound("axis2_from", t.axis2, t.axis2_from);
    bound("axis2_to", t.axis2, t.axis2_to);
  }
  validate(cfg.experiment);
  validate(cfg.quadrature);
  validate(cfg.ode);
  return cfg;
}

inline RunConfig parse_config(std::string_view text) { return resolve_config(parse_document(text)); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

/// Config text with every value written explicitly in SI units; loading it
/// reproduces the configuration exactly.
inline std::string serialize_config(const RunConfig& cfg) {
  const ExperimentSpec& s = cfg.experiment;
  std::ostringstream o;
  auto f = [](double v) { return "\"" + format_double(v) + " rad_s\""; };
  auto n = [](double v) { return format_double(v); };
  auto c = [&](const std::string& key, Complex v) {
    o << key << " = " << f(v.real()) << "\n";
    if (v.imag() != 0.0) o << key << "_imag = " << f(v.imag()) << "\n";
  };
  o << "[atom]\n";
  o << "mass = \"" << n(s.atom.mass) << " kg\"\n";
  o << "wavevector = " << n(s.atom.wavevector) << "\n";
  o << "gamma_ab = " << f(s.atom.gamma_ab) << "\n";
  o << "gamma_bc = " << f(s.atom.gamma_bc) << "\n";
  o << "gamma_ac = " << f(s.atom.gamma_ac) << "\n";
  o << "dipole_moment = " << n(s.atom.dipole_moment) << "\n";
  o << "number_density = " << n(s.atom.number_density) << "\n";
  o << "include_recoil = " << (s.atom.include_recoil ? "true" : "false") << "\n\n";
  o << "[drive]\n";
  o << "delta = " << f(s.drive.delta) << "\n";
  o << "delta_c = " << f(s.drive.delta_c) << "\n";
  c("omega_c", s.drive.omega_c);
  c("omega_plus_in", s.drive.omega_plus_in);
  c("omega_minus_in", s.drive.omega_minus_in);
  o << "\n[gas]\n";
  o << "temperature = " << n(s.gas.temperature) << "\n";
  o << "mean_velocity = " << n(s.gas.mean_velocity) << "\n";
  o << "pop_a = " << n(s.gas.pop_a0) << "\npop_b = " << n(s.gas.pop_b0)
    << "\npop_c = " << n(s.gas.pop_c0) << "\n\n";
  o << "[geometry]\n";
  o << "cell_length = " << n(s.geometry.cell_length) << "\n";
  o << "relative_phase = " << n(s.geometry.relative_phase) << "\n\n";
  o << "[numerics]\n";
  o << "quad_rel_tol = " << n(cfg.quadrature.rel_tol) << "\n";
  o << "quad_max_nodes = " << cfg.quadrature.max_nodes << "\n";
  o << "quad_range_sigmas = " << n(cfg.quadrature.range_sigmas) << "\n";
  o << "quad_resonance_padding = " << n(cfg.quadrature.resonance_padding) << "\n";
  o << "ode_rel_tol = " << n(cfg.ode.rel_tol) << "\n";
  o << "ode_abs_tol = " << n(cfg.ode.abs_tol) << "\n";
  o << "ode_max_steps = " << cfg.ode.max_steps << "\n";

  const TaskParams& t = cfg.task;
  if (!t.present.empty()) {
    o << "\n[task]\n";
    auto quote = [](const std::string& v) {
      std::string out = "\"";
      for (char ch : v) {
        if (ch == '"' || ch == '\\') out += '\\';
        if (ch == '\n') { out += "\\n"; continue; }
        if (ch == '\t') { out += "\\t"; continue; }
        out += ch;
      }
      return out + "\"";
    };
    auto axis_value = [&](const std::string& axis, double v) {
      return axis == "omega_c" || axis == "delta" ? f(v) : n(v);
    };
    for (const auto& key : t.present) {
      o << key << " = ";
      if (key == "kind") o << quote(t.kind);
      else if (key == "z_points") o << t.z_points;
      else if (key == "mode") o << quote(t.mode);
      else if (key == "delta_from") o << f(t.delta_from);
      else if (key == "delta_to") o << f(t.delta_to);
      else if (key == "delta_points") o << t.delta_points;
      else if (key == "axis1") o << quote(t.axis1);
      else if (key == "axis2") o << quote(t.axis2);
      else if (key == "axis1_from") o << axis_value(t.axis1, t.axis1_from);
      else if (key == "axis1_to") o << axis_value(t.axis1, t.axis1_to);
      else if (key == "axis2_from") o << axis_value(t.axis2, t.axis2_from);
      else if (key == "axis2_to") o << axis_value(t.axis2, t.axis2_to);
      else if (key == "axis1_points") o << t.axis1_points;
      else if (key == "axis2_points") o << t.axis2_points;
      else if (key == "z_eval") o << n(t.z_eval);
      else if (key == "control_values" || key == "velocity_values") {
        const auto& list = key == "control_values" ? t.control_values : t.velocity_values;
        o << "[";
        for (std::size_t i = 0; i < list.size(); ++i)
          o << (i ? ", " : "") << (key == "control_values" ? f(list[i]) : n(list[i]));
        o << "]";
      } else if (key == "tau_high") o << n(t.tau_high);
      else if (key == "tau_low") o << n(t.tau_low);
      else if (key == "bracket_lo") o << n(t.bracket_lo);
      else if (key == "bracket_hi") o << n(t.bracket_hi);
      else if (key == "noise") o << n(t.noise);
      else if (key == "coarse_points") o << t.coarse_points;
      else if (key == "observation") o << quote(t.observation);
      else if (key == "wavelength") o << n(t.wavelength);
      else if (key == "delta_omega_c") o << f(t.delta_omega_c);
      o << "\n";
    }
  }
  return o.str();
}

}  // namespace eitflow::io

#endif
