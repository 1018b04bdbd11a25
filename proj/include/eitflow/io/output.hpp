#ifndef EITFLOW_IO_OUTPUT_HPP
#define EITFLOW_IO_OUTPUT_HPP

// Deterministic text serialization of results and atomic file writes.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "eitflow/error.hpp"
#include "eitflow/io/config.hpp"
#include "eitflow/model.hpp"

namespace eitflow::io {

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a hash as 16 lowercase hex digits.
inline std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Column-oriented table; numbers use the shortest round-trip form.
class CsvTable {
 public:
  using Cell = std::variant<double, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row) {
    if (row.size() != header_.size()) throw Error(ErrorKind::validation, "csv row width mismatch");
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        if (const double* d = std::get_if<double>(&row[i])) out += format_double(*d);
        else out += std::get<std::string>(row[i]);
      }
      out += '\n';
    }
    return out;
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Finite values as numbers, non-finite ones as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json complex_json(Complex v) { return Json{{"re", number(v.real())}, {"im", number(v.imag())}}; }

/// Resolved experiment in SI units.
inline Json experiment_si(const ExperimentSpec& s) {
  return Json{
      {"atom",
       {{"mass_kg", s.atom.mass},
        {"wavevector_rad_m", s.atom.wavevector},
        {"gamma_ab_rad_s", s.atom.gamma_ab},
        {"gamma_bc_rad_s", s.atom.gamma_bc},
        {"gamma_ac_rad_s", s.atom.gamma_ac},
        {"dipole_moment_C_m", s.atom.dipole_moment},
        {"number_density_m3", s.atom.number_density},
        {"include_recoil", s.atom.include_recoil}}},
      {"drive",
       {{"delta_rad_s", s.drive.delta},
        {"delta_c_rad_s", s.drive.delta_c},
        {"omega_c_rad_s", complex_json(s.drive.omega_c)},
        {"omega_plus_in_rad_s", complex_json(s.drive.omega_plus_in)},
        {"omega_minus_in_rad_s", complex_json(s.drive.omega_minus_in)}}},
      {"gas",
       {{"temperature_K", s.gas.temperature},
        {"mean_velocity_m_s", s.gas.mean_velocity},
        {"pop_a", s.gas.pop_a0},
        {"pop_b", s.gas.pop_b0},
        {"pop_c", s.gas.pop_c0}}},
      {"geometry",
       {{"cell_length_m", s.geometry.cell_length},
        {"relative_phase_rad", s.geometry.relative_phase}}},
  };
}

/// Frequencies of the experiment in units of gamma_ac, plus derived scales.
inline Json experiment_normalized(const ExperimentSpec& s) {
  const double g = s.atom.gamma_ac;
  const DerivedScales d = derived_scales(s);
  return Json{
      {"gamma_ab", s.atom.gamma_ab / g},
      {"gamma_bc", s.atom.gamma_bc / g},
      {"delta", s.drive.delta / g},
      {"delta_c", s.drive.delta_c / g},
      {"omega_c", complex_json(s.drive.omega_c / g)},
      {"omega_plus_in", complex_json(s.drive.omega_plus_in / g)},
      {"omega_minus_in", complex_json(s.drive.omega_minus_in / g)},
      {"omega_D", d.omega_D / g},
      {"omega_r", d.omega_r / g},
      {"rabi_tilde", complex_json(d.rabi_tilde / g)},
      {"kappa_g_over_gamma_ac_per_m", d.kappa_g / g},
  };
}

inline Json quadrature_json(const QuadratureSpec& q) {
  return Json{{"range_sigmas", q.range_sigmas},
              {"rel_tol", q.rel_tol},
              {"max_nodes", q.max_nodes},
              {"resonance_padding", q.resonance_padding}};
}

inline Json ode_json(const OdeSpec& o) {
  return Json{{"rel_tol", o.rel_tol}, {"abs_tol", o.abs_tol}, {"max_steps", o.max_steps}};
}

/// Writes through a temporary sibling and renames it into place.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::validation, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::validation, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::validation, "cannot rename into '" + path.string() + "'");
  }
}

}  // namespace eitflow::io

#endif
