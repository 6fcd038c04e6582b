#pragma once

// CSV emission: '#'-prefixed metadata header, fixed column sets, numbers in
// their shortest exact round-trip form independent of the C++ locale.

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cprlab/experiments.hpp"

namespace cprlab::cli {

inline constexpr std::string_view version = "1.0.0";

inline constexpr std::string_view floor_columns = "algorithm,n,sigma2_total,block_length,ber_floor";

inline constexpr std::string_view simulate_columns =
    "algorithm,n,block_length,mu,sigma2_total,tx_linewidth_hz,lo_linewidth_hz,symbol_rate_baud,distance_km,"
    "decoding,eepn,analytic_floor,mc_floor,ci_low,ci_high,errors,symbols,seed,below_resolution,estimator";

/// Shortest text that parses back to the same double, "." as decimal point.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::optional<double> v) { return v ? format_number(*v) : std::string(); }

/// Writes the metadata block: tool/version, the command that reproduces the
/// file, then one "# key=value" line per resolved setting.
inline void write_header(std::ostream& out, std::string_view command,
                         const std::vector<std::pair<std::string, std::string>>& settings) {
  out << "# cprlab " << version << '\n';
  out << "# command: " << command << '\n';
  for (const auto& [k, v] : settings) out << "# " << k << '=' << v << '\n';
}

inline void write_floor_row(std::ostream& out, const FloorResult& r) {
  const auto& s = r.scenario;
  out << to_string(s.algorithm) << ',' << s.order << ',' << format_number(r.sigma2) << ',';
  if (uses_block_length(s.algorithm)) out << s.block_length;
  out << ',' << format_number(r.analytic_floor) << '\n';
}

inline void write_simulate_row(std::ostream& out, const FloorResult& r) {
  const auto& s = r.scenario;
  out << to_string(s.algorithm) << ',' << s.order << ',';
  if (uses_block_length(s.algorithm)) out << s.block_length;
  out << ',';
  if (s.algorithm == Algorithm::nlms && (r.has_mc || s.mu)) out << format_number(r.mu);
  out << ',' << format_number(r.sigma2) << ',';
  if (s.link) {
    out << format_number(s.link->delta_f_tx) << ',' << format_number(s.link->delta_f_lo) << ','
        << format_number(s.link->symbol_rate) << ',' << format_number(s.link->fiber_length / 1e3) << ',';
  } else {
    out << ",,,,";
  }
  if (r.has_mc) {
    out << to_string(r.decoding) << ',' << to_string(r.eepn) << ',';
  } else {
    out << ",,";
  }
  out << format_number(r.analytic_floor) << ',';
  if (r.has_mc) {
    out << format_number(r.mc_floor) << ',' << format_number(r.ci_low) << ',' << format_number(r.ci_high) << ','
        << r.bit_errors << ',' << r.symbols << ',' << r.seed << ',' << (r.below_resolution ? 1 : 0) << ','
        << (r.importance_sampled ? "importance" : "plain");
  } else {
    out << ",,,,,,,";
  }
  out << '\n';
}

}  // namespace cprlab::cli
