#pragma once

// Run description shared by the command-line front end and INI config files.
//
// Config files are flat INI with the sections [link], [cpr], [sweep] and
// [mc]; command-line flags override file values. Grids are written as
// comma-separated items, each either a number or an inclusive range
// start:stop:step, e.g. "0.005:0.05:0.005,0.1".

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cprlab/algorithm.hpp"
#include "cprlab/analytics.hpp"
#include "cprlab/experiments.hpp"
#include "cprlab/noise.hpp"

namespace cprlab::cli {

/// Error caused by the user's input; reported with a usage hint.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Locale-independent strict number parse.
inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = detail::trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw UsageError("invalid number '" + s + "' for " + std::string(what));
  return v;
}

inline std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  const std::string s = detail::trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    // Accept integral values written in floating notation, e.g. 1e6.
    const double d = parse_double(s, what);
    if (d < 0.0 || d != std::floor(d) || d > 1.8e19)
      throw UsageError("invalid non-negative integer '" + s + "' for " + std::string(what));
    return static_cast<std::uint64_t>(d);
  }
  return v;
}

/// Expands "a,b,start:stop:step,..." into values.
inline std::vector<double> parse_grid(std::string_view text, std::string_view what) {
  std::vector<double> out;
  if (detail::trim(text).empty()) throw UsageError(std::string(what) + " grid is empty");
  for (const auto& item : detail::split(text, ',')) {
    const auto parts = detail::split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_double(parts[0], what));
    } else if (parts.size() == 3) {
      const double a = parse_double(parts[0], what), b = parse_double(parts[1], what),
                   step = parse_double(parts[2], what);
      if (!(step > 0.0) || b < a) throw UsageError("range '" + item + "' for " + std::string(what) +
                                                   " needs step > 0 and stop >= start");
      const auto g = linear_grid(a, b, step);
      out.insert(out.end(), g.begin(), g.end());
    } else {
      throw UsageError("invalid grid item '" + item + "' for " + std::string(what) +
                       " (expected a number or start:stop:step)");
    }
  }
  return out;
}

inline std::vector<unsigned> parse_uint_list(std::string_view text, std::string_view what) {
  std::vector<unsigned> out;
  for (double v : parse_grid(text, what)) {
    if (v < 1.0 || v != std::floor(v) || v > 1e6)
      throw UsageError("invalid value for " + std::string(what) + ": expected positive integers");
    out.push_back(static_cast<unsigned>(v));
  }
  return out;
}

inline std::vector<Algorithm> parse_algorithm_list(std::string_view text) {
  std::vector<Algorithm> out;
  for (const auto& item : detail::split(text, ',')) out.push_back(parse_algorithm(item));
  return out;
}

/// Every setting a command can take. Grid-valued keys keep their text so the
/// echoed command reproduces exactly the same values.
struct RunConfig {
  // [link]
  std::optional<std::string> linewidth_mhz;  ///< grid; both lasers
  std::optional<double> tx_linewidth_mhz;
  std::optional<double> lo_linewidth_mhz;
  double baud_gbaud = 32.0;
  double wavelength_nm = 1550.0;
  double dispersion_ps_nm_km = 17.0;
  std::optional<std::string> distance_km;  ///< grid

  // [cpr]
  std::string algorithm = "vv";
  std::string order = "4";
  std::string block_length = "11";
  std::optional<unsigned> block_length_bwa;
  std::optional<unsigned> block_length_vv;
  std::optional<double> mu;

  // [sweep]
  std::optional<std::string> preset;
  std::optional<std::string> sigma2;  ///< grid, rad^2
  Mode mode = Mode::both;

  // [mc]
  std::optional<std::uint64_t> symbols;
  std::optional<std::uint64_t> frames;
  std::uint64_t frame_length = 65536;
  std::uint64_t seed = 1;
  std::optional<Decoding> decoding;
  std::optional<double> snr_db;  ///< empty = noiseless
  EepnInjection eepn = EepnInjection::variance_equivalent;
  Sampling sampling = Sampling::automatic;
  unsigned threads = 0;

  /// Checks everything that can be checked without a command context.
  void validate() const {
    for (Algorithm a : parse_algorithm_list(algorithm)) (void)a;
    for (unsigned n : parse_uint_list(order, "order")) Constellation{n};
    parse_uint_list(block_length, "block length");
    if (block_length_vv) check_vv_block_length(*block_length_vv);
    if (block_length_bwa && *block_length_bwa < 1) throw UsageError("N_BWA must be >= 1");
    if (mu && !(*mu > 0.0 && *mu <= 1.0)) throw UsageError("step size mu must lie in (0, 1]");
    if (!(baud_gbaud > 0.0)) throw UsageError("symbol rate must be > 0");
    if (!(wavelength_nm > 0.0)) throw UsageError("wavelength must be > 0");
    if (!(dispersion_ps_nm_km >= 0.0)) throw UsageError("dispersion must be >= 0");
    if (tx_linewidth_mhz && *tx_linewidth_mhz < 0.0) throw UsageError("transmitter linewidth must be >= 0");
    if (lo_linewidth_mhz && *lo_linewidth_mhz < 0.0) throw UsageError("LO linewidth must be >= 0");
    auto nonneg_grid = [](const std::optional<std::string>& g, const char* what) {
      if (!g) return;
      for (double v : parse_grid(*g, what))
        if (v < 0.0) throw UsageError(std::string(what) + " values must be >= 0");
    };
    nonneg_grid(linewidth_mhz, "linewidth");
    nonneg_grid(distance_km, "distance");
    nonneg_grid(sigma2, "sigma2");
    if (preset) (void)cprlab::preset(*preset);
    if (symbols && *symbols < McSettings::min_symbols)
      throw UsageError("Monte-Carlo needs >= 10^4 symbols per point, got " + std::to_string(*symbols));
    if (frames && *frames < 1) throw UsageError("frame count must be >= 1");
    if (frame_length < 64) throw UsageError("frame length must be >= 64 symbols");
    if (snr_db && !(*snr_db >= McSettings::min_snr_db))
      throw UsageError("floor measurement needs a noiseless channel or SNR >= 40 dB");
  }
};

namespace detail {

inline std::optional<double> parse_snr(std::string_view s) {
  const std::string t = trim(s);
  if (t == "noiseless" || t == "inf" || t.empty()) return std::nullopt;
  return parse_double(t, "snr_db");
}

/// Applies one `section.key = value` setting.
inline void set_key(RunConfig& c, const std::string& section, const std::string& key, const std::string& v) {
  const std::string name = section + "." + key;
  if (section == "link") {
    if (key == "linewidth_mhz") c.linewidth_mhz = v;
    else if (key == "tx_linewidth_mhz") c.tx_linewidth_mhz = parse_double(v, name);
    else if (key == "lo_linewidth_mhz") c.lo_linewidth_mhz = parse_double(v, name);
    else if (key == "baud_gbaud") c.baud_gbaud = parse_double(v, name);
    else if (key == "wavelength_nm") c.wavelength_nm = parse_double(v, name);
    else if (key == "dispersion_ps_nm_km") c.dispersion_ps_nm_km = parse_double(v, name);
    else if (key == "distance_km") c.distance_km = v;
    else throw UsageError("unknown config key '" + name + "'");
  } else if (section == "cpr") {
    if (key == "algorithm") c.algorithm = v;
    else if (key == "order") c.order = v;
    else if (key == "block_length") c.block_length = v;
    else if (key == "block_length_bwa") c.block_length_bwa = static_cast<unsigned>(parse_uint(v, name));
    else if (key == "block_length_vv") c.block_length_vv = static_cast<unsigned>(parse_uint(v, name));
    else if (key == "mu") c.mu = parse_double(v, name);
    else throw UsageError("unknown config key '" + name + "'");
  } else if (section == "sweep") {
    if (key == "preset") c.preset = v;
    else if (key == "sigma2") c.sigma2 = v;
    else if (key == "mode") c.mode = parse_mode(v);
    else throw UsageError("unknown config key '" + name + "'");
  } else if (section == "mc") {
    if (key == "symbols") c.symbols = parse_uint(v, name);
    else if (key == "frames") c.frames = parse_uint(v, name);
    else if (key == "frame_length") c.frame_length = parse_uint(v, name);
    else if (key == "seed") c.seed = parse_uint(v, name);
    else if (key == "decoding") c.decoding = parse_decoding(v);
    else if (key == "snr_db") c.snr_db = parse_snr(v);
    else if (key == "eepn") c.eepn = parse_eepn(v);
    else if (key == "sampling") c.sampling = parse_sampling(v);
    else if (key == "threads") c.threads = static_cast<unsigned>(parse_uint(v, name));
    else throw UsageError("unknown config key '" + name + "'");
  } else {
    throw UsageError("unknown config section '[" + section + "]' (expected link, cpr, sweep or mc)");
  }
}

}  // namespace detail

/// Reads an INI file on top of `base` (defaults when omitted) and validates
/// the result. Unknown sections or keys are errors naming them.
inline RunConfig load_config(std::istream& in, RunConfig base = {}) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("config parse error: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw UsageError("config key '" + section + "' must be inside a [link], [cpr], [sweep] or [mc] section");
    for (const auto& [key, value] : body) {
      try {
        detail::set_key(base, section, key, value.data());
      } catch (const UsageError&) {
        throw;
      } catch (const std::exception& e) {
        throw UsageError("config key '" + section + "." + key + "': " + e.what());
      }
    }
  }
  try {
    base.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return load_config(in, std::move(base));
}

}  // namespace cprlab::cli
