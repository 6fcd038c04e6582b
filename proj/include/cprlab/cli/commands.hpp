#pragma once

// Subcommands of the cprlab tool:
//   floor     closed-form BER floors over a grid
//   simulate  Monte-Carlo floor measurement next to the closed form
//   link      variance budget and crossover distance of one link
//   presets   list the figure presets
//
// run() is the whole program: it writes results to `out` and diagnostics to
// `err`, and returns the exit status. Output is buffered and emitted only on
// success, so a failing command never leaves a partial CSV behind.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cprlab/cli/config.hpp"
#include "cprlab/cli/csv.hpp"
#include "cprlab/experiments.hpp"
#include "cprlab/noise.hpp"

namespace cprlab::cli {

namespace detail {

inline std::string strip_spaces(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
  return s;
}

/// Flags shared by floor and simulate, captured as text so that only the
/// flags actually given override the config file.
struct ScenarioFlags {
  std::string config, preset, algorithm, order, block_length, block_length_bwa, block_length_vv, mu, sigma2,
      linewidth, tx_linewidth, lo_linewidth, baud, wavelength, dispersion, distance, out;
  CLI::Option *o_config{}, *o_preset{}, *o_algorithm{}, *o_order{}, *o_block_length{}, *o_block_length_bwa{},
      *o_block_length_vv{}, *o_mu{}, *o_sigma2{}, *o_linewidth{}, *o_tx{}, *o_lo{}, *o_baud{}, *o_wavelength{},
      *o_dispersion{}, *o_distance{}, *o_out{};

  void add_link(CLI::App* app) {
    o_linewidth = app->add_option("--linewidth", linewidth, "3-dB linewidth of both lasers, MHz (grid)");
    o_tx = app->add_option("--tx-linewidth", tx_linewidth, "transmitter linewidth, MHz");
    o_lo = app->add_option("--lo-linewidth", lo_linewidth, "local-oscillator linewidth, MHz");
    o_baud = app->add_option("--baud", baud, "symbol rate, Gbaud (default 32)");
    o_wavelength = app->add_option("--wavelength", wavelength, "carrier wavelength, nm (default 1550)");
    o_dispersion = app->add_option("--dispersion", dispersion, "fiber dispersion, ps/nm/km (default 17)");
    o_distance = app->add_option("--distance", distance, "fiber length, km (grid)");
  }

  void add(CLI::App* app) {
    o_config = app->add_option("--config", config, "INI file with [link], [cpr], [sweep], [mc] sections");
    o_preset = app->add_option("--preset", preset, "figure preset (see `cprlab presets`)");
    o_algorithm = app->add_option("--algorithm", algorithm, "nlms, bwa, vv or a comma list");
    o_order = app->add_option("--order", order, "modulation order(s), e.g. 4,8,16,32");
    o_block_length = app->add_option("--block-length", block_length, "block length(s) of BWA and VV");
    o_block_length_bwa = app->add_option("--block-length-bwa", block_length_bwa, "block length of BWA only");
    o_block_length_vv = app->add_option("--block-length-vv", block_length_vv, "block length of VV only (odd)");
    o_mu = app->add_option("--mu", mu, "NLMS step size in (0, 1]; default: optimized");
    o_sigma2 = app->add_option("--sigma2", sigma2, "total phase-noise variance, rad^2 (grid)");
    add_link(app);
    o_out = app->add_option("--out", out, "output file (default: stdout)");
  }

  bool any_variance_flag() const { return o_sigma2->count() || o_linewidth->count() || o_distance->count() || o_tx->count() || o_lo->count(); }

  /// Overlays the given flags onto a config.
  void apply(RunConfig& c) const {
    auto given = [](const CLI::Option* o) { return o && o->count() > 0; };
    if (given(o_sigma2) && (given(o_linewidth) || given(o_distance) || given(o_tx) || given(o_lo)))
      throw UsageError("conflicting variance specifications: --sigma2 cannot be combined with link flags");
    if (given(o_linewidth) && (given(o_tx) || given(o_lo)))
      throw UsageError("conflicting variance specifications: --linewidth sets both lasers; drop --tx-linewidth/--lo-linewidth");
    // A variance given on the command line replaces whatever the file chose.
    if (given(o_sigma2)) {
      c.linewidth_mhz.reset();
      c.distance_km.reset();
      c.tx_linewidth_mhz.reset();
      c.lo_linewidth_mhz.reset();
    }
    if (given(o_linewidth) || given(o_distance) || given(o_tx) || given(o_lo)) c.sigma2.reset();
    if (given(o_linewidth)) {
      c.tx_linewidth_mhz.reset();
      c.lo_linewidth_mhz.reset();
    }
    if (given(o_tx) || given(o_lo)) c.linewidth_mhz.reset();
    if (given(o_preset)) {
      c.sigma2.reset();
      c.linewidth_mhz.reset();
      c.distance_km.reset();
    }

    if (given(o_preset)) c.preset = preset;
    if (given(o_algorithm)) c.algorithm = algorithm;
    if (given(o_order)) c.order = order;
    if (given(o_block_length)) c.block_length = block_length;
    if (given(o_block_length_bwa)) c.block_length_bwa = static_cast<unsigned>(parse_uint(block_length_bwa, "--block-length-bwa"));
    if (given(o_block_length_vv)) c.block_length_vv = static_cast<unsigned>(parse_uint(block_length_vv, "--block-length-vv"));
    if (given(o_mu)) c.mu = parse_double(mu, "--mu");
    if (given(o_sigma2)) c.sigma2 = sigma2;
    if (given(o_linewidth)) c.linewidth_mhz = linewidth;
    if (given(o_tx)) c.tx_linewidth_mhz = parse_double(tx_linewidth, "--tx-linewidth");
    if (given(o_lo)) c.lo_linewidth_mhz = parse_double(lo_linewidth, "--lo-linewidth");
    if (given(o_baud)) c.baud_gbaud = parse_double(baud, "--baud");
    if (given(o_wavelength)) c.wavelength_nm = parse_double(wavelength, "--wavelength");
    if (given(o_dispersion)) c.dispersion_ps_nm_km = parse_double(dispersion, "--dispersion");
    if (given(o_distance)) c.distance_km = distance;
  }

  bool scenario_flag_given() const {
    return o_algorithm->count() || o_order->count() || o_block_length->count() || o_block_length_bwa->count() ||
           o_block_length_vv->count() || o_mu->count() || any_variance_flag();
  }
};

struct McFlags {
  std::string symbols, frames, frame_length, seed, decoding, mode, eepn, sampling, snr, threads;
  CLI::Option *o_symbols{}, *o_frames{}, *o_frame_length{}, *o_seed{}, *o_decoding{}, *o_mode{}, *o_eepn{},
      *o_sampling{}, *o_snr{}, *o_threads{};

  void add(CLI::App* app) {
    o_symbols = app->add_option("--symbols", symbols, "counted symbols per point (>= 1e4; default: auto budget)");
    o_frames = app->add_option("--frames", frames, "frame count per point (overrides the symbol-derived count)");
    o_frame_length = app->add_option("--frame-length", frame_length, "symbols per frame (default 65536)");
    o_seed = app->add_option("--seed", seed, "base seed (default 1)");
    o_decoding = app->add_option("--decoding", decoding, "differential or genie-referenced");
    o_mode = app->add_option("--mode", mode, "analytic, mc or both (default both)");
    o_eepn = app->add_option("--eepn", eepn, "variance-equivalent or physical");
    o_sampling = app->add_option("--sampling", sampling, "auto, plain or importance");
    o_snr = app->add_option("--snr", snr, "Es/N0 in dB (>= 40) or 'noiseless' (default)");
    o_threads = app->add_option("--threads", threads, "worker threads (default: all cores)");
  }

  void apply(RunConfig& c) const {
    if (o_symbols->count()) c.symbols = parse_uint(symbols, "--symbols");
    if (o_frames->count()) c.frames = parse_uint(frames, "--frames");
    if (o_frame_length->count()) c.frame_length = parse_uint(frame_length, "--frame-length");
    if (o_seed->count()) c.seed = parse_uint(seed, "--seed");
    if (o_decoding->count()) c.decoding = parse_decoding(decoding);
    if (o_mode->count()) c.mode = parse_mode(mode);
    if (o_eepn->count()) c.eepn = parse_eepn(eepn);
    if (o_sampling->count()) c.sampling = parse_sampling(sampling);
    if (o_snr->count()) c.snr_db = parse_snr(snr);
    if (o_threads->count()) c.threads = static_cast<unsigned>(parse_uint(threads, "--threads"));
  }
};

inline McSettings mc_settings(const RunConfig& c) {
  McSettings m;
  if (c.symbols) m.symbols = static_cast<std::size_t>(*c.symbols);
  if (c.frames) m.frames = static_cast<std::size_t>(*c.frames);
  m.frame_length = static_cast<std::size_t>(c.frame_length);
  m.seed = c.seed;
  m.decoding = c.decoding;
  m.snr_db = c.snr_db;
  m.eepn = c.eepn;
  m.sampling = c.sampling;
  m.threads = c.threads;
  return m;
}

inline LinkParams base_link(const RunConfig& c, double tx_mhz, double lo_mhz, double km) {
  return LinkParams::from_engineering_units(tx_mhz * 1e6, lo_mhz * 1e6, c.baud_gbaud * 1e9, c.wavelength_nm,
                                            c.dispersion_ps_nm_km, km);
}

/// Builds the sweep described by a resolved config.
inline SweepSpec build_sweep(const RunConfig& c, Mode mode) {
  SweepSpec spec;
  if (c.preset) {
    spec = preset(*c.preset);
  } else {
    const auto algorithms = parse_algorithm_list(c.algorithm);
    const auto orders = parse_uint_list(c.order, "order");
    const auto blocks = parse_uint_list(c.block_length, "block length");
    for (Algorithm a : algorithms)
      for (unsigned n : orders) {
        if (!uses_block_length(a)) {
          spec.series.push_back({a, n, 0, c.mu});
          continue;
        }
        const auto& fixed = a == Algorithm::bwa ? c.block_length_bwa : c.block_length_vv;
        const std::vector<unsigned> list = fixed ? std::vector<unsigned>{*fixed} : blocks;
        for (unsigned b : list) {
          if (a == Algorithm::vv) check_vv_block_length(b);
          spec.series.push_back({a, n, b, std::nullopt});
        }
      }
    // Drop duplicated series (repeated list items) while keeping order.
    std::vector<Series> unique;
    for (const auto& s : spec.series)
      if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(s);
    spec.series = std::move(unique);

    const bool lasers = c.tx_linewidth_mhz || c.lo_linewidth_mhz;
    if (c.sigma2) {
      spec.axis = Axis::variance;
      spec.grid = parse_grid(*c.sigma2, "sigma2");
    } else if (c.linewidth_mhz || c.distance_km || lasers) {
      const auto lw = c.linewidth_mhz ? parse_grid(*c.linewidth_mhz, "linewidth") : std::vector<double>{};
      const auto km = c.distance_km ? parse_grid(*c.distance_km, "distance") : std::vector<double>{0.0};
      if (lw.size() > 1 && km.size() > 1)
        throw UsageError("conflicting variance specifications: only one of --linewidth and --distance may be a grid");
      if (!c.linewidth_mhz && !lasers)
        throw UsageError("a distance sweep needs laser linewidths (--linewidth or --tx-linewidth/--lo-linewidth)");
      if (lw.size() > 1 || (!c.distance_km && c.linewidth_mhz)) {
        spec.axis = Axis::linewidth;
        spec.link = base_link(c, 0.0, 0.0, km.front());
        for (double v : lw) spec.grid.push_back(v * 1e6);
      } else {
        spec.axis = Axis::distance;
        const double tx = lw.empty() ? c.tx_linewidth_mhz.value_or(0.0) : lw.front();
        const double lo = lw.empty() ? c.lo_linewidth_mhz.value_or(0.0) : lw.front();
        spec.link = base_link(c, tx, lo, 0.0);
        for (double v : km) spec.grid.push_back(v * 1e3);
      }
    } else {
      throw UsageError("no phase-noise specification: give --sigma2, --linewidth, --distance or --preset");
    }
  }
  spec.mode = mode;
  spec.mc = mc_settings(c);
  return spec;
}

inline std::string quote_if_needed(const std::string& v) {
  return v.find_first_of(" \t;|&") == std::string::npos ? v : "'" + v + "'";
}

/// Canonical command reproducing a resolved config, plus key=value lines.
struct Echo {
  std::string command;
  std::vector<std::pair<std::string, std::string>> settings;
};

inline Echo echo_config(const RunConfig& c, std::string_view subcommand, bool with_mc) {
  Echo e;
  std::ostringstream cmd;
  cmd << "cprlab " << subcommand;
  auto flag = [&](std::string_view name, const std::string& value, std::string key) {
    cmd << " --" << name << ' ' << quote_if_needed(value);
    e.settings.emplace_back(std::move(key), value);
  };
  if (c.preset) {
    flag("preset", *c.preset, "sweep.preset");
  } else {
    flag("algorithm", strip_spaces(c.algorithm), "cpr.algorithm");
    flag("order", strip_spaces(c.order), "cpr.order");
    flag("block-length", strip_spaces(c.block_length), "cpr.block_length");
    if (c.block_length_bwa) flag("block-length-bwa", std::to_string(*c.block_length_bwa), "cpr.block_length_bwa");
    if (c.block_length_vv) flag("block-length-vv", std::to_string(*c.block_length_vv), "cpr.block_length_vv");
    if (c.mu) flag("mu", format_number(*c.mu), "cpr.mu");
    if (c.sigma2) flag("sigma2", strip_spaces(*c.sigma2), "sweep.sigma2");
    if (c.linewidth_mhz) flag("linewidth", strip_spaces(*c.linewidth_mhz), "link.linewidth_mhz");
    if (c.tx_linewidth_mhz) flag("tx-linewidth", format_number(*c.tx_linewidth_mhz), "link.tx_linewidth_mhz");
    if (c.lo_linewidth_mhz) flag("lo-linewidth", format_number(*c.lo_linewidth_mhz), "link.lo_linewidth_mhz");
    if (c.distance_km) flag("distance", strip_spaces(*c.distance_km), "link.distance_km");
    if (!c.sigma2) {
      flag("baud", format_number(c.baud_gbaud), "link.baud_gbaud");
      flag("wavelength", format_number(c.wavelength_nm), "link.wavelength_nm");
      flag("dispersion", format_number(c.dispersion_ps_nm_km), "link.dispersion_ps_nm_km");
    }
  }
  if (with_mc) {
    flag("mode", std::string(to_string(c.mode)), "sweep.mode");
    if (c.mode != Mode::analytic) {
      if (c.symbols) flag("symbols", std::to_string(*c.symbols), "mc.symbols");
      if (c.frames) flag("frames", std::to_string(*c.frames), "mc.frames");
      flag("frame-length", std::to_string(c.frame_length), "mc.frame_length");
      flag("seed", std::to_string(c.seed), "mc.seed");
      if (c.decoding) flag("decoding", std::string(to_string(*c.decoding)), "mc.decoding");
      flag("snr", c.snr_db ? format_number(*c.snr_db) : std::string("noiseless"), "mc.snr_db");
      flag("eepn", std::string(to_string(c.eepn)), "mc.eepn");
      flag("sampling", std::string(to_string(c.sampling)), "mc.sampling");
    }
  }
  e.command = cmd.str();
  return e;
}

inline void append_axis(std::vector<std::pair<std::string, std::string>>& settings, const SweepSpec& spec) {
  std::string name, values;
  double scale = 1.0;
  switch (spec.axis) {
    case Axis::variance: name = "sigma2_rad2"; break;
    case Axis::linewidth: name = "linewidth_hz"; break;
    case Axis::distance: name = "distance_km"; scale = 1e-3; break;
  }
  for (double x : spec.grid) values += (values.empty() ? "" : ",") + format_number(x * scale);
  if (!spec.description.empty()) settings.emplace_back("description", spec.description);
  settings.emplace_back("axis", name);
  settings.emplace_back("axis_values", values);
  if (spec.axis != Axis::variance) {
    settings.emplace_back("link.symbol_rate_baud", format_number(spec.link.symbol_rate));
    settings.emplace_back("link.wavelength_m", format_number(spec.link.wavelength));
    settings.emplace_back("link.dispersion_s_per_m2", format_number(spec.link.dispersion));
  }
  settings.emplace_back("series", std::to_string(spec.series.size()));
  settings.emplace_back("rows_per_series", std::to_string(spec.grid.size()));
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

inline RunConfig resolve(const ScenarioFlags& sf, const McFlags* mf) {
  RunConfig c;
  if (sf.o_config->count()) c = load_config(sf.config);
  if (c.preset && sf.scenario_flag_given() && !sf.o_preset->count())
    c.preset.reset();  // explicit scenario flags replace a preset chosen in the file
  if (sf.o_preset->count() && sf.scenario_flag_given())
    throw UsageError("--preset fixes algorithms, orders and axes; drop the scenario flags");
  sf.apply(c);
  if (mf) mf->apply(c);
  c.validate();
  return c;
}

}  // namespace detail

inline std::string cmd_floor(const RunConfig& c) {
  SweepSpec spec = detail::build_sweep(c, Mode::analytic);
  const auto rows = run_sweep(spec);
  auto echo = detail::echo_config(c, "floor", false);
  detail::append_axis(echo.settings, spec);
  std::ostringstream os;
  write_header(os, echo.command, echo.settings);
  os << floor_columns << '\n';
  for (const auto& r : rows) write_floor_row(os, r);
  return os.str();
}

inline std::string cmd_simulate(const RunConfig& c) {
  SweepSpec spec = detail::build_sweep(c, c.mode);
  const auto rows = run_sweep(spec);
  auto echo = detail::echo_config(c, "simulate", true);
  detail::append_axis(echo.settings, spec);
  std::ostringstream os;
  write_header(os, echo.command, echo.settings);
  os << simulate_columns << '\n';
  for (const auto& r : rows) write_simulate_row(os, r);
  return os.str();
}

/// Variance budget of one link.
inline std::string cmd_link(const LinkParams& link) {
  link.validate();
  std::ostringstream os;
  auto line = [&](std::string_view key, double v, std::string_view unit) {
    os << std::left << std::setw(22) << key << ' ' << format_number(v) << ' ' << unit << '\n';
  };
  os << "# cprlab " << version << " link report\n";
  line("tx_linewidth", link.delta_f_tx, "Hz");
  line("lo_linewidth", link.delta_f_lo, "Hz");
  line("symbol_rate", link.symbol_rate, "baud");
  line("wavelength", link.wavelength, "m");
  line("dispersion", link.dispersion, "s/m^2");
  line("fiber_length", link.fiber_length, "m");
  line("sigma2_laser", laser_pn_variance(link), "rad^2");
  line("sigma2_eepn", eepn_variance(link), "rad^2");
  line("sigma2_total", total_variance(link), "rad^2");
  line("effective_linewidth", effective_linewidth(link), "Hz");
  if (link.dispersion > 0.0) {
    const double l0 = crossover_distance(link);
    line("crossover_distance", l0, "m [1]");
    os << "\n[1] Fiber length at which the EEPN variance equals the laser phase-noise variance for\n"
          "    equal Tx and LO linewidths, L0 = 8 c T_S^2 / (lambda^2 D) = "
       << std::fixed << std::setprecision(2) << l0 / 1e3
       << " km here.\n"
          "    The value of 60.69 km quoted in the literature for 32 Gbaud, 1550 nm and\n"
          "    17 ps/nm/km does not follow from this expression, which gives 57.35 km for those\n"
          "    parameters.\n";
  } else {
    os << std::left << std::setw(22) << "crossover_distance" << " none (zero dispersion: EEPN never accrues)\n";
  }
  return os.str();
}

inline std::string cmd_presets() {
  std::ostringstream os;
  for (const auto& name : preset_names()) {
    const auto p = preset(name);
    os << std::left << std::setw(8) << name << ' ' << std::setw(10) << to_string(p.axis) << ' ' << std::setw(3)
       << p.series.size() << " series  " << p.description << '\n';
  }
  return os.str();
}

/// Entry point. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cprlab - carrier phase recovery BER-floor laboratory", "cprlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version));

  auto* floor_cmd = app.add_subcommand("floor", "closed-form BER floors over a grid");
  detail::ScenarioFlags floor_flags;
  floor_flags.add(floor_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo BER floors next to the closed form");
  detail::ScenarioFlags sim_flags;
  detail::McFlags mc_flags;
  sim_flags.add(sim_cmd);
  mc_flags.add(sim_cmd);

  auto* link_cmd = app.add_subcommand("link", "phase-noise budget and crossover distance of a link");
  detail::ScenarioFlags link_flags;
  link_flags.add_link(link_cmd);

  auto* presets_cmd = app.add_subcommand("presets", "list figure presets");

  std::vector<const char*> argv{"cprlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help(e.get_name() == "--help" && app.get_subcommands().size() == 1
                        ? app.get_subcommands().front()->get_name()
                        : "");
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun 'cprlab --help' for usage\n";
    return 2;
  }

  try {
    if (floor_cmd->parsed()) {
      const RunConfig c = detail::resolve(floor_flags, nullptr);
      detail::emit(cmd_floor(c), floor_flags.out, out);
    } else if (sim_cmd->parsed()) {
      const RunConfig c = detail::resolve(sim_flags, &mc_flags);
      detail::emit(cmd_simulate(c), sim_flags.out, out);
    } else if (link_cmd->parsed()) {
      auto& f = link_flags;
      const bool both = f.o_linewidth->count() > 0;
      if (both && (f.o_tx->count() || f.o_lo->count()))
        throw UsageError("--linewidth sets both lasers; drop --tx-linewidth/--lo-linewidth");
      if (!both && !(f.o_tx->count() && f.o_lo->count()))
        throw UsageError("link needs --linewidth, or both --tx-linewidth and --lo-linewidth (MHz)");
      if (!f.o_distance->count()) throw UsageError("link needs --distance (km)");
      RunConfig c;
      if (f.o_baud->count()) c.baud_gbaud = parse_double(f.baud, "--baud");
      if (f.o_wavelength->count()) c.wavelength_nm = parse_double(f.wavelength, "--wavelength");
      if (f.o_dispersion->count()) c.dispersion_ps_nm_km = parse_double(f.dispersion, "--dispersion");
      const double tx = parse_double(both ? f.linewidth : f.tx_linewidth, "--tx-linewidth");
      const double lo = parse_double(both ? f.linewidth : f.lo_linewidth, "--lo-linewidth");
      const double km = parse_double(f.distance, "--distance");
      out << cmd_link(detail::base_link(c, tx, lo, km));
    } else if (presets_cmd->parsed()) {
      out << cmd_presets();
    }
  } catch (const std::invalid_argument& e) {
    // Invalid input, whether caught by the front end or by the library.
    err << "error: " << e.what() << "\nrun 'cprlab --help' for usage\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace cprlab::cli
