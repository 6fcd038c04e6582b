#pragma once

// Phase-noise variance models for a coherent link and a discrete Wiener
// phase generator. All quantities are SI internally; unit conversion happens
// only in LinkParams::from_engineering_units.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cprlab {

inline constexpr double speed_of_light = 2.99792458e8;  // m/s

namespace units {

/// ps/(nm*km) -> s/m^2
constexpr double ps_per_nm_km_to_si(double d) { return d * 1e-6; }
constexpr double si_to_ps_per_nm_km(double d) { return d * 1e6; }
constexpr double km_to_m(double l) { return l * 1e3; }
constexpr double m_to_km(double l) { return l * 1e-3; }
constexpr double nm_to_m(double l) { return l * 1e-9; }
constexpr double m_to_nm(double l) { return l * 1e9; }

}  // namespace units

/// Physical description of a dispersion-unmanaged coherent link.
struct LinkParams {
  double delta_f_tx = 0.0;      ///< transmitter 3-dB linewidth, Hz
  double delta_f_lo = 0.0;      ///< local-oscillator 3-dB linewidth, Hz
  double symbol_rate = 32e9;    ///< baud
  double wavelength = 1550e-9;  ///< m
  double dispersion = 17e-6;    ///< s/m^2 (17 ps/nm/km)
  double fiber_length = 0.0;    ///< m

  double symbol_period() const { return 1.0 / symbol_rate; }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const {
    auto bad = [](const char* what) { throw std::invalid_argument(what); };
    if (!(delta_f_tx >= 0.0)) bad("transmitter linewidth must be >= 0");
    if (!(delta_f_lo >= 0.0)) bad("LO linewidth must be >= 0");
    if (!(symbol_rate > 0.0) || !std::isfinite(symbol_rate)) bad("symbol rate must be > 0");
    if (!(wavelength > 0.0) || !std::isfinite(wavelength)) bad("wavelength must be > 0");
    if (!(dispersion >= 0.0)) bad("dispersion must be >= 0");
    if (!(fiber_length >= 0.0)) bad("fiber length must be >= 0");
  }

  /// Builds a link from the units used on datasheets:
  /// Hz, baud, nm, ps/nm/km, km.
  static LinkParams from_engineering_units(double tx_hz, double lo_hz, double baud,
                                           double wavelength_nm, double d_ps_nm_km,
                                           double length_km) {
    LinkParams p;
    p.delta_f_tx = tx_hz;
    p.delta_f_lo = lo_hz;
    p.symbol_rate = baud;
    p.wavelength = units::nm_to_m(wavelength_nm);
    p.dispersion = units::ps_per_nm_km_to_si(d_ps_nm_km);
    p.fiber_length = units::km_to_m(length_km);
    p.validate();
    return p;
  }
};

/// Per-symbol phase-noise variance of the two free-running lasers, rad^2.
inline double laser_pn_variance(const LinkParams& link) {
  return 2.0 * std::numbers::pi * (link.delta_f_tx + link.delta_f_lo) * link.symbol_period();
}

/// Variance of the equalization-enhanced phase noise created when the LO phase
/// noise passes through the dispersion-compensating filter, rad^2.
inline double eepn_variance(const LinkParams& link) {
  const double lam = link.wavelength;
  return std::numbers::pi * lam * lam * link.dispersion * link.fiber_length * link.delta_f_lo /
         (2.0 * speed_of_light * link.symbol_period());
}

inline double total_variance(const LinkParams& link) {
  return laser_pn_variance(link) + eepn_variance(link);
}

/// Linewidth whose pure laser phase noise would equal total_variance, Hz.
inline double effective_linewidth(const LinkParams& link) {
  return total_variance(link) / (2.0 * std::numbers::pi * link.symbol_period());
}

/// Fiber length at which EEPN equals the laser phase noise for equal
/// Tx and LO linewidths, m.
inline double crossover_distance(const LinkParams& link) {
  if (!(link.dispersion > 0.0))
    throw std::domain_error("no crossover (EEPN never accrues): dispersion is zero");
  const double ts = link.symbol_period();
  const double lam = link.wavelength;
  return 8.0 * speed_of_light * ts * ts / (lam * lam * link.dispersion);
}

/// One realization of a cumulative Wiener phase, one sample per symbol.
struct PhaseTrack {
  std::vector<double> phases;
  double increment_variance = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return phases.size(); }
};

/// phases[0] = initial_phase, phases[k] = phases[k-1] + N(0, increment_variance).
/// Bit-identical for a given seed within one build.
inline PhaseTrack generate_wiener_phase(std::size_t n_symbols, double increment_variance,
                                        std::uint64_t seed, double initial_phase = 0.0) {
  if (n_symbols < 1) throw std::invalid_argument("phase track needs at least one symbol");
  if (!(increment_variance >= 0.0) || !std::isfinite(increment_variance))
    throw std::invalid_argument("increment variance must be finite and >= 0");

  PhaseTrack track;
  track.increment_variance = increment_variance;
  track.seed = seed;
  track.phases.resize(n_symbols);
  track.phases[0] = initial_phase;
  if (increment_variance == 0.0) {
    std::fill(track.phases.begin(), track.phases.end(), initial_phase);
    return track;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, std::sqrt(increment_variance));
  for (std::size_t k = 1; k < n_symbols; ++k) track.phases[k] = track.phases[k - 1] + step(rng);
  return track;
}

}  // namespace cprlab
