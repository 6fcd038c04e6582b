#pragma once

// Symbol-rate model of the EEPN signal path: fiber chromatic dispersion,
// LO phase rotation, AWGN and electronic dispersion compensation.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cprlab/detail/fft.hpp"
#include "cprlab/detail/seed.hpp"
#include "cprlab/modem.hpp"
#include "cprlab/noise.hpp"

namespace cprlab {

/// Coefficient K of the all-pass CD response H(w) = exp(j K w^2), s^2.
inline double cd_coefficient(const LinkParams& link) {
  const double lam = link.wavelength;
  return lam * lam * link.dispersion * link.fiber_length / (4.0 * std::numbers::pi * speed_of_light);
}

/// Width of the group-delay spread across the symbol-rate band, s.
inline double group_delay_spread(const LinkParams& link) {
  const double lam = link.wavelength;
  return lam * lam * link.dispersion * link.fiber_length * link.symbol_rate / speed_of_light;
}

/// Symbols discarded at each frame edge to hide cyclic-convolution wrap-around.
inline std::size_t cd_guard_symbols(const LinkParams& link) {
  return static_cast<std::size_t>(std::ceil(2.0 * group_delay_spread(link) * link.symbol_rate));
}

/// Applies the fiber CD response (inverse=false) or its conjugate, the EDC
/// filter (inverse=true), by whole-frame cyclic convolution at one sample per
/// symbol.
inline std::vector<cplx> apply_cd(std::span<const cplx> samples, const LinkParams& link, bool inverse) {
  if (samples.empty()) throw std::invalid_argument("apply_cd: empty input");
  link.validate();
  const double k = cd_coefficient(link);
  if (k == 0.0) return {samples.begin(), samples.end()};

  auto spec = detail::fft(samples);
  const std::size_t n = samples.size();
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    // fftfreq ordering: bins above n/2 are negative frequencies.
    const double bin = i < (n + 1) / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    const double w = 2.0 * std::numbers::pi * bin * link.symbol_rate / static_cast<double>(n);
    spec[i] *= std::polar(1.0, sign * k * w * w);
  }
  return detail::ifft(spec);
}

/// Sample-wise rotation by exp(j*phi(k)).
inline std::vector<cplx> apply_phase(std::span<const cplx> samples, std::span<const double> phases) {
  if (samples.size() != phases.size())
    throw std::invalid_argument("apply_phase: " + std::to_string(samples.size()) + " samples vs " +
                                std::to_string(phases.size()) + " phases");
  std::vector<cplx> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) out[k] = samples[k] * std::polar(1.0, phases[k]);
  return out;
}

inline std::vector<cplx> apply_phase(std::span<const cplx> samples, const PhaseTrack& track) {
  return apply_phase(samples, std::span<const double>(track.phases));
}

inline double mean_power(std::span<const cplx> samples) {
  double acc = 0.0;
  for (cplx s : samples) acc += std::norm(s);
  return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
}

/// Adds circular complex Gaussian noise at the given per-symbol SNR (Es/N0, dB)
/// relative to the measured signal power. std::nullopt means noiseless.
inline std::vector<cplx> add_awgn(std::span<const cplx> samples, std::optional<double> snr_db,
                                  std::uint64_t seed) {
  std::vector<cplx> out(samples.begin(), samples.end());
  if (!snr_db) return out;
  if (!std::isfinite(*snr_db)) throw std::invalid_argument("add_awgn: SNR must be finite");
  const double noise_power = mean_power(samples) / std::pow(10.0, *snr_db / 10.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(noise_power / 2.0));
  for (auto& s : out) {
    const double re = g(rng);
    const double im = g(rng);
    s += cplx{re, im};
  }
  return out;
}

/// Es/N0 -> Eb/N0 for n-PSK.
inline double esn0_to_ebn0_db(double esn0_db, unsigned order) {
  return esn0_db - 10.0 * std::log10(std::log2(static_cast<double>(order)));
}

/// Physical EEPN path: Tx phase -> fiber CD -> AWGN -> LO phase -> EDC.
/// The Tx phase sees net-zero dispersion; the LO phase sees the full EDC
/// response. rx_symbols of the returned frame hold the post-EDC samples and
/// true_phase holds tx_track + lo_track.
inline SymbolFrame eepn_path(const SymbolFrame& frame, const LinkParams& link, const PhaseTrack& tx_track,
                             const PhaseTrack& lo_track, std::optional<double> snr_db, std::uint64_t seed) {
  if (tx_track.size() != frame.size() || lo_track.size() != frame.size())
    throw std::invalid_argument("eepn_path: phase tracks must match frame length " +
                                std::to_string(frame.size()));
  auto s = apply_phase(frame.tx_symbols, tx_track);
  s = apply_cd(s, link, false);
  s = add_awgn(s, snr_db, seed);
  s = apply_phase(s, lo_track);
  s = apply_cd(s, link, true);

  SymbolFrame out = frame;
  out.rx_symbols = std::move(s);
  out.true_phase.phases.resize(frame.size());
  for (std::size_t k = 0; k < frame.size(); ++k)
    out.true_phase.phases[k] = tx_track.phases[k] + lo_track.phases[k];
  out.true_phase.increment_variance = tx_track.increment_variance + lo_track.increment_variance;
  out.true_phase.seed = tx_track.seed;
  return out;
}

}  // namespace cprlab
