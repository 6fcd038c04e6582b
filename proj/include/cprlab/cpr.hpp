#pragma once

// Carrier phase recovery for n-PSK:
//   - one-tap normalized LMS (decision-directed feedback),
//   - block-wise average of the n-th power (feed-forward),
//   - Viterbi-Viterbi sliding n-th power window (feed-forward).
//
// The n-th power estimators leave a 2*pi/n ambiguity; unwrap_ambiguity
// resolves it either against the previous estimate or against a genie track.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cprlab/algorithm.hpp"
#include "cprlab/modem.hpp"

namespace cprlab {

enum class Unwrap { previous_estimate, genie };

inline std::string_view to_string(Unwrap u) {
  return u == Unwrap::genie ? "genie" : "previous-estimate";
}

inline Unwrap parse_unwrap(std::string_view s) {
  if (s == "genie") return Unwrap::genie;
  if (s == "previous-estimate" || s == "previous") return Unwrap::previous_estimate;
  throw std::invalid_argument("unknown unwrap policy '" + std::string(s) +
                              "' (expected previous-estimate or genie)");
}

struct CprConfig {
  Algorithm algorithm = Algorithm::vv;
  double mu = 1.0;                    ///< NLMS step size, (0, 1]
  unsigned block_length_bwa = 11;     ///< N_BWA >= 1
  unsigned block_length_vv = 11;      ///< N_VV, odd
  Unwrap unwrap = Unwrap::previous_estimate;
  std::size_t training_symbols = 500; ///< NLMS genie-decision prefix

  void validate() const {
    if (!(mu > 0.0 && mu <= 1.0))
      throw std::invalid_argument("step size mu must lie in (0, 1], got " + std::to_string(mu));
    if (block_length_bwa < 1) throw std::invalid_argument("N_BWA must be >= 1");
    if (block_length_vv < 1 || block_length_vv % 2 == 0)
      throw std::invalid_argument("N_VV must be odd (got " + std::to_string(block_length_vv) + ")");
  }

  unsigned block_length() const {
    return algorithm == Algorithm::bwa ? block_length_bwa : algorithm == Algorithm::vv ? block_length_vv : 0;
  }
};

struct CprOutput {
  std::vector<double> estimated_phase;  ///< rad, one per symbol
  std::vector<cplx> corrected_symbols;  ///< rx * exp(-j * estimated_phase)

  // NLMS: tap weight w(k) used for symbol k.
  std::vector<cplx> taps;
  // BWA: index of the first symbol of every block.
  std::vector<std::size_t> block_starts;
  // VV: symbols in [full_window_first, full_window_last) saw a full window.
  std::size_t full_window_first = 0;
  std::size_t full_window_last = 0;
};

namespace detail {

inline cplx int_pow(cplx z, unsigned n) {
  cplx result{1.0, 0.0};
  while (n) {
    if (n & 1u) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

// x^n of the unit-normalized sample.
inline cplx nth_power(cplx x, unsigned n) {
  const double mag = std::abs(x);
  if (mag == 0.0) return {0.0, 0.0};
  return int_pow(x / mag, n);
}

inline double nearest_multiple_shift(double value, double target, double step) {
  return value + std::round((target - value) / step) * step;
}

inline void check_rx(std::span<const cplx> rx) {
  if (rx.empty()) throw std::invalid_argument("CPR input is empty");
}

inline void finish(CprOutput& out, std::span<const cplx> rx) {
  out.corrected_symbols.resize(rx.size());
  for (std::size_t k = 0; k < rx.size(); ++k)
    out.corrected_symbols[k] = rx[k] * std::polar(1.0, -out.estimated_phase[k]);
}

}  // namespace detail

/// Resolves the 2*pi/n ambiguity of raw n-th-power estimates.
///   previous_estimate: shift each value by the multiple of `step` closest to
///     the previous output; the first value is referenced to genie[0] when a
///     genie track is supplied, else to 0.
///   genie: shift each value toward genie[k].
inline std::vector<double> unwrap_ambiguity(std::span<const double> raw, Unwrap policy, double step,
                                            std::span<const double> genie = {}) {
  if (!(step > 0.0)) throw std::invalid_argument("unwrap step must be > 0");
  std::vector<double> out(raw.size());
  if (raw.empty()) return out;
  if (policy == Unwrap::genie) {
    if (genie.size() != raw.size())
      throw std::invalid_argument(genie.empty() ? "genie unwrap requires a genie phase track"
                                                : "genie track length does not match estimates");
    for (std::size_t k = 0; k < raw.size(); ++k) out[k] = detail::nearest_multiple_shift(raw[k], genie[k], step);
    return out;
  }
  double prev = genie.empty() ? 0.0 : genie[0];
  for (std::size_t k = 0; k < raw.size(); ++k) {
    out[k] = detail::nearest_multiple_shift(raw[k], prev, step);
    prev = out[k];
  }
  return out;
}

/// One-tap normalized LMS:
///   y(k) = w(k) x(k), e(k) = d(k) - y(k), w(k+1) = w(k) + mu e(k) x*(k)/|x(k)|^2
/// with w(0) = 1. d(k) is the genie symbol tx[k] for the first
/// config.training_symbols symbols when `training` is supplied, and the hard
/// decision on y(k) afterwards. The phase estimate is -arg w(k) made
/// continuous; with the genie policy it is additionally shifted by 2*pi/n
/// multiples toward `genie`.
inline CprOutput nlms(std::span<const cplx> rx, const Constellation& c, const CprConfig& config,
                      std::span<const std::size_t> training = {}, std::span<const double> genie = {}) {
  detail::check_rx(rx);
  config.validate();
  const std::size_t n_train = std::min(training.size(), config.training_symbols);

  CprOutput out;
  out.taps.resize(rx.size());
  out.estimated_phase.resize(rx.size());

  cplx w{1.0, 0.0};
  double prev = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    const cplx x = rx[k];
    const double p = std::norm(x);
    if (p == 0.0) throw std::invalid_argument("NLMS: zero-magnitude sample at index " + std::to_string(k));
    out.taps[k] = w;
    const double est = detail::nearest_multiple_shift(-std::arg(w), prev, 2.0 * std::numbers::pi);
    out.estimated_phase[k] = est;
    prev = est;

    const cplx y = w * x;
    const cplx d = k < n_train ? c.point(training[k]) : c.point(hard_decide(y, c));
    const cplx e = d - y;
    w += config.mu * e * std::conj(x) / p;
  }
  if (config.unwrap == Unwrap::genie)
    out.estimated_phase = unwrap_ambiguity(out.estimated_phase, Unwrap::genie, c.spacing(), genie);
  detail::finish(out, rx);
  return out;
}

/// Block-wise average: every symbol of block q gets (1/n) arg(sum x^n) over
/// the block. A short final block is processed at its actual length.
inline CprOutput bwa(std::span<const cplx> rx, const Constellation& c, const CprConfig& config,
                     std::span<const double> genie = {}) {
  detail::check_rx(rx);
  config.validate();
  const unsigned n = c.order();
  const std::size_t len = config.block_length_bwa;

  CprOutput out;
  std::vector<double> raw(rx.size());
  for (std::size_t start = 0; start < rx.size(); start += len) {
    const std::size_t stop = std::min(rx.size(), start + len);
    cplx sum{0.0, 0.0};
    for (std::size_t p = start; p < stop; ++p) sum += detail::nth_power(rx[p], n);
    const double phi = std::arg(sum) / n;
    for (std::size_t p = start; p < stop; ++p) raw[p] = phi;
    out.block_starts.push_back(start);
  }
  out.estimated_phase = unwrap_ambiguity(raw, config.unwrap, c.spacing(), genie);
  detail::finish(out, rx);
  return out;
}

/// Viterbi-Viterbi: phi(k) = (1/n) arg(sum_{|q| <= (N-1)/2} x^n(k+q)), window
/// truncated at the sequence edges.
inline CprOutput vv(std::span<const cplx> rx, const Constellation& c, const CprConfig& config,
                    std::span<const double> genie = {}) {
  detail::check_rx(rx);
  config.validate();
  const unsigned n = c.order();
  const std::size_t half = (config.block_length_vv - 1) / 2;
  const std::size_t len = rx.size();

  std::vector<cplx> powered(len);
  for (std::size_t k = 0; k < len; ++k) powered[k] = detail::nth_power(rx[k], n);

  std::vector<double> raw(len);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(len - 1, k + half);
    cplx sum{0.0, 0.0};
    for (std::size_t q = lo; q <= hi; ++q) sum += powered[q];
    raw[k] = std::arg(sum) / n;
  }

  CprOutput out;
  out.full_window_first = std::min(half, len);
  out.full_window_last = len > half ? len - half : 0;
  out.estimated_phase = unwrap_ambiguity(raw, config.unwrap, c.spacing(), genie);
  detail::finish(out, rx);
  return out;
}

/// Dispatches on config.algorithm. `tx_indices` feeds the NLMS training prefix.
inline CprOutput run_cpr(std::span<const cplx> rx, const Constellation& c, const CprConfig& config,
                         std::span<const std::size_t> tx_indices = {}, std::span<const double> genie = {}) {
  switch (config.algorithm) {
    case Algorithm::nlms: return nlms(rx, c, config, tx_indices, genie);
    case Algorithm::bwa: return bwa(rx, c, config, genie);
    case Algorithm::vv: return vv(rx, c, config, genie);
  }
  throw std::invalid_argument("unknown algorithm");
}

/// The true phase smoothed the way each estimator smooths it (linearized):
/// exponential average with weight mu for NLMS (starting from the w(0) = 1
/// state), block mean for BWA, truncated window mean for VV. Used as the
/// genie reference for genie-referenced decoding: a symbol then errs only
/// when the true phase leaves the decision sector around this reference,
/// which is the event the closed-form floors count.
inline std::vector<double> estimator_reference(std::span<const double> true_phase, const CprConfig& config) {
  const std::size_t len = true_phase.size();
  std::vector<double> ref(len);
  switch (config.algorithm) {
    case Algorithm::nlms: {
      double est = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        ref[k] = est;
        est += config.mu * (true_phase[k] - est);
      }
      break;
    }
    case Algorithm::bwa: {
      const std::size_t blk = config.block_length_bwa;
      for (std::size_t start = 0; start < len; start += blk) {
        const std::size_t stop = std::min(len, start + blk);
        double acc = 0.0;
        for (std::size_t p = start; p < stop; ++p) acc += true_phase[p];
        for (std::size_t p = start; p < stop; ++p) ref[p] = acc / static_cast<double>(stop - start);
      }
      break;
    }
    case Algorithm::vv: {
      const std::size_t half = (config.block_length_vv - 1) / 2;
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t lo = k >= half ? k - half : 0;
        const std::size_t hi = std::min(len - 1, k + half);
        double acc = 0.0;
        for (std::size_t q = lo; q <= hi; ++q) acc += true_phase[q];
        ref[k] = acc / static_cast<double>(hi - lo + 1);
      }
      break;
    }
  }
  return ref;
}

}  // namespace cprlab
