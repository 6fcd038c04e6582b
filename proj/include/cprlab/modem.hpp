#pragma once

// n-PSK constellations with Gray labels, optional differential coding and
// symbol/bit error counting.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cprlab/noise.hpp"

namespace cprlab {

using cplx = std::complex<double>;

enum class Coding { absolute, differential };

inline constexpr std::uint32_t gray_encode(std::uint32_t m) { return m ^ (m >> 1); }

inline constexpr std::uint32_t gray_decode(std::uint32_t g) {
  std::uint32_t m = g;
  for (std::uint32_t s = g >> 1; s != 0; s >>= 1) m ^= s;
  return m;
}

/// n equally spaced unit points at 2*pi*m/n (offset 0), Gray labelled.
class Constellation {
 public:
  explicit Constellation(unsigned order) : order_(order) {
    if (order < 2 || order > 1024 || !std::has_single_bit(order))
      throw std::invalid_argument("PSK order must be a power of two in [2, 1024], got " +
                                  std::to_string(order));
    bits_ = static_cast<unsigned>(std::countr_zero(order));
    points_.reserve(order);
    for (unsigned m = 0; m < order; ++m) points_.push_back(std::polar(1.0, m * spacing()));
  }

  unsigned order() const { return order_; }
  unsigned bits_per_symbol() const { return bits_; }
  double spacing() const { return 2.0 * std::numbers::pi / order_; }

  cplx point(std::size_t m) const { return points_[m % order_]; }
  std::span<const cplx> points() const { return points_; }

  std::uint32_t label(std::size_t m) const { return gray_encode(static_cast<std::uint32_t>(m % order_)); }
  std::size_t index_of_label(std::uint32_t label) const { return gray_decode(label) % order_; }

 private:
  unsigned order_;
  unsigned bits_;
  std::vector<cplx> points_;
};

/// Index of the point nearest in angle to `sample`. Exact boundary samples
/// (within 1e-12 rad) go to the lower index.
inline std::size_t hard_decide(cplx sample, const Constellation& c) {
  if (sample == cplx{0.0, 0.0}) throw std::invalid_argument("hard decision on a zero sample");
  const unsigned n = c.order();
  double t = std::atan2(sample.imag(), sample.real()) / c.spacing();
  if (t < 0.0) t += n;
  double base = std::floor(t);
  const double frac = t - base;
  auto lo = static_cast<std::size_t>(base) % n;
  auto hi = (lo + 1) % n;
  constexpr double tie_tol = 1e-12;
  if (std::abs(frac - 0.5) * c.spacing() <= tie_tol) return std::min(lo, hi);
  return frac < 0.5 ? lo : hi;
}

/// Transmitted and received views of one frame. In differential mode
/// tx_indices[0] is a reference symbol carrying no data, so
/// size() == bits.size() / bits_per_symbol + 1.
struct SymbolFrame {
  unsigned order = 4;
  Coding coding = Coding::absolute;
  std::vector<std::uint8_t> bits;
  std::vector<std::size_t> tx_indices;
  std::vector<cplx> tx_symbols;
  std::vector<cplx> rx_symbols;
  PhaseTrack true_phase;

  std::size_t size() const { return tx_symbols.size(); }
  /// Index of the first symbol carrying data.
  std::size_t first_data_symbol() const { return coding == Coding::differential ? 1 : 0; }
};

inline SymbolFrame modulate(std::span<const std::uint8_t> bits, const Constellation& c,
                            Coding coding = Coding::absolute) {
  const unsigned k = c.bits_per_symbol();
  if (bits.size() % k != 0)
    throw std::invalid_argument("bit count " + std::to_string(bits.size()) +
                                " is not a multiple of " + std::to_string(k));
  SymbolFrame f;
  f.order = c.order();
  f.coding = coding;
  f.bits.assign(bits.begin(), bits.end());

  const std::size_t n_data = bits.size() / k;
  const std::size_t n_sym = n_data + (coding == Coding::differential ? 1 : 0);
  f.tx_indices.reserve(n_sym);
  if (coding == Coding::differential) f.tx_indices.push_back(0);

  std::size_t state = 0;
  for (std::size_t s = 0; s < n_data; ++s) {
    std::uint32_t label = 0;
    for (unsigned b = 0; b < k; ++b) label = (label << 1) | (bits[s * k + b] & 1u);
    const std::size_t m = c.index_of_label(label);
    if (coding == Coding::differential) {
      state = (state + m) % c.order();
      f.tx_indices.push_back(state);
    } else {
      f.tx_indices.push_back(m);
    }
  }
  f.tx_symbols.reserve(n_sym);
  for (std::size_t m : f.tx_indices) f.tx_symbols.push_back(c.point(m));
  f.rx_symbols = f.tx_symbols;
  f.true_phase.phases.assign(n_sym, 0.0);
  return f;
}

/// Recovers the data indices (Gray-decoded symbol values) from absolute
/// decisions. Differential frames yield one fewer value than decisions.
inline std::vector<std::size_t> data_indices(std::span<const std::size_t> decisions, unsigned order,
                                             Coding coding) {
  std::vector<std::size_t> out;
  if (coding == Coding::absolute) {
    out.assign(decisions.begin(), decisions.end());
    return out;
  }
  if (decisions.empty()) return out;
  out.reserve(decisions.size() - 1);
  for (std::size_t k = 1; k < decisions.size(); ++k)
    out.push_back((decisions[k] + order - decisions[k - 1] % order) % order);
  return out;
}

inline std::vector<std::uint8_t> demodulate(std::span<const std::size_t> decisions,
                                            const Constellation& c, Coding coding) {
  const unsigned k = c.bits_per_symbol();
  std::vector<std::uint8_t> bits;
  for (std::size_t m : data_indices(decisions, c.order(), coding)) {
    const std::uint32_t label = c.label(m);
    for (unsigned b = 0; b < k; ++b) bits.push_back(static_cast<std::uint8_t>((label >> (k - 1 - b)) & 1u));
  }
  return bits;
}

/// Hard-decides every sample.
inline std::vector<std::size_t> decide_all(std::span<const cplx> samples, const Constellation& c) {
  std::vector<std::size_t> d;
  d.reserve(samples.size());
  for (cplx s : samples) d.push_back(hard_decide(s, c));
  return d;
}

struct ErrorCounts {
  std::size_t symbol_errors = 0;
  std::size_t bit_errors = 0;
  std::size_t symbols = 0;
  std::size_t bits = 0;

  double ser() const { return symbols ? static_cast<double>(symbol_errors) / symbols : 0.0; }
  double ber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }

  ErrorCounts& operator+=(const ErrorCounts& o) {
    symbol_errors += o.symbol_errors;
    bit_errors += o.bit_errors;
    symbols += o.symbols;
    bits += o.bits;
    return *this;
  }
};

/// Bit errors attributed to each symbol position of the frame. Differential
/// frames compare the decoded phase increments, so position 0 (the reference)
/// is always 0 and a single cycle slip costs one data symbol.
inline std::vector<unsigned> bit_errors_per_symbol(const SymbolFrame& frame,
                                                   std::span<const std::size_t> decisions) {
  if (decisions.size() != frame.size())
    throw std::invalid_argument("decision count " + std::to_string(decisions.size()) +
                                " does not match frame length " + std::to_string(frame.size()));
  const unsigned n = frame.order;
  std::vector<unsigned> errs(frame.size(), 0);
  for (std::size_t k = frame.first_data_symbol(); k < frame.size(); ++k) {
    std::size_t tx = frame.tx_indices[k];
    std::size_t rx = decisions[k] % n;
    if (frame.coding == Coding::differential) {
      tx = (tx + n - frame.tx_indices[k - 1]) % n;
      rx = (rx + n - decisions[k - 1] % n) % n;
    }
    errs[k] = static_cast<unsigned>(std::popcount(gray_encode(static_cast<std::uint32_t>(tx)) ^
                                                  gray_encode(static_cast<std::uint32_t>(rx))));
  }
  return errs;
}

/// Error counts over data symbols with position in [first, last).
inline ErrorCounts count_errors(const SymbolFrame& frame, std::span<const std::size_t> decisions,
                                std::size_t first, std::size_t last) {
  const auto errs = bit_errors_per_symbol(frame, decisions);
  const unsigned k = std::countr_zero(frame.order);
  ErrorCounts out;
  first = std::max(first, frame.first_data_symbol());
  last = std::min(last, frame.size());
  for (std::size_t i = first; i < last; ++i) {
    out.symbols += 1;
    out.bits += k;
    out.bit_errors += errs[i];
    out.symbol_errors += errs[i] ? 1 : 0;
  }
  return out;
}

inline ErrorCounts count_errors(const SymbolFrame& frame, std::span<const std::size_t> decisions) {
  return count_errors(frame, decisions, 0, frame.size());
}

/// Uniform random bits, seed-deterministic.
inline std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed) {
  std::vector<std::uint8_t> bits(count);
  std::mt19937_64 rng(seed);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
  return bits;
}

}  // namespace cprlab
