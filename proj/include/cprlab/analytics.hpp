#pragma once

// Closed-form BER floors of the three CPR algorithms, the ideal hard-decision
// coding rate and spectral efficiency, and per-symbol complexity counts.
//
// Every floor has a log-domain twin (log_floor_*) that keeps its relative
// accuracy far below the double range; the linear versions underflow to 0
// once the floor drops under ~1e-308.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cprlab/algorithm.hpp"

namespace cprlab {

namespace detail {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double log2_order(unsigned order) {
  if (order < 2) throw std::invalid_argument("modulation order must be >= 2");
  return std::log2(static_cast<double>(order));
}

// log(sum(exp(v))) over finite entries; -inf if none.
inline double log_sum_exp(const std::vector<double>& v) {
  double m = neg_inf;
  for (double x : v) m = std::max(m, x);
  if (m == neg_inf) return neg_inf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace detail

/// Natural log of erfc(x). Uses the asymptotic expansion above x = 10 so the
/// result stays accurate where erfc itself underflows (x > ~26.5).
inline double log_erfc(double x) {
  if (std::isnan(x)) return x;
  if (x <= 10.0) return std::log(std::erfc(x));
  if (std::isinf(x)) return detail::neg_inf;
  // erfc(x) = exp(-x^2)/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return -x * x - std::log(x * std::sqrt(std::numbers::pi)) + std::log(sum);
}

/// Complementary error function; 0 in the +infinity limit. std::erfc is
/// used while its result is a normal double.
inline double erfc(double x) {
  if (x <= 26.0) return std::erfc(x);
  return std::exp(log_erfc(x));
}

/// Query for one analytic floor point.
struct FloorQuery {
  Algorithm algorithm = Algorithm::nlms;
  unsigned order = 4;
  double sigma2 = 0.0;         ///< total (effective) phase-noise variance, rad^2
  unsigned block_length = 11;  ///< N_BWA or N_VV; ignored for NLMS
};

/// Variance of the BWA estimation error at block position p (1-based).
inline double bwa_symbol_variance(unsigned p, unsigned block_length, double sigma2) {
  if (block_length < 1) throw std::invalid_argument("block length must be >= 1");
  if (p < 1 || p > block_length)
    throw std::out_of_range("block position " + std::to_string(p) + " outside [1, " +
                            std::to_string(block_length) + "]");
  const double a = p - 1.0;
  const double b = static_cast<double>(block_length) - p;
  const double n = block_length;
  return sigma2 * (2 * a * a * a + 3 * a * a + 2 * b * b * b + 3 * b * b + n - 1) / (6 * n * n);
}

/// Variance factor (N^2 - 1)/(6N) of the VV floor.
inline double vv_variance_factor(unsigned block_length) {
  const double n = block_length;
  return (n * n - 1.0) / (6.0 * n);
}

inline void check_vv_block_length(unsigned block_length) {
  if (block_length < 1 || block_length % 2 == 0)
    throw std::invalid_argument("N_VV must be odd (got " + std::to_string(block_length) + ")");
}

inline void check_sigma2(double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("phase-noise variance must be finite and >= 0");
}

inline double log_floor_nlms(unsigned order, double sigma2) {
  check_sigma2(sigma2);
  const double l2 = detail::log2_order(order);
  if (sigma2 == 0.0) return detail::neg_inf;
  const double arg = std::numbers::pi / (order * std::numbers::sqrt2 * std::sqrt(sigma2));
  return log_erfc(arg) - std::log(l2);
}

inline double log_floor_bwa(unsigned order, unsigned block_length, double sigma2) {
  check_sigma2(sigma2);
  const double l2 = detail::log2_order(order);
  if (block_length < 1) throw std::invalid_argument("N_BWA must be >= 1");
  std::vector<double> terms;
  terms.reserve(block_length);
  for (unsigned p = 1; p <= block_length; ++p) {
    const double v = bwa_symbol_variance(p, block_length, sigma2);
    if (v <= 0.0) continue;
    terms.push_back(log_erfc(std::numbers::pi / (order * std::numbers::sqrt2 * std::sqrt(v))));
  }
  const double s = detail::log_sum_exp(terms);
  return s == detail::neg_inf ? s : s - std::log(block_length * l2);
}

inline double log_floor_vv(unsigned order, unsigned block_length, double sigma2) {
  check_sigma2(sigma2);
  check_vv_block_length(block_length);
  const double l2 = detail::log2_order(order);
  const double f = vv_variance_factor(block_length);
  if (sigma2 == 0.0 || f == 0.0) return detail::neg_inf;
  const double arg = std::numbers::pi / (order * std::sqrt(f) * std::sqrt(sigma2));
  return log_erfc(arg) - std::log(l2);
}

inline double floor_nlms(unsigned order, double sigma2) {
  check_sigma2(sigma2);
  const double l2 = detail::log2_order(order);
  if (sigma2 == 0.0) return 0.0;
  return erfc(std::numbers::pi / (order * std::numbers::sqrt2 * std::sqrt(sigma2))) / l2;
}

inline double floor_bwa(unsigned order, unsigned block_length, double sigma2) {
  check_sigma2(sigma2);
  const double l2 = detail::log2_order(order);
  if (block_length < 1) throw std::invalid_argument("N_BWA must be >= 1");
  double acc = 0.0;
  for (unsigned p = 1; p <= block_length; ++p) {
    const double v = bwa_symbol_variance(p, block_length, sigma2);
    if (v > 0.0) acc += erfc(std::numbers::pi / (order * std::numbers::sqrt2 * std::sqrt(v)));
  }
  return acc / (block_length * l2);
}

inline double floor_vv(unsigned order, unsigned block_length, double sigma2) {
  check_sigma2(sigma2);
  check_vv_block_length(block_length);
  const double l2 = detail::log2_order(order);
  const double f = vv_variance_factor(block_length);
  if (sigma2 == 0.0 || f == 0.0) return 0.0;
  return erfc(std::numbers::pi / (order * std::sqrt(f) * std::sqrt(sigma2))) / l2;
}

/// NLMS floor parameterized by an effective linewidth (Hz) and symbol period (s).
inline double floor_nlms_from_linewidth(unsigned order, double effective_linewidth, double symbol_period) {
  return floor_nlms(order, 2.0 * std::numbers::pi * effective_linewidth * symbol_period);
}

inline double log_analytic_floor(const FloorQuery& q) {
  switch (q.algorithm) {
    case Algorithm::nlms: return log_floor_nlms(q.order, q.sigma2);
    case Algorithm::bwa: return log_floor_bwa(q.order, q.block_length, q.sigma2);
    case Algorithm::vv: return log_floor_vv(q.order, q.block_length, q.sigma2);
  }
  throw std::invalid_argument("unknown algorithm");
}

inline double analytic_floor(const FloorQuery& q) {
  switch (q.algorithm) {
    case Algorithm::nlms: return floor_nlms(q.order, q.sigma2);
    case Algorithm::bwa: return floor_bwa(q.order, q.block_length, q.sigma2);
    case Algorithm::vv: return floor_vv(q.order, q.block_length, q.sigma2);
  }
  throw std::invalid_argument("unknown algorithm");
}

/// Argument of the erfc that dominates the floor: the smallest one over the
/// positions that contribute. Larger means a deeper floor.
inline double dominant_erfc_argument(const FloorQuery& q) {
  const double inf = std::numeric_limits<double>::infinity();
  if (q.sigma2 <= 0.0) return inf;
  const double base = std::numbers::pi / (q.order * std::numbers::sqrt2);
  switch (q.algorithm) {
    case Algorithm::nlms: return base / std::sqrt(q.sigma2);
    case Algorithm::bwa: {
      double vmax = 0.0;
      for (unsigned p = 1; p <= q.block_length; ++p)
        vmax = std::max(vmax, bwa_symbol_variance(p, q.block_length, q.sigma2));
      return vmax > 0.0 ? base / std::sqrt(vmax) : inf;
    }
    case Algorithm::vv: {
      const double f = vv_variance_factor(q.block_length);
      return f > 0.0 ? std::numbers::pi / (q.order * std::sqrt(f * q.sigma2)) : inf;
    }
  }
  return inf;
}

/// Ideal hard-decision code rate of a binary symmetric channel.
inline double coding_rate(double ber) {
  if (!(ber >= 0.0 && ber <= 1.0)) throw std::invalid_argument("BER must lie in [0, 1]");
  auto xlog2x = [](double p) { return p > 0.0 ? p * std::log2(p) : 0.0; };
  return 1.0 + xlog2x(ber) + xlog2x(1.0 - ber);
}

/// bits per symbol after ideal hard-decision FEC.
inline double spectral_efficiency(double ber, unsigned order, unsigned polarizations) {
  if (order < 2) throw std::invalid_argument("modulation order must be >= 2");
  if (polarizations != 1 && polarizations != 2)
    throw std::invalid_argument("polarization count must be 1 or 2");
  return coding_rate(ber) * polarizations * std::log2(static_cast<double>(order));
}

/// Complex multiplications per recovered symbol.
inline unsigned complexity(Algorithm a, unsigned order) {
  switch (a) {
    case Algorithm::nlms: return 5;
    case Algorithm::bwa:
    case Algorithm::vv: return order;
  }
  return 0;
}

}  // namespace cprlab
