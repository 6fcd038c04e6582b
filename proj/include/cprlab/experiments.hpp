#pragma once

// Monte-Carlo BER-floor measurement and named parameter sweeps.
//
// A point is simulated as independent frames (default 2^16 symbols) with
// fresh phase tracks; every frame draws its generators from
// derive_seed(base, {point, frame, stream}), so results do not depend on the
// thread schedule. Frames are reduced in index order.
//
// Deep floors (fewer than ~100 expected errors inside the symbol cap) are
// measured by importance sampling: the Wiener increments are drawn with a
// standard deviation inflated by beta and every counted symbol is weighted by
// the likelihood ratio of the increments it depends on. That dependency span
// is finite for the feed-forward estimators and for NLMS with mu = 1, which
// are the only cases where the biased estimator is used.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "cprlab/algorithm.hpp"
#include "cprlab/analytics.hpp"
#include "cprlab/channel.hpp"
#include "cprlab/cpr.hpp"
#include "cprlab/cpr_optimize.hpp"
#include "cprlab/detail/seed.hpp"
#include "cprlab/modem.hpp"
#include "cprlab/noise.hpp"

namespace cprlab {

/// How decisions are turned into counted errors.
///   differential: differentially coded data, errors counted on decoded increments.
///   genie_referenced: absolute decisions; the n-fold ambiguity of every
///     estimate is resolved against the estimator-matched average of the true
///     phase (see estimator_reference).
enum class Decoding { differential, genie_referenced };

/// How phase noise enters a Monte-Carlo frame.
///   variance_equivalent: one Wiener track with the total per-symbol variance.
///   physical: Tx and LO tracks through the fiber CD / EDC signal path.
enum class EepnInjection { variance_equivalent, physical };

enum class Sampling { automatic, plain, importance };

enum class Mode { analytic, montecarlo, both };

enum class Axis { variance, linewidth, distance };

inline std::string_view to_string(Decoding d) {
  return d == Decoding::differential ? "differential" : "genie-referenced";
}
inline std::string_view to_string(EepnInjection e) {
  return e == EepnInjection::physical ? "physical" : "variance-equivalent";
}
inline std::string_view to_string(Sampling s) {
  switch (s) {
    case Sampling::automatic: return "auto";
    case Sampling::plain: return "plain";
    case Sampling::importance: return "importance";
  }
  return "?";
}
inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::analytic: return "analytic";
    case Mode::montecarlo: return "mc";
    case Mode::both: return "both";
  }
  return "?";
}
inline std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::variance: return "variance";
    case Axis::linewidth: return "linewidth";
    case Axis::distance: return "distance";
  }
  return "?";
}

inline Decoding parse_decoding(std::string_view s) {
  if (s == "differential") return Decoding::differential;
  if (s == "genie-referenced" || s == "genie") return Decoding::genie_referenced;
  throw std::invalid_argument("unknown decoding '" + std::string(s) +
                              "' (expected differential or genie-referenced)");
}
inline EepnInjection parse_eepn(std::string_view s) {
  if (s == "variance-equivalent") return EepnInjection::variance_equivalent;
  if (s == "physical") return EepnInjection::physical;
  throw std::invalid_argument("unknown EEPN injection '" + std::string(s) +
                              "' (expected variance-equivalent or physical)");
}
inline Sampling parse_sampling(std::string_view s) {
  if (s == "auto") return Sampling::automatic;
  if (s == "plain") return Sampling::plain;
  if (s == "importance") return Sampling::importance;
  throw std::invalid_argument("unknown sampling '" + std::string(s) + "' (expected auto, plain or importance)");
}
inline Mode parse_mode(std::string_view s) {
  if (s == "analytic") return Mode::analytic;
  if (s == "mc" || s == "montecarlo") return Mode::montecarlo;
  if (s == "both") return Mode::both;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected analytic, mc or both)");
}

/// Default decoding per algorithm: NLMS runs differentially (its natural
/// mode; the decision-directed loop slips otherwise), the n-th power
/// estimators are referenced to the estimator-matched genie.
inline Decoding default_decoding(Algorithm a) {
  return a == Algorithm::nlms ? Decoding::differential : Decoding::genie_referenced;
}

/// One operating point.
struct Scenario {
  Algorithm algorithm = Algorithm::vv;
  unsigned order = 4;
  unsigned block_length = 11;      ///< N_BWA or N_VV; ignored for NLMS
  std::optional<double> mu;        ///< NLMS step size; empty = optimize_mu
  double sigma2 = 0.0;             ///< total variance when `link` is empty
  std::optional<LinkParams> link;  ///< when set, the variance follows from the link

  double total_variance() const { return link ? cprlab::total_variance(*link) : sigma2; }

  FloorQuery query() const { return {algorithm, order, total_variance(), block_length}; }

  void validate() const {
    Constellation{order};
    if (link) link->validate();
    else check_sigma2(sigma2);
    if (algorithm == Algorithm::vv) check_vv_block_length(block_length);
    if (algorithm == Algorithm::bwa && block_length < 1) throw std::invalid_argument("N_BWA must be >= 1");
    if (mu && !(*mu > 0.0 && *mu <= 1.0)) throw std::invalid_argument("step size mu must lie in (0, 1]");
  }
};

struct McSettings {
  std::optional<std::size_t> symbols;  ///< counted symbols per point; empty = auto budget
  std::optional<std::size_t> frames;   ///< overrides the frame count derived from symbols
  std::size_t frame_length = 65536;
  std::uint64_t seed = 1;
  std::optional<Decoding> decoding;    ///< empty = default_decoding(algorithm)
  std::optional<double> snr_db;        ///< Es/N0; empty = noiseless
  EepnInjection eepn = EepnInjection::variance_equivalent;
  Sampling sampling = Sampling::automatic;
  std::size_t training_symbols = 500;  ///< NLMS genie-decision prefix, not counted
  unsigned threads = 0;                ///< 0 = hardware concurrency

  static constexpr std::size_t min_symbols = 10000;
  static constexpr std::size_t min_auto_symbols = 1000000;
  static constexpr std::size_t max_auto_symbols = 100000000;
  static constexpr double min_snr_db = 40.0;

  void validate() const {
    if (symbols && *symbols < min_symbols)
      throw std::invalid_argument("Monte-Carlo needs >= 10^4 symbols per point, got " + std::to_string(*symbols));
    if (frames && *frames < 1) throw std::invalid_argument("frame count must be >= 1");
    if (frame_length < 64) throw std::invalid_argument("frame length must be >= 64 symbols");
    if (snr_db && !(*snr_db >= min_snr_db))
      throw std::invalid_argument("floor measurement needs a noiseless channel or SNR >= 40 dB");
  }
};

struct FloorResult {
  Scenario scenario;
  double sigma2 = 0.0;
  double mu = 0.0;  ///< step size actually used (NLMS), else 0
  double axis_value = 0.0;
  Axis axis = Axis::variance;

  double analytic_floor = 0.0;
  double log_analytic_floor = 0.0;

  bool has_mc = false;
  Decoding decoding = Decoding::differential;
  EepnInjection eepn = EepnInjection::variance_equivalent;
  double mc_floor = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t bit_errors = 0;  ///< raw (unweighted) bit errors
  std::uint64_t bits = 0;
  std::uint64_t symbols = 0;
  std::uint64_t frames = 0;
  bool below_resolution = false;
  double resolution = 0.0;  ///< 1/(counted bits)
  bool importance_sampled = false;
  double bias = 1.0;  ///< increment std inflation used by importance sampling
  double effective_errors = 0.0;
  std::uint64_t seed = 0;
  double runtime_s = 0.0;
};

namespace detail {

struct FramePartial {
  std::uint64_t symbols = 0;
  std::uint64_t bits = 0;
  std::uint64_t raw_errors = 0;
  double weighted = 0.0;     ///< sum of w * errors / log2 n over counted symbols
  double weighted_sq = 0.0;  ///< sum of (w * errors / log2 n)^2
};

/// Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(double k, double n, double z = 1.96) {
  if (n <= 0.0) return {0.0, 1.0};
  const double p = k / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Increments (index i joins symbol i-1 to i) that decide the error count of
/// symbol k, as the closed interval [first, last]; nullopt if unbounded.
inline std::optional<std::pair<std::size_t, std::size_t>> dependency_span(
    Algorithm a, unsigned block_length, double mu, Decoding decoding, std::size_t k, std::size_t len) {
  auto clamp = [&](long lo, long hi) {
    lo = std::max(lo, 1L);
    hi = std::min(hi, static_cast<long>(len) - 1);
    return std::pair<std::size_t, std::size_t>{static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo - 1, hi))};
  };
  const long kk = static_cast<long>(k);
  switch (a) {
    case Algorithm::nlms:
      if (mu != 1.0) return std::nullopt;
      return clamp(kk, kk);
    case Algorithm::vv: {
      const long h = static_cast<long>((block_length - 1) / 2);
      return decoding == Decoding::genie_referenced ? clamp(kk - h + 1, kk + h) : clamp(kk - h, kk + h);
    }
    case Algorithm::bwa: {
      const long n = block_length;
      const long start = (kk / n) * n;
      const long stop = start + n - 1;
      if (decoding == Decoding::differential && kk == start && start > 0) return clamp(start - n + 1, stop);
      return clamp(start + 1, stop);
    }
  }
  return std::nullopt;
}

/// Number of increments in a typical (interior) dependency span.
inline std::size_t span_size(Algorithm a, unsigned block_length, Decoding decoding) {
  switch (a) {
    case Algorithm::nlms: return 1;
    case Algorithm::vv: return block_length - (decoding == Decoding::genie_referenced ? 1 : 0);
    case Algorithm::bwa: return std::max(1u, block_length - 1);
  }
  return 1;
}

}  // namespace detail

/// Noiseless optimized NLMS step size for a variance (1e5-symbol probe).
inline double optimized_mu(unsigned order, double sigma2, std::uint64_t seed) {
  MuScenario s;
  s.order = order;
  s.sigma2 = sigma2;
  s.seed = seed;
  const auto grid = mu_grid();
  return optimize_mu(s, grid);
}

/// Counted symbol positions [first, last) of a frame.
struct CountedRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

inline CountedRange counted_range(const Scenario& s, const McSettings& m, Decoding decoding, std::size_t len) {
  std::size_t first = decoding == Decoding::differential ? 1 : 0;
  std::size_t last = len;
  if (s.algorithm == Algorithm::nlms) first = std::max(first, m.training_symbols);
  if (s.algorithm == Algorithm::vv) {
    const std::size_t h = (s.block_length - 1) / 2;
    first = std::max(first, h + (decoding == Decoding::differential ? 1 : 0));
    last = len > h ? len - h : 0;
  }
  if (m.eepn == EepnInjection::physical && s.link) {
    const std::size_t g = cd_guard_symbols(*s.link);
    first = std::max(first, g);
    last = len > g ? std::min(last, len - g) : 0;
  }
  return {first, std::max(first, last)};
}

/// Measures the BER floor of one scenario by Monte-Carlo simulation and pairs
/// it with the closed-form floor.
inline FloorResult measure_floor(const Scenario& scenario, const McSettings& settings,
                                 std::size_t point_index = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  scenario.validate();
  settings.validate();
  if (settings.eepn == EepnInjection::physical && !scenario.link)
    throw std::invalid_argument("physical EEPN injection needs link parameters");

  FloorResult r;
  r.scenario = scenario;
  r.sigma2 = scenario.total_variance();
  r.analytic_floor = analytic_floor(scenario.query());
  r.log_analytic_floor = log_analytic_floor(scenario.query());
  r.has_mc = true;
  r.decoding = settings.decoding.value_or(default_decoding(scenario.algorithm));
  r.eepn = settings.eepn;
  r.seed = settings.seed;

  const Constellation c(scenario.order);
  const unsigned bps = c.bits_per_symbol();
  const Decoding decoding = r.decoding;

  CprConfig cfg;
  cfg.algorithm = scenario.algorithm;
  cfg.block_length_bwa = scenario.algorithm == Algorithm::bwa ? scenario.block_length : 11;
  cfg.block_length_vv = scenario.algorithm == Algorithm::vv ? scenario.block_length : 11;
  cfg.training_symbols = settings.training_symbols;
  cfg.unwrap = decoding == Decoding::genie_referenced ? Unwrap::genie : Unwrap::previous_estimate;
  if (scenario.algorithm == Algorithm::nlms)
    cfg.mu = scenario.mu ? *scenario.mu
                         : optimized_mu(scenario.order, r.sigma2, detail::derive_seed(settings.seed, {point_index, 0x6d75}));
  r.mu = scenario.algorithm == Algorithm::nlms ? cfg.mu : 0.0;

  // Importance-sampling decision.
  const bool is_possible = settings.eepn == EepnInjection::variance_equivalent && r.sigma2 > 0.0 &&
                           detail::dependency_span(scenario.algorithm, scenario.block_length, cfg.mu, decoding,
                                                   settings.frame_length / 2, settings.frame_length)
                               .has_value();
  // Plain budget: 100 / floor symbols, i.e. 100 expected errored symbols
  // (at least as many bit errors).
  const double plain_needed =
      r.analytic_floor > 0.0 ? 100.0 / r.analytic_floor : std::numeric_limits<double>::infinity();
  bool use_is = false;
  switch (settings.sampling) {
    case Sampling::plain: break;
    case Sampling::importance:
      if (!is_possible)
        throw std::invalid_argument("importance sampling needs variance-equivalent injection, a nonzero variance "
                                    "and a finite dependency span (NLMS requires mu = 1)");
      use_is = true;
      break;
    case Sampling::automatic:
      use_is = is_possible && r.analytic_floor > 0.0 && plain_needed > static_cast<double>(McSettings::max_auto_symbols);
      break;
  }

  double beta = 1.0;
  if (use_is) {
    const double arg0 = dominant_erfc_argument(scenario.query());
    const double cap = 1.0 + 2.0 / std::sqrt(static_cast<double>(detail::span_size(scenario.algorithm,
                                                                                   scenario.block_length, decoding)));
    beta = std::clamp(arg0 / 2.5, 1.0, cap);
  }
  r.importance_sampled = use_is;
  r.bias = beta;

  // Symbol budget.
  std::size_t target;
  if (settings.symbols) {
    target = *settings.symbols;
  } else {
    double needed = plain_needed;
    if (use_is) {
      FloorQuery biased = scenario.query();
      biased.sigma2 *= beta * beta;
      const double fb = analytic_floor(biased);
      needed = fb > 0.0 ? 400.0 / (fb * bps) : needed;
    }
    needed = std::clamp(needed, static_cast<double>(McSettings::min_auto_symbols),
                        static_cast<double>(McSettings::max_auto_symbols));
    target = static_cast<std::size_t>(std::ceil(needed));
  }

  // Frame geometry.
  std::size_t frame_len = settings.frame_length;
  {
    const auto probe = counted_range(scenario, settings, decoding, frame_len);
    const std::size_t overhead = frame_len - (probe.last - probe.first);
    if (!settings.frames && target + overhead < frame_len) frame_len = target + overhead;
    const auto again = counted_range(scenario, settings, decoding, frame_len);
    if (again.last <= again.first)
      throw std::invalid_argument("frame of " + std::to_string(frame_len) +
                                  " symbols leaves nothing to count after guards");
  }
  const auto range = counted_range(scenario, settings, decoding, frame_len);
  const std::size_t per_frame = range.last - range.first;
  const std::size_t n_frames = settings.frames ? *settings.frames : (target + per_frame - 1) / per_frame;

  const double sigma_inc2 = r.sigma2 * beta * beta;
  const double log_ratio_const = std::log(beta);
  const double inv2s = r.sigma2 > 0.0 ? 1.0 / (2.0 * r.sigma2) : 0.0;
  const double inv2sb = r.sigma2 > 0.0 ? 1.0 / (2.0 * sigma_inc2) : 0.0;
  const Coding coding = decoding == Decoding::differential ? Coding::differential : Coding::absolute;

  auto run_frame = [&](std::size_t f) {
    detail::FramePartial part;
    auto sd = [&](std::uint64_t stream) { return detail::derive_seed(settings.seed, {point_index, f, stream}); };
    const std::size_t data_syms = frame_len - (coding == Coding::differential ? 1 : 0);
    auto bits = random_bits(data_syms * bps, sd(1));
    SymbolFrame frame = modulate(bits, c, coding);

    std::vector<double> phases;
    if (settings.eepn == EepnInjection::physical) {
      const LinkParams& link = *scenario.link;
      const double ts = link.symbol_period();
      auto tx = generate_wiener_phase(frame_len, 2.0 * std::numbers::pi * link.delta_f_tx * ts, sd(2));
      auto lo = generate_wiener_phase(frame_len, 2.0 * std::numbers::pi * link.delta_f_lo * ts, sd(3));
      frame = eepn_path(frame, link, tx, lo, settings.snr_db, sd(4));
      phases = frame.true_phase.phases;
    } else {
      auto track = generate_wiener_phase(frame_len, sigma_inc2, sd(2));
      frame.rx_symbols = add_awgn(apply_phase(frame.tx_symbols, track), settings.snr_db, sd(4));
      phases = std::move(track.phases);
    }

    std::vector<double> genie;
    if (decoding == Decoding::genie_referenced) genie = estimator_reference(phases, cfg);
    const auto out = run_cpr(frame.rx_symbols, c, cfg, frame.tx_indices, genie);
    const auto decisions = decide_all(out.corrected_symbols, c);
    const auto errs = bit_errors_per_symbol(frame, decisions);

    // Prefix sums of per-increment log likelihood ratios.
    std::vector<double> prefix;
    if (use_is) {
      prefix.assign(frame_len, 0.0);
      for (std::size_t i = 1; i < frame_len; ++i) {
        const double g = phases[i] - phases[i - 1];
        prefix[i] = prefix[i - 1] + log_ratio_const - g * g * inv2s + g * g * inv2sb;
      }
    }
    for (std::size_t k = range.first; k < range.last; ++k) {
      part.symbols += 1;
      part.bits += bps;
      const unsigned e = errs[k];
      part.raw_errors += e;
      if (e == 0) continue;
      double w = 1.0;
      if (use_is) {
        const auto span =
            detail::dependency_span(scenario.algorithm, scenario.block_length, cfg.mu, decoding, k, frame_len);
        if (span->second >= span->first) w = std::exp(prefix[span->second] - prefix[span->first - 1]);
      }
      const double z = w * e / bps;
      part.weighted += z;
      part.weighted_sq += z * z;
    }
    return part;
  };

  std::vector<detail::FramePartial> partials(n_frames);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(settings.threads ? settings.threads : hw, n_frames));
  if (n_threads <= 1) {
    for (std::size_t f = 0; f < n_frames; ++f) partials[f] = run_frame(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(n_threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t f = next++; f < n_frames; f = next++) partials[f] = run_frame(f);
        } catch (...) {
          failures[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : failures)
      if (e) std::rethrow_exception(e);
  }

  detail::FramePartial total;
  for (const auto& p : partials) {
    total.symbols += p.symbols;
    total.bits += p.bits;
    total.raw_errors += p.raw_errors;
    total.weighted += p.weighted;
    total.weighted_sq += p.weighted_sq;
  }
  r.symbols = total.symbols;
  r.bits = total.bits;
  r.frames = n_frames;
  r.bit_errors = total.raw_errors;
  r.resolution = 1.0 / static_cast<double>(total.bits);

  if (use_is) {
    const double n = static_cast<double>(total.symbols);
    const double est = total.weighted / n;
    const double var = std::max(0.0, total.weighted_sq / n - est * est) / n;
    const double se = std::sqrt(var);
    r.mc_floor = est;
    r.ci_low = std::max(0.0, est - 1.96 * se);
    r.ci_high = est + 1.96 * se;
    r.effective_errors = se > 0.0 ? est * est / var : 0.0;
  } else {
    r.mc_floor = static_cast<double>(total.raw_errors) / static_cast<double>(total.bits);
    std::tie(r.ci_low, r.ci_high) =
        detail::wilson_interval(static_cast<double>(total.raw_errors), static_cast<double>(total.bits));
    r.effective_errors = static_cast<double>(total.raw_errors);
  }
  r.below_resolution = total.raw_errors == 0;
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Closed-form-only result for a scenario.
inline FloorResult analytic_result(const Scenario& scenario) {
  scenario.validate();
  FloorResult r;
  r.scenario = scenario;
  r.sigma2 = scenario.total_variance();
  r.analytic_floor = analytic_floor(scenario.query());
  r.log_analytic_floor = log_analytic_floor(scenario.query());
  r.mu = scenario.algorithm == Algorithm::nlms ? scenario.mu.value_or(0.0) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// EEPN signal-path measurement

struct EepnMeasurement {
  double fiber_length = 0.0;     ///< m
  double phase_variance = 0.0;   ///< var of arg(rx conj(tx) e^{-j lo}), rad^2
  double error_power = 0.0;      ///< mean |rx e^{-j lo} - tx|^2
  double amplitude_variance = 0.0;  ///< var of |rx| - 1
  double predicted = 0.0;        ///< eepn_variance(link)
  std::uint64_t symbols = 0;
};

/// Runs the physical signal path with a zero Tx phase and a noiseless channel
/// and measures the error left after removing the modulation and the LO phase
/// at the symbol instant. Frame edges within the CD guard are discarded.
inline EepnMeasurement measure_eepn(const LinkParams& link, std::size_t symbols, std::uint64_t seed,
                                    std::size_t frame_length = 65536) {
  link.validate();
  const std::size_t guard = cd_guard_symbols(link);
  if (frame_length <= 2 * guard + 1)
    throw std::invalid_argument("frame too short for the dispersion guard of " + std::to_string(guard) + " symbols");
  const Constellation c(4);
  const std::size_t per_frame = frame_length - 2 * guard;
  const std::size_t n_frames = std::max<std::size_t>(1, (symbols + per_frame - 1) / per_frame);
  const double lo_var = 2.0 * std::numbers::pi * link.delta_f_lo * link.symbol_period();

  double sum_phase = 0.0, sum_phase2 = 0.0, sum_err = 0.0, sum_amp = 0.0, sum_amp2 = 0.0;
  std::uint64_t count = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    auto bits = random_bits(frame_length * c.bits_per_symbol(), detail::derive_seed(seed, {f, 1}));
    auto frame = modulate(bits, c);
    PhaseTrack tx;
    tx.phases.assign(frame_length, 0.0);
    auto lo = generate_wiener_phase(frame_length, lo_var, detail::derive_seed(seed, {f, 2}));
    auto out = eepn_path(frame, link, tx, lo, std::nullopt, 0);
    for (std::size_t k = guard; k < frame_length - guard; ++k) {
      const cplx derot = out.rx_symbols[k] * std::polar(1.0, -lo.phases[k]);
      const double ph = std::arg(derot * std::conj(frame.tx_symbols[k]));
      const double amp = std::abs(derot) - 1.0;
      sum_phase += ph;
      sum_phase2 += ph * ph;
      sum_amp += amp;
      sum_amp2 += amp * amp;
      sum_err += std::norm(derot - frame.tx_symbols[k]);
      ++count;
    }
  }
  EepnMeasurement m;
  const double n = static_cast<double>(count);
  m.fiber_length = link.fiber_length;
  m.phase_variance = sum_phase2 / n - (sum_phase / n) * (sum_phase / n);
  m.amplitude_variance = sum_amp2 / n - (sum_amp / n) * (sum_amp / n);
  m.error_power = sum_err / n;
  m.predicted = eepn_variance(link);
  m.symbols = count;
  return m;
}

// ---------------------------------------------------------------------------
// Sweeps

/// One curve of a sweep.
struct Series {
  Algorithm algorithm = Algorithm::nlms;
  unsigned order = 4;
  unsigned block_length = 11;
  std::optional<double> mu;

  bool operator==(const Series&) const = default;
};

struct SweepSpec {
  std::string preset;  ///< empty for custom sweeps
  std::string description;
  Axis axis = Axis::variance;
  std::vector<double> grid;  ///< rad^2, Hz (both lasers) or m
  std::vector<Series> series;
  LinkParams link;  ///< base link for linewidth and distance axes
  Mode mode = Mode::analytic;
  McSettings mc;

  void validate() const {
    if (grid.empty()) throw std::invalid_argument("sweep axis grid is empty");
    if (series.empty()) throw std::invalid_argument("sweep has no series (algorithm/order/block length)");
    for (double x : grid)
      if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("sweep grid values must be finite and >= 0");
    link.validate();
    if (mode != Mode::analytic) mc.validate();
    if (mode != Mode::analytic && mc.eepn == EepnInjection::physical && axis == Axis::variance)
      throw std::invalid_argument("physical EEPN injection needs a linewidth or distance axis");
  }
};

/// Cartesian product of algorithms x orders x block lengths. NLMS, which has
/// no block length, contributes one series per order.
inline std::vector<Series> expand_series(std::span<const Algorithm> algorithms, std::span<const unsigned> orders,
                                         std::span<const unsigned> block_lengths) {
  if (algorithms.empty() || orders.empty() || block_lengths.empty())
    throw std::invalid_argument("sweep axes must not be empty");
  std::vector<Series> out;
  for (Algorithm a : algorithms)
    for (unsigned n : orders) {
      if (!uses_block_length(a)) {
        out.push_back({a, n, 0, std::nullopt});
        continue;
      }
      for (unsigned b : block_lengths) out.push_back({a, n, b, std::nullopt});
    }
  return out;
}

/// Scenario of one sweep point.
inline Scenario sweep_scenario(const SweepSpec& spec, const Series& s, double x) {
  Scenario sc;
  sc.algorithm = s.algorithm;
  sc.order = s.order;
  sc.block_length = uses_block_length(s.algorithm) ? s.block_length : 11;
  sc.mu = s.mu;
  switch (spec.axis) {
    case Axis::variance: sc.sigma2 = x; break;
    case Axis::linewidth: {
      LinkParams l = spec.link;
      l.delta_f_tx = x;
      l.delta_f_lo = x;
      sc.link = l;
      break;
    }
    case Axis::distance: {
      LinkParams l = spec.link;
      l.fiber_length = x;
      sc.link = l;
      break;
    }
  }
  return sc;
}

/// Evaluates every (series, grid value) pair, series-major.
inline std::vector<FloorResult> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<FloorResult> rows;
  rows.reserve(spec.series.size() * spec.grid.size());
  std::size_t point = 0;
  for (const Series& s : spec.series)
    for (double x : spec.grid) {
      const Scenario sc = sweep_scenario(spec, s, x);
      FloorResult r = spec.mode == Mode::analytic ? analytic_result(sc) : measure_floor(sc, spec.mc, point);
      r.axis = spec.axis;
      r.axis_value = x;
      rows.push_back(std::move(r));
      ++point;
    }
  return rows;
}

/// start, start+step, ..., stop on an integer lattice (no accumulated drift).
inline std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw std::invalid_argument("grid needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

namespace presets {

inline constexpr unsigned orders[] = {4, 8, 16, 32};

inline std::vector<double> variance_grid() { return linear_grid(0.001, 0.1, 0.001); }
inline std::vector<double> linewidth_grid() { return linear_grid(1e6, 100e6, 1e6); }
inline std::vector<double> distance_grid() { return linear_grid(0.0, 5000e3, 100e3); }

/// 32 Gbaud, 1550 nm, 17 ps/nm/km; 1 MHz lasers, back-to-back.
inline LinkParams reference_link() { return LinkParams::from_engineering_units(1e6, 1e6, 32e9, 1550.0, 17.0, 0.0); }

}  // namespace presets

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig5",  "fig6",   "fig7",   "fig8a",  "fig8b", "fig9",
                                              "fig10", "fig11a", "fig11b", "fig12",  "fig13", "fig14a",
                                              "fig14b", "fig14c", "fig15",  "fig16"};
  return names;
}

/// Figure-parameter presets.
inline SweepSpec preset(std::string_view name) {
  using presets::orders;
  const std::vector<unsigned> all_orders(std::begin(orders), std::end(orders));
  const std::vector<unsigned> n11{11};
  const Algorithm nlms[] = {Algorithm::nlms};
  const Algorithm bwa[] = {Algorithm::bwa};
  const Algorithm vv[] = {Algorithm::vv};
  const std::vector<Algorithm> three(all_algorithms.begin(), all_algorithms.end());
  const std::vector<unsigned> n8{8};
  const std::vector<unsigned> block_sweep{3, 5, 11, 17, 23};

  SweepSpec s;
  s.preset = std::string(name);
  s.link = presets::reference_link();
  auto vs_variance = [&](std::span<const Algorithm> a, std::span<const unsigned> n, std::span<const unsigned> b,
                         const char* what) {
    s.axis = Axis::variance;
    s.grid = presets::variance_grid();
    s.series = expand_series(a, n, b);
    s.description = std::string("BER floor vs phase-noise variance, ") + what;
  };
  auto vs_linewidth = [&](std::span<const Algorithm> a, const char* what) {
    s.axis = Axis::linewidth;
    s.grid = presets::linewidth_grid();
    s.series = expand_series(a, all_orders, n11);
    s.description = std::string("BER floor vs Tx/LO linewidth (back-to-back, 32 Gbaud), ") + what;
  };
  auto vs_distance = [&](std::span<const Algorithm> a, const char* what) {
    s.axis = Axis::distance;
    s.grid = presets::distance_grid();
    s.series = expand_series(a, all_orders, n11);
    s.description = std::string("BER floor vs distance (1 MHz lasers, 17 ps/nm/km, 1550 nm, 32 Gbaud), ") + what;
  };

  if (name == "fig5") vs_variance(nlms, all_orders, n11, "NLMS, four orders");
  else if (name == "fig6") vs_linewidth(nlms, "NLMS, four orders");
  else if (name == "fig7") vs_distance(nlms, "NLMS, four orders");
  else if (name == "fig8a") vs_variance(bwa, n8, block_sweep, "BWA, 8-PSK, block lengths 3-23");
  else if (name == "fig8b") vs_variance(bwa, all_orders, n11, "BWA N=11, four orders");
  else if (name == "fig9") vs_linewidth(bwa, "BWA N=11, four orders");
  else if (name == "fig10") vs_distance(bwa, "BWA N=11, four orders");
  else if (name == "fig11a") vs_variance(vv, n8, block_sweep, "VV, 8-PSK, block lengths 3-23");
  else if (name == "fig11b") vs_variance(vv, all_orders, n11, "VV N=11, four orders");
  else if (name == "fig12") vs_linewidth(vv, "VV N=11, four orders");
  else if (name == "fig13") vs_distance(vv, "VV N=11, four orders");
  else if (name == "fig14a") vs_variance(three, n8, std::vector<unsigned>{5}, "three algorithms, 8-PSK, N=5");
  else if (name == "fig14b") vs_variance(three, n8, n11, "three algorithms, 8-PSK, N=11");
  else if (name == "fig14c") vs_variance(three, n8, std::vector<unsigned>{17}, "three algorithms, 8-PSK, N=17");
  else if (name == "fig15") vs_variance(three, all_orders, n11, "three algorithms x four orders, N=11");
  else if (name == "fig16") vs_distance(three, "three algorithms x four orders, N=11");
  else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  return s;
}

}  // namespace cprlab
