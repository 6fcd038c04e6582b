#pragma once

// Step-size search for the one-tap NLMS by Monte-Carlo probe runs.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cprlab/channel.hpp"
#include "cprlab/cpr.hpp"
#include "cprlab/detail/seed.hpp"
#include "cprlab/modem.hpp"
#include "cprlab/noise.hpp"

namespace cprlab {

struct MuScenario {
  unsigned order = 4;
  double sigma2 = 0.0;              ///< per-symbol phase-noise variance
  std::optional<double> snr_db;     ///< Es/N0; empty = noiseless
  std::size_t probe_symbols = 100000;
  std::size_t training_symbols = 500;
  std::uint64_t seed = 1;
};

struct MuProbe {
  double mu = 0.0;
  std::size_t bit_errors = 0;
  double ber = 0.0;
  double mse = 0.0;  ///< mean |e(k)|^2 after training
};

struct MuSearch {
  double mu = 0.0;
  std::vector<MuProbe> probes;
};

/// lo, lo+step, ..., hi (hi included when it lies on the lattice).
inline std::vector<double> mu_grid(double lo = 0.01, double hi = 1.0, double step = 0.005) {
  if (!(lo > 0.0 && hi <= 1.0 && lo <= hi && step > 0.0))
    throw std::invalid_argument("mu grid must satisfy 0 < lo <= hi <= 1, step > 0");
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) g.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  return g;
}

/// Runs the same probe frame (common random numbers) for every grid value and
/// keeps the lowest measured BER under differential decoding; ties go to the
/// lower post-training mean squared error, then to the smaller mu.
inline MuSearch optimize_mu_search(const MuScenario& s, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("optimize_mu: empty step-size grid");
  for (double mu : grid)
    if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("optimize_mu: grid values must lie in (0, 1]");

  const Constellation c(s.order);
  const std::size_t n_sym = std::max<std::size_t>(s.probe_symbols, s.training_symbols + 2);
  auto bits = random_bits((n_sym - 1) * c.bits_per_symbol(), detail::derive_seed(s.seed, {0x6d75, 1}));
  SymbolFrame frame = modulate(bits, c, Coding::differential);
  auto track = generate_wiener_phase(frame.size(), s.sigma2, detail::derive_seed(s.seed, {0x6d75, 2}));
  auto rx = add_awgn(apply_phase(frame.tx_symbols, track), s.snr_db, detail::derive_seed(s.seed, {0x6d75, 3}));

  MuSearch result;
  const MuProbe* best = nullptr;
  for (double mu : grid) {
    CprConfig cfg;
    cfg.algorithm = Algorithm::nlms;
    cfg.mu = mu;
    cfg.training_symbols = s.training_symbols;
    auto out = nlms(rx, c, cfg, frame.tx_indices);
    auto decisions = decide_all(out.corrected_symbols, c);
    auto counts = count_errors(frame, decisions, s.training_symbols, frame.size());

    double mse = 0.0;
    for (std::size_t k = s.training_symbols; k < frame.size(); ++k)
      mse += std::norm(c.point(decisions[k]) - out.taps[k] * rx[k]);
    mse /= static_cast<double>(frame.size() - s.training_symbols);

    result.probes.push_back({mu, counts.bit_errors, counts.ber(), mse});
  }
  for (const auto& p : result.probes) {
    if (!best || p.bit_errors < best->bit_errors ||
        (p.bit_errors == best->bit_errors && p.mse < best->mse) ||
        (p.bit_errors == best->bit_errors && p.mse == best->mse && p.mu < best->mu))
      best = &p;
  }
  result.mu = best->mu;
  return result;
}

inline double optimize_mu(const MuScenario& s, std::span<const double> grid) {
  return optimize_mu_search(s, grid).mu;
}

}  // namespace cprlab
