#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tempograph/temporal_graph.hpp"

namespace tempograph {

/// Parameters of the repetition-controlled synthetic generator.
struct SynthConfig {
  std::int64_t num_nodes = 1000;
  std::int64_t num_edges = 100000;
  std::int64_t timesteps = 1000;
  /// Activity coefficient C_i ~ Normal(mu, sigma^2), floored at 1e-6.
  double mu = 1.0;
  double sigma = 0.3;
  /// Decay base of the historical-destination weights; near 1 spreads
  /// repeats over the whole history (long-term), small values favour the
  /// latest destinations (short-term).
  double alpha = 0.8;
  /// Probability of repeating a historical destination.
  double beta = 0.5;
  /// Time scale of the decay. <= 0 selects timesteps / 10.
  double temperature = 0.0;
  /// Std-dev of the per-event timestamp jitter.
  double time_jitter = 0.1;
  std::uint64_t seed = 0;
  /// Dimension of random N(0, 1) edge features (0 = none).
  std::int64_t random_feat_dim = 0;
  /// Verify that historical-destination probabilities sum to one.
  bool debug_checks = false;

  double effective_temperature() const {
    return temperature > 0.0 ? temperature : static_cast<double>(timesteps) / 10.0;
  }
};

/// Throws InvalidArgument for out-of-range fields.
void validate(const SynthConfig& cfg);

/// Exactly num_edges events, num_edges / timesteps per step before jitter,
/// sorted chronologically with edge ids assigned in that order. Deterministic
/// in cfg.seed.
EventStream generate(const SynthConfig& cfg);

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double phi = 0.0;
  double recurrence_density = 0.0;
};

struct SweepOptions {
  std::int64_t bins = 100;
  unsigned workers = 1;
};

/// One row per (alpha, beta, seed) in that nesting order. phi is NaN when the
/// generated graph has no recurrence at positive lags.
std::vector<SweepRow> sweep(const SynthConfig& base, std::span<const double> alphas, std::span<const double> betas,
                            std::span<const std::uint64_t> seeds, const SweepOptions& options = {});

}  // namespace tempograph
