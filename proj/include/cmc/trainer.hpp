#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cmc/envs.hpp"
#include "cmc/policy.hpp"

namespace cmc {

/// Antithetic evolution-strategies configuration. population must be even;
/// constrained runs re-project onto the sign-constraint set after every
/// update and act only with projected members.
struct TrainConfig {
  int population = 16;
  double sigma = 0.05;
  double step_size = 0.05;
  int iterations = 100;
  int episodes_per_eval = 1;
  std::uint64_t seed = 0;
  bool constrained = true;
};

struct TrainLogRow {
  int iter = 0;
  double mean_return = 0.0;
  double best_return = 0.0;
  int violations = 0;
  double min_jac_margin = 0.0;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
};

/// Mean return of a bank over episodes_per_eval rollouts under episode_seed.
using EpisodeEval =
    std::function<double(const PolicyBank& bank, std::uint64_t episode_seed)>;

struct TrainResult {
  PolicyBank bank;
  TrainLog log;
};

/// Score-weighted (centered-rank) antithetic ES over the flattened bank
/// parameters. r_diag / lambda_diag feed set_flips for constrained runs;
/// pass empty vectors for unconstrained ones. Diverged episodes (-inf) are
/// mapped to the worst finite score minus one population standard deviation.
TrainResult train(const EpisodeEval& eval, const PolicyBank& bank0,
                  const TrainConfig& cfg, const Vec& r_diag,
                  const Vec& lambda_diag);

struct DetectorConfig {
  int sign_change_threshold = 20;
  double final_fraction = 0.5;
};

/// True if any latent dimension changes sign more than the threshold count
/// in the final fraction of the horizon while its amplitude envelope is
/// non-decreasing (last-quarter mean >= third-quarter mean).
bool is_oscillating(const std::vector<StepRecord>& records,
                    const DetectorConfig& cfg = {});

/// True if the final latent error norm exceeds the initial one.
bool is_drifting(const std::vector<StepRecord>& records);

struct EvalStats {
  double mean_return = 0.0;
  double frac_diverged = 0.0;
  double frac_oscillating = 0.0;
  double frac_drifting = 0.0;
  int episodes = 0;
};

using EpisodeRollout =
    std::function<Rollout(const PolicyBank& bank, std::uint64_t episode_seed)>;

EvalStats evaluate(const EpisodeRollout& run, const PolicyBank& bank,
                   int episodes, std::uint64_t seed,
                   const DetectorConfig& cfg = {});

/// Flattened weight + bias vector of the bank, and its inverse.
Vec bank_parameters(const PolicyBank& bank);
PolicyBank bank_with_parameters(const PolicyBank& prototype, const Vec& theta);

}  // namespace cmc
