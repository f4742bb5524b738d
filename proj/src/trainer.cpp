#include "cmc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace cmc {

Vec bank_parameters(const PolicyBank& bank) {
  std::vector<double> theta;
  for (const ConstrainedMLP& net : bank.nets) {
    for (const MlpLayer& layer : net.layers) {
      theta.insert(theta.end(), layer.w.data(),
                   layer.w.data() + layer.w.size());
      theta.insert(theta.end(), layer.b.data(),
                   layer.b.data() + layer.b.size());
    }
  }
  return Eigen::Map<const Vec>(theta.data(),
                               static_cast<Eigen::Index>(theta.size()));
}

PolicyBank bank_with_parameters(const PolicyBank& prototype,
                                const Vec& theta) {
  PolicyBank out = prototype;
  Eigen::Index k = 0;
  for (ConstrainedMLP& net : out.nets) {
    for (MlpLayer& layer : net.layers) {
      for (Eigen::Index i = 0; i < layer.w.size(); ++i) {
        layer.w.data()[i] = theta[k++];
      }
      for (Eigen::Index i = 0; i < layer.b.size(); ++i) {
        layer.b.data()[i] = theta[k++];
      }
    }
  }
  if (k != theta.size()) {
    throw DimMismatchError("bank_with_parameters: parameter count mismatch");
  }
  return out;
}

namespace {

// Worst Eq.-13 margin magnitude of the bank over a fixed probe grid.
double probe_margin(const PolicyBank& bank, const Vec& r_diag,
                    const Vec& lambda_diag) {
  if (r_diag.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  const int n = bank.dim();
  double margin = std::numeric_limits<double>::infinity();
  for (double zb : {-1.0, -0.3, 0.0, 0.3, 1.0}) {
    for (double sb : {-1.0, 0.0, 1.0}) {
      PolicyState ps;
      ps.s2 = Vec::Constant(n, sb);
      const PolicyJacobian jac =
          policy_jacobian(bank, Vec::Constant(n, zb), ps);
      for (int i = 0; i < n; ++i) {
        const double c1 = jac.d_s1[i] * r_diag[i] + lambda_diag[i];
        const double c2 = jac.d_s2[i] * r_diag[i];
        margin = std::min(margin, std::min(-c1, -c2));
      }
    }
  }
  return margin;
}

std::vector<double> centered_ranks(const std::vector<double>& scores) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] < scores[b]; });
  std::vector<double> ranks(n);
  for (int pos = 0; pos < n; ++pos) {
    ranks[order[pos]] =
        n > 1 ? static_cast<double>(pos) / (n - 1) - 0.5 : 0.0;
  }
  return ranks;
}

}  // namespace

TrainResult train(const EpisodeEval& eval, const PolicyBank& bank0,
                  const TrainConfig& cfg, const Vec& r_diag,
                  const Vec& lambda_diag) {
  if (cfg.population < 2 || cfg.population % 2 != 0) {
    throw PreconditionError("train: population must be even and >= 2");
  }
  if (cfg.sigma <= 0.0 || cfg.step_size <= 0.0) {
    throw PreconditionError("train: sigma and step_size must be > 0");
  }

  auto constrain = [&](const PolicyBank& b) -> PolicyBank {
    if (!cfg.constrained) return b;
    PolicyBank p = project(b);
    if (r_diag.size() > 0) p = set_flips(p, r_diag, lambda_diag);
    return p;
  };

  PolicyBank bank = constrain(bank0);
  Vec theta = bank_parameters(bank);
  const Eigen::Index dim = theta.size();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TrainResult result;
  const int half = cfg.population / 2;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    std::vector<Vec> noise(half);
    for (int k = 0; k < half; ++k) {
      noise[k].resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) noise[k][i] = gauss(rng);
    }

    std::vector<double> scores(cfg.population);
    for (int k = 0; k < half; ++k) {
      for (int s = 0; s < 2; ++s) {
        const double dir = s == 0 ? 1.0 : -1.0;
        const PolicyBank member = constrain(
            bank_with_parameters(bank, theta + dir * cfg.sigma * noise[k]));
        double total = 0.0;
        for (int ep = 0; ep < cfg.episodes_per_eval; ++ep) {
          const std::uint64_t ep_seed =
              cfg.seed * 1000003ull + static_cast<std::uint64_t>(iter) * 131ull +
              static_cast<std::uint64_t>(ep);
          total += eval(member, ep_seed);
        }
        scores[2 * k + s] = total / cfg.episodes_per_eval;
      }
    }

    // Map diverged (-inf) episodes to the worst finite score minus one
    // population standard deviation.
    std::vector<double> finite;
    for (double s : scores) {
      if (std::isfinite(s)) finite.push_back(s);
    }
    if (finite.empty()) {
      for (double& s : scores) s = 0.0;
    } else {
      const double worst = *std::min_element(finite.begin(), finite.end());
      double mean = std::accumulate(finite.begin(), finite.end(), 0.0) /
                    static_cast<double>(finite.size());
      double var = 0.0;
      for (double s : finite) var += (s - mean) * (s - mean);
      const double stddev =
          std::sqrt(var / static_cast<double>(finite.size()));
      for (double& s : scores) {
        if (!std::isfinite(s)) s = worst - std::max(stddev, 1.0);
      }
    }

    const std::vector<double> ranks = centered_ranks(scores);
    Vec update = Vec::Zero(dim);
    for (int k = 0; k < half; ++k) {
      update += (ranks[2 * k] - ranks[2 * k + 1]) * noise[k];
    }
    theta += cfg.step_size / (cfg.population * cfg.sigma) * update;

    bank = constrain(bank_with_parameters(bank, theta));
    theta = bank_parameters(bank);

    TrainLogRow row;
    row.iter = iter;
    row.mean_return =
        std::accumulate(scores.begin(), scores.end(), 0.0) / cfg.population;
    row.best_return = *std::max_element(scores.begin(), scores.end());
    row.violations = cfg.constrained ? count_violations(bank) : 0;
    row.min_jac_margin = probe_margin(bank, r_diag, lambda_diag);
    result.log.rows.push_back(row);
  }
  result.bank = bank;
  return result;
}

bool is_oscillating(const std::vector<StepRecord>& records,
                    const DetectorConfig& cfg) {
  const std::size_t n = records.size();
  if (n < 8) return false;
  const int dim = static_cast<int>(records.front().y.size());
  const std::size_t start =
      static_cast<std::size_t>((1.0 - cfg.final_fraction) * n);
  const std::size_t q3_start = n / 2, q3_end = 3 * n / 4;
  for (int i = 0; i < dim; ++i) {
    int changes = 0;
    double prev = records[start].y[i];
    for (std::size_t k = start + 1; k < n; ++k) {
      const double cur = records[k].y[i];
      if (prev * cur < 0.0) ++changes;
      if (cur != 0.0) prev = cur;
    }
    if (changes <= cfg.sign_change_threshold) continue;
    double q3 = 0.0, q4 = 0.0;
    for (std::size_t k = q3_start; k < q3_end; ++k) {
      q3 += std::abs(records[k].y[i]);
    }
    for (std::size_t k = q3_end; k < n; ++k) {
      q4 += std::abs(records[k].y[i]);
    }
    q3 /= static_cast<double>(q3_end - q3_start);
    q4 /= static_cast<double>(n - q3_end);
    if (q4 >= q3) return true;
  }
  return false;
}

bool is_drifting(const std::vector<StepRecord>& records) {
  if (records.size() < 2) return false;
  return records.back().y.norm() > records.front().y.norm();
}

EvalStats evaluate(const EpisodeRollout& run, const PolicyBank& bank,
                   int episodes, std::uint64_t seed,
                   const DetectorConfig& cfg) {
  if (episodes < 1) throw PreconditionError("evaluate: episodes must be >= 1");
  EvalStats stats;
  stats.episodes = episodes;
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    const Rollout r = run(bank, seed + static_cast<std::uint64_t>(ep));
    if (r.diverged) {
      stats.frac_diverged += 1.0;
      continue;
    }
    total += r.reward;
    if (is_oscillating(r.records, cfg)) stats.frac_oscillating += 1.0;
    if (is_drifting(r.records)) stats.frac_drifting += 1.0;
  }
  const int ok = episodes - static_cast<int>(stats.frac_diverged);
  stats.mean_return = ok > 0 ? total / ok
                             : -std::numeric_limits<double>::infinity();
  stats.frac_diverged /= episodes;
  stats.frac_oscillating /= episodes;
  stats.frac_drifting /= episodes;
  return stats;
}

}  // namespace cmc
