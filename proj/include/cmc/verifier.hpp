#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "cmc/numerics.hpp"

namespace cmc {

/// Per-dimension ingredients of the Eq.-13 margins at one sampled state.
struct MarginSample {
  Vec lambda_diag;
  Vec r_diag;
  Vec j1;
  Vec j2;
};

using MarginSampler = std::function<MarginSample(const Vec& state)>;

/// c1_i = j1_i R_ii + Lambda_ii and c2_i = j2_i R_ii, worst case over the
/// sampled states. pass iff worst_c1 < -alpha and worst_c2 < -alpha.
struct MarginReport {
  Vec worst_c1_per_dim;
  Vec worst_c2_per_dim;
  double alpha = 0.0;
  double worst_c1 = 0.0;
  double worst_c2 = 0.0;
  int sample_count = 0;
  bool pass = false;
};

MarginReport margins(const MarginSampler& sampler,
                     const std::vector<Vec>& states, double alpha);

/// Merge two reports dimension-wise (worst case wins).
MarginReport merge_margins(const MarginReport& a, const MarginReport& b);

/// Roots of s^2 - (Lambda_ii + j1 R_ii) s - R_ii j2 = 0. root1 carries the
/// larger real part.
struct CharRoots {
  double re1 = 0.0, im1 = 0.0;
  double re2 = 0.0, im2 = 0.0;
  bool complex_pair = false;
};

CharRoots char_roots(double lambda_ii, double r_ii, double j1, double j2);

/// lambda_max(F1^T + F1) < -(beta + max(nu_plus, 0)) with
/// nu_plus = lambda_max(F2^T + F2).
struct Theorem1Result {
  bool pass = false;
  double lambda_max_f1 = 0.0;
  double nu_plus = 0.0;
  double threshold = 0.0;
};

Theorem1Result theorem1_lambda_max(const Mat& f1, const Mat& f2, double beta);

using TrajectorySim = std::function<Trajectory(const Vec& y0, double horizon)>;

/// Log-linear fit of the latent-space distance between trajectory pairs.
/// beta_hat is -slope averaged over pairs, r2 the worst goodness of fit.
struct ContractionFit {
  double beta_hat = 0.0;
  double r2 = 0.0;
  double horizon = 0.0;
  int pair_count = 0;
};

ContractionFit empirical_contraction(
    const TrajectorySim& simulate,
    const std::vector<std::pair<Vec, Vec>>& init_pairs, double horizon,
    double skip_fraction = 0.05);

/// App.-E error ball: observed steady distance between the nominal and the
/// disturbed trajectory vs. scale * d_bar / beta.
struct RobustnessBound {
  double d_bar = 0.0;
  double beta = 0.0;
  double ball_radius = 0.0;
  double observed_steady = 0.0;
  double slack = 0.0;
  bool pass = false;
};

struct RobustnessOptions {
  double slack = 0.1;
  double steady_fraction = 0.2;
};

RobustnessBound robustness_check(const TrajectorySim& nominal,
                                 const TrajectorySim& disturbed,
                                 const Vec& y0, double horizon, double d_bar,
                                 double beta, double scale,
                                 const RobustnessOptions& opts = {});

/// (F1_real^T + F1_real) <= (F1_hat^T + F1_hat) < -(beta + max(nu_plus,0)) I.
struct ModelErrorResult {
  bool pass = false;
  double ordering_lambda_max = 0.0;
  Theorem1Result hat_condition;
};

ModelErrorResult model_error_check(const Mat& f1_real, const Mat& f1_hat,
                                   double beta, double nu_plus);

}  // namespace cmc
