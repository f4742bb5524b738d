#pragma once

#include <optional>
#include <vector>

#include "cmc/numerics.hpp"

namespace cmc {

struct MlpLayer {
  Mat w;
  Vec b;
};

/// Single-output MLP controlling one latent dimension. tanh after every
/// layer; the last activation is dropped when final_tanh is false. When
/// sign_pattern is nonempty it holds the required sign (+1 / -1) of every
/// weight entry and |w| >= weight_floor is enforced by project().
struct ConstrainedMLP {
  std::vector<MlpLayer> layers;
  std::vector<Mat> sign_pattern;
  double weight_floor = 1e-6;
  bool final_tanh = true;

  int input_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().w.cols());
  }
  bool constrained() const { return !sign_pattern.empty(); }
};

/// One independent network per latent dimension. flip[i] multiplies the
/// output of net i; integral_mask[i] selects whether the running integral
/// s2_i is fed as a second input.
struct PolicyBank {
  std::vector<ConstrainedMLP> nets;
  Vec flip;
  std::vector<bool> integral_mask;

  int dim() const { return static_cast<int>(nets.size()); }
};

/// Running integral of z, advanced by s2 += z * dt.
struct PolicyState {
  Vec s2;
  double t = 0.0;
};

/// Per-net evaluation: output, input Jacobians, and the largest activation
/// input magnitude seen along the chain (saturation witness).
struct NetEval {
  double out = 0.0;
  double d_s1 = 0.0;
  double d_s2 = 0.0;
  double max_abs_preact = 0.0;
};

NetEval mlp_eval(const ConstrainedMLP& net, double flip, double s1,
                 std::optional<double> s2);

/// a_i = flip_i * pi^i(z_i [, s2_i]).
Vec policy_forward(const PolicyBank& bank, const Vec& z,
                   const PolicyState& ps);

struct PolicyJacobian {
  Vec d_s1;
  Vec d_s2;
  Vec max_abs_preact;
};

/// Analytic chain product W_l M_{l-1} ... M_1 W_1 per input column,
/// flip included. d_s2 entries are 0 for masked-out dimensions.
PolicyJacobian policy_jacobian(const PolicyBank& bank, const Vec& z,
                               const PolicyState& ps);

/// Snaps every weight to its required sign with magnitude
/// max(|w|, weight_floor). Biases untouched. Idempotent; unconstrained nets
/// pass through unchanged.
PolicyBank project(const PolicyBank& bank);

/// flip_i = -sign(R_ii) * (structural chain sign of net i), so that
/// d(pi^i)/ds * R_ii < 0 holds structurally. Throws UnstableOpenLoopError if
/// any lambda_diag entry is >= 0.
PolicyBank set_flips(const PolicyBank& bank, const Vec& r_diag,
                     const Vec& lambda_diag);

/// Number of weight entries violating the sign pattern or the floor.
int count_violations(const PolicyBank& bank);

}  // namespace cmc
