#include "cmc/policy.hpp"

#include <cmath>

namespace cmc {

namespace {

void check_bank(const PolicyBank& bank) {
  const int n = bank.dim();
  if (static_cast<int>(bank.flip.size()) != n ||
      static_cast<int>(bank.integral_mask.size()) != n) {
    throw DimMismatchError("policy: flip / integral_mask size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    const int arity = bank.integral_mask[i] ? 2 : 1;
    if (bank.nets[i].input_dim() != arity) {
      throw DimMismatchError("policy: net input arity mismatch");
    }
  }
}

// Structural sign of the weight chain, defined when every layer's pattern
// carries a single sign.
double chain_sign(const ConstrainedMLP& net) {
  if (!net.constrained()) {
    throw PreconditionError(
        "set_flips: unconstrained net has no structural sign");
  }
  double sign = 1.0;
  for (const Mat& p : net.sign_pattern) {
    const double first = p(0, 0);
    if ((p.array() * first < 0.0).any()) {
      throw PreconditionError(
          "set_flips: mixed-sign layer has no structural sign");
    }
    sign *= first >= 0.0 ? 1.0 : -1.0;
  }
  return sign;
}

}  // namespace

NetEval mlp_eval(const ConstrainedMLP& net, double flip, double s1,
                 std::optional<double> s2) {
  Vec x(s2 ? 2 : 1);
  x[0] = s1;
  if (s2) x[1] = *s2;

  NetEval ev;
  const int n_layers = static_cast<int>(net.layers.size());
  // Chain rows: one per input column, updated layer by layer.
  Mat chain = Mat::Identity(x.size(), x.size());
  Vec h = x;
  for (int l = 0; l < n_layers; ++l) {
    const MlpLayer& layer = net.layers[l];
    Vec pre = layer.w * h + layer.b;
    ev.max_abs_preact =
        std::max(ev.max_abs_preact, pre.cwiseAbs().maxCoeff());
    chain = layer.w * chain;
    const bool activate = (l + 1 < n_layers) || net.final_tanh;
    if (activate) {
      h = pre.array().tanh();
      const Vec m = 1.0 - h.array().square();
      chain = m.asDiagonal() * chain;
    } else {
      h = pre;
    }
  }
  if (h.size() != 1) {
    throw PreconditionError("mlp_eval: net output dimension must be 1");
  }
  ev.out = flip * h[0];
  ev.d_s1 = flip * chain(0, 0);
  ev.d_s2 = s2 ? flip * chain(0, 1) : 0.0;
  return ev;
}

Vec policy_forward(const PolicyBank& bank, const Vec& z,
                   const PolicyState& ps) {
  check_bank(bank);
  const int n = bank.dim();
  if (z.size() != n || ps.s2.size() != n) {
    throw DimMismatchError("policy_forward: input dimension mismatch");
  }
  Vec a(n);
  for (int i = 0; i < n; ++i) {
    const auto s2 = bank.integral_mask[i]
                        ? std::optional<double>(ps.s2[i])
                        : std::nullopt;
    a[i] = mlp_eval(bank.nets[i], bank.flip[i], z[i], s2).out;
  }
  return a;
}

PolicyJacobian policy_jacobian(const PolicyBank& bank, const Vec& z,
                               const PolicyState& ps) {
  check_bank(bank);
  const int n = bank.dim();
  if (z.size() != n || ps.s2.size() != n) {
    throw DimMismatchError("policy_jacobian: input dimension mismatch");
  }
  PolicyJacobian jac;
  jac.d_s1.resize(n);
  jac.d_s2.resize(n);
  jac.max_abs_preact.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto s2 = bank.integral_mask[i]
                        ? std::optional<double>(ps.s2[i])
                        : std::nullopt;
    const NetEval ev = mlp_eval(bank.nets[i], bank.flip[i], z[i], s2);
    jac.d_s1[i] = ev.d_s1;
    jac.d_s2[i] = ev.d_s2;
    jac.max_abs_preact[i] = ev.max_abs_preact;
  }
  return jac;
}

PolicyBank project(const PolicyBank& bank) {
  PolicyBank out = bank;
  for (ConstrainedMLP& net : out.nets) {
    if (!net.constrained()) continue;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      Mat& w = net.layers[l].w;
      const Mat& p = net.sign_pattern[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
          const double sign = p(r, c) >= 0.0 ? 1.0 : -1.0;
          const double mag = std::max(std::abs(w(r, c)), net.weight_floor);
          const double snapped = sign * mag;
          if (snapped != w(r, c)) w(r, c) = snapped;
        }
      }
    }
  }
  return out;
}

PolicyBank set_flips(const PolicyBank& bank, const Vec& r_diag,
                     const Vec& lambda_diag) {
  const int n = bank.dim();
  if (r_diag.size() != n || lambda_diag.size() != n) {
    throw DimMismatchError("set_flips: diagonal size mismatch");
  }
  if ((lambda_diag.array() >= 0.0).any()) {
    throw UnstableOpenLoopError(
        "set_flips: open-loop spectrum must be strictly negative");
  }
  PolicyBank out = bank;
  for (int i = 0; i < n; ++i) {
    const double r_sign = r_diag[i] >= 0.0 ? 1.0 : -1.0;
    out.flip[i] = -r_sign * chain_sign(bank.nets[i]);
  }
  return out;
}

int count_violations(const PolicyBank& bank) {
  int count = 0;
  for (const ConstrainedMLP& net : bank.nets) {
    if (!net.constrained()) continue;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const Mat& w = net.layers[l].w;
      const Mat& p = net.sign_pattern[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
          const double sign = p(r, c) >= 0.0 ? 1.0 : -1.0;
          if (sign * w(r, c) < net.weight_floor) ++count;
        }
      }
    }
  }
  return count;
}

}  // namespace cmc
