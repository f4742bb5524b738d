#pragma once

#include <functional>
#include <utility>

#include "cmc/numerics.hpp"

namespace cmc {

/// Latent-space dynamic model: f(y, u, t) plus its Jacobians. jac_y returns
/// dim_y x dim_y, jac_u returns dim_y x dim_u.
struct LatentModel {
  int dim_y = 0;
  int dim_u = 0;
  std::function<Vec(const Vec& y, const Vec& u, double t)> f;
  std::function<Mat(const Vec& y, const Vec& u, double t)> jac_y;
  std::function<Mat(const Vec& y, const Vec& u, double t)> jac_u;
};

/// Composite variable y = K1 e + K2 edot, stored as the diagonals.
struct CompositeMap {
  Vec k1;
  Vec k2;

  int dim() const { return static_cast<int>(k1.size()); }
};

/// A ydot + B y + u = 0 with positive diagonal A, B (stored as diagonals).
struct LatentLTI {
  Vec a;
  Vec b;

  int dim() const { return static_cast<int>(a.size()); }
};

/// Task-space controller gains of Lambda_d eddot + K_d edot + K_p e + u = 0.
struct GainSet {
  Vec lambda_d;
  Vec kp;
  Vec kd;

  int dim() const { return static_cast<int>(lambda_d.size()); }
};

enum class GainBranch { plus, minus };

/// K1 e + K2 edot. Throws DimMismatchError.
Vec composite_apply(const CompositeMap& m, const Vec& e, const Vec& edot);

/// Per-dimension decay rate K1_i / K2_i of e on the y = 0 manifold.
Vec composite_zero_decay_rate(const CompositeMap& m);

struct CompositeSolution {
  CompositeMap map;
  LatentLTI lti;
};

/// Solves for (K1, K2) and the latent LTI model (A, B) from task-space gains.
/// With K_p = 0 in every dimension this is the pure-velocity case y = edot,
/// A = Lambda_d, B = K_d. Throws NegativeDiscriminantError when
/// K_d^2 - 4 K_p lambda_d < 0 in any dimension, MixedKpError when only some
/// K_p entries are zero.
CompositeSolution solve_composite_gains(const GainSet& g,
                                        GainBranch branch = GainBranch::plus);

/// LatentModel with f = -A^-1 B y - A^-1 u and constant diagonal Jacobians.
LatentModel lti_model(const LatentLTI& l);

}  // namespace cmc
