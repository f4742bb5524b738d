#include "cmc/latent.hpp"

#include <cmath>

namespace cmc {

Vec composite_apply(const CompositeMap& m, const Vec& e, const Vec& edot) {
  if (e.size() != m.k1.size() || edot.size() != m.k2.size() ||
      m.k1.size() != m.k2.size()) {
    throw DimMismatchError("composite_apply: dimension mismatch");
  }
  return m.k1.cwiseProduct(e) + m.k2.cwiseProduct(edot);
}

Vec composite_zero_decay_rate(const CompositeMap& m) {
  if (m.k1.size() != m.k2.size()) {
    throw DimMismatchError("composite_zero_decay_rate: dimension mismatch");
  }
  return m.k1.cwiseQuotient(m.k2);
}

CompositeSolution solve_composite_gains(const GainSet& g, GainBranch branch) {
  const int n = g.dim();
  if (g.kp.size() != n || g.kd.size() != n || n < 1) {
    throw DimMismatchError("solve_composite_gains: dimension mismatch");
  }
  if ((g.lambda_d.array() <= 0.0).any() || (g.kd.array() <= 0.0).any() ||
      (g.kp.array() < 0.0).any()) {
    throw PreconditionError(
        "solve_composite_gains: lambda_d, K_d must be positive and K_p "
        "nonnegative");
  }

  const int zero_count = static_cast<int>((g.kp.array() == 0.0).count());
  if (zero_count == n) {
    // Pure-velocity case y = edot: Lambda_d ydot + K_d y + u = 0.
    CompositeSolution s;
    s.map.k1 = Vec::Zero(n);
    s.map.k2 = Vec::Ones(n);
    s.lti.a = g.lambda_d;
    s.lti.b = g.kd;
    return s;
  }
  if (zero_count > 0) {
    throw MixedKpError(
        "solve_composite_gains: mixed zero / nonzero K_p is unsupported");
  }

  CompositeSolution s;
  s.map.k1.resize(n);
  s.map.k2.resize(n);
  s.lti.a.resize(n);
  s.lti.b.resize(n);
  const double sign = branch == GainBranch::plus ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    const double disc =
        g.kd[i] * g.kd[i] - 4.0 * g.kp[i] * g.lambda_d[i];
    if (disc < 0.0) {
      throw NegativeDiscriminantError(
          "solve_composite_gains: K_d^2 - 4 K_p lambda_d < 0");
    }
    const double denom = g.kd[i] + sign * std::sqrt(disc);
    s.map.k1[i] = g.kp[i] / g.lambda_d[i];
    s.map.k2[i] = 2.0 * g.kp[i] / denom;
    s.lti.a[i] = g.lambda_d[i] / (2.0 * g.kp[i]) * denom;
    s.lti.b[i] = g.lambda_d[i];
  }
  return s;
}

LatentModel lti_model(const LatentLTI& l) {
  const int n = l.dim();
  if (l.b.size() != n || n < 1 || (l.a.array() <= 0.0).any() ||
      (l.b.array() <= 0.0).any()) {
    throw PreconditionError("lti_model: A, B must be positive diagonals");
  }
  const Vec ab = l.b.cwiseQuotient(l.a);   // A^-1 B
  const Vec ai = l.a.cwiseInverse();       // A^-1
  LatentModel m;
  m.dim_y = n;
  m.dim_u = n;
  m.f = [ab, ai](const Vec& y, const Vec& u, double) -> Vec {
    return -ab.cwiseProduct(y) - ai.cwiseProduct(u);
  };
  m.jac_y = [ab, n](const Vec&, const Vec&, double) -> Mat {
    return (-ab).asDiagonal().toDenseMatrix();
  };
  m.jac_u = [ai, n](const Vec&, const Vec&, double) -> Mat {
    return (-ai).asDiagonal().toDenseMatrix();
  };
  return m;
}

}  // namespace cmc
