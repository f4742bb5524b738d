#pragma once

#include <vector>

#include "cmc/latent.hpp"
#include "cmc/numerics.hpp"

namespace cmc {

/// Auxiliary-space coordinate change. T_y diagonalizes jac_y from the left
/// (Lambda = T_y jac_y T_y^-1 is diagonal) and T_a = (P Q^T)^-1 makes
/// R = T_y jac_u T_a upper-triangular.
struct TransformPair {
  Mat t_y;
  Mat t_y_inv;
  Mat t_a;
  Mat lambda;
  Mat r;

  int dim() const { return static_cast<int>(t_y.rows()); }

  /// Smallest / largest eigenvalue of T_y^T T_y.
  double metric_lower_y() const;
  double metric_upper_y() const;
  /// Smallest / largest eigenvalue of (T_a^-1)^T T_a^-1.
  double metric_lower_a() const;
  double metric_upper_a() const;
};

/// Block matrices of the auxiliary-space differential dynamics. a, b, c, d
/// are the Eq.-7 blocks (including the Tdot_y terms); f1/f2 the split into
/// the Tdot_y-free and Tdot_y parts; self_feedback[i] the 2x2 block of the
/// (z_i, a_i) pair and coupling[i][j] the 2x2 block through which subsystem
/// i is driven by subsystem j.
struct AuxDifferentialSystem {
  Mat a, b, c, d;
  Mat f1, f2;
  std::vector<Mat> self_feedback;
  std::vector<std::vector<Mat>> coupling;

  int dim() const { return static_cast<int>(a.rows()); }
};

enum class CombinationKind { hierarchical, feedback };

struct CombinationCheck {
  bool pass = false;
  double max_violation = 0.0;
};

/// Builds T_y from the eigendecomposition of jac_y and T_a from the QR
/// decomposition of (T_y jac_u)^T P. Propagates ComplexSpectrumError /
/// DefectiveError; throws SingularInputMapError if T_y jac_u is singular.
TransformPair build_transforms(const LatentModel& model, const Vec& y,
                               const Vec& u, double t);

/// Assembles the Eq.-7 blocks and the F1/F2 split for diagonal policy
/// Jacobians jac_pi_s1, jac_pi_s2 (given as diagonals).
AuxDifferentialSystem assemble_blocks(const TransformPair& tp,
                                      const Vec& jac_pi_s1,
                                      const Vec& jac_pi_s2, const Mat& tdot_y);

/// Hierarchical: every coupling block from a lower-indexed subsystem must
/// vanish within tol. Feedback: coupling[i][j] = -coupling[j][i]^T within
/// tol. Reports the largest violating entry.
CombinationCheck check_combination(const AuxDifferentialSystem& sys,
                                   CombinationKind kind, double tol);

/// Finite-difference surrogate (T_y,now - T_y,prev) / dt.
Mat tdot_estimate(const TransformPair& prev, const TransformPair& now,
                  double dt);

}  // namespace cmc
