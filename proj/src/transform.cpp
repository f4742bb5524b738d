#include "cmc/transform.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace cmc {

namespace {

double symmetric_eig_extreme(const Mat& m, bool largest) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return largest ? es.eigenvalues().maxCoeff() : es.eigenvalues().minCoeff();
}

}  // namespace

double TransformPair::metric_lower_y() const {
  return symmetric_eig_extreme(t_y.transpose() * t_y, false);
}

double TransformPair::metric_upper_y() const {
  return symmetric_eig_extreme(t_y.transpose() * t_y, true);
}

double TransformPair::metric_lower_a() const {
  const Mat ta_inv = t_a.inverse();
  return symmetric_eig_extreme(ta_inv.transpose() * ta_inv, false);
}

double TransformPair::metric_upper_a() const {
  const Mat ta_inv = t_a.inverse();
  return symmetric_eig_extreme(ta_inv.transpose() * ta_inv, true);
}

TransformPair build_transforms(const LatentModel& model, const Vec& y,
                               const Vec& u, double t) {
  if (model.dim_y != model.dim_u) {
    throw SingularInputMapError(
        "build_transforms: jac_u must be square for the auxiliary transform");
  }
  const Mat jy = model.jac_y(y, u, t);
  const Mat ju = model.jac_u(y, u, t);
  const int n = model.dim_y;
  if (jy.rows() != n || jy.cols() != n || ju.rows() != n || ju.cols() != n) {
    throw DimMismatchError("build_transforms: Jacobian dimensions");
  }

  const EigenResult eig = eigendecompose_real(jy);

  TransformPair tp;
  tp.t_y_inv = eig.eigenvectors;
  tp.t_y = eig.eigenvectors.inverse();

  const Mat input_map = tp.t_y * ju;
  const Mat p = skew_permutation(n);
  Mat q, r_qr;
  try {
    std::tie(q, r_qr) = qr_decompose(input_map.transpose() * p);
  } catch (const SingularError&) {
    throw SingularInputMapError("build_transforms: T_y * jac_u is singular");
  }

  // T_a = (P Q^T)^-1 = Q P, so R = T_y jac_u T_a = P R_qr^T P is upper
  // triangular with the reversed R_qr diagonal.
  tp.t_a = q * p;
  tp.lambda = tp.t_y * jy * tp.t_y_inv;
  tp.r = tp.t_y * ju * tp.t_a;
  return tp;
}

AuxDifferentialSystem assemble_blocks(const TransformPair& tp,
                                      const Vec& jac_pi_s1,
                                      const Vec& jac_pi_s2,
                                      const Mat& tdot_y) {
  const int n = tp.dim();
  if (jac_pi_s1.size() != n || jac_pi_s2.size() != n || tdot_y.rows() != n ||
      tdot_y.cols() != n) {
    throw DimMismatchError("assemble_blocks: dimension mismatch");
  }

  const Mat j1 = jac_pi_s1.asDiagonal();
  const Mat j2 = jac_pi_s2.asDiagonal();
  const Mat tdot_term = tdot_y * tp.t_y_inv;

  AuxDifferentialSystem sys;
  sys.a = tdot_term + tp.lambda;
  sys.b = tp.r;
  sys.c = j1 * sys.a + j2;
  sys.d = j1 * tp.r;

  sys.f1.setZero(2 * n, 2 * n);
  sys.f1.topLeftCorner(n, n) = tp.lambda;
  sys.f1.topRightCorner(n, n) = tp.r;
  sys.f1.bottomLeftCorner(n, n) = j1 * tp.lambda + j2;
  sys.f1.bottomRightCorner(n, n) = j1 * tp.r;

  sys.f2.setZero(2 * n, 2 * n);
  sys.f2.topLeftCorner(n, n) = tdot_term;
  sys.f2.bottomLeftCorner(n, n) = j1 * tdot_term;

  sys.self_feedback.resize(n);
  sys.coupling.assign(n, std::vector<Mat>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Mat block(2, 2);
      block << sys.a(i, j), sys.b(i, j), sys.c(i, j), sys.d(i, j);
      if (i == j) {
        sys.self_feedback[i] = block;
      } else {
        sys.coupling[i][j] = block;
      }
    }
  }
  return sys;
}

CombinationCheck check_combination(const AuxDifferentialSystem& sys,
                                   CombinationKind kind, double tol) {
  const int n = sys.dim();
  CombinationCheck out;
  if (kind == CombinationKind::hierarchical) {
    // With Lambda ascending and R upper-triangular, subsystem i may only be
    // driven by j > i; blocks from j < i must vanish.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        out.max_violation = std::max(
            out.max_violation, sys.coupling[i][j].cwiseAbs().maxCoeff());
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Mat skew =
            sys.coupling[i][j] + sys.coupling[j][i].transpose();
        out.max_violation =
            std::max(out.max_violation, skew.cwiseAbs().maxCoeff());
      }
    }
  }
  out.pass = out.max_violation <= tol;
  return out;
}

Mat tdot_estimate(const TransformPair& prev, const TransformPair& now,
                  double dt) {
  if (dt <= 0.0) throw PreconditionError("tdot_estimate: dt must be > 0");
  if (prev.t_y.rows() != now.t_y.rows() ||
      prev.t_y.cols() != now.t_y.cols()) {
    throw DimMismatchError("tdot_estimate: dimension mismatch");
  }
  return (now.t_y - prev.t_y) / dt;
}

}  // namespace cmc
