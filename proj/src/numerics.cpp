#include "cmc/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace cmc {

namespace {

// Flips v so its first component with magnitude above 1e-12 is positive.
void normalize_direction(Eigen::Ref<Vec> v) {
  v.normalize();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) > 1e-12) {
      if (v[k] < 0.0) v = -v;
      return;
    }
  }
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

}  // namespace

EigenResult eigendecompose_real(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw PreconditionError("eigendecompose_real: matrix must be square");
  }
  const double scale = a.norm();
  Eigen::EigenSolver<Mat> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw DefectiveError("eigendecompose_real: iteration failed");
  }

  const auto values = solver.eigenvalues();
  const auto vectors = solver.eigenvectors();
  const double imag_tol = 1e-9 * std::max(scale, 1e-300);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values[i].imag()) > imag_tol) {
      throw ComplexSpectrumError("eigendecompose_real: complex eigenvalue");
    }
  }

  const Eigen::Index n = a.rows();
  std::vector<std::pair<double, Vec>> pairs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec v = vectors.col(i).real();
    normalize_direction(v);
    pairs[i] = {values[i].real(), std::move(v)};
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first < r.first;
    return lex_less(l.second, r.second);
  });

  EigenResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = pairs[i].first;
    out.eigenvectors.col(i) = pairs[i].second;
  }

  Eigen::JacobiSVD<Mat> svd(out.eigenvectors);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e12) {
    throw DefectiveError("eigendecompose_real: eigenvector matrix is ill-conditioned");
  }
  return out;
}

std::pair<Mat, Mat> qr_decompose(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw PreconditionError("qr_decompose: matrix must be square");
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();

  const double pivot_tol = 1e-12 * std::max(a.norm(), 1e-300);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    if (std::abs(r(i, i)) < pivot_tol) {
      throw SingularError("qr_decompose: rank-deficient matrix");
    }
    if (r(i, i) < 0.0) {
      r.row(i) = -r.row(i);
      q.col(i) = -q.col(i);
    }
  }
  return {std::move(q), std::move(r)};
}

Mat skew_permutation(int n) {
  if (n < 1) throw PreconditionError("skew_permutation: n must be >= 1");
  Mat p = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, n - 1 - i) = 1.0;
  return p;
}

Vec rk4_step(const DerivFn& deriv, double t, const Vec& y, double h) {
  const Vec k1 = deriv(t, y);
  const Vec k2 = deriv(t + 0.5 * h, y + (0.5 * h) * k1);
  const Vec k3 = deriv(t + 0.5 * h, y + (0.5 * h) * k2);
  const Vec k4 = deriv(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate_rk4(const DerivFn& deriv, const Vec& y0, double t0,
                         double t1, double dt, const IntegrateOptions& opts) {
  if (dt <= 0.0) throw PreconditionError("integrate_rk4: dt must be > 0");
  if (t1 <= t0) throw PreconditionError("integrate_rk4: t1 must be > t0");

  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(y0);

  double t = t0;
  Vec y = y0;
  const double t_end_tol = 1e-12 * std::max(1.0, std::abs(t1));
  while (t < t1 - t_end_tol) {
    const double h = std::min(dt, t1 - t);
    y = rk4_step(deriv, t, y, h);
    t += h;
    if (!y.allFinite() || y.norm() > opts.max_norm) {
      throw DivergedError("integrate_rk4: state norm exceeded bound");
    }
    traj.times.push_back(t);
    traj.states.push_back(y);
  }
  return traj;
}

}  // namespace cmc
