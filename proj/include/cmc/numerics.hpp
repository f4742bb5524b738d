#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "cmc/errors.hpp"

namespace cmc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Real eigendecomposition with a deterministic convention: eigenvalues
/// ascending, each eigenvector unit-norm with its first nonzero component
/// positive. Column i of `eigenvectors` pairs with `eigenvalues[i]`.
struct EigenResult {
  Vec eigenvalues;
  Mat eigenvectors;
};

/// Decomposes a square matrix with a full set of real eigenvalues and real
/// eigenvectors. Throws ComplexSpectrumError if any eigenvalue has imaginary
/// part above 1e-9 * ||A||, DefectiveError if the eigenvector matrix has
/// condition number above 1e12.
EigenResult eigendecompose_real(const Mat& a);

/// Householder QR with the branch fixed so R has a strictly positive
/// diagonal. Throws SingularError if a diagonal pivot magnitude falls below
/// 1e-12 * ||A||.
std::pair<Mat, Mat> qr_decompose(const Mat& a);

/// Permutation with ones on the skew diagonal: P[i][n-1-i] = 1. P*P = I.
Mat skew_permutation(int n);

using DerivFn = std::function<Vec(double t, const Vec& y)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;

  std::size_t size() const { return times.size(); }
};

struct IntegrateOptions {
  double max_norm = 1e6;
};

/// One classical Runge-Kutta step of size h starting at (t, y).
Vec rk4_step(const DerivFn& deriv, double t, const Vec& y, double h);

/// Fixed-step RK4 sampling at t0, t0+dt, ..., t1 (last partial step
/// shortened). Throws DivergedError if any state norm exceeds
/// opts.max_norm, PreconditionError on dt <= 0 or t1 <= t0.
Trajectory integrate_rk4(const DerivFn& deriv, const Vec& y0, double t0,
                         double t1, double dt,
                         const IntegrateOptions& opts = {});

}  // namespace cmc
