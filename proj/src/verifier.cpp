#include "cmc/verifier.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace cmc {

namespace {

double sym_lambda_max(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
  int points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit fit;
  fit.points = static_cast<int>(x.size());
  if (fit.points < 2) return fit;
  const double n = static_cast<double>(fit.points);
  double sx = 0, sy = 0;
  for (int k = 0; k < fit.points; ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int k = 0; k < fit.points; ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace

MarginReport margins(const MarginSampler& sampler,
                     const std::vector<Vec>& states, double alpha) {
  if (states.empty()) {
    throw PreconditionError("margins: empty state sample set");
  }
  MarginReport report;
  report.alpha = alpha;
  report.sample_count = static_cast<int>(states.size());
  bool first = true;
  for (const Vec& state : states) {
    const MarginSample s = sampler(state);
    const int n = static_cast<int>(s.lambda_diag.size());
    if (s.r_diag.size() != n || s.j1.size() != n || s.j2.size() != n) {
      throw DimMismatchError("margins: sample dimension mismatch");
    }
    const Vec c1 = s.j1.cwiseProduct(s.r_diag) + s.lambda_diag;
    const Vec c2 = s.j2.cwiseProduct(s.r_diag);
    if (first) {
      report.worst_c1_per_dim = c1;
      report.worst_c2_per_dim = c2;
      first = false;
    } else {
      report.worst_c1_per_dim = report.worst_c1_per_dim.cwiseMax(c1);
      report.worst_c2_per_dim = report.worst_c2_per_dim.cwiseMax(c2);
    }
  }
  report.worst_c1 = report.worst_c1_per_dim.maxCoeff();
  report.worst_c2 = report.worst_c2_per_dim.maxCoeff();
  report.pass = report.worst_c1 < -alpha && report.worst_c2 < -alpha;
  return report;
}

MarginReport merge_margins(const MarginReport& a, const MarginReport& b) {
  if (a.worst_c1_per_dim.size() != b.worst_c1_per_dim.size()) {
    throw DimMismatchError("merge_margins: dimension mismatch");
  }
  MarginReport out = a;
  out.worst_c1_per_dim = a.worst_c1_per_dim.cwiseMax(b.worst_c1_per_dim);
  out.worst_c2_per_dim = a.worst_c2_per_dim.cwiseMax(b.worst_c2_per_dim);
  out.worst_c1 = out.worst_c1_per_dim.maxCoeff();
  out.worst_c2 = out.worst_c2_per_dim.maxCoeff();
  out.sample_count = a.sample_count + b.sample_count;
  out.pass = out.worst_c1 < -out.alpha && out.worst_c2 < -out.alpha;
  return out;
}

CharRoots char_roots(double lambda_ii, double r_ii, double j1, double j2) {
  // s^2 + b s + c with b = -(Lambda + j1 R), c = -R j2.
  const double b = -(lambda_ii + j1 * r_ii);
  const double c = -r_ii * j2;
  const double disc = b * b - 4.0 * c;
  CharRoots roots;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    roots.re1 = (-b + sq) / 2.0;
    roots.re2 = (-b - sq) / 2.0;
  } else {
    roots.complex_pair = true;
    roots.re1 = roots.re2 = -b / 2.0;
    roots.im1 = std::sqrt(-disc) / 2.0;
    roots.im2 = -roots.im1;
  }
  return roots;
}

Theorem1Result theorem1_lambda_max(const Mat& f1, const Mat& f2,
                                   double beta) {
  if (f1.rows() != f1.cols() || f2.rows() != f2.cols() ||
      f1.rows() != f2.rows()) {
    throw DimMismatchError("theorem1_lambda_max: F1, F2 must be square");
  }
  Theorem1Result res;
  res.lambda_max_f1 = sym_lambda_max(f1.transpose() + f1);
  res.nu_plus = sym_lambda_max(f2.transpose() + f2);
  res.threshold = -(beta + std::max(res.nu_plus, 0.0));
  res.pass = res.lambda_max_f1 < res.threshold;
  return res;
}

ContractionFit empirical_contraction(
    const TrajectorySim& simulate,
    const std::vector<std::pair<Vec, Vec>>& init_pairs, double horizon,
    double skip_fraction) {
  if (init_pairs.empty()) {
    throw PreconditionError("empirical_contraction: no trajectory pairs");
  }
  ContractionFit fit;
  fit.horizon = horizon;
  fit.pair_count = static_cast<int>(init_pairs.size());
  fit.r2 = 1.0;
  double beta_sum = 0.0;
  for (const auto& [y0a, y0b] : init_pairs) {
    const Trajectory ta = simulate(y0a, horizon);
    const Trajectory tb = simulate(y0b, horizon);
    if (ta.size() != tb.size()) {
      throw PreconditionError(
          "empirical_contraction: trajectories must share the sample grid");
    }
    std::vector<double> ts, logs;
    const std::size_t skip =
        static_cast<std::size_t>(skip_fraction * static_cast<double>(ta.size()));
    for (std::size_t k = skip; k < ta.size(); ++k) {
      const double d = (ta.states[k] - tb.states[k]).norm();
      if (d > 1e-10) {
        ts.push_back(ta.times[k]);
        logs.push_back(std::log(d));
      }
    }
    const LineFit line = fit_line(ts, logs);
    if (line.points < 2) {
      throw PreconditionError(
          "empirical_contraction: distance vanished before the fit window");
    }
    beta_sum += -line.slope;
    fit.r2 = std::min(fit.r2, line.r2);
  }
  fit.beta_hat = beta_sum / static_cast<double>(fit.pair_count);
  return fit;
}

RobustnessBound robustness_check(const TrajectorySim& nominal,
                                 const TrajectorySim& disturbed,
                                 const Vec& y0, double horizon, double d_bar,
                                 double beta, double scale,
                                 const RobustnessOptions& opts) {
  if (beta <= 0.0) {
    throw PreconditionError("robustness_check: beta must be > 0");
  }
  const Trajectory tn = nominal(y0, horizon);
  const Trajectory td = disturbed(y0, horizon);
  if (tn.size() != td.size()) {
    throw PreconditionError(
        "robustness_check: trajectories must share the sample grid");
  }
  RobustnessBound bound;
  bound.d_bar = d_bar;
  bound.beta = beta;
  bound.slack = opts.slack;
  bound.ball_radius = scale * d_bar / beta;
  const std::size_t start = static_cast<std::size_t>(
      (1.0 - opts.steady_fraction) * static_cast<double>(tn.size()));
  double steady = 0.0;
  for (std::size_t k = start; k < tn.size(); ++k) {
    steady = std::max(steady, (tn.states[k] - td.states[k]).norm());
  }
  bound.observed_steady = steady;
  bound.pass = steady <= bound.ball_radius * (1.0 + opts.slack);
  return bound;
}

ModelErrorResult model_error_check(const Mat& f1_real, const Mat& f1_hat,
                                   double beta, double nu_plus) {
  if (f1_real.rows() != f1_hat.rows() || f1_real.cols() != f1_hat.cols()) {
    throw DimMismatchError("model_error_check: dimension mismatch");
  }
  ModelErrorResult res;
  res.ordering_lambda_max = sym_lambda_max(
      f1_real.transpose() + f1_real - f1_hat.transpose() - f1_hat);
  res.hat_condition.lambda_max_f1 = sym_lambda_max(f1_hat.transpose() + f1_hat);
  res.hat_condition.nu_plus = nu_plus;
  res.hat_condition.threshold = -(beta + std::max(nu_plus, 0.0));
  res.hat_condition.pass =
      res.hat_condition.lambda_max_f1 < res.hat_condition.threshold;
  res.pass = res.ordering_lambda_max <= 0.0 && res.hat_condition.pass;
  return res;
}

}  // namespace cmc
