#pragma once

// Least squares with closed-form leave-one-out error and the R^2 metric.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "rpce/error.hpp"

namespace rpce {

/// Columns whose pivot falls below this fraction of the largest one are
/// treated as linearly dependent.
inline constexpr double kRankTolerance = 1e-10;
/// Leverages at or above 1 - kLeverageGuard make the LOO error undefined.
inline constexpr double kLeverageGuard = 1e-8;

struct FitResult {
  Eigen::VectorXd beta;
  double eps_loo = std::numeric_limits<double>::infinity();
  Eigen::VectorXd leverage;
  bool ill_conditioned = false;
  Eigen::Index rank = 0;
};

/// (1/N) sum ((y_n - yhat_n) / (1 - h_n))^2, or +inf when some h_n ~ 1.
inline double loo_from_residuals(const Eigen::VectorXd& residual, const Eigen::VectorXd& leverage) {
  if (residual.size() != leverage.size()) throw ShapeError("loo: residual/leverage size mismatch");
  if (residual.size() == 0) throw ShapeError("loo: empty data");
  double acc = 0.0;
  for (Eigen::Index n = 0; n < residual.size(); ++n) {
    const double denom = 1.0 - leverage(n);
    if (leverage(n) > 1.0 - kLeverageGuard) return std::numeric_limits<double>::infinity();
    const double e = residual(n) / denom;
    acc += e * e;
  }
  return acc / static_cast<double>(residual.size());
}

/// Leave-one-out error of a fit produced from (psi, y).
inline double loo_error(const FitResult& fit, const Eigen::MatrixXd& psi, const Eigen::VectorXd& y) {
  if (psi.rows() != y.size() || psi.cols() != fit.beta.size() || fit.leverage.size() != y.size())
    throw ShapeError("loo_error: fit does not match the data");
  return loo_from_residuals(y - psi * fit.beta, fit.leverage);
}

/// Ordinary least squares through a complete orthogonal decomposition.
/// Rank-deficient designs get the minimum-norm solution and the flag.
inline FitResult ols_fit(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y) {
  if (psi.rows() != y.size()) throw ShapeError("ols_fit: psi has " + std::to_string(psi.rows()) +
                                               " rows but y has " + std::to_string(y.size()));
  if (psi.rows() == 0 || psi.cols() == 0) throw ShapeError("ols_fit: empty design");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kRankTolerance);
  cod.compute(psi);
  FitResult fit;
  fit.rank = cod.rank();
  fit.ill_conditioned = fit.rank < psi.cols();
  fit.beta = cod.solve(y);
  const Eigen::MatrixXd q = cod.householderQ() * Eigen::MatrixXd::Identity(psi.rows(), fit.rank);
  fit.leverage = q.rowwise().squaredNorm();
  fit.eps_loo = loo_error(fit, psi, y);
  return fit;
}

/// 1 - MSE / Var(y_true), with the (N-1)-denominator variance.
inline double r_squared(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) throw ShapeError("r_squared: length mismatch");
  const Eigen::Index n = y_true.size();
  if (n < 2) throw UndefinedMetricError("r_squared: need at least two values");
  const double mean = y_true.mean();
  const double var = (y_true.array() - mean).square().sum() / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw UndefinedMetricError("r_squared: zero variance in y_true");
  const double mse = (y_true - y_pred).squaredNorm() / static_cast<double>(n);
  return 1.0 - mse / var;
}

/// Least squares grown one column at a time (modified Gram-Schmidt with
/// re-orthogonalization). After each append the residual, leverages and LOO
/// error of the OLS fit on all columns so far are available in O(N).
class IncrementalLeastSquares {
public:
  explicit IncrementalLeastSquares(const Eigen::VectorXd& y)
      : y_(y), residual_(y), leverage_(Eigen::VectorXd::Zero(y.size())) {}

  Eigen::Index size() const { return static_cast<Eigen::Index>(q_.size()); }

  /// Returns false (and leaves the state unchanged) when the column is
  /// numerically dependent on the ones already present.
  bool append(const Eigen::VectorXd& column) {
    if (column.size() != y_.size()) throw ShapeError("append: column length mismatch");
    const double original = column.norm();
    if (!(original > 0.0)) return false;
    Eigen::VectorXd v = column;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : q_) v -= q.dot(v) * q;
    const double nv = v.norm();
    if (!(nv > kRankTolerance * original)) return false;
    v /= nv;
    residual_ -= v.dot(residual_) * v;
    leverage_.array() += v.array().square();
    q_.push_back(std::move(v));
    return true;
  }

  const Eigen::VectorXd& residual() const { return residual_; }
  const Eigen::VectorXd& leverage() const { return leverage_; }
  double eps_loo() const { return loo_from_residuals(residual_, leverage_); }

private:
  Eigen::VectorXd y_;
  Eigen::VectorXd residual_;
  Eigen::VectorXd leverage_;
  std::vector<Eigen::VectorXd> q_;
};

/// LOO errors of the OLS fits on columns [0, j) for j = 1..cols. The path
/// stops at the first numerically dependent column.
inline std::vector<double> prefix_loo_path(const Eigen::MatrixXd& ordered, const Eigen::VectorXd& y) {
  if (ordered.rows() != y.size()) throw ShapeError("prefix_loo_path: row mismatch");
  IncrementalLeastSquares ls(y);
  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(ordered.cols()));
  for (Eigen::Index j = 0; j < ordered.cols(); ++j) {
    if (!ls.append(ordered.col(j))) break;
    path.push_back(ls.eps_loo());
  }
  return path;
}

}  // namespace rpce
