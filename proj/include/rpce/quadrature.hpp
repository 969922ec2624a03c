#pragma once

// Gauss quadrature for the two reference measures. Nodes come from the
// Golub-Welsch eigenproblem and are polished by Newton; weights use the
// Christoffel function 1 / sum_k psi_k(x)^2, which keeps tiny tail weights
// accurate in relative terms.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "rpce/basis.hpp"

namespace rpce {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to one (probability measure)
};

namespace detail {
// Orthonormal recurrence coefficients b_k with x psi_k = b_{k+1} psi_{k+1} + b_k psi_{k-1}.
inline double jacobi_offdiag(Family f, int k) {
  if (f == Family::Hermite) return std::sqrt(static_cast<double>(k));
  const double kk = static_cast<double>(k);
  return kk / std::sqrt(4.0 * kk * kk - 1.0);
}

// psi_0..psi_n at x via the orthonormal recurrence (any degree).
inline void orthonormal_values(Family f, int n, double x, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out[0] = 1.0;
  if (n == 0) return;
  out[1] = x / jacobi_offdiag(f, 1);
  for (int k = 1; k < n; ++k)
    out[static_cast<std::size_t>(k) + 1] =
        (x * out[static_cast<std::size_t>(k)] - jacobi_offdiag(f, k) * out[static_cast<std::size_t>(k) - 1]) /
        jacobi_offdiag(f, k + 1);
}
}  // namespace detail

inline QuadratureRule gauss_rule(Family family, int n) {
  if (n < 1) throw ParameterError("gauss_rule: need at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = detail::jacobi_offdiag(family, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac, Eigen::EigenvaluesOnly);
  QuadratureRule rule;
  std::vector<double> vals;
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    // Newton on psi_n; psi_n' = sum over the three-term structure, computed
    // from the derivative recurrence.
    for (int it = 0; it < 3; ++it) {
      std::vector<double> p(static_cast<std::size_t>(n) + 1), dp(static_cast<std::size_t>(n) + 1);
      p[0] = 1.0;
      dp[0] = 0.0;
      if (n >= 1) {
        p[1] = x / detail::jacobi_offdiag(family, 1);
        dp[1] = 1.0 / detail::jacobi_offdiag(family, 1);
      }
      for (int k = 1; k < n; ++k) {
        const double b = detail::jacobi_offdiag(family, k), b1 = detail::jacobi_offdiag(family, k + 1);
        const auto ku = static_cast<std::size_t>(k);
        p[ku + 1] = (x * p[ku] - b * p[ku - 1]) / b1;
        dp[ku + 1] = (p[ku] + x * dp[ku] - b * dp[ku - 1]) / b1;
      }
      const double step = p[static_cast<std::size_t>(n)] / dp[static_cast<std::size_t>(n)];
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    detail::orthonormal_values(family, n - 1, x, vals);
    double s = 0.0;
    for (double v : vals) s += v * v;
    rule.nodes.push_back(x);
    rule.weights.push_back(1.0 / s);
  }
  return rule;
}

}  // namespace rpce
