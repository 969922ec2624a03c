#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rpce/random.hpp"
#include "rpce/regress.hpp"

using namespace rpce;

namespace {
Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = 2.0 * rng.uniform_open() - 1.0;
  return m;
}

// Leave each point out, refit with normal equations, predict it.
double refit_loo(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y) {
  const Eigen::Index n = psi.rows();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::MatrixXd a(n - 1, psi.cols());
    Eigen::VectorXd b(n - 1);
    for (Eigen::Index i = 0, r = 0; i < n; ++i)
      if (i != k) {
        a.row(r) = psi.row(i);
        b(r++) = y(i);
      }
    const Eigen::VectorXd beta = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    const double e = y(k) - psi.row(k).dot(beta);
    acc += e * e;
  }
  return acc / static_cast<double>(n);
}
}  // namespace

TEST(Ols, Examples) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  EXPECT_NEAR(ols_fit(ones, y).beta(0), 2.0, 1e-14);
  Eigen::VectorXd y2(2);
  y2 << 4, -1;
  const auto fit = ols_fit(Eigen::MatrixXd::Identity(2, 2), y2);
  EXPECT_NEAR(fit.beta(0), 4.0, 1e-14);
  EXPECT_NEAR(fit.beta(1), -1.0, 1e-14);
  EXPECT_TRUE(std::isinf(fit.eps_loo));
}

TEST(Ols, MatchesNormalEquations) {
  Rng rng(1);
  const auto psi = random_matrix(rng, 20, 5);
  const Eigen::VectorXd y = random_matrix(rng, 20, 1);
  const auto fit = ols_fit(psi, y);
  const Eigen::VectorXd ref = (psi.transpose() * psi).ldlt().solve(psi.transpose() * y);
  EXPECT_LT((fit.beta - ref).norm(), 1e-10 * ref.norm());
  EXPECT_FALSE(fit.ill_conditioned);
}

TEST(Ols, RankDeficientIsFlagged) {
  Rng rng(2);
  Eigen::MatrixXd psi = random_matrix(rng, 10, 3);
  psi.col(2) = psi.col(0) + psi.col(1);
  const auto fit = ols_fit(psi, random_matrix(rng, 10, 1));
  EXPECT_TRUE(fit.ill_conditioned);
  EXPECT_EQ(fit.rank, 2);
  EXPECT_NEAR(fit.leverage.sum(), 2.0, 1e-8);
}

TEST(Loo, HandExamples) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 1);
  EXPECT_NEAR(ols_fit(ones, Eigen::VectorXd::Constant(3, 7.0)).eps_loo, 0.0, 1e-25);
  Eigen::VectorXd y(3);
  y << 0, 0, 3;
  EXPECT_NEAR(ols_fit(ones, y).eps_loo, 4.5, 1e-12);
  EXPECT_NEAR(refit_loo(ones, y), 4.5, 1e-12);
}

TEST(Loo, FastFormulaEqualsExplicitRefits) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<Eigen::Index>(5 + rng.below(36));
    const auto p = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(n - 1)));
    const auto psi = random_matrix(rng, n, p);
    const Eigen::VectorXd y = random_matrix(rng, n, 1);
    const auto fit = ols_fit(psi, y);
    if (!std::isfinite(fit.eps_loo)) continue;
    EXPECT_NEAR(fit.eps_loo, refit_loo(psi, y), 1e-8 * refit_loo(psi, y)) << "N=" << n << " P=" << p;
    EXPECT_NEAR(fit.leverage.sum(), static_cast<double>(fit.rank), 1e-8);
    EXPECT_GE(fit.leverage.minCoeff(), -1e-10);
    EXPECT_LE(fit.leverage.maxCoeff(), 1.0 + 1e-10);
  }
}

TEST(Loo, IncrementalPathMatchesBatchFits) {
  Rng rng(4);
  const auto psi = random_matrix(rng, 30, 8);
  const Eigen::VectorXd y = random_matrix(rng, 30, 1);
  const auto path = prefix_loo_path(psi, y);
  ASSERT_EQ(path.size(), 8u);
  for (Eigen::Index j = 1; j <= 8; ++j)
    EXPECT_NEAR(path[static_cast<std::size_t>(j - 1)], ols_fit(psi.leftCols(j), y).eps_loo, 1e-10);
}

TEST(Loo, PathStopsAtDependentColumn) {
  Rng rng(6);
  Eigen::MatrixXd psi = random_matrix(rng, 12, 4);
  psi.col(2) = 2.0 * psi.col(1);
  EXPECT_EQ(prefix_loo_path(psi, random_matrix(rng, 12, 1)).size(), 2u);
}

TEST(RSquared, Examples) {
  Eigen::VectorXd y(4);
  y << 1, 3, 2, 7;
  EXPECT_DOUBLE_EQ(r_squared(y, y), 1.0);
  Eigen::VectorXd a(2), b(2);
  a << 0, 2;
  b << 1, 1;
  EXPECT_DOUBLE_EQ(r_squared(a, b), 0.5);
  EXPECT_THROW(r_squared(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Zero(3)), UndefinedMetricError);
}

TEST(RSquared, MseInvariantUnderCommonShift) {
  Rng rng(7);
  const Eigen::VectorXd y = random_matrix(rng, 15, 1), p = random_matrix(rng, 15, 1);
  const double shifted = r_squared((y.array() + 3.0).matrix(), (p.array() + 3.0).matrix());
  EXPECT_NEAR(shifted, r_squared(y, p), 1e-12);
}
