#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rpce/bench.hpp"
#include "rpce/pce.hpp"

using namespace rpce;

TEST(BuildSparse, LinearTargetExact) {
  InputModel in({Marginal::gaussian(0, 1)});
  auto ed = lhs_sample(in, 10, 3);
  ed.y = 2.0 * ed.x.col(0);
  for (auto m : {RankMethod::Lars, RankMethod::Omp}) {
    const auto r = build_sparse(in, ed, m);
    bool found = false;
    for (std::size_t j = 0; j < r.model.size(); ++j)
      if (r.model.alphas[j] == MultiIndex{1}) {
        found = true;
        EXPECT_NEAR(r.model.beta(static_cast<Eigen::Index>(j)), 2.0, 1e-10);
      }
    EXPECT_TRUE(found);
    EXPECT_LT(r.model.eps_loo, 1e-20);
  }
}

TEST(BuildSparse, IshigamiLarsAccuracy) {
  const auto bench = ishigami_benchmark();
  auto ed = lhs_sample(bench.input, 50, 17);
  ed.y = bench.evaluate(ed.x);
  auto test = lhs_sample(bench.input, 10000, 18);
  test.y = bench.evaluate(test.x);
  const auto r = build_sparse(bench.input, ed, RankMethod::Lars);
  EXPECT_GT(r_squared(test.y, r.model.predict(test.x)), 0.85);
}

TEST(BuildSparse, InvariantsOnHistory) {
  const auto bench = ishigami_benchmark();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto ed = lhs_sample(bench.input, 40, seed);
    ed.y = bench.evaluate(ed.x);
    for (auto m : {RankMethod::Lars, RankMethod::Omp}) {
      BuildOptions bo;
      bo.p_max = 12;
      const auto r = build_sparse(bench.input, ed, m, bo);
      ASSERT_FALSE(r.history.empty());
      double best = std::numeric_limits<double>::infinity();
      for (const auto& h : r.history) best = std::min(best, h.eps_min);
      EXPECT_EQ(r.model.eps_loo, best);
      EXPECT_LE(r.model.size(), 39u);
      EXPECT_LE(r.model.size(), total_degree_cardinality(3, r.model.degree));
      // Early stopping never before p = 3, and only after two increases.
      const auto& h = r.history;
      const int last = h.back().degree;
      if (last < bo.p_max) {
        ASSERT_GE(h.size(), 3u);
        EXPECT_GE(last, 3);
        EXPECT_GT(h[h.size() - 1].eps_min, h[h.size() - 2].eps_min);
        EXPECT_GT(h[h.size() - 2].eps_min, h[h.size() - 3].eps_min);
      }
      for (const auto& a : r.model.alphas) EXPECT_LE(a.total_degree(), r.model.degree);
    }
  }
}

TEST(BuildSparse, TooFewPointsOrBadDegree) {
  InputModel in({Marginal::gaussian(0, 1)});
  auto ed = lhs_sample(in, 2, 1);
  ed.y = ed.x.col(0);
  EXPECT_THROW(build_sparse(in, ed, RankMethod::Lars), ParameterError);
  auto ed3 = lhs_sample(in, 5, 1);
  ed3.y = ed3.x.col(0);
  BuildOptions bo;
  bo.p_max = 0;
  EXPECT_THROW(build_sparse(in, ed3, RankMethod::Lars, bo), ParameterError);
}

TEST(BuildSparse, RankedBuildFiltersByDegree) {
  InputModel in({Marginal::gaussian(0, 1), Marginal::gaussian(0, 1)});
  auto ed = lhs_sample(in, 30, 4);
  const Eigen::MatrixXd xi = in.to_standard(ed.x);
  ed.y = (1.0 + xi.col(0).array() + 0.5 * (xi.col(1).array().square() - 1.0) / std::sqrt(2.0)).matrix();
  const std::vector<MultiIndex> ranking{MultiIndex{0, 2}, MultiIndex{5, 0}, MultiIndex{1, 0}, MultiIndex{0, 0},
                                        MultiIndex{1, 1}};
  const auto r = build_sparse_ranked(in, xi, ed.y, ranking);
  EXPECT_LT(r.model.eps_loo, 1e-20);
  std::vector<MultiIndex> expect{MultiIndex{0, 2}, MultiIndex{1, 0}, MultiIndex{0, 0}};
  EXPECT_EQ(r.model.alphas, expect);
  EXPECT_EQ(r.model.degree, 2);
}

TEST(Predict, Examples) {
  PceModel m;
  m.input = InputModel({Marginal::uniform(0, 1), Marginal::gaussian(0, 1)});
  m.alphas = {MultiIndex::zero(2)};
  m.beta = Eigen::VectorXd::Constant(1, 4.25);
  EXPECT_EQ(m.predict(Eigen::MatrixXd(0, 2)).size(), 0);
  Eigen::MatrixXd x(3, 2);
  x << 0.1, -3, 0.5, 0, 0.9, 8;
  EXPECT_TRUE((m.predict(x).array() == 4.25).all());
  x(1, 0) = 1.5;
  EXPECT_THROW(m.predict(x), DomainError);
}

TEST(Predict, TrainingResidualMatchesFit) {
  const auto bench = ishigami_benchmark();
  auto ed = lhs_sample(bench.input, 40, 9);
  ed.y = bench.evaluate(ed.x);
  const auto r = build_sparse(bench.input, ed, RankMethod::Omp);
  const Eigen::MatrixXd psi = design_matrix(families_for(bench.input), r.model.alphas, bench.input.to_standard(ed.x));
  const auto fit = ols_fit(psi, ed.y);
  const double mse_pred = (ed.y - r.model.predict(ed.x)).squaredNorm() / 40.0;
  const double mse_fit = (ed.y - psi * fit.beta).squaredNorm() / 40.0;
  EXPECT_NEAR(mse_pred, mse_fit, 1e-12 * std::max(1.0, mse_fit));
}

TEST(Persistence, RoundTripIsBitExact) {
  const auto bench = ishigami_benchmark();
  auto ed = lhs_sample(bench.input, 50, 2);
  ed.y = bench.evaluate(ed.x);
  auto r = build_sparse(bench.input, ed, RankMethod::Lars);
  r.model.meta.seed = 42;
  const PceModel back = load(save(r.model));
  EXPECT_EQ(back.alphas, r.model.alphas);
  EXPECT_EQ(back.meta, r.model.meta);
  const auto probe = lhs_sample(bench.input, 100, 77);
  const Eigen::VectorXd a = r.model.predict(probe.x), b = back.predict(probe.x);
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(Persistence, Errors) {
  const auto bench = ishigami_benchmark();
  auto ed = lhs_sample(bench.input, 30, 2);
  ed.y = bench.evaluate(ed.x);
  const std::string text = save(build_sparse(bench.input, ed, RankMethod::Lars).model);
  EXPECT_THROW(load(text.substr(0, text.size() / 2)), FormatError);
  auto j = nlohmann::json::parse(text);
  j["version"] = 2;
  EXPECT_THROW(load(j.dump()), VersionError);
  auto k = nlohmann::json::parse(text);
  k["betas"].erase(0);
  EXPECT_THROW(load(k.dump()), FormatError);
}
