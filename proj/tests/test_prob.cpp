#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rpce/prob.hpp"

using namespace rpce;

namespace {
std::vector<Marginal> all_families() {
  return {Marginal::uniform(-2.0, 5.0), Marginal::gaussian(6.0, 1.5), Marginal::lognormal(2e-3, 2e-4),
          Marginal::gumbel(5e4, 7.5e3)};
}
}  // namespace

TEST(Lhs, OnePointPerStratum) {
  InputModel m({Marginal::uniform(0.0, 1.0)});
  const auto ed = lhs_sample(m, 4, 11);
  std::vector<int> hit(4, 0);
  for (Eigen::Index i = 0; i < 4; ++i) hit[static_cast<std::size_t>(std::min(3.0, std::floor(ed.x(i, 0) * 4)))]++;
  EXPECT_EQ(hit, std::vector<int>({1, 1, 1, 1}));
}

TEST(Lhs, GaussianStrataCoverage) {
  InputModel m({Marginal::gaussian(0, 1), Marginal::gaussian(0, 1)});
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto ed = lhs_sample(m, 100, seed);
    for (int j = 0; j < 2; ++j) {
      std::vector<double> u;
      for (Eigen::Index i = 0; i < 100; ++i) u.push_back(normal_cdf(ed.x(i, j)));
      std::sort(u.begin(), u.end());
      for (int i = 0; i < 100; ++i) {
        EXPECT_GE(u[static_cast<std::size_t>(i)], i / 100.0 - 1e-12);
        EXPECT_LE(u[static_cast<std::size_t>(i)], (i + 1) / 100.0 + 1e-12);
      }
    }
  }
}

TEST(Lhs, CenteredModeUsesMidpoints) {
  InputModel m({Marginal::uniform(0.0, 1.0)});
  auto ed = lhs_sample(m, 5, 3, LhsMode::Centered);
  std::vector<double> v(ed.x.data(), ed.x.data() + 5);
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(v[static_cast<std::size_t>(i)], (i + 0.5) / 5.0, 1e-15);
}

TEST(Lhs, SinMeanWithinMonteCarloBand) {
  const double pi = std::numbers::pi;
  InputModel m({Marginal::uniform(-pi, pi), Marginal::uniform(-pi, pi), Marginal::uniform(-pi, pi)});
  const auto ed = lhs_sample(m, 10000, 5);
  const double mean = ed.x.col(0).array().sin().mean();
  EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(0.5 / 10000.0));
}

TEST(Lhs, Deterministic) {
  InputModel m({Marginal::gaussian(0, 1), Marginal::gumbel(1, 2)});
  const auto a = lhs_sample(m, 37, 8), b = lhs_sample(m, 37, 8), c = lhs_sample(m, 37, 9);
  EXPECT_TRUE((a.x.array() == b.x.array()).all());
  EXPECT_FALSE((a.x.array() == c.x.array()).all());
}

TEST(Lhs, StandardizedSamplesPassKolmogorovSmirnov) {
  InputModel m({Marginal::uniform(1, 3), Marginal::gaussian(6, 1), Marginal::lognormal(2.1e11, 2.1e10),
                Marginal::gumbel(5e4, 7.5e3)});
  const auto ed = lhs_sample(m, 10000, 21);
  const Eigen::MatrixXd z = m.to_standard(ed.x);
  const double crit = 1.63 / std::sqrt(10000.0);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> v(z.col(j).data(), z.col(j).data() + z.rows());
    std::sort(v.begin(), v.end());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double f = j == 0 ? 0.5 * (v[i] + 1.0) : normal_cdf(v[i]);
      d = std::max({d, std::abs(f - static_cast<double>(i) / 1e4), std::abs(f - static_cast<double>(i + 1) / 1e4)});
    }
    EXPECT_LT(d, crit) << "column " << j;
  }
}

TEST(Marginal, ToStandardExamples) {
  EXPECT_DOUBLE_EQ(Marginal::uniform(0, 2).to_standard(1.0), 0.0);
  EXPECT_DOUBLE_EQ(Marginal::gaussian(6, 1).to_standard(6.0), 0.0);
  const auto g = Marginal::gumbel(5e4, 7.5e3);
  EXPECT_NEAR(g.to_standard(g.quantile(0.5)), 0.0, 1e-12);
}

TEST(Marginal, QuantileExamples) {
  EXPECT_DOUBLE_EQ(Marginal::uniform(-3, 7).quantile(0.5), 2.0);
  EXPECT_NEAR(Marginal::gaussian(0, 1).quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_THROW(Marginal::gaussian(0, 1).quantile(0.0), DomainError);
  EXPECT_THROW(Marginal::gaussian(0, 1).quantile(1.0), DomainError);
}

TEST(Marginal, QuantileCdfRoundTrip) {
  for (const auto& m : all_families())
    for (double u : {1e-4, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999, 1 - 1e-4}) {
      const double x = m.quantile(u);
      EXPECT_NEAR(m.cdf(x), u, 1e-9 * u) << kind_name(m.kind()) << " u=" << u;
      EXPECT_NEAR(m.from_standard(m.to_standard(x)), x, 1e-9 * std::max(1.0, std::abs(x)));
    }
}

TEST(Marginal, MomentsFromParameters) {
  const auto ln = Marginal::lognormal(2.1e11, 2.1e10);
  const double z = ln.lognormal_zeta(), l = ln.lognormal_lambda();
  EXPECT_NEAR(std::exp(l + z * z / 2), 2.1e11, 1e-3);
  EXPECT_NEAR(std::sqrt(std::expm1(z * z)) * 2.1e11, 2.1e10, 1e-2);
  const auto g = Marginal::gumbel(5e4, 7.5e3);
  EXPECT_NEAR(g.gumbel_scale() * std::numbers::pi / std::sqrt(6.0), 7.5e3, 1e-8);
  EXPECT_NEAR(g.gumbel_location() + std::numbers::egamma * g.gumbel_scale(), 5e4, 1e-8);
}

TEST(Marginal, GumbelSampleMoments) {
  InputModel m({Marginal::gumbel(5e4, 7.5e3)});
  const auto ed = lhs_sample(m, 1000000, 4);
  const double mean = ed.x.col(0).mean();
  const double sd = std::sqrt((ed.x.col(0).array() - mean).square().mean());
  EXPECT_NEAR(mean, 5e4, 20.0);
  EXPECT_NEAR(sd, 7.5e3, 20.0);
}

TEST(Marginal, SupportViolationIsDomainError) {
  InputModel m({Marginal::uniform(0, 1), Marginal::lognormal(1, 0.1)});
  Eigen::MatrixXd x(2, 2);
  x << 0.5, 1.0, 1.5, -1.0;
  try {
    m.to_standard(x);
    FAIL();
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1.5"), std::string::npos);
  }
}

TEST(Marginal, InvalidParameters) {
  EXPECT_THROW(Marginal::uniform(1, 1), ParameterError);
  EXPECT_THROW(Marginal::gaussian(0, 0), ParameterError);
  EXPECT_THROW(Marginal::lognormal(-1, 1), ParameterError);
  EXPECT_THROW(Marginal::gumbel(0, -1), ParameterError);
}

TEST(Serialization, InputModelJsonRoundTrip) {
  InputModel m(all_families());
  EXPECT_EQ(input_model_from_json(to_json(m)), m);
  EXPECT_THROW(input_model_from_json(nlohmann::json::parse(R"([{"kind":"beta","params":[1,2]}])")), FormatError);
  EXPECT_THROW(input_model_from_json(nlohmann::json::parse(R"([{"kind":"uniform"}])")), FormatError);
}

TEST(Serialization, DesignCsvRoundTripIsExact) {
  InputModel m({Marginal::gaussian(0, 1), Marginal::uniform(-1, 4)});
  auto ed = lhs_sample(m, 20, 2);
  ed.y = ed.x.col(0).array().exp();
  std::stringstream ss;
  write_design_csv(ss, ed);
  const auto back = read_design_csv(ss);
  EXPECT_TRUE((back.x.array() == ed.x.array()).all());
  EXPECT_TRUE((back.y.array() == ed.y.array()).all());
}

TEST(Serialization, DesignCsvErrors) {
  std::stringstream bad_header("a,b\n1,2\n");
  EXPECT_THROW(read_design_csv(bad_header), FormatError);
  std::stringstream ragged("x1,x2,y\n1,2,3\n1,2\n");
  EXPECT_THROW(read_design_csv(ragged), FormatError);
  std::stringstream nan("x1,y\n1,abc\n");
  EXPECT_THROW(read_design_csv(nan), FormatError);
  std::stringstream no_y("x1,x2\n1,2\n");
  EXPECT_FALSE(read_design_csv(no_y).has_response());
}
