#pragma once

// Sobol' indices from orthonormal PCE coefficients, the Ishigami closed
// forms, and a pick-freeze Monte-Carlo estimator used as an oracle.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "rpce/error.hpp"
#include "rpce/pce.hpp"
#include "rpce/prob.hpp"
#include "rpce/random.hpp"

namespace rpce {

struct SobolIndices {
  std::vector<double> first_order;
  std::vector<double> total;
  /// Partial index per variable subset (0-based, ascending); only subsets
  /// that carry variance are listed.
  std::map<std::vector<int>, double> interactions;
  double variance = 0.0;
  double mean = 0.0;
  /// Monte-Carlo standard errors (empty for exact indices).
  std::vector<double> first_order_se;
  std::vector<double> total_se;

  double subset(const std::vector<int>& u) const {
    const auto it = interactions.find(u);
    return it == interactions.end() ? 0.0 : it->second;
  }
};

inline SobolIndices indices_from_pce(const PceModel& model) {
  const std::size_t m = model.input.dim();
  SobolIndices s;
  s.first_order.assign(m, 0.0);
  s.total.assign(m, 0.0);
  double d = 0.0;
  for (std::size_t j = 0; j < model.alphas.size(); ++j) {
    const double b2 = model.beta(static_cast<Eigen::Index>(j)) * model.beta(static_cast<Eigen::Index>(j));
    if (model.alphas[j].is_zero()) {
      s.mean += model.beta(static_cast<Eigen::Index>(j));
      continue;
    }
    d += b2;
    const auto u = model.alphas[j].support();
    s.interactions[u] += b2;
    for (int i : u) s.total[static_cast<std::size_t>(i)] += b2;
  }
  if (!(d > 0.0)) throw UndefinedMetricError("Sobol indices undefined: the model has zero variance");
  s.variance = d;
  for (auto& [u, v] : s.interactions) {
    v /= d;
    if (u.size() == 1) s.first_order[static_cast<std::size_t>(u[0])] = v;
  }
  for (auto& t : s.total) t /= d;
  return s;
}

/// Exact indices of sin x1 + a sin^2 x2 + b x3^4 sin x1 with x_i ~ U[-pi, pi].
inline SobolIndices analytic_ishigami(double a = 7.0, double b = 0.1) {
  const double pi = std::numbers::pi;
  const double pi4 = std::pow(pi, 4), pi8 = std::pow(pi, 8);
  const double d = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
  const double d1 = b * pi4 / 5.0 + b * b * pi8 / 50.0 + 0.5;
  const double d2 = a * a / 8.0;
  const double d13 = 8.0 * b * b * pi8 / 225.0;
  SobolIndices s;
  s.variance = d;
  s.mean = a / 2.0;
  s.first_order = {d1 / d, d2 / d, 0.0};
  s.total = {(d1 + d13) / d, d2 / d, d13 / d};
  s.interactions[{0}] = d1 / d;
  s.interactions[{1}] = d2 / d;
  if (d13 > 0.0) s.interactions[{0, 2}] = d13 / d;
  return s;
}

/// Vectorized response: one row per point, one value per row.
using BatchFunction = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

/// Independent (non-stratified) sample of the input model.
inline Eigen::MatrixXd iid_sample(const InputModel& input, Eigen::Index n, std::uint64_t seed) {
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(input.dim()));
  for (std::size_t j = 0; j < input.dim(); ++j) {
    Rng rng(substream_seed(seed, {0x494944, j}));
    for (Eigen::Index r = 0; r < n; ++r) x(r, static_cast<Eigen::Index>(j)) = input[j].quantile(rng.uniform_open());
  }
  return x;
}

/// Pick-freeze estimates: first order (Saltelli 2010) and total (Jansen),
/// with standard errors from the per-sample terms.
inline SobolIndices mc_sobol(const BatchFunction& f, const InputModel& input, Eigen::Index n, std::uint64_t seed) {
  if (n < 1000) throw ParameterError("mc_sobol: need at least 1000 samples");
  const Eigen::MatrixXd a = iid_sample(input, n, substream_seed(seed, {1}));
  const Eigen::MatrixXd b = iid_sample(input, n, substream_seed(seed, {2}));
  const Eigen::VectorXd fa = f(a), fb = f(b);
  if (fa.size() != n || fb.size() != n) throw ShapeError("mc_sobol: function returned the wrong number of values");
  const double mean = 0.5 * (fa.mean() + fb.mean());
  const double var = ((fa.array() - mean).square().sum() + (fb.array() - mean).square().sum()) /
                     static_cast<double>(2 * n - 1);
  if (!(var > 0.0)) throw UndefinedMetricError("mc_sobol: the response has zero variance");
  const std::size_t m = input.dim();
  SobolIndices s;
  s.mean = mean;
  s.variance = var;
  s.first_order.resize(m);
  s.total.resize(m);
  s.first_order_se.resize(m);
  s.total_se.resize(m);
  const double sqn = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::MatrixXd ab = a;
    ab.col(static_cast<Eigen::Index>(i)) = b.col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd fab = f(ab);
    const Eigen::ArrayXd t1 = fb.array() * (fab - fa).array();
    const Eigen::ArrayXd t2 = 0.5 * (fa - fab).array().square();
    auto sd = [](const Eigen::ArrayXd& t) {
      return std::sqrt((t - t.mean()).square().sum() / static_cast<double>(t.size() - 1));
    };
    s.first_order[i] = t1.mean() / var;
    s.total[i] = t2.mean() / var;
    s.first_order_se[i] = sd(t1) / sqn / var;
    s.total_se[i] = sd(t2) / sqn / var;
    s.interactions[{static_cast<int>(i)}] = s.first_order[i];
  }
  return s;
}

inline std::string subset_label(const std::vector<int>& u) {
  std::string s;
  for (std::size_t i = 0; i < u.size(); ++i) s += (i ? "-" : "") + std::string("x") + std::to_string(u[i] + 1);
  return s;
}

/// subset,S,S_total (S_total only for single variables).
inline void write_sobol_csv(std::ostream& os, const SobolIndices& s) {
  os << "subset,S,S_total\n";
  for (std::size_t i = 0; i < s.first_order.size(); ++i)
    os << subset_label({static_cast<int>(i)}) << ',' << format_double(s.first_order[i]) << ','
       << format_double(s.total[i]) << '\n';
  for (const auto& [u, v] : s.interactions)
    if (u.size() > 1) os << subset_label(u) << ',' << format_double(v) << ",\n";
}

}  // namespace rpce
