#pragma once

// Marginal distributions, the isoprobabilistic map to standardized
// variables, Latin-hypercube designs and their on-disk formats.

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rpce/error.hpp"
#include "rpce/random.hpp"

namespace rpce {

/// Reference measure a marginal is mapped onto.
enum class Reference { StandardNormal, SymmetricUniform };

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Standard normal quantile.
inline double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("normal_quantile: u must lie in (0,1)");
  static const boost::math::normal_distribution<double> standard{};
  return boost::math::quantile(standard, u);
}

/// One-dimensional input distribution.
///
/// Lognormal and Gumbel are parameterized by the mean and standard deviation
/// of the variable itself; the shape parameters are derived on construction.
class Marginal {
public:
  enum class Kind { Uniform, Gaussian, Lognormal, Gumbel };

  static Marginal uniform(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
      throw ParameterError("uniform marginal requires finite a < b");
    return Marginal(Kind::Uniform, a, b);
  }
  static Marginal gaussian(double mean, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mean))
      throw ParameterError("gaussian marginal requires sigma > 0");
    return Marginal(Kind::Gaussian, mean, sigma);
  }
  static Marginal lognormal(double mean, double std) {
    if (!(mean > 0.0) || !(std > 0.0))
      throw ParameterError("lognormal marginal requires mean > 0 and std > 0");
    return Marginal(Kind::Lognormal, mean, std);
  }
  static Marginal gumbel(double mean, double std) {
    if (!(std > 0.0) || !std::isfinite(mean))
      throw ParameterError("gumbel marginal requires std > 0");
    return Marginal(Kind::Gumbel, mean, std);
  }

  Kind kind() const { return kind_; }
  /// Declared parameters: (a,b), (mean,sigma) or (mean,std).
  std::array<double, 2> params() const { return {p0_, p1_}; }

  Reference reference() const {
    return kind_ == Kind::Uniform ? Reference::SymmetricUniform : Reference::StandardNormal;
  }

  bool in_support(double x) const {
    switch (kind_) {
      case Kind::Uniform: return x >= p0_ && x <= p1_;
      case Kind::Lognormal: return x > 0.0 && std::isfinite(x);
      default: return std::isfinite(x);
    }
  }

  double cdf(double x) const {
    if (!in_support(x)) throw DomainError("cdf: point outside support");
    switch (kind_) {
      case Kind::Uniform: return (x - p0_) / (p1_ - p0_);
      case Kind::Gaussian: return normal_cdf((x - p0_) / p1_);
      case Kind::Lognormal: return normal_cdf((std::log(x) - lambda_) / zeta_);
      case Kind::Gumbel: return std::exp(-std::exp(-(x - location_) / scale_));
    }
    return 0.0;
  }

  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0,1)");
    switch (kind_) {
      case Kind::Uniform: return p0_ + u * (p1_ - p0_);
      case Kind::Gaussian: return p0_ + p1_ * normal_quantile(u);
      case Kind::Lognormal: return std::exp(lambda_ + zeta_ * normal_quantile(u));
      case Kind::Gumbel: return location_ - scale_ * std::log(-std::log(u));
    }
    return 0.0;
  }

  /// Map a physical value to the reference variable of this marginal.
  double to_standard(double x) const {
    if (!in_support(x)) throw DomainError("to_standard: point outside support");
    switch (kind_) {
      case Kind::Uniform: return (2.0 * x - (p0_ + p1_)) / (p1_ - p0_);
      case Kind::Gaussian: return (x - p0_) / p1_;
      case Kind::Lognormal: return (std::log(x) - lambda_) / zeta_;
      case Kind::Gumbel: {
        const double t = std::exp(-(x - location_) / scale_);
        // Upper tail through the complement to keep relative precision.
        if (t < std::log(2.0)) {
          const double survival = -std::expm1(-t);
          return -normal_quantile(survival);
        }
        return normal_quantile(std::exp(-t));
      }
    }
    return 0.0;
  }

  /// Inverse of to_standard.
  double from_standard(double z) const {
    switch (kind_) {
      case Kind::Uniform: return 0.5 * (p0_ + p1_) + 0.5 * z * (p1_ - p0_);
      case Kind::Gaussian: return p0_ + p1_ * z;
      case Kind::Lognormal: return std::exp(lambda_ + zeta_ * z);
      case Kind::Gumbel: {
        if (z > 0.0) {
          const double survival = normal_cdf(-z);
          return location_ - scale_ * std::log(-std::log1p(-survival));
        }
        return quantile(normal_cdf(z));
      }
    }
    return 0.0;
  }

  double mean() const {
    switch (kind_) {
      case Kind::Uniform: return 0.5 * (p0_ + p1_);
      default: return p0_;
    }
  }
  double stddev() const {
    if (kind_ == Kind::Uniform) return (p1_ - p0_) / std::sqrt(12.0);
    return p1_;
  }

  /// Underlying normal parameters of a lognormal marginal.
  double lognormal_lambda() const { return lambda_; }
  double lognormal_zeta() const { return zeta_; }
  /// Gumbel location and scale.
  double gumbel_location() const { return location_; }
  double gumbel_scale() const { return scale_; }

  friend bool operator==(const Marginal& a, const Marginal& b) {
    return a.kind_ == b.kind_ && a.p0_ == b.p0_ && a.p1_ == b.p1_;
  }

private:
  Marginal(Kind kind, double p0, double p1) : kind_(kind), p0_(p0), p1_(p1) {
    if (kind_ == Kind::Lognormal) {
      const double cv = p1_ / p0_;
      zeta_ = std::sqrt(std::log1p(cv * cv));
      lambda_ = std::log(p0_) - 0.5 * zeta_ * zeta_;
    } else if (kind_ == Kind::Gumbel) {
      scale_ = p1_ * std::sqrt(6.0) / std::numbers::pi;
      location_ = p0_ - std::numbers::egamma * scale_;
    }
  }

  Kind kind_;
  double p0_;
  double p1_;
  double lambda_ = 0.0;
  double zeta_ = 1.0;
  double location_ = 0.0;
  double scale_ = 1.0;
};

inline std::string_view kind_name(Marginal::Kind k) {
  switch (k) {
    case Marginal::Kind::Uniform: return "uniform";
    case Marginal::Kind::Gaussian: return "gaussian";
    case Marginal::Kind::Lognormal: return "lognormal";
    case Marginal::Kind::Gumbel: return "gumbel";
  }
  return "?";
}

/// Independent marginals defining the joint input distribution.
class InputModel {
public:
  InputModel() = default;
  explicit InputModel(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
    if (marginals_.empty()) throw ParameterError("input model needs at least one marginal");
  }

  std::size_t dim() const { return marginals_.size(); }
  const Marginal& operator[](std::size_t i) const { return marginals_[i]; }
  const std::vector<Marginal>& marginals() const { return marginals_; }

  /// Standardize one physical point.
  Eigen::VectorXd to_standard(std::span<const double> x) const {
    if (x.size() != dim()) throw ShapeError("to_standard: point dimension mismatch");
    Eigen::VectorXd z(dim());
    for (std::size_t i = 0; i < dim(); ++i) z(i) = marginals_[i].to_standard(x[i]);
    return z;
  }

  /// Standardize a design row by row. Support violations are collected and
  /// reported together.
  Eigen::MatrixXd to_standard(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.cols()) != dim())
      throw ShapeError("to_standard: design has " + std::to_string(x.cols()) +
                       " columns, model has " + std::to_string(dim()));
    Eigen::MatrixXd z(x.rows(), x.cols());
    std::string offending;
    int count = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Marginal& m = marginals_[static_cast<std::size_t>(j)];
      for (Eigen::Index n = 0; n < x.rows(); ++n) {
        if (!m.in_support(x(n, j))) {
          if (count < 10)
            offending += " (row " + std::to_string(n) + ", x" + std::to_string(j + 1) + "=" +
                         std::to_string(x(n, j)) + ")";
          ++count;
          continue;
        }
        z(n, j) = m.to_standard(x(n, j));
      }
    }
    if (count > 0)
      throw DomainError("point outside support at " + std::to_string(count) +
                        " coordinate(s):" + offending);
    return z;
  }

  Eigen::MatrixXd from_standard(const Eigen::MatrixXd& z) const {
    if (static_cast<std::size_t>(z.cols()) != dim()) throw ShapeError("from_standard: dimension mismatch");
    Eigen::MatrixXd x(z.rows(), z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      for (Eigen::Index n = 0; n < z.rows(); ++n)
        x(n, j) = marginals_[static_cast<std::size_t>(j)].from_standard(z(n, j));
    return x;
  }

  friend bool operator==(const InputModel&, const InputModel&) = default;

private:
  std::vector<Marginal> marginals_;
};

/// Inputs (physical space, one row per point) and optional responses.
struct ExperimentalDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;  // empty until the model has been evaluated
  std::uint64_t seed = 0;

  Eigen::Index size() const { return x.rows(); }
  bool has_response() const { return y.size() == x.rows() && x.rows() > 0; }
};

enum class LhsMode { Jittered, Centered };

/// Latin-hypercube sample: in every dimension each probability stratum
/// ((i-1)/N, i/N) receives exactly one point.
inline ExperimentalDesign lhs_sample(const InputModel& model, Eigen::Index n, std::uint64_t seed,
                                     LhsMode mode = LhsMode::Jittered) {
  if (n < 1) throw ParameterError("lhs_sample: N must be >= 1");
  ExperimentalDesign ed;
  ed.seed = seed;
  ed.x.resize(n, static_cast<Eigen::Index>(model.dim()));
  const double width = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < model.dim(); ++j) {
    Rng rng(substream_seed(seed, {0x4c4853ULL, j}));
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double offset = mode == LhsMode::Centered ? 0.5 : rng.uniform_open();
      const double u = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + offset) * width;
      ed.x(i, static_cast<Eigen::Index>(j)) = model[j].quantile(u);
    }
  }
  return ed;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const Marginal& m) {
  const auto p = m.params();
  return {{"kind", std::string(kind_name(m.kind()))}, {"params", {p[0], p[1]}}};
}

inline Marginal marginal_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const auto& params = j.at("params");
    if (!params.is_array() || params.size() != 2)
      throw FormatError("marginal '" + kind + "' expects two parameters");
    const double a = params[0].get<double>();
    const double b = params[1].get<double>();
    if (kind == "uniform") return Marginal::uniform(a, b);
    if (kind == "gaussian" || kind == "normal") return Marginal::gaussian(a, b);
    if (kind == "lognormal") return Marginal::lognormal(a, b);
    if (kind == "gumbel") return Marginal::gumbel(a, b);
    throw FormatError("unknown marginal kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed marginal: ") + e.what());
  }
}

inline nlohmann::json to_json(const InputModel& model) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : model.marginals()) arr.push_back(to_json(m));
  return arr;
}

inline InputModel input_model_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("input model must be a JSON array");
  std::vector<Marginal> ms;
  for (const auto& e : j) ms.push_back(marginal_from_json(e));
  return InputModel(std::move(ms));
}

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Write `x1..xM,y` CSV. The y column is written only when responses exist.
inline void write_design_csv(std::ostream& os, const ExperimentalDesign& ed) {
  const bool with_y = ed.has_response();
  for (Eigen::Index j = 0; j < ed.x.cols(); ++j) os << (j ? "," : "") << 'x' << (j + 1);
  if (with_y) os << ",y";
  os << '\n';
  for (Eigen::Index n = 0; n < ed.x.rows(); ++n) {
    for (Eigen::Index j = 0; j < ed.x.cols(); ++j) os << (j ? "," : "") << format_double(ed.x(n, j));
    if (with_y) os << ',' << format_double(ed.y(n));
    os << '\n';
  }
}

/// Read a design CSV. A trailing `y` header column is optional.
inline ExperimentalDesign read_design_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("design CSV: missing header");
  auto header = split_csv_line(line);
  if (!header.empty() && !header.back().empty() && header.back().back() == '\r')
    header.back().remove_suffix(1);
  bool with_y = !header.empty() && header.back() == "y";
  const std::size_t m = header.size() - (with_y ? 1 : 0);
  if (m == 0) throw FormatError("design CSV: no input columns");
  for (std::size_t j = 0; j < m; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      throw FormatError("design CSV: unexpected header column '" + std::string(header[j]) + "'");
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw FormatError("design CSV: row " + std::to_string(rows + 1) + " has " +
                        std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(header.size()));
    for (auto c : cells) values.push_back(parse_double(c));
    ++rows;
  }
  ExperimentalDesign ed;
  const auto cols = static_cast<Eigen::Index>(header.size());
  ed.x.resize(rows, static_cast<Eigen::Index>(m));
  if (with_y) ed.y.resize(rows);
  for (Eigen::Index n = 0; n < rows; ++n) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j)
      ed.x(n, j) = values[static_cast<std::size_t>(n * cols + j)];
    if (with_y) ed.y(n) = values[static_cast<std::size_t>(n * cols + cols - 1)];
  }
  return ed;
}

}  // namespace rpce
