#pragma once

// Multi-indices, total-degree enumeration and tensorized orthonormal
// polynomial bases (Hermite for standard-normal inputs, Legendre for inputs
// standardized to [-1,1]).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "rpce/error.hpp"
#include "rpce/prob.hpp"

namespace rpce {

/// Highest univariate degree with a tabulated normalization constant.
inline constexpr int kMaxUnivariateDegree = 30;

/// Exponent vector of a tensorized polynomial.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> alpha) : alpha_(std::move(alpha)) {
    for (int a : alpha_) {
      if (a < 0) throw ParameterError("multi-index entries must be non-negative");
      degree_ += a;
    }
  }
  MultiIndex(std::initializer_list<int> alpha) : MultiIndex(std::vector<int>(alpha)) {}

  static MultiIndex zero(std::size_t m) { return MultiIndex(std::vector<int>(m, 0)); }

  std::size_t dim() const { return alpha_.size(); }
  int total_degree() const { return degree_; }
  int operator[](std::size_t i) const { return alpha_[i]; }
  const std::vector<int>& values() const { return alpha_; }
  bool is_zero() const { return degree_ == 0; }

  /// Variables with a positive exponent, ascending.
  std::vector<int> support() const {
    std::vector<int> s;
    for (std::size_t i = 0; i < alpha_.size(); ++i)
      if (alpha_[i] > 0) s.push_back(static_cast<int>(i));
    return s;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.alpha_ == b.alpha_; }

  /// Graded-lexicographic order: total degree first, then lexicographic.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
    if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
    return a.alpha_ <=> b.alpha_;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < alpha_.size(); ++i) s += (i ? "," : "") + std::to_string(alpha_[i]);
    return s + ")";
  }

private:
  std::vector<int> alpha_;
  int degree_ = 0;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& a) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int v : a.values()) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/// binom(n, k) with overflow detection.
inline std::size_t checked_binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // result * (n - k + i) / i stays integral at every step
  unsigned __int128 r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::size_t>::max())
      throw SizeError("basis cardinality binom(" + std::to_string(n) + "," + std::to_string(k) +
                      ") overflows the platform size type");
  }
  return static_cast<std::size_t>(r);
}

/// card{alpha in N^M : |alpha| <= p} = binom(p+M, p).
inline std::size_t total_degree_cardinality(std::size_t m, int p) {
  if (m < 1 || p < 0) throw ParameterError("total-degree set needs M >= 1 and p >= 0");
  return checked_binomial(static_cast<std::size_t>(p) + m, static_cast<std::size_t>(p));
}

namespace detail {
inline void compositions(std::size_t m, int degree, std::vector<int>& cur, std::size_t pos,
                         std::vector<MultiIndex>& out) {
  if (pos + 1 == m) {
    cur[pos] = degree;
    out.emplace_back(cur);
    return;
  }
  for (int v = 0; v <= degree; ++v) {
    cur[pos] = v;
    compositions(m, degree - v, cur, pos + 1, out);
  }
  cur[pos] = 0;
}
}  // namespace detail

/// All multi-indices with exactly the given total degree, lexicographic.
inline std::vector<MultiIndex> enumerate_degree(std::size_t m, int degree) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(m, 0);
  detail::compositions(m, degree, cur, 0, out);
  return out;
}

/// A_full(p) in graded-lexicographic order. Because the order is graded,
/// A_full(q) is a prefix of A_full(p) for q <= p.
inline std::vector<MultiIndex> enumerate_total_degree(std::size_t m, int p) {
  const std::size_t count = total_degree_cardinality(m, p);
  std::vector<MultiIndex> out;
  out.reserve(count);
  for (int d = 0; d <= p; ++d) {
    auto block = enumerate_degree(m, d);
    out.insert(out.end(), std::make_move_iterator(block.begin()), std::make_move_iterator(block.end()));
  }
  return out;
}

/// Zero-based position of alpha in the infinite graded-lexicographic sequence.
inline std::size_t graded_lex_position(const MultiIndex& alpha) {
  const std::size_t m = alpha.dim();
  const int d = alpha.total_degree();
  std::size_t pos = d == 0 ? 0 : total_degree_cardinality(m, d - 1);
  int remaining = d;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const std::size_t parts_after = m - i - 1;
    for (int v = 0; v < alpha[i]; ++v) {
      const auto r = static_cast<std::size_t>(remaining - v);
      pos += checked_binomial(r + parts_after - 1, parts_after - 1);
    }
    remaining -= alpha[i];
  }
  return pos;
}

enum class Family { Hermite, Legendre };

inline Family family_for(Reference r) {
  return r == Reference::StandardNormal ? Family::Hermite : Family::Legendre;
}

inline std::vector<Family> families_for(const InputModel& model) {
  std::vector<Family> f;
  for (const auto& m : model.marginals()) f.push_back(family_for(m.reference()));
  return f;
}

namespace detail {
inline const std::array<double, kMaxUnivariateDegree + 2>& sqrt_table() {
  static const auto table = [] {
    std::array<double, kMaxUnivariateDegree + 2> t{};
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::sqrt(static_cast<double>(i));
    return t;
  }();
  return table;
}
inline const std::array<double, kMaxUnivariateDegree + 1>& legendre_norm_table() {
  static const auto table = [] {
    std::array<double, kMaxUnivariateDegree + 1> t{};
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::sqrt(2.0 * static_cast<double>(i) + 1.0);
    return t;
  }();
  return table;
}
}  // namespace detail

/// Orthonormal polynomials of degrees 0..max_degree at xi, written to out.
inline void eval_univariate_all(Family family, int max_degree, double xi, std::span<double> out) {
  if (max_degree < 0 || max_degree > kMaxUnivariateDegree)
    throw ParameterError("univariate degree must lie in [0, " + std::to_string(kMaxUnivariateDegree) + "]");
  if (out.size() < static_cast<std::size_t>(max_degree) + 1) throw ShapeError("eval_univariate_all: output too short");
  out[0] = 1.0;
  if (max_degree == 0) return;
  const auto& sq = detail::sqrt_table();
  if (family == Family::Hermite) {
    // psi_{d+1} = (xi psi_d - sqrt(d) psi_{d-1}) / sqrt(d+1)
    out[1] = xi;
    for (int d = 1; d < max_degree; ++d)
      out[d + 1] = (xi * out[d] - sq[d] * out[d - 1]) / sq[d + 1];
  } else {
    // Legendre recurrence on P_d, then scaled by sqrt(2d+1).
    const auto& nrm = detail::legendre_norm_table();
    double p_prev = 1.0;
    double p_cur = xi;
    out[1] = nrm[1] * xi;
    for (int d = 1; d < max_degree; ++d) {
      const double p_next = ((2.0 * d + 1.0) * xi * p_cur - d * p_prev) / (d + 1.0);
      p_prev = p_cur;
      p_cur = p_next;
      out[d + 1] = nrm[d + 1] * p_cur;
    }
  }
}

/// Orthonormal univariate polynomial of the given degree.
inline double eval_univariate(Family family, int degree, double xi) {
  std::array<double, kMaxUnivariateDegree + 1> buf{};
  eval_univariate_all(family, degree, xi, buf);
  return buf[static_cast<std::size_t>(degree)];
}

/// Polynomial families per dimension plus an ordered active set.
struct BasisSpec {
  std::vector<Family> families;
  std::vector<MultiIndex> alphas;

  BasisSpec() = default;
  BasisSpec(std::vector<Family> f, std::vector<MultiIndex> a) : families(std::move(f)), alphas(std::move(a)) {
    validate();
  }

  void validate() const {
    std::unordered_set<MultiIndex, MultiIndexHash> seen;
    for (const auto& a : alphas) {
      if (a.dim() != families.size()) throw ShapeError("multi-index dimension does not match the basis families");
      if (!seen.insert(a).second) throw ParameterError("duplicate multi-index " + a.to_string() + " in basis");
    }
  }
};

/// Psi[n, j] = prod_i pi_{alpha_j,i}(xi_{n,i}); columns follow `alphas`.
inline Eigen::MatrixXd design_matrix(std::span<const Family> families, std::span<const MultiIndex> alphas,
                                     const Eigen::MatrixXd& xi) {
  const auto m = families.size();
  if (static_cast<std::size_t>(xi.cols()) != m)
    throw ShapeError("design_matrix: standardized inputs have " + std::to_string(xi.cols()) +
                     " columns, basis has " + std::to_string(m));
  int max_deg = 0;
  for (const auto& a : alphas) {
    if (a.dim() != m) throw ShapeError("design_matrix: multi-index dimension mismatch");
    for (std::size_t i = 0; i < m; ++i) max_deg = std::max(max_deg, a[i]);
  }
  const Eigen::Index n = xi.rows();
  // tables[i] holds pi_d(xi_{.,i}) for d = 0..max_deg, one column per degree
  std::vector<Eigen::MatrixXd> tables(m, Eigen::MatrixXd(n, max_deg + 1));
  std::vector<double> buf(static_cast<std::size_t>(max_deg) + 1);
  for (std::size_t i = 0; i < m; ++i)
    for (Eigen::Index r = 0; r < n; ++r) {
      eval_univariate_all(families[i], max_deg, xi(r, static_cast<Eigen::Index>(i)), buf);
      for (int d = 0; d <= max_deg; ++d) tables[i](r, d) = buf[static_cast<std::size_t>(d)];
    }
  Eigen::MatrixXd psi(n, static_cast<Eigen::Index>(alphas.size()));
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    auto col = psi.col(static_cast<Eigen::Index>(j));
    col.setOnes();
    for (std::size_t i = 0; i < m; ++i) {
      const int d = alphas[j][i];
      if (d > 0) col.array() *= tables[i].col(d).array();
    }
  }
  return psi;
}

inline Eigen::MatrixXd design_matrix(const BasisSpec& spec, const Eigen::MatrixXd& xi) {
  return design_matrix(spec.families, spec.alphas, xi);
}

}  // namespace rpce
