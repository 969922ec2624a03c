#pragma once

// Greedy rankers: orthogonal matching pursuit and least angle regression.
//
// Both rankers only touch the full candidate dictionary through products
// Psi^T v. rank_batch() advances many independent ranking jobs in lockstep
// (different row subsets and responses over one shared dictionary) so those
// products become one matrix-matrix multiply per step. The single-job entry
// points are thin wrappers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "rpce/error.hpp"
#include "rpce/regress.hpp"

namespace rpce {

enum class RankMethod { Omp, Lars };

struct RankOptions {
  /// Score candidates by |R^T psi| on raw columns instead of unit-normalized
  /// ones (OMP only; LARS geometry always uses normalized columns).
  bool raw_correlation = false;
};

/// Candidate columns in rank order with the LOO error of each OLS prefix.
struct RankedBasis {
  std::vector<Eigen::Index> order;  // column indices into the dictionary
  std::vector<double> eps_path;     // eps_LOO of the fit on order[0..j]
  std::vector<double> delta_eps;    // eps_path[j] - eps_path[j-1], eps_LOO^0 = 0

  std::size_t size() const { return order.size(); }
};

struct RankJob {
  RankMethod method = RankMethod::Omp;
  std::vector<Eigen::Index> rows;  // training rows of the dictionary; empty means all
  Eigen::VectorXd y;               // responses at `rows`
  Eigen::Index j_max = -1;         // negative: min(n - 1, P)
};

/// Fill eps_path/delta_eps for a given order by OLS refits on each prefix,
/// using the given rows of psi (empty: all rows). The order is truncated at
/// the first numerically dependent column.
inline void attach_loo_path(RankedBasis& rb, const Eigen::MatrixXd& psi, const std::vector<Eigen::Index>& rows,
                            const Eigen::VectorXd& y) {
  const Eigen::Index n = rows.empty() ? psi.rows() : static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd ordered(n, static_cast<Eigen::Index>(rb.order.size()));
  for (std::size_t j = 0; j < rb.order.size(); ++j) {
    auto col = ordered.col(static_cast<Eigen::Index>(j));
    if (rows.empty())
      col = psi.col(rb.order[j]);
    else
      for (std::size_t r = 0; r < rows.size(); ++r) col(static_cast<Eigen::Index>(r)) = psi(rows[r], rb.order[j]);
  }
  rb.eps_path = prefix_loo_path(ordered, y);
  rb.order.resize(rb.eps_path.size());
  rb.delta_eps.resize(rb.eps_path.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < rb.eps_path.size(); ++j) {
    rb.delta_eps[j] = rb.eps_path[j] - prev;
    prev = rb.eps_path[j];
  }
}

namespace detail {

inline constexpr double kConstantColumnTolerance = 1e-12;
inline constexpr double kLarsDependence = 1e-8;

class Stepper {
public:
  virtual ~Stepper() = default;
  bool done() const { return done_; }
  /// Vector (length = dictionary rows) whose projection Psi^T v is needed next.
  virtual const Eigen::VectorXd& request() const = 0;
  virtual void consume(const Eigen::Ref<const Eigen::VectorXd>& projection) = 0;
  virtual std::vector<Eigen::Index> order() const = 0;

protected:
  bool done_ = false;
};

inline Eigen::VectorXd gather_col(const Eigen::MatrixXd& psi, const std::vector<Eigen::Index>& rows,
                                  Eigen::Index col) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) v(static_cast<Eigen::Index>(r)) = psi(rows[r], col);
  return v;
}

class OmpStepper final : public Stepper {
public:
  OmpStepper(const Eigen::MatrixXd& psi, std::vector<Eigen::Index> rows, const Eigen::VectorXd& y,
             Eigen::Index j_max, Eigen::VectorXd inv_scale)
      : psi_(psi), rows_(std::move(rows)), j_max_(j_max), ls_(y), inv_scale_(std::move(inv_scale)),
        active_(static_cast<std::size_t>(psi.cols()), 0), embedded_(Eigen::VectorXd::Zero(psi.rows())) {
    if (j_max_ <= 0) done_ = true;
    embed();
  }

  const Eigen::VectorXd& request() const override { return embedded_; }

  void consume(const Eigen::Ref<const Eigen::VectorXd>& corr) override {
    Eigen::Index best = -1;
    double best_score = -1.0;
    for (Eigen::Index a = 0; a < corr.size(); ++a) {
      if (active_[static_cast<std::size_t>(a)] || inv_scale_(a) == 0.0) continue;
      const double s = std::abs(corr(a)) * inv_scale_(a);
      if (s > best_score) {
        best_score = s;
        best = a;
      }
    }
    if (best < 0 || !ls_.append(gather_col(psi_, rows_, best))) {
      done_ = true;
      return;
    }
    active_[static_cast<std::size_t>(best)] = 1;
    order_.push_back(best);
    if (static_cast<Eigen::Index>(order_.size()) >= j_max_) done_ = true;
    embed();
  }

  std::vector<Eigen::Index> order() const override { return order_; }

private:
  void embed() {
    const auto& r = ls_.residual();
    for (std::size_t i = 0; i < rows_.size(); ++i) embedded_(rows_[i]) = r(static_cast<Eigen::Index>(i));
  }

  const Eigen::MatrixXd& psi_;
  std::vector<Eigen::Index> rows_;
  Eigen::Index j_max_;
  IncrementalLeastSquares ls_;
  Eigen::VectorXd inv_scale_;
  std::vector<char> active_;
  std::vector<Eigen::Index> order_;
  Eigen::VectorXd embedded_;
};

/// LARS on centered, unit-normalized columns with a centered response. A
/// constant (intercept) column, if present, takes rank 1.
class LarsStepper final : public Stepper {
public:
  LarsStepper(const Eigen::MatrixXd& psi, std::vector<Eigen::Index> rows, const Eigen::VectorXd& y,
              Eigen::Index j_max, Eigen::VectorXd mean, Eigen::VectorXd inv_scale, Eigen::Index intercept)
      : psi_(psi), rows_(std::move(rows)), j_max_(j_max), mean_(std::move(mean)),
        inv_scale_(std::move(inv_scale)), active_(static_cast<std::size_t>(psi.cols()), 0),
        embedded_(Eigen::VectorXd::Zero(psi.rows())) {
    if (intercept >= 0 && j_max_ > 0) order_.push_back(intercept);
    if (static_cast<Eigen::Index>(order_.size()) >= j_max_) done_ = true;
    const Eigen::VectorXd centered = y.array() - y.mean();
    embed(centered);
  }

  const Eigen::VectorXd& request() const override { return embedded_; }

  void consume(const Eigen::Ref<const Eigen::VectorXd>& raw) override {
    if (!started_) {
      started_ = true;
      corr_ = raw.cwiseProduct(inv_scale_);
      Eigen::Index best = -1;
      double best_abs = 0.0;
      for (Eigen::Index a = 0; a < corr_.size(); ++a) {
        if (inv_scale_(a) == 0.0) continue;
        if (std::abs(corr_(a)) > best_abs) {
          best_abs = std::abs(corr_(a));
          best = a;
        }
      }
      initial_max_ = best_abs;
      if (best < 0 || !add(best) || static_cast<Eigen::Index>(order_.size()) >= j_max_) {
        done_ = true;
        return;
      }
      next_direction();
      return;
    }
    // raw = Psi^T u; normalized a = X~^T u
    const Eigen::VectorXd a = raw.cwiseProduct(inv_scale_);
    const double c_max = current_max();
    double gamma = std::numeric_limits<double>::infinity();
    Eigen::Index entering = -1;
    const double tiny = 1e-14;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (active_[static_cast<std::size_t>(j)] || inv_scale_(j) == 0.0) continue;
      double g = std::numeric_limits<double>::infinity();
      if (equi_ - a(j) > tiny) g = std::min(g, (c_max - corr_(j)) / (equi_ - a(j)));
      if (equi_ + a(j) > tiny) g = std::min(g, (c_max + corr_(j)) / (equi_ + a(j)));
      if (g > 0.0 && g < gamma) {
        gamma = g;
        entering = j;
      }
    }
    if (entering < 0 || !std::isfinite(gamma) || gamma >= c_max / equi_) {
      // No admissible step, or the active set already reaches the
      // least-squares fit before another column ties.
      done_ = true;
      return;
    }
    corr_ -= gamma * a;
    if (current_max() <= 1e-12 * initial_max_) {
      // Residual exhausted: further entries would be driven by rounding only.
      done_ = true;
      return;
    }
    if (!add(entering)) {
      done_ = true;
      return;
    }
    if (static_cast<Eigen::Index>(order_.size()) >= j_max_) {
      done_ = true;
      return;
    }
    next_direction();
  }

  std::vector<Eigen::Index> order() const override { return order_; }

  /// Correlations of the normalized columns with the current residual.
  const Eigen::VectorXd& correlations() const { return corr_; }
  const std::vector<Eigen::Index>& lars_active() const { return lars_active_; }

private:
  double current_max() const {
    double m = 0.0;
    for (Eigen::Index j : lars_active_) m = std::max(m, std::abs(corr_(j)));
    return m;
  }

  Eigen::VectorXd centered_column(Eigen::Index col) const {
    Eigen::VectorXd v = gather_col(psi_, rows_, col);
    v.array() -= mean_(col);
    return v * inv_scale_(col);
  }

  // Append a column to the active set and extend the Cholesky factor of the
  // active Gram matrix.
  bool add(Eigen::Index col) {
    Eigen::VectorXd x = centered_column(col);
    const Eigen::Index k = static_cast<Eigen::Index>(x_.size());
    Eigen::VectorXd g(k);
    for (Eigen::Index i = 0; i < k; ++i) g(i) = x_[static_cast<std::size_t>(i)].dot(x);
    Eigen::VectorXd l = k ? Eigen::VectorXd(chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(g))
                          : Eigen::VectorXd();
    const double d2 = x.squaredNorm() - l.squaredNorm();
    if (!(d2 > kLarsDependence * kLarsDependence)) return false;
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(k + 1, k + 1);
    grown.topLeftCorner(k, k) = chol_;
    grown.block(k, 0, 1, k) = l.transpose();
    grown(k, k) = std::sqrt(d2);
    chol_ = std::move(grown);
    x_.push_back(std::move(x));
    signs_.push_back(corr_(col) >= 0.0 ? 1.0 : -1.0);
    active_[static_cast<std::size_t>(col)] = 1;
    lars_active_.push_back(col);
    order_.push_back(col);
    return true;
  }

  // Equiangular direction u = A X_A H^{-1} s with H the active Gram matrix.
  void next_direction() {
    const Eigen::Index k = static_cast<Eigen::Index>(x_.size());
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(signs_.data(), k);
    Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(s);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(v);
    const double q = s.dot(v);
    if (!(q > 0.0)) {
      done_ = true;
      return;
    }
    equi_ = 1.0 / std::sqrt(q);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows_.size()));
    for (Eigen::Index i = 0; i < k; ++i) u += (equi_ * v(i)) * x_[static_cast<std::size_t>(i)];
    embed(u);
  }

  void embed(const Eigen::VectorXd& v) {
    for (std::size_t i = 0; i < rows_.size(); ++i) embedded_(rows_[i]) = v(static_cast<Eigen::Index>(i));
  }

  const Eigen::MatrixXd& psi_;
  std::vector<Eigen::Index> rows_;
  Eigen::Index j_max_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd inv_scale_;
  std::vector<char> active_;
  std::vector<Eigen::Index> order_;
  std::vector<Eigen::Index> lars_active_;
  std::vector<Eigen::VectorXd> x_;
  std::vector<double> signs_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd corr_;
  Eigen::VectorXd embedded_;
  double equi_ = 0.0;
  double initial_max_ = 0.0;
  bool started_ = false;
};

}  // namespace detail

/// Rank the dictionary columns for every job. Jobs are independent; their
/// results do not depend on which other jobs share the batch beyond
/// floating-point summation order inside the shared products.
inline std::vector<RankedBasis> rank_batch(const Eigen::MatrixXd& psi, std::span<const RankJob> jobs,
                                           const RankOptions& options = {}) {
  const Eigen::Index n_all = psi.rows();
  const Eigen::Index p = psi.cols();
  const auto b = static_cast<Eigen::Index>(jobs.size());
  std::vector<std::vector<Eigen::Index>> rows(jobs.size());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (jobs[k].rows.empty()) {
      rows[k].resize(static_cast<std::size_t>(n_all));
      std::iota(rows[k].begin(), rows[k].end(), Eigen::Index{0});
    } else {
      rows[k] = jobs[k].rows;
      for (Eigen::Index r : rows[k])
        if (r < 0 || r >= n_all) throw ShapeError("rank_batch: row index out of range");
    }
    if (jobs[k].y.size() != static_cast<Eigen::Index>(rows[k].size()))
      throw ShapeError("rank_batch: job response length does not match its rows");
  }

  // Column sums and sums of squares over each job's rows, chunked so the
  // squared dictionary is never materialized in full.
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n_all, b);
  for (Eigen::Index k = 0; k < b; ++k)
    for (Eigen::Index r : rows[static_cast<std::size_t>(k)]) mask(r, k) = 1.0;
  std::vector<Eigen::VectorXd> means(jobs.size()), inv_scales(jobs.size());
  std::vector<Eigen::Index> intercepts(jobs.size(), -1);
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    means[k].resize(p);
    inv_scales[k].resize(p);
  }
  constexpr Eigen::Index kChunk = 4096;
  for (Eigen::Index c0 = 0; c0 < p; c0 += kChunk) {
    const Eigen::Index w = std::min(kChunk, p - c0);
    const auto block = psi.middleCols(c0, w);
    const Eigen::MatrixXd sums = block.transpose() * mask;
    const Eigen::MatrixXd squares = block.array().square().matrix().transpose() * mask;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const double n = static_cast<double>(rows[k].size());
      const auto kk = static_cast<Eigen::Index>(k);
      for (Eigen::Index j = 0; j < w; ++j) {
        const double s1 = sums(j, kk), s2 = squares(j, kk);
        if (jobs[k].method == RankMethod::Omp) {
          means[k](c0 + j) = 0.0;
          inv_scales[k](c0 + j) = s2 > 0.0 ? (options.raw_correlation ? 1.0 : 1.0 / std::sqrt(s2)) : 0.0;
        } else {
          const double m = s1 / n;
          const double centered = s2 - n * m * m;
          means[k](c0 + j) = m;
          if (s2 > 0.0 && centered <= detail::kConstantColumnTolerance * s2) {
            if (intercepts[k] < 0) intercepts[k] = c0 + j;
            inv_scales[k](c0 + j) = 0.0;
          } else {
            inv_scales[k](c0 + j) = centered > 0.0 ? 1.0 / std::sqrt(centered) : 0.0;
          }
        }
      }
    }
  }

  std::vector<std::unique_ptr<detail::Stepper>> steppers;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto n = static_cast<Eigen::Index>(rows[k].size());
    Eigen::Index j_max = std::min(n - 1, p);
    if (jobs[k].j_max >= 0) j_max = std::min(j_max, jobs[k].j_max);
    if (jobs[k].method == RankMethod::Omp)
      steppers.push_back(std::make_unique<detail::OmpStepper>(psi, rows[k], jobs[k].y, j_max,
                                                              std::move(inv_scales[k])));
    else
      steppers.push_back(std::make_unique<detail::LarsStepper>(psi, rows[k], jobs[k].y, j_max,
                                                               std::move(means[k]), std::move(inv_scales[k]),
                                                               intercepts[k]));
  }

  Eigen::MatrixXd requests;
  Eigen::MatrixXd projections;
  std::vector<std::size_t> live;
  for (;;) {
    live.clear();
    for (std::size_t k = 0; k < steppers.size(); ++k)
      if (!steppers[k]->done()) live.push_back(k);
    if (live.empty()) break;
    requests.resize(n_all, static_cast<Eigen::Index>(live.size()));
    for (std::size_t i = 0; i < live.size(); ++i)
      requests.col(static_cast<Eigen::Index>(i)) = steppers[live[i]]->request();
    projections.noalias() = psi.transpose() * requests;
    for (std::size_t i = 0; i < live.size(); ++i)
      steppers[live[i]]->consume(projections.col(static_cast<Eigen::Index>(i)));
  }

  std::vector<RankedBasis> out(jobs.size());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    out[k].order = steppers[k]->order();
    attach_loo_path(out[k], psi, rows[k], jobs[k].y);
  }
  return out;
}

/// Orthogonal matching pursuit ranking on all rows of psi.
inline RankedBasis omp_rank(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y, Eigen::Index j_max = -1,
                            const RankOptions& options = {}) {
  if (psi.rows() != y.size()) throw ShapeError("omp_rank: psi/y row mismatch");
  RankJob job{RankMethod::Omp, {}, y, j_max};
  return rank_batch(psi, std::span<const RankJob>(&job, 1), options).front();
}

/// Least angle regression ranking; the LOO path refits OLS on each prefix.
inline RankedBasis lars_rank(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y, Eigen::Index j_max = -1) {
  if (psi.rows() != y.size()) throw ShapeError("lars_rank: psi/y row mismatch");
  RankJob job{RankMethod::Lars, {}, y, j_max};
  return rank_batch(psi, std::span<const RankJob>(&job, 1)).front();
}

}  // namespace rpce
