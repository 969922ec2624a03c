#pragma once

// Resampled ranking: k-fold candidate collection, frequency and error
// scores, multi-k weighting and quartile-based source selection.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpce/basis.hpp"
#include "rpce/error.hpp"
#include "rpce/pce.hpp"
#include "rpce/random.hpp"
#include "rpce/regress.hpp"
#include "rpce/select.hpp"

namespace rpce {

/// k-set entry standing for k = N (leave-one-out).
inline constexpr int kLeaveOneOut = 0;

inline std::vector<int> default_k_set() { return {3, 5, 10, 20, kLeaveOneOut}; }

/// Replace the N sentinel, drop k > N (and k < 2), sort and deduplicate.
inline std::vector<int> resolve_k_set(const std::vector<int>& spec, int n) {
  std::vector<int> out;
  for (int k : spec) {
    const int kk = k == kLeaveOneOut ? n : k;
    if (kk >= 2 && kk <= n) out.push_back(kk);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ParameterError("k-set has no admissible fold count for N = " + std::to_string(n));
  return out;
}

inline long long lcm_of(const std::vector<int>& ks) {
  long long l = 1;
  for (int k : ks) l = std::lcm(l, static_cast<long long>(k));
  return l;
}

struct FoldPlan {
  int k = 0;
  std::vector<int> assignment;  // fold label 1..k per sample
  std::uint64_t seed = 0;

  std::vector<Eigen::Index> train_rows(int fold) const {
    std::vector<Eigen::Index> r;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) r.push_back(static_cast<Eigen::Index>(i));
    return r;
  }
  std::vector<Eigen::Index> test_rows(int fold) const {
    std::vector<Eigen::Index> r;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) r.push_back(static_cast<Eigen::Index>(i));
    return r;
  }
};

/// Seeded random partition of 0..N-1 into k parts whose sizes differ by at most one.
inline FoldPlan make_folds(int n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw ParameterError("make_folds: need 2 <= k <= N (k=" + std::to_string(k) +
                                           ", N=" + std::to_string(n) + ")");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(substream_seed(seed, {0x464f4c44, static_cast<std::uint64_t>(k)}));
  rng.shuffle(perm);
  FoldPlan plan{k, std::vector<int>(static_cast<std::size_t>(n)), seed};
  for (int pos = 0; pos < n; ++pos) plan.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] = pos % k + 1;
  return plan;
}

enum class Source { Lars, Omp, Both };

inline std::string source_name(Source s) {
  switch (s) {
    case Source::Lars: return "LARS";
    case Source::Omp: return "OMP";
    default: return "BOTH";
  }
}

inline RankMethod method_of(Source s) { return s == Source::Omp ? RankMethod::Omp : RankMethod::Lars; }

struct CandidateRecord {
  MultiIndex alpha;
  double delta_eps = 0.0;
  int k = 0;
  int fold = 0;
  Source source = Source::Lars;
};

struct CandidatePool {
  std::vector<CandidateRecord> records;
  std::vector<int> k_set;          // resolved
  std::vector<double> r2_lars;     // outer validation per (k, fold)
  std::vector<double> r2_omp;
  std::vector<std::string> warnings;

  /// Records restricted to the chosen source (BOTH keeps everything).
  CandidatePool restricted(Source s) const {
    if (s == Source::Both) return *this;
    CandidatePool out = *this;
    out.records.clear();
    for (const auto& r : records)
      if (r.source == s) out.records.push_back(r);
    return out;
  }
};

struct CollectOptions {
  std::vector<Source> sources{Source::Lars, Source::Omp};
  BuildOptions build;
  /// Full-data builds run in the same batch as the folds (plain LARS/OMP baselines).
  std::vector<RankMethod> baselines;
};

struct CollectResult {
  CandidatePool pool;
  std::vector<BuildResult> baselines;  // in CollectOptions::baselines order
};

/// Leave-one-fold-out sparse builds for every (k, fold, source). Each fold
/// contributes its selected prefix with per-rank LOO increments, and its
/// held-out fold gives one outer-validation R^2, computed against the
/// unbiased variance of the full design responses.
inline CollectResult collect_candidates(const InputModel& input, const Eigen::MatrixXd& xi, const Eigen::VectorXd& y,
                                        const std::vector<int>& k_set_spec, std::uint64_t seed,
                                        const CollectOptions& options = {}) {
  const auto n = static_cast<int>(xi.rows());
  if (y.size() != xi.rows()) throw ShapeError("collect_candidates: design/response mismatch");
  if (n < 3) throw ParameterError("collect_candidates: need at least 3 samples");
  for (Source s : options.sources)
    if (s == Source::Both) throw ParameterError("collect_candidates: sources must be LARS and/or OMP");
  CollectResult result;
  CandidatePool& pool = result.pool;
  pool.k_set = resolve_k_set(k_set_spec, n);
  const double var = (y.array() - y.mean()).square().sum() / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw UndefinedMetricError("collect_candidates: responses have zero variance");

  struct Slot {
    int k, fold;
    Source source;
    std::vector<Eigen::Index> test;
  };
  std::vector<BuildJob> jobs;
  std::vector<Slot> slots;
  for (int k : pool.k_set) {
    const FoldPlan plan = make_folds(n, k, seed);
    for (int l = 1; l <= k; ++l) {
      auto train = plan.train_rows(l);
      if (train.size() < 3) {
        pool.warnings.push_back("k=" + std::to_string(k) + " fold " + std::to_string(l) + ": only " +
                                std::to_string(train.size()) + " training points, skipped");
        continue;
      }
      Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
      for (std::size_t r = 0; r < train.size(); ++r) yt(static_cast<Eigen::Index>(r)) = y(train[r]);
      for (Source s : options.sources) {
        jobs.push_back(BuildJob{method_of(s), train, yt});
        slots.push_back(Slot{k, l, s, plan.test_rows(l)});
      }
    }
  }
  for (RankMethod m : options.baselines) jobs.push_back(BuildJob{m, {}, y});

  std::vector<BuildResult> built;
  if (!jobs.empty()) built = build_sparse_batch(input, xi, jobs, options.build);

  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    const BuildResult& b = built[i];
    for (std::size_t j = 0; j < b.model.alphas.size(); ++j)
      pool.records.push_back(CandidateRecord{b.model.alphas[j], b.delta_eps[j], s.k, s.fold, s.source});
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(s.test.size()), xi.cols());
    Eigen::VectorXd yt(static_cast<Eigen::Index>(s.test.size()));
    for (std::size_t r = 0; r < s.test.size(); ++r) {
      xt.row(static_cast<Eigen::Index>(r)) = xi.row(s.test[r]);
      yt(static_cast<Eigen::Index>(r)) = y(s.test[r]);
    }
    const double mse = (yt - b.model.predict_standard(xt)).squaredNorm() / static_cast<double>(yt.size());
    (s.source == Source::Lars ? pool.r2_lars : pool.r2_omp).push_back(1.0 - mse / var);
  }
  for (std::size_t i = slots.size(); i < built.size(); ++i) result.baselines.push_back(std::move(built[i]));
  return result;
}

// ---------------------------------------------------------------------------
// Scores

struct AlphaScore {
  MultiIndex alpha;
  double s_f = 0.0;        // weighted frequency score
  long long count = 0;     // unweighted selection count over all k
  double s_e = 0.0;        // multi-k error score
  double s_total = 0.0;
  std::size_t rank = 0;    // 1-based
};

namespace detail {
struct AlphaAccumulator {
  std::map<int, long long> count_k;  // k -> selections
  std::map<int, double> err_k;       // k -> sum of normalized increments
};

inline std::unordered_map<MultiIndex, AlphaAccumulator, MultiIndexHash> accumulate(const CandidatePool& pool) {
  // Normalizer per (k, source) group.
  std::map<std::pair<int, int>, double> dmax;
  for (const auto& r : pool.records) {
    if (!std::isfinite(r.delta_eps)) continue;
    auto& d = dmax[{r.k, static_cast<int>(r.source)}];
    d = std::max(d, std::abs(r.delta_eps));
  }
  std::unordered_map<MultiIndex, AlphaAccumulator, MultiIndexHash> acc;
  for (const auto& r : pool.records) {
    auto& a = acc[r.alpha];
    a.count_k[r.k] += 1;
    const auto it = dmax.find({r.k, static_cast<int>(r.source)});
    const double d = it == dmax.end() ? 0.0 : it->second;
    if (std::isfinite(r.delta_eps) && d > 0.0) a.err_k[r.k] += r.delta_eps / d;
  }
  return acc;
}
}  // namespace detail

/// s_f = sum_k count_k * lcm(k_set) / k.
inline std::unordered_map<MultiIndex, double, MultiIndexHash> frequency_score(const CandidatePool& pool) {
  const long long l = lcm_of(pool.k_set);
  std::unordered_map<MultiIndex, double, MultiIndexHash> out;
  for (const auto& r : pool.records) out[r.alpha] += static_cast<double>(l / r.k);
  return out;
}

/// Per-k error score: summed increments / (count_k * max |increment|).
inline std::unordered_map<MultiIndex, std::map<int, double>, MultiIndexHash> error_score_per_k(
    const CandidatePool& pool) {
  std::unordered_map<MultiIndex, std::map<int, double>, MultiIndexHash> out;
  for (const auto& [alpha, a] : detail::accumulate(pool))
    for (const auto& [k, c] : a.count_k) {
      const auto it = a.err_k.find(k);
      out[alpha][k] = it == a.err_k.end() ? 0.0 : it->second / static_cast<double>(c);
    }
  return out;
}

/// Multi-k error score: (1/f) sum_k s_{e,k}, f the unweighted count over all k.
inline std::unordered_map<MultiIndex, double, MultiIndexHash> error_score(const CandidatePool& pool) {
  std::unordered_map<MultiIndex, double, MultiIndexHash> out;
  for (const auto& [alpha, a] : detail::accumulate(pool)) {
    long long f = 0;
    double sum = 0.0;
    for (const auto& [k, c] : a.count_k) {
      f += c;
      const auto it = a.err_k.find(k);
      if (it != a.err_k.end()) sum += it->second / static_cast<double>(c);
    }
    out[alpha] = f > 0 ? sum / static_cast<double>(f) : 0.0;
  }
  return out;
}

enum class ScoreMode { Corrected, Literal };

inline std::string mode_name(ScoreMode m) { return m == ScoreMode::Literal ? "literal" : "corrected"; }

inline ScoreMode parse_score_mode(const std::string& s) {
  if (s == "corrected") return ScoreMode::Corrected;
  if (s == "literal") return ScoreMode::Literal;
  throw ParameterError("unknown score mode '" + s + "' (expected literal or corrected)");
}

using ScoreTable = std::vector<AlphaScore>;

/// Order candidates. Literal: descending s_f + s_e. Corrected: descending
/// s_f, then ascending s_e. Remaining ties follow graded-lex order.
inline ScoreTable total_rank(ScoreTable rows, ScoreMode mode) {
  for (auto& r : rows) r.s_total = mode == ScoreMode::Literal ? r.s_f + r.s_e : r.s_f - r.s_e;
  std::sort(rows.begin(), rows.end(), [mode](const AlphaScore& a, const AlphaScore& b) {
    if (mode == ScoreMode::Literal) {
      if (a.s_total != b.s_total) return a.s_total > b.s_total;
    } else {
      if (a.s_f != b.s_f) return a.s_f > b.s_f;
      if (a.s_e != b.s_e) return a.s_e < b.s_e;
    }
    return a.alpha < b.alpha;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return rows;
}

inline ScoreTable score_pool(const CandidatePool& pool, ScoreMode mode) {
  if (pool.records.empty()) throw BuildError("rPCE: candidate pool is empty");
  const auto sf = frequency_score(pool);
  const auto se = error_score(pool);
  std::unordered_map<MultiIndex, long long, MultiIndexHash> counts;
  for (const auto& r : pool.records) counts[r.alpha] += 1;
  ScoreTable rows;
  rows.reserve(sf.size());
  for (const auto& [alpha, f] : sf) rows.push_back(AlphaScore{alpha, f, counts.at(alpha), se.at(alpha), 0.0, 0});
  return total_rank(std::move(rows), mode);
}

inline void write_score_csv(std::ostream& os, const ScoreTable& table) {
  os << "alpha,s_f,s_e,s_total,rank\n";
  for (const auto& r : table)
    os << '"' << r.alpha.to_string() << "\"," << format_double(r.s_f) << ',' << format_double(r.s_e) << ','
       << format_double(r.s_total) << ',' << r.rank << '\n';
}

/// Linear-interpolation quantile (h = (n-1) q) of an unsorted sample.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ParameterError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// One source dominates when its lower quartile exceeds the other's upper quartile.
inline Source choose_source(const std::vector<double>& r2_lars, const std::vector<double>& r2_omp) {
  if (r2_lars.empty() || r2_omp.empty()) throw ParameterError("choose_source: empty R^2 set");
  if (quantile(r2_lars, 0.25) > quantile(r2_omp, 0.75)) return Source::Lars;
  if (quantile(r2_omp, 0.25) > quantile(r2_lars, 0.75)) return Source::Omp;
  return Source::Both;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct RpceConfig {
  std::vector<int> k_set = default_k_set();
  ScoreMode mode = ScoreMode::Corrected;
  std::uint64_t seed = 0;
  std::vector<Source> sources{Source::Lars, Source::Omp};
  BuildOptions build;
  std::vector<RankMethod> baselines;
};

struct RpceResult {
  std::vector<MultiIndex> ranking;
  ScoreTable scores;
  Source source = Source::Both;
  CandidatePool pool;
  BuildResult build;                   // final model built on the ranking
  std::vector<BuildResult> baselines;  // plain builds requested in the config
};

/// Rank by resampling, then run the degree-adaptive build on the full
/// design with that ranking.
inline RpceResult fit_rpce(const InputModel& input, const Eigen::MatrixXd& xi, const Eigen::VectorXd& y,
                           const RpceConfig& config) {
  CollectOptions co{config.sources, config.build, config.baselines};
  auto collected = collect_candidates(input, xi, y, config.k_set, config.seed, co);
  RpceResult out;
  out.pool = std::move(collected.pool);
  out.baselines = std::move(collected.baselines);
  const bool has_lars = !out.pool.r2_lars.empty(), has_omp = !out.pool.r2_omp.empty();
  if (has_lars && has_omp)
    out.source = choose_source(out.pool.r2_lars, out.pool.r2_omp);
  else if (has_lars)
    out.source = Source::Lars;
  else if (has_omp)
    out.source = Source::Omp;
  else
    throw BuildError("rPCE: every fold was skipped");
  out.scores = score_pool(out.pool.restricted(out.source), config.mode);
  for (const auto& r : out.scores) out.ranking.push_back(r.alpha);
  out.build = build_sparse_ranked(input, xi, y, out.ranking, config.build);
  out.build.model.meta = ModelMeta{"rpce", source_name(out.source), out.pool.k_set, config.seed};
  return out;
}

inline RpceResult fit_rpce(const InputModel& input, const ExperimentalDesign& ed, const RpceConfig& config) {
  if (!ed.has_response()) throw ParameterError("fit_rpce: design has no responses");
  return fit_rpce(input, input.to_standard(ed.x), ed.y, config);
}

}  // namespace rpce
