#pragma once

// Degree-adaptive sparse PCE construction, prediction and JSON persistence.

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpce/basis.hpp"
#include "rpce/error.hpp"
#include "rpce/prob.hpp"
#include "rpce/regress.hpp"
#include "rpce/select.hpp"

namespace rpce {

inline constexpr int kModelSchemaVersion = 1;

/// LOO errors below kExactFitTolerance * mean(y^2) are numerically zero and
/// compare equal, so the smallest exact model wins ties.
inline constexpr double kExactFitTolerance = 1e-20;

struct ModelMeta {
  std::string ranker;        // "lars", "omp" or "rpce"
  std::string source;        // rPCE candidate source, empty otherwise
  std::vector<int> k_set;    // rPCE fold counts, empty otherwise
  std::uint64_t seed = 0;
  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

/// Truncated expansion sum_{alpha in A} beta_alpha psi_alpha(X).
struct PceModel {
  InputModel input;
  std::vector<MultiIndex> alphas;
  Eigen::VectorXd beta;
  int degree = 0;
  double eps_loo = std::numeric_limits<double>::infinity();
  ModelMeta meta;

  std::size_t size() const { return alphas.size(); }

  /// Prediction at standardized inputs.
  Eigen::VectorXd predict_standard(const Eigen::MatrixXd& xi) const {
    if (xi.rows() == 0) return Eigen::VectorXd(0);
    return design_matrix(families_for(input), alphas, xi) * beta;
  }

  /// Prediction at physical inputs (one row per point).
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    if (x.rows() == 0) return Eigen::VectorXd(0);
    return predict_standard(input.to_standard(x));
  }
};

struct BuildOptions {
  int p_max = 20;
  /// Degrees whose candidate set would exceed this many polynomials are not tried.
  std::size_t max_candidates = 1'000'000;
  RankOptions rank;
};

/// Minimal LOO error reached at one degree.
struct DegreeRecord {
  int degree = 0;
  Eigen::Index best_j = 0;  // number of terms
  double eps_min = std::numeric_limits<double>::infinity();
};

struct BuildResult {
  PceModel model;
  /// Ranking at the selected degree as multi-indices, with its LOO path.
  std::vector<MultiIndex> ranked;
  std::vector<double> eps_path;
  std::vector<double> delta_eps;
  std::vector<DegreeRecord> history;
};

/// One training set inside a batched build: rows of a shared standardized
/// design plus their responses.
struct BuildJob {
  RankMethod method = RankMethod::Lars;
  std::vector<Eigen::Index> rows;  // empty: all rows
  Eigen::VectorXd y;
};

namespace detail {

inline double exact_fit_floor(const Eigen::VectorXd& y) {
  return kExactFitTolerance * (y.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, y.size())));
}

inline double clamp_eps(double e, double floor) { return std::max(e, floor); }

/// Index of the smallest finite LOO error on the path (ties: fewest terms).
inline std::optional<std::size_t> argmin_path(const std::vector<double>& path, double floor) {
  std::optional<std::size_t> best;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (!std::isfinite(path[j])) continue;
    const double v = clamp_eps(path[j], floor);
    if (!best || v < best_val) {
      best = j;
      best_val = v;
    }
  }
  return best;
}

/// Degree-loop state of one build.
struct DegreeLoop {
  double floor = 0.0;
  bool stopped = false;
  std::vector<DegreeRecord> history;
  std::optional<DegreeRecord> best;
  std::vector<MultiIndex> best_ranked;
  std::vector<double> best_path;
  std::vector<double> best_delta;

  /// Record the ranking obtained at degree p. Returns false when no prefix
  /// was admissible (the degree is skipped).
  bool record(int p, const std::vector<MultiIndex>& ranked, const std::vector<double>& path,
              const std::vector<double>& delta) {
    auto j = argmin_path(path, floor);
    if (!j) return false;
    DegreeRecord rec{p, static_cast<Eigen::Index>(*j + 1), path[*j]};
    history.push_back(rec);
    if (!best || clamp_eps(rec.eps_min, floor) < clamp_eps(best->eps_min, floor)) {
      best = rec;
      best_ranked = ranked;
      best_path = path;
      best_delta = delta;
    }
    const std::size_t h = history.size();
    if (p >= 3 && h >= 3) {
      const double e0 = clamp_eps(history[h - 1].eps_min, floor);
      const double e1 = clamp_eps(history[h - 2].eps_min, floor);
      const double e2 = clamp_eps(history[h - 3].eps_min, floor);
      if (e0 > e1 && e1 > e2) stopped = true;
    }
    return true;
  }
};

inline std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> r(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = i;
  return r;
}

inline BuildResult finish(const DegreeLoop& loop, const InputModel& input, const Eigen::MatrixXd& xi_rows,
                          const Eigen::VectorXd& y) {
  if (!loop.best) throw BuildError("sparse PCE build: no admissible model at any degree");
  BuildResult out;
  const auto j = static_cast<std::size_t>(loop.best->best_j);
  out.model.input = input;
  out.model.alphas.assign(loop.best_ranked.begin(), loop.best_ranked.begin() + static_cast<std::ptrdiff_t>(j));
  out.model.degree = loop.best->degree;
  out.model.eps_loo = loop.best->eps_min;
  const Eigen::MatrixXd psi = design_matrix(families_for(input), out.model.alphas, xi_rows);
  out.model.beta = ols_fit(psi, y).beta;
  out.ranked = loop.best_ranked;
  out.eps_path = loop.best_path;
  out.delta_eps = loop.best_delta;
  out.history = loop.history;
  return out;
}

}  // namespace detail

/// Build several sparse PCEs over one standardized design, each from its own
/// rows and responses, following the degree-adaptive procedure: for each
/// degree p rank A_full(p), pick the LOO-optimal prefix, and stop once the
/// per-degree minimum has increased twice in a row (from p = 3 on). Every
/// job returns the best (p, J) it visited.
inline std::vector<BuildResult> build_sparse_batch(const InputModel& input, const Eigen::MatrixXd& xi,
                                                   std::span<const BuildJob> jobs, const BuildOptions& options = {}) {
  if (options.p_max < 1) throw ParameterError("p_max must be >= 1");
  if (static_cast<std::size_t>(xi.cols()) != input.dim()) throw ShapeError("build: design/input model mismatch");
  const std::size_t m = input.dim();
  const auto families = families_for(input);

  std::vector<std::vector<Eigen::Index>> rows(jobs.size());
  std::vector<detail::DegreeLoop> loops(jobs.size());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    rows[k] = jobs[k].rows.empty() ? detail::all_rows(xi.rows()) : jobs[k].rows;
    if (rows[k].size() < 3) throw ParameterError("sparse PCE build needs at least 3 training points");
    if (jobs[k].y.size() != static_cast<Eigen::Index>(rows[k].size()))
      throw ShapeError("build: response length does not match the training rows");
    loops[k].floor = detail::exact_fit_floor(jobs[k].y);
  }

  std::vector<MultiIndex> alphas;
  Eigen::MatrixXd psi(xi.rows(), 0);
  for (int p = 0; p <= options.p_max; ++p) {
    // Grow the dictionary by the degree-p block; graded order keeps A_full(p-1) a prefix.
    if (total_degree_cardinality(m, p) > options.max_candidates) {
      if (p <= 1) throw ParameterError("candidate cap is below the linear basis size");
      break;
    }
    auto block = enumerate_degree(m, p);
    const Eigen::MatrixXd block_psi = design_matrix(families, block, xi);
    const Eigen::Index old_cols = psi.cols();
    psi.conservativeResize(Eigen::NoChange, old_cols + block_psi.cols());
    psi.rightCols(block_psi.cols()) = block_psi;
    alphas.insert(alphas.end(), std::make_move_iterator(block.begin()), std::make_move_iterator(block.end()));
    if (p == 0) continue;

    std::vector<std::size_t> live;
    std::vector<RankJob> rank_jobs;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (loops[k].stopped) continue;
      live.push_back(k);
      rank_jobs.push_back(RankJob{jobs[k].method, rows[k], jobs[k].y, -1});
    }
    if (live.empty()) break;
    auto ranked = rank_batch(psi, rank_jobs, options.rank);
    for (std::size_t i = 0; i < live.size(); ++i) {
      std::vector<MultiIndex> as;
      as.reserve(ranked[i].order.size());
      for (Eigen::Index c : ranked[i].order) as.push_back(alphas[static_cast<std::size_t>(c)]);
      loops[live[i]].record(p, as, ranked[i].eps_path, ranked[i].delta_eps);
    }
  }

  std::vector<BuildResult> out;
  out.reserve(jobs.size());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    Eigen::MatrixXd xi_rows(static_cast<Eigen::Index>(rows[k].size()), xi.cols());
    for (std::size_t r = 0; r < rows[k].size(); ++r) xi_rows.row(static_cast<Eigen::Index>(r)) = xi.row(rows[k][r]);
    out.push_back(detail::finish(loops[k], input, xi_rows, jobs[k].y));
    out.back().model.meta.ranker = jobs[k].method == RankMethod::Lars ? "lars" : "omp";
  }
  return out;
}

/// Single sparse PCE with OMP or LARS ranking on a full design.
inline BuildResult build_sparse(const InputModel& input, const ExperimentalDesign& ed, RankMethod method,
                                const BuildOptions& options = {}) {
  if (!ed.has_response()) throw ParameterError("build_sparse: design has no responses");
  const Eigen::MatrixXd xi = input.to_standard(ed.x);
  BuildJob job{method, {}, ed.y};
  return build_sparse_batch(input, xi, std::span<const BuildJob>(&job, 1), options).front();
}

/// Degree-adaptive build where the ranking is supplied (e.g. by rPCE). At
/// degree p the ranking is restricted to multi-indices of total degree <= p.
inline BuildResult build_sparse_ranked(const InputModel& input, const Eigen::MatrixXd& xi, const Eigen::VectorXd& y,
                                       const std::vector<MultiIndex>& ranking, const BuildOptions& options = {}) {
  if (options.p_max < 1) throw ParameterError("p_max must be >= 1");
  if (xi.rows() < 3) throw ParameterError("sparse PCE build needs at least 3 training points");
  if (xi.rows() != y.size()) throw ShapeError("build: response length does not match the design");
  const Eigen::MatrixXd psi_all = design_matrix(families_for(input), ranking, xi);
  detail::DegreeLoop loop;
  loop.floor = detail::exact_fit_floor(y);
  const Eigen::Index j_cap = xi.rows() - 1;
  std::vector<std::size_t> prev_selection;
  std::vector<double> prev_path;
  for (int p = 1; p <= options.p_max && !loop.stopped; ++p) {
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < ranking.size() && static_cast<Eigen::Index>(sel.size()) < j_cap; ++i)
      if (ranking[i].total_degree() <= p) sel.push_back(i);
    std::vector<double> path;
    if (p > 1 && sel == prev_selection) {
      path = prev_path;
    } else {
      Eigen::MatrixXd ordered(xi.rows(), static_cast<Eigen::Index>(sel.size()));
      for (std::size_t j = 0; j < sel.size(); ++j)
        ordered.col(static_cast<Eigen::Index>(j)) = psi_all.col(static_cast<Eigen::Index>(sel[j]));
      path = prefix_loo_path(ordered, y);
    }
    std::vector<MultiIndex> ranked;
    for (std::size_t j = 0; j < path.size(); ++j) ranked.push_back(ranking[sel[j]]);
    std::vector<double> delta(path.size());
    for (std::size_t j = 0; j < path.size(); ++j) delta[j] = path[j] - (j ? path[j - 1] : 0.0);
    loop.record(p, ranked, path, delta);
    prev_selection = std::move(sel);
    prev_path = std::move(path);
  }
  return detail::finish(loop, input, xi, y);
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json to_json(const PceModel& model) {
  nlohmann::json alphas = nlohmann::json::array();
  for (const auto& a : model.alphas) alphas.push_back(a.values());
  std::vector<double> betas(model.beta.data(), model.beta.data() + model.beta.size());
  return {{"version", kModelSchemaVersion},
          {"marginals", to_json(model.input)},
          {"alphas", alphas},
          {"betas", betas},
          {"p", model.degree},
          {"eps_loo", model.eps_loo},
          {"meta",
           {{"ranker", model.meta.ranker},
            {"source", model.meta.source},
            {"k_set", model.meta.k_set},
            {"seed", model.meta.seed}}}};
}

inline std::string save(const PceModel& model) { return to_json(model).dump(2) + "\n"; }

inline PceModel load(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("version")) throw FormatError("model JSON: missing version");
    const int version = j.at("version").get<int>();
    if (version != kModelSchemaVersion)
      throw VersionError("model JSON: schema version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kModelSchemaVersion) + ")");
    PceModel model;
    model.input = input_model_from_json(j.at("marginals"));
    for (const auto& a : j.at("alphas")) model.alphas.emplace_back(a.get<std::vector<int>>());
    const auto betas = j.at("betas").get<std::vector<double>>();
    if (betas.size() != model.alphas.size()) throw FormatError("model JSON: alphas/betas length mismatch");
    for (const auto& a : model.alphas)
      if (a.dim() != model.input.dim()) throw FormatError("model JSON: multi-index dimension mismatch");
    model.beta = Eigen::Map<const Eigen::VectorXd>(betas.data(), static_cast<Eigen::Index>(betas.size()));
    model.degree = j.at("p").get<int>();
    model.eps_loo = j.at("eps_loo").is_null() ? std::numeric_limits<double>::infinity()
                                              : j.at("eps_loo").get<double>();
    const auto& meta = j.at("meta");
    model.meta.ranker = meta.value("ranker", "");
    model.meta.source = meta.value("source", "");
    model.meta.k_set = meta.value("k_set", std::vector<int>{});
    model.meta.seed = meta.value("seed", std::uint64_t{0});
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace rpce
