#pragma once

// Seeded replication studies comparing rankers, plus frequency and
// sensitivity reports. Every replication draws its own substreams, so
// results do not depend on the number of worker threads.

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rpce/bench.hpp"
#include "rpce/pce.hpp"
#include "rpce/prob.hpp"
#include "rpce/resample.hpp"
#include "rpce/sobol.hpp"

namespace rpce {

struct ExperimentConfig {
  std::string benchmark;     // registry name, or empty when data_path is set
  std::string data_path;     // external design CSV (x1..xM,y)
  std::string input_model_path;  // JSON marginals for external data
  std::string truss_geometry_path;
  int n_train = 50;
  int n_test = 10000;
  int reps = 1;
  std::vector<std::string> rankers{"lars", "omp", "rpce"};
  std::vector<int> k_set = default_k_set();
  ScoreMode mode = ScoreMode::Corrected;
  int p_max = 20;
  std::size_t max_candidates = BuildOptions{}.max_candidates;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int workers = 1;
  LhsMode lhs = LhsMode::Jittered;
  bool raw_correlation = false;

  void validate() const {
    if (reps < 1) throw ParameterError("replications must be >= 1");
    if (benchmark.empty() == data_path.empty()) throw ParameterError("set exactly one of benchmark or data path");
    if (n_train < 3) throw ParameterError("n_train must be >= 3");
    if (n_test < 0) throw ParameterError("n_test must be >= 0");
    if (p_max < 1) throw ParameterError("p_max must be >= 1");
    if (workers < 1) throw ParameterError("workers must be >= 1");
    if (rankers.empty()) throw ParameterError("at least one ranker is required");
    for (const auto& r : rankers)
      if (r != "lars" && r != "omp" && r != "rpce") throw ParameterError("unknown ranker '" + r + "'");
    if (!data_path.empty() && input_model_path.empty())
      throw ParameterError("external data needs an input model JSON");
  }
};

/// Worker count from RPCE_WORKERS, defaulting to 1.
inline int default_workers() {
  if (const char* s = std::getenv("RPCE_WORKERS")) {
    const int v = std::atoi(s);
    if (v >= 1) return v;
  }
  return 1;
}

struct RankerOutcome {
  std::string ranker;
  bool ok = false;
  std::string error;
  double r2_test = std::numeric_limits<double>::quiet_NaN();
  std::optional<PceModel> model;
  ScoreTable scores;  // rPCE only
};

struct ReplicationOutcome {
  int rep = 0;
  std::vector<RankerOutcome> rankers;  // config order
  double seconds = 0.0;
};

/// Training and test data of one replication.
struct ReplicationData {
  InputModel input;
  ExperimentalDesign train;
  ExperimentalDesign test;
};

class DataSource {
public:
  explicit DataSource(const ExperimentConfig& c) : config_(c) {
    if (!c.benchmark.empty()) {
      if (c.benchmark == "truss" && !c.truss_geometry_path.empty()) {
        std::ifstream in(c.truss_geometry_path);
        if (!in) throw ConfigurationError("cannot open truss geometry " + c.truss_geometry_path);
        bench_ = truss_benchmark(truss_geometry_from_json(nlohmann::json::parse(in)));
      } else {
        bench_ = get_benchmark(c.benchmark);
      }
      input_ = bench_->input;
    } else {
      std::ifstream in(c.data_path);
      if (!in) throw FormatError("cannot open data file " + c.data_path);
      data_ = read_design_csv(in);
      if (!data_->has_response()) throw FormatError("data file " + c.data_path + " has no y column");
      std::ifstream mi(c.input_model_path);
      if (!mi) throw FormatError("cannot open input model " + c.input_model_path);
      try {
        input_ = input_model_from_json(nlohmann::json::parse(mi));
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("input model JSON: ") + e.what());
      }
      if (static_cast<std::size_t>(data_->x.cols()) != input_.dim())
        throw ShapeError("data columns do not match the input model dimension");
      if (c.n_train + c.n_test > data_->size())
        throw ParameterError("n_train + n_test exceeds the " + std::to_string(data_->size()) + " data rows");
    }
  }

  const InputModel& input() const { return input_; }
  const std::optional<BenchmarkModel>& benchmark() const { return bench_; }

  ReplicationData draw(int rep) const {
    const auto r = static_cast<std::uint64_t>(rep);
    ReplicationData d{input_, {}, {}};
    if (bench_) {
      d.train = lhs_sample(input_, config_.n_train, substream_seed(config_.seed, {0x545241494e, r}), config_.lhs);
      d.train.y = bench_->evaluate(d.train.x);
      if (config_.n_test > 0) {
        d.test = lhs_sample(input_, config_.n_test, substream_seed(config_.seed, {0x54455354, r}), config_.lhs);
        d.test.y = bench_->evaluate(d.test.x);
      }
      return d;
    }
    // Random split of the external data.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(data_->size()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
    Rng rng(substream_seed(config_.seed, {0x53504c4954, r}));
    rng.shuffle(idx);
    auto take = [&](std::size_t from, int count) {
      ExperimentalDesign e;
      e.x.resize(count, data_->x.cols());
      e.y.resize(count);
      for (int i = 0; i < count; ++i) {
        e.x.row(i) = data_->x.row(idx[from + static_cast<std::size_t>(i)]);
        e.y(i) = data_->y(idx[from + static_cast<std::size_t>(i)]);
      }
      return e;
    };
    d.train = take(0, config_.n_train);
    d.test = take(static_cast<std::size_t>(config_.n_train), config_.n_test);
    return d;
  }

private:
  ExperimentConfig config_;
  InputModel input_;
  std::optional<BenchmarkModel> bench_;
  std::optional<ExperimentalDesign> data_;
};

/// Fit every configured ranker on one replication. Plain LARS/OMP builds
/// share the rPCE fold batch when rPCE is requested.
inline ReplicationOutcome run_replication(const ExperimentConfig& config, const DataSource& source, int rep) {
  const auto t0 = std::chrono::steady_clock::now();
  ReplicationOutcome out;
  out.rep = rep;
  const ReplicationData data = source.draw(rep);
  BuildOptions bo;
  bo.p_max = config.p_max;
  bo.max_candidates = config.max_candidates;
  bo.rank.raw_correlation = config.raw_correlation;

  std::vector<RankMethod> plain;
  std::vector<std::size_t> plain_slot;
  bool want_rpce = false;
  out.rankers.resize(config.rankers.size());
  for (std::size_t i = 0; i < config.rankers.size(); ++i) {
    out.rankers[i].ranker = config.rankers[i];
    if (config.rankers[i] == "rpce") {
      want_rpce = true;
    } else {
      plain.push_back(config.rankers[i] == "lars" ? RankMethod::Lars : RankMethod::Omp);
      plain_slot.push_back(i);
    }
  }

  auto fail_all = [&](const std::string& msg) {
    for (auto& r : out.rankers) {
      r.ok = false;
      r.error = msg;
    }
  };

  std::vector<std::optional<BuildResult>> plain_results(plain.size());
  try {
    const Eigen::MatrixXd xi = data.input.to_standard(data.train.x);
    if (want_rpce) {
      RpceConfig rc;
      rc.k_set = config.k_set;
      rc.mode = config.mode;
      rc.seed = substream_seed(config.seed, {0x464f4c44, static_cast<std::uint64_t>(rep)});
      rc.build = bo;
      rc.baselines = plain;
      try {
        RpceResult res = fit_rpce(data.input, xi, data.train.y, rc);
        for (std::size_t i = 0; i < plain.size(); ++i) plain_results[i] = std::move(res.baselines[i]);
        for (auto& r : out.rankers)
          if (r.ranker == "rpce") {
            r.ok = true;
            r.model = std::move(res.build.model);
            r.scores = std::move(res.scores);
          }
      } catch (const std::exception& e) {
        for (auto& r : out.rankers)
          if (r.ranker == "rpce") r.error = e.what();
        // fall back to standalone plain builds
      }
    }
    for (std::size_t i = 0; i < plain.size(); ++i) {
      if (plain_results[i]) continue;
      try {
        BuildJob job{plain[i], {}, data.train.y};
        plain_results[i] = std::move(build_sparse_batch(data.input, xi, std::span<const BuildJob>(&job, 1), bo).front());
      } catch (const std::exception& e) {
        out.rankers[plain_slot[i]].error = e.what();
      }
    }
    for (std::size_t i = 0; i < plain.size(); ++i)
      if (plain_results[i]) {
        auto& r = out.rankers[plain_slot[i]];
        r.ok = true;
        r.model = std::move(plain_results[i]->model);
      }
  } catch (const std::exception& e) {
    fail_all(e.what());
  }

  for (auto& r : out.rankers) {
    if (!r.ok) continue;
    r.model->meta.seed = config.seed;
    if (data.test.size() >= 2) {
      try {
        r.r2_test = r_squared(data.test.y, r.model->predict(data.test.x));
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// All replications, ordered by replication index.
inline std::vector<ReplicationOutcome> run_replications(const ExperimentConfig& config) {
  config.validate();
  const DataSource source(config);
  std::vector<ReplicationOutcome> results(static_cast<std::size_t>(config.reps));
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= config.reps) return;
      try {
        results[static_cast<std::size_t>(r)] = run_replication(config, source, r);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int nw = std::min(config.workers, config.reps);
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

// ---------------------------------------------------------------------------
// Reports

struct RankerSummary {
  std::string ranker;
  int ok = 0;
  int failed = 0;
  double r2_mean = std::numeric_limits<double>::quiet_NaN();
  double r2_q1 = std::numeric_limits<double>::quiet_NaN();
  double r2_median = std::numeric_limits<double>::quiet_NaN();
  double r2_q3 = std::numeric_limits<double>::quiet_NaN();
  double r2_min = std::numeric_limits<double>::quiet_NaN();
  double r2_max = std::numeric_limits<double>::quiet_NaN();
  double eps_loo_mean = std::numeric_limits<double>::quiet_NaN();
  double terms_mean = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, int> sources;  // rPCE candidate source counts
};

inline std::vector<RankerSummary> summarize(const ExperimentConfig& config,
                                            const std::vector<ReplicationOutcome>& reps) {
  std::vector<RankerSummary> out;
  for (std::size_t i = 0; i < config.rankers.size(); ++i) {
    RankerSummary s;
    s.ranker = config.rankers[i];
    std::vector<double> r2, eps, terms;
    for (const auto& rep : reps) {
      const auto& r = rep.rankers[i];
      if (!r.ok) {
        ++s.failed;
        continue;
      }
      ++s.ok;
      if (std::isfinite(r.r2_test)) r2.push_back(r.r2_test);
      eps.push_back(r.model->eps_loo);
      terms.push_back(static_cast<double>(r.model->size()));
      if (!r.model->meta.source.empty()) ++s.sources[r.model->meta.source];
    }
    auto mean = [](const std::vector<double>& v) {
      double a = 0.0;
      for (double x : v) a += x;
      return a / static_cast<double>(v.size());
    };
    if (!r2.empty()) {
      s.r2_mean = mean(r2);
      s.r2_q1 = quantile(r2, 0.25);
      s.r2_median = quantile(r2, 0.5);
      s.r2_q3 = quantile(r2, 0.75);
      s.r2_min = *std::min_element(r2.begin(), r2.end());
      s.r2_max = *std::max_element(r2.begin(), r2.end());
    }
    if (!eps.empty()) {
      s.eps_loo_mean = mean(eps);
      s.terms_mean = mean(terms);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {
inline std::string csv_num(double v) { return std::isfinite(v) ? format_double(v) : std::string(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf")); }

inline nlohmann::json json_num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw FormatError("cannot write " + p.string());
  f << content;
}
}  // namespace detail

inline std::string report_csv(const std::vector<ReplicationOutcome>& reps) {
  std::ostringstream os;
  os << "rep,ranker,status,r2_test,eps_loo,n_terms,degree,source,error\n";
  for (const auto& rep : reps)
    for (const auto& r : rep.rankers) {
      os << rep.rep << ',' << r.ranker << ',' << (r.ok ? "ok" : "failed") << ',';
      if (r.ok)
        os << detail::csv_num(r.r2_test) << ',' << detail::csv_num(r.model->eps_loo) << ',' << r.model->size() << ','
           << r.model->degree << ',' << r.model->meta.source;
      else
        os << ",,,,";
      os << ',' << (r.error.empty() ? "" : detail::csv_quote(r.error)) << '\n';
    }
  return os.str();
}

inline nlohmann::json summary_json(const ExperimentConfig& config, const std::vector<RankerSummary>& s) {
  nlohmann::json j;
  j["benchmark"] = config.benchmark;
  j["data"] = config.data_path;
  j["n_train"] = config.n_train;
  j["n_test"] = config.n_test;
  j["reps"] = config.reps;
  j["seed"] = config.seed;
  j["p_max"] = config.p_max;
  j["max_candidates"] = config.max_candidates;
  j["k_set"] = config.k_set;
  j["score_mode"] = mode_name(config.mode);
  for (const auto& r : s) {
    nlohmann::json e{{"ok", r.ok},
                     {"failed", r.failed},
                     {"r2_mean", detail::json_num(r.r2_mean)},
                     {"r2_q1", detail::json_num(r.r2_q1)},
                     {"r2_median", detail::json_num(r.r2_median)},
                     {"r2_q3", detail::json_num(r.r2_q3)},
                     {"r2_min", detail::json_num(r.r2_min)},
                     {"r2_max", detail::json_num(r.r2_max)},
                     {"eps_loo_mean", detail::json_num(r.eps_loo_mean)},
                     {"terms_mean", detail::json_num(r.terms_mean)}};
    if (!r.sources.empty()) e["sources"] = r.sources;
    j["rankers"][r.ranker] = e;
  }
  return j;
}

/// Box-plot ready quartiles per ranker.
inline std::string quantiles_csv(const std::vector<RankerSummary>& s) {
  std::ostringstream os;
  os << "ranker,min,q1,median,q3,max,mean\n";
  for (const auto& r : s)
    os << r.ranker << ',' << detail::csv_num(r.r2_min) << ',' << detail::csv_num(r.r2_q1) << ','
       << detail::csv_num(r.r2_median) << ',' << detail::csv_num(r.r2_q3) << ',' << detail::csv_num(r.r2_max) << ','
       << detail::csv_num(r.r2_mean) << '\n';
  return os.str();
}

inline std::string timing_csv(const std::vector<ReplicationOutcome>& reps) {
  std::ostringstream os;
  os << "rep,seconds\n";
  for (const auto& r : reps) os << r.rep << ',' << format_double(r.seconds) << '\n';
  return os.str();
}

struct ExperimentReport {
  std::vector<ReplicationOutcome> reps;
  std::vector<RankerSummary> summary;
};

/// Replication study; writes report.csv, summary.json, quantiles.csv and
/// timing.csv into the output directory (when non-empty).
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport rep;
  rep.reps = run_replications(config);
  rep.summary = summarize(config, rep.reps);
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "report.csv", report_csv(rep.reps));
    detail::write_file(dir / "summary.json", summary_json(config, rep.summary).dump(2) + "\n");
    detail::write_file(dir / "quantiles.csv", quantiles_csv(rep.summary));
    detail::write_file(dir / "timing.csv", timing_csv(rep.reps));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Selection frequencies

struct FrequencyRow {
  std::size_t id = 0;  // graded-lex position
  MultiIndex alpha;
  int count = 0;
};

struct FrequencyTable {
  std::string ranker;
  int reps = 0;
  std::vector<FrequencyRow> rows;  // ascending id
  std::vector<int> selected_per_rep;
};

inline FrequencyTable frequency_from(const std::vector<ReplicationOutcome>& reps, std::size_t slot,
                                     const std::string& ranker) {
  FrequencyTable t;
  t.ranker = ranker;
  t.reps = static_cast<int>(reps.size());
  std::map<std::size_t, FrequencyRow> rows;
  for (const auto& rep : reps) {
    const auto& r = rep.rankers[slot];
    int n = 0;
    if (r.ok)
      for (const auto& a : r.model->alphas) {
        auto& row = rows[graded_lex_position(a)];
        row.alpha = a;
        row.id = graded_lex_position(a);
        ++row.count;
        ++n;
      }
    t.selected_per_rep.push_back(n);
  }
  for (auto& [id, row] : rows) t.rows.push_back(row);
  return t;
}

inline std::string frequency_csv(const FrequencyTable& t) {
  std::ostringstream os;
  os << "id,alpha,count\n";
  for (const auto& r : t.rows) os << r.id << ',' << detail::csv_quote(r.alpha.to_string()) << ',' << r.count << '\n';
  return os.str();
}

/// Per-multi-index selection counts of every configured ranker's final models.
inline std::vector<FrequencyTable> run_frequency_study(const ExperimentConfig& config) {
  const auto reps = run_replications(config);
  std::vector<FrequencyTable> out;
  for (std::size_t i = 0; i < config.rankers.size(); ++i) out.push_back(frequency_from(reps, i, config.rankers[i]));
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    for (const auto& t : out) detail::write_file(dir / ("frequency_" + t.ranker + ".csv"), frequency_csv(t));
    detail::write_file(dir / "report.csv", report_csv(reps));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sensitivity

struct SensitivityRow {
  std::string ranker;
  std::vector<int> subset;
  double mean_s = 0.0;
  double mean_total = std::numeric_limits<double>::quiet_NaN();  // single variables only
  std::optional<double> ref_s;
  std::optional<double> ref_total;
  std::optional<double> delta_s;
  std::optional<double> delta_total;
};

struct SensitivityReport {
  std::vector<ReplicationOutcome> reps;
  /// [ranker slot][replication] (empty optional when the build failed)
  std::vector<std::vector<std::optional<SobolIndices>>> indices;
  std::vector<SensitivityRow> rows;
};

inline std::vector<SensitivityRow> aggregate_sensitivity(const std::string& ranker, std::size_t dim,
                                                         const std::vector<std::optional<SobolIndices>>& idx,
                                                         const std::optional<SobolIndices>& ref) {
  std::map<std::vector<int>, double> sum_s;
  std::vector<double> sum_t(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) sum_s[{static_cast<int>(i)}] = 0.0;
  int n = 0;
  for (const auto& s : idx) {
    if (!s) continue;
    ++n;
    for (const auto& [u, v] : s->interactions) sum_s[u] += v;
    for (std::size_t i = 0; i < dim; ++i) sum_t[i] += s->total[i];
  }
  if (ref)
    for (const auto& [u, v] : ref->interactions) sum_s.try_emplace(u, 0.0);
  std::vector<std::pair<std::vector<int>, double>> ordered(sum_s.begin(), sum_s.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });
  std::vector<SensitivityRow> out;
  for (const auto& [u, v] : ordered) {
    SensitivityRow r;
    r.ranker = ranker;
    r.subset = u;
    r.mean_s = n ? v / n : std::numeric_limits<double>::quiet_NaN();
    if (u.size() == 1) r.mean_total = n ? sum_t[static_cast<std::size_t>(u[0])] / n : std::numeric_limits<double>::quiet_NaN();
    if (ref) {
      r.ref_s = ref->subset(u);
      r.delta_s = r.mean_s - *r.ref_s;
      if (u.size() == 1) {
        r.ref_total = ref->total[static_cast<std::size_t>(u[0])];
        r.delta_total = r.mean_total - *r.ref_total;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? detail::csv_num(*v) : std::string(); };
  std::ostringstream os;
  os << "ranker,subset,S_mean,S_total_mean,S_ref,S_total_ref,dS,dS_total\n";
  for (const auto& r : rows)
    os << r.ranker << ',' << subset_label(r.subset) << ',' << detail::csv_num(r.mean_s) << ','
       << (r.subset.size() == 1 ? detail::csv_num(r.mean_total) : std::string()) << ',' << opt(r.ref_s) << ','
       << opt(r.ref_total) << ',' << opt(r.delta_s) << ',' << opt(r.delta_total) << '\n';
  return os.str();
}

inline std::string sensitivity_rows_csv(const ExperimentConfig& config, const SensitivityReport& rep) {
  std::ostringstream os;
  os << "rep,ranker,subset,S,S_total\n";
  for (std::size_t k = 0; k < config.rankers.size(); ++k)
    for (std::size_t r = 0; r < rep.indices[k].size(); ++r) {
      const auto& s = rep.indices[k][r];
      if (!s) continue;
      for (std::size_t i = 0; i < s->first_order.size(); ++i)
        os << r << ',' << config.rankers[k] << ',' << subset_label({static_cast<int>(i)}) << ','
           << format_double(s->first_order[i]) << ',' << format_double(s->total[i]) << '\n';
      for (const auto& [u, v] : s->interactions)
        if (u.size() > 1) os << r << ',' << config.rankers[k] << ',' << subset_label(u) << ',' << format_double(v) << ",\n";
    }
  return os.str();
}

/// Sobol' indices of every replication's models, their means, and the
/// deviation from the analytic reference when the benchmark has one.
inline SensitivityReport run_sensitivity(const ExperimentConfig& config) {
  SensitivityReport rep;
  rep.reps = run_replications(config);
  const DataSource source(config);
  const auto& ref = source.benchmark() ? source.benchmark()->reference : std::optional<SobolIndices>{};
  for (std::size_t k = 0; k < config.rankers.size(); ++k) {
    std::vector<std::optional<SobolIndices>> idx;
    for (const auto& r : rep.reps) {
      const auto& o = r.rankers[k];
      if (!o.ok) {
        idx.emplace_back();
        continue;
      }
      try {
        idx.emplace_back(indices_from_pce(*o.model));
      } catch (const UndefinedMetricError&) {
        idx.emplace_back();
      }
    }
    auto rows = aggregate_sensitivity(config.rankers[k], source.input().dim(), idx, ref);
    rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
    rep.indices.push_back(std::move(idx));
  }
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "sobol_summary.csv", sensitivity_csv(rep.rows));
    detail::write_file(dir / "sobol_rows.csv", sensitivity_rows_csv(config, rep));
    detail::write_file(dir / "report.csv", report_csv(rep.reps));
  }
  return rep;
}

}  // namespace rpce
