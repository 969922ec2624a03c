#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpce/experiment.hpp"

using namespace rpce;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig c;
  c.benchmark = "ishigami";
  c.n_train = 30;
  c.n_test = 500;
  c.reps = 3;
  c.k_set = {3, 5};
  c.p_max = 8;
  c.seed = 11;
  c.out_dir = out;
  return c;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rpce_test_" + name);
  fs::remove_all(p);
  return p;
}
}  // namespace

TEST(Config, Validation) {
  ExperimentConfig c;
  c.benchmark = "ishigami";
  c.reps = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c.reps = 1;
  c.rankers = {"ridge"};
  EXPECT_THROW(c.validate(), ParameterError);
  c.rankers = {"omp"};
  c.data_path = "x.csv";
  EXPECT_THROW(c.validate(), ParameterError);
  c.benchmark.clear();
  EXPECT_THROW(c.validate(), ParameterError);
  EXPECT_THROW(run_experiment(ExperimentConfig{}), ParameterError);
}

TEST(Experiment, SingleReplicationIshigamiRpce) {
  ExperimentConfig c;
  c.benchmark = "ishigami";
  c.rankers = {"rpce"};
  c.n_test = 5000;
  c.out_dir.clear();
  c.seed = 3;
  const auto rep = run_experiment(c);
  ASSERT_EQ(rep.reps.size(), 1u);
  const auto& o = rep.reps[0].rankers[0];
  ASSERT_TRUE(o.ok) << o.error;
  EXPECT_GT(o.r2_test, 0.9);
  EXPECT_LE(o.r2_test, 1.0);
  EXPECT_EQ(o.model->meta.ranker, "rpce");
  EXPECT_FALSE(o.scores.empty());
}

TEST(Experiment, ReportIsDeterministicAcrossRunsAndWorkers) {
  const auto a = scratch("det_a"), b = scratch("det_b"), w = scratch("det_w");
  auto c = small_config(a.string());
  run_experiment(c);
  c.out_dir = b.string();
  run_experiment(c);
  c.out_dir = w.string();
  c.workers = 3;
  run_experiment(c);
  for (const char* f : {"report.csv", "summary.json", "quantiles.csv"}) {
    const auto ref = slurp(a / f);
    EXPECT_FALSE(ref.empty()) << f;
    EXPECT_EQ(ref, slurp(b / f)) << f;
    EXPECT_EQ(ref, slurp(w / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "timing.csv"));
}

TEST(Experiment, TestSizeDoesNotChangeTraining) {
  auto c = small_config("");
  c.reps = 2;
  const auto r1 = run_replications(c);
  c.n_test = 2000;
  const auto r2 = run_replications(c);
  for (std::size_t r = 0; r < r1.size(); ++r)
    for (std::size_t k = 0; k < c.rankers.size(); ++k) {
      ASSERT_TRUE(r1[r].rankers[k].ok);
      EXPECT_EQ(r1[r].rankers[k].model->alphas, r2[r].rankers[k].model->alphas);
      EXPECT_TRUE((r1[r].rankers[k].model->beta.array() == r2[r].rankers[k].model->beta.array()).all());
    }
}

TEST(Experiment, PlainRankersMatchStandaloneBuilds) {
  auto c = small_config("");
  c.reps = 1;
  const DataSource src(c);
  const auto data = src.draw(0);
  const auto out = run_replication(c, src, 0);
  BuildOptions bo;
  bo.p_max = c.p_max;
  const auto lars = build_sparse(data.input, data.train, RankMethod::Lars, bo);
  const auto omp = build_sparse(data.input, data.train, RankMethod::Omp, bo);
  EXPECT_EQ(out.rankers[0].model->alphas, lars.model.alphas);
  EXPECT_EQ(out.rankers[1].model->alphas, omp.model.alphas);
}

TEST(Frequency, CountsAddUp) {
  auto c = small_config("");
  c.rankers = {"omp", "lars"};
  c.reps = 4;
  const auto tables = run_frequency_study(c);
  ASSERT_EQ(tables.size(), 2u);
  for (const auto& t : tables) {
    int total = 0, selected = 0;
    for (const auto& r : t.rows) {
      total += r.count;
      EXPECT_LE(r.count, 4);
      EXPECT_GE(r.count, 1);
      EXPECT_EQ(r.id, graded_lex_position(r.alpha));
    }
    for (int n : t.selected_per_rep) selected += n;
    EXPECT_EQ(total, selected);
  }
  c.reps = 1;
  for (const auto& t : run_frequency_study(c))
    for (const auto& r : t.rows) EXPECT_EQ(r.count, 1);
}

TEST(Sensitivity, AggregatesMatchRecomputation) {
  auto c = small_config("");
  c.rankers = {"lars", "rpce"};
  const auto rep = run_sensitivity(c);
  ASSERT_EQ(rep.indices.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    for (int i = 0; i < 3; ++i) {
      double s = 0.0, t = 0.0;
      int n = 0;
      for (const auto& idx : rep.indices[k])
        if (idx) {
          s += idx->first_order[static_cast<std::size_t>(i)];
          t += idx->total[static_cast<std::size_t>(i)];
          ++n;
        }
      ASSERT_GT(n, 0);
      bool found = false;
      for (const auto& row : rep.rows)
        if (row.ranker == c.rankers[k] && row.subset == std::vector<int>{i}) {
          found = true;
          EXPECT_NEAR(row.mean_s, s / n, 1e-14);
          EXPECT_NEAR(row.mean_total, t / n, 1e-14);
          ASSERT_TRUE(row.delta_s.has_value());
          EXPECT_NEAR(*row.delta_s, row.mean_s - *row.ref_s, 1e-15);
        }
      EXPECT_TRUE(found);
    }
  }
}

TEST(Sensitivity, ReferenceEqualToModelGivesZeroDeviation) {
  PceModel m;
  m.input = InputModel({Marginal::uniform(0, 1), Marginal::uniform(0, 1)});
  m.alphas = {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{1, 1}};
  m.beta = Eigen::Vector3d(1.0, 2.0, 0.5);
  const auto s = indices_from_pce(m);
  const auto rows = aggregate_sensitivity("x", 2, {s, s}, s);
  for (const auto& r : rows) {
    EXPECT_EQ(*r.delta_s, 0.0);
    if (r.delta_total) {
      EXPECT_EQ(*r.delta_total, 0.0);
    }
  }
}

TEST(ExternalData, CsvPathSplitsRows) {
  const auto dir = scratch("data");
  fs::create_directories(dir);
  const InputModel in({Marginal::uniform(-1, 1), Marginal::gaussian(0, 1)});
  auto ed = lhs_sample(in, 60, 5);
  ed.y = (ed.x.col(0).array() + 0.5 * ed.x.col(1).array().square()).matrix();
  {
    std::ofstream f(dir / "d.csv");
    write_design_csv(f, ed);
    std::ofstream g(dir / "m.json");
    g << to_json(in).dump();
  }
  ExperimentConfig c;
  c.data_path = (dir / "d.csv").string();
  c.input_model_path = (dir / "m.json").string();
  c.n_train = 40;
  c.n_test = 20;
  c.k_set = {3};
  c.p_max = 4;
  c.out_dir.clear();
  const auto rep = run_experiment(c);
  for (const auto& o : rep.reps[0].rankers) {
    ASSERT_TRUE(o.ok) << o.error;
    EXPECT_GT(o.r2_test, 0.999);
  }
  c.n_test = 21;
  EXPECT_THROW(run_experiment(c), ParameterError);
}
