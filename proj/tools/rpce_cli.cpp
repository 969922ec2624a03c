// Command-line front end: fit, experiment, frequency, sobol, predict.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rpce/rpce.hpp"

namespace {

using namespace rpce;

struct Options {
  ExperimentConfig config;
  std::string rankers;
  std::string k_set = "3,5,10,20,N";
  std::string score_mode = "corrected";
  bool lhs_centered = false;
  std::string model_path;
  unsigned long long seed = 0;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> parse_k_set(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split(s)) {
    if (t == "N" || t == "n") {
      out.push_back(kLeaveOneOut);
      continue;
    }
    std::size_t pos = 0;
    const int v = std::stoi(t, &pos);
    if (pos != t.size() || v < 2) throw ParameterError("bad k-set entry '" + t + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParameterError("empty k-set");
  return out;
}

void add_common(CLI::App* app, Options& o, const std::string& default_rankers) {
  o.rankers = default_rankers;
  app->add_option("--benchmark", o.config.benchmark, "polysum, ishigami, truss or varied_dim:M");
  app->add_option("--data", o.config.data_path, "design CSV with columns x1..xM,y");
  app->add_option("--input-model", o.config.input_model_path, "JSON marginals for --data");
  app->add_option("--truss-geometry", o.config.truss_geometry_path, "JSON truss geometry");
  app->add_option("--n-train", o.config.n_train, "training size")->capture_default_str();
  app->add_option("--n-test", o.config.n_test, "independent test size")->capture_default_str();
  app->add_option("--reps", o.config.reps, "replications")->capture_default_str();
  app->add_option("--rankers", o.rankers, "comma list of lars,omp,rpce")->capture_default_str();
  app->add_option("--k-set", o.k_set, "fold counts, N for leave-one-out")->capture_default_str();
  app->add_option("--score-mode", o.score_mode, "literal or corrected")->capture_default_str();
  app->add_option("--p-max", o.config.p_max, "maximal total degree")->capture_default_str();
  app->add_option("--max-candidates", o.config.max_candidates, "skip degrees with more candidate polynomials")
      ->capture_default_str();
  app->add_option("--seed", o.seed, "master seed")->capture_default_str();
  app->add_option("--out", o.config.out_dir, "output directory")->capture_default_str();
  app->add_option("--workers", o.config.workers, "worker threads (default from RPCE_WORKERS)");
  app->add_flag("--lhs-centered", o.lhs_centered, "centered instead of jittered LHS");
  app->add_flag("--raw-correlation", o.config.raw_correlation, "OMP on unnormalized correlations");
}

void finalize(Options& o) {
  o.config.rankers = split(o.rankers);
  o.config.k_set = parse_k_set(o.k_set);
  o.config.mode = parse_score_mode(o.score_mode);
  o.config.lhs = o.lhs_centered ? LhsMode::Centered : LhsMode::Jittered;
  o.config.seed = o.seed;
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw FormatError("cannot write " + p.string());
  f << s;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_experiment(const Options& o) {
  const auto rep = run_experiment(o.config);
  std::cout << "ranker  ok  failed  R2_mean  R2_median  terms_mean\n";
  for (const auto& s : rep.summary)
    std::cout << s.ranker << "  " << s.ok << "  " << s.failed << "  " << fmt(s.r2_mean) << "  " << fmt(s.r2_median)
              << "  " << fmt(s.terms_mean) << "\n";
  return 0;
}

int cmd_frequency(const Options& o) {
  const auto tables = run_frequency_study(o.config);
  for (const auto& t : tables) {
    std::cout << t.ranker << ": " << t.rows.size() << " distinct multi-indices over " << t.reps << " replications\n";
    std::vector<FrequencyRow> top = t.rows;
    std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
    for (std::size_t i = 0; i < std::min<std::size_t>(10, top.size()); ++i)
      std::cout << "  " << top[i].alpha.to_string() << "  " << top[i].count << "\n";
  }
  return 0;
}

int cmd_fit(Options o) {
  if (o.config.rankers.size() != 1) throw ParameterError("fit takes exactly one ranker");
  o.config.reps = 1;
  o.config.validate();
  const DataSource source(o.config);
  const auto rep = run_replication(o.config, source, 0);
  const auto& r = rep.rankers.front();
  if (!r.ok) throw BuildError(r.error);
  const std::filesystem::path dir(o.config.out_dir);
  std::filesystem::create_directories(dir);
  write_text(dir / "model.json", save(*r.model));
  const auto data = source.draw(0);
  std::ostringstream design;
  write_design_csv(design, data.train);
  write_text(dir / "train.csv", design.str());
  if (!r.scores.empty()) {
    std::ostringstream sc;
    write_score_csv(sc, r.scores);
    write_text(dir / "scores.csv", sc.str());
  }
  std::cout << "terms " << r.model->size() << "  degree " << r.model->degree << "  eps_loo " << fmt(r.model->eps_loo)
            << "  R2_test " << fmt(r.r2_test);
  if (!r.model->meta.source.empty()) std::cout << "  source " << r.model->meta.source;
  std::cout << "\n";
  return 0;
}

int cmd_sobol(const Options& o) {
  const std::filesystem::path dir(o.config.out_dir);
  if (!o.model_path.empty()) {
    const PceModel model = load(read_text(o.model_path));
    std::ostringstream os;
    write_sobol_csv(os, indices_from_pce(model));
    std::filesystem::create_directories(dir);
    write_text(dir / "sobol.csv", os.str());
    std::cout << os.str();
    return 0;
  }
  const auto rep = run_sensitivity(o.config);
  std::cout << sensitivity_csv(rep.rows);
  return 0;
}

int cmd_predict(const Options& o) {
  if (o.model_path.empty() || o.config.data_path.empty()) throw ParameterError("predict needs --model and --data");
  const PceModel model = load(read_text(o.model_path));
  std::ifstream in(o.config.data_path);
  if (!in) throw FormatError("cannot open " + o.config.data_path);
  const ExperimentalDesign points = read_design_csv(in);
  const Eigen::VectorXd y = model.predict(points.x);
  std::ostringstream os;
  os << "y_hat\n";
  for (Eigen::Index i = 0; i < y.size(); ++i) os << format_double(y(i)) << '\n';
  const std::filesystem::path dir(o.config.out_dir);
  std::filesystem::create_directories(dir);
  write_text(dir / "predictions.csv", os.str());
  if (points.has_response() && points.size() >= 2) std::cout << "R2 " << fmt(r_squared(points.y, y)) << "\n";
  std::cout << "wrote " << y.size() << " predictions\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse polynomial chaos surrogates with resampled basis ranking"};
  app.require_subcommand(1);
  Options fit, exp, freq, sob, pred;
  for (Options* o : {&fit, &exp, &freq, &sob, &pred}) o->config.workers = default_workers();

  auto* c_fit = app.add_subcommand("fit", "fit one surrogate and save it as JSON");
  fit.config.n_test = 0;
  add_common(c_fit, fit, "rpce");
  auto* c_exp = app.add_subcommand("experiment", "replication study comparing rankers");
  add_common(c_exp, exp, "lars,omp,rpce");
  auto* c_freq = app.add_subcommand("frequency", "selection frequencies of multi-indices");
  add_common(c_freq, freq, "omp");
  auto* c_sob = app.add_subcommand("sobol", "Sobol' indices of a saved model or a replication study");
  add_common(c_sob, sob, "rpce");
  c_sob->add_option("--model", sob.model_path, "saved model JSON");
  auto* c_pred = app.add_subcommand("predict", "evaluate a saved model on a CSV of inputs");
  add_common(c_pred, pred, "rpce");
  c_pred->add_option("--model", pred.model_path, "saved model JSON")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (c_fit->parsed()) return finalize(fit), cmd_fit(fit);
    if (c_exp->parsed()) return finalize(exp), cmd_experiment(exp);
    if (c_freq->parsed()) return finalize(freq), cmd_frequency(freq);
    if (c_sob->parsed()) return finalize(sob), cmd_sobol(sob);
    if (c_pred->parsed()) return finalize(pred), cmd_predict(pred);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
