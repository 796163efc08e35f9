// Command line for the superoptimizer pipeline: dataset generation, class
// balancing, splitting, feature selection, classifier training/evaluation,
// strategy benchmarks and Pareto reporting. Every stage takes an explicit
// seed and writes outputs atomically, so reruns reproduce byte-identical
// artifacts (wall-clock columns aside). Each stage also echoes its effective
// settings to "<primary output>.cfg".

#include <exception>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sopt/dataset.hpp"
#include "sopt/io.hpp"
#include "sopt/mlp.hpp"
#include "sopt/pipeline.hpp"

namespace {

using namespace sopt;

// Effective-settings echo, one "key=value" per line in insertion order.
struct ConfigEcho {
  std::vector<std::pair<std::string, std::string>> items;

  void add(const std::string& k, const std::string& v) { items.emplace_back(k, v); }
  void add(const std::string& k, long v) { add(k, std::to_string(v)); }
  void add(const std::string& k, int v) { add(k, std::to_string(v)); }
  void add(const std::string& k, uint64_t v) { add(k, std::to_string(v)); }
  void add(const std::string& k, double v) { add(k, format_double(v)); }

  void write(const std::string& primary_out) const {
    std::string text;
    for (const auto& [k, v] : items) text += k + "=" + v + "\n";
    atomic_write(primary_out + ".cfg", text);
  }
};

struct SynthFlags {
  int max_instructions = SynthConfig{}.max_instructions;
  int candidate_cap = SynthConfig{}.candidate_cap;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-instructions", max_instructions,
                    "Operation count limit per candidate expression")
        ->capture_default_str();
    cmd->add_option("--candidate-cap", candidate_cap,
                    "Keep at most this many cheapest candidates per pattern")
        ->capture_default_str();
  }
  SynthConfig resolve() const {
    SynthConfig s;
    s.max_instructions = max_instructions;
    s.candidate_cap = candidate_cap;
    return s;
  }
  void echo(ConfigEcho& e) const {
    e.add("max_instructions", max_instructions);
    e.add("candidate_cap", candidate_cap);
  }
};

struct OracleFlags {
  int bit_budget = OracleConfig{}.exhaustive_bit_budget;
  int samples = OracleConfig{}.sample_count;
  uint64_t seed = OracleConfig{}.seed;
  long candidate_ms = OracleConfig{}.per_candidate_timeout.count();
  long lhs_ms = OracleConfig{}.per_lhs_time_limit.count();

  void attach(CLI::App* cmd) {
    cmd->add_option("--bit-budget", bit_budget,
                    "Free input bits below which equivalence sweeps are exhaustive")
        ->capture_default_str();
    cmd->add_option("--samples", samples,
                    "Random assignments tried when a sweep is too large")
        ->capture_default_str();
    cmd->add_option("--candidate-ms", candidate_ms,
                    "Oracle timeout per candidate, milliseconds")
        ->capture_default_str();
    cmd->add_option("--lhs-ms", lhs_ms, "Oracle budget per pattern, milliseconds")
        ->capture_default_str();
  }
  OracleConfig resolve() const {
    OracleConfig o;
    o.exhaustive_bit_budget = bit_budget;
    o.sample_count = samples;
    o.seed = seed;
    o.per_candidate_timeout = std::chrono::milliseconds(candidate_ms);
    o.per_lhs_time_limit = std::chrono::milliseconds(lhs_ms);
    return o;
  }
  void echo(ConfigEcho& e) const {
    e.add("bit_budget", bit_budget);
    e.add("samples", samples);
    e.add("seed", seed);
    e.add("candidate_ms", candidate_ms);
    e.add("lhs_ms", lhs_ms);
  }
};

int cmd_dataset(const std::string& corpus, const std::string& out,
                const SynthFlags& sf, const OracleFlags& of) {
  GenerateConfig cfg;
  cfg.synth = sf.resolve();
  cfg.oracle = of.resolve();
  auto patterns = load_corpus(corpus);
  GenerateStats stats;
  auto rows = generate_rows(patterns, cfg, &stats);
  write_csv(out, rows_to_csv(rows));
  ConfigEcho echo;
  echo.add("command", "dataset");
  echo.add("corpus", corpus);
  echo.add("out", out);
  sf.echo(echo);
  of.echo(echo);
  echo.write(out);
  std::cout << "patterns=" << stats.lhs_count << " candidates=" << stats.candidates
            << " rows=" << rows.size() << " unknown_dropped=" << stats.unknown_dropped
            << "\n";
  return 0;
}

int cmd_balance(const std::string& in, const std::string& out, uint64_t seed) {
  auto rows = rows_from_csv(read_csv(in));
  auto balanced = balance_cluster_centroids(rows, seed);
  write_csv(out, rows_to_csv(balanced));
  ConfigEcho echo;
  echo.add("command", "balance");
  echo.add("in", in);
  echo.add("out", out);
  echo.add("seed", seed);
  echo.write(out);
  std::cout << "rows_in=" << rows.size() << " rows_out=" << balanced.size() << "\n";
  return 0;
}

int cmd_split(const std::string& in, const std::string& train_out,
              const std::string& test_out, double ratio, uint64_t seed) {
  auto rows = rows_from_csv(read_csv(in));
  SplitResult split = stratified_split(rows, ratio, seed);
  write_csv(train_out, rows_to_csv(split.train));
  write_csv(test_out, rows_to_csv(split.test));
  ConfigEcho echo;
  echo.add("command", "split");
  echo.add("in", in);
  echo.add("train_out", train_out);
  echo.add("test_out", test_out);
  echo.add("ratio", ratio);
  echo.add("seed", seed);
  echo.write(train_out);
  std::cout << "train=" << split.train.size() << " test=" << split.test.size() << "\n";
  return 0;
}

// Recall of the positive (equivalent) class on eval rows, judging positive
// when the score clears the threshold.
double recall_at(const Model& m, const std::vector<DatasetRow>& rows,
                 double threshold) {
  double tp = 0, fn = 0;
  for (const auto& r : rows) {
    if (r.label != 1) continue;
    (m.predict_raw(r.features) >= threshold ? tp : fn)++;
  }
  return tp + fn > 0 ? tp / (tp + fn) : 0.0;
}

Model fit_model(const std::vector<DatasetRow>& train_rows, int k, double threshold,
                int epochs, int batch, double lr, uint64_t seed,
                std::vector<double>* loss_curve) {
  Model m;
  m.mask = select_k_best(mutual_information(train_rows), k);
  auto x = feature_matrix(train_rows, m.mask);
  m.scaler = Scaler::fit(x);
  for (auto& row : x) row = m.scaler.transform(row);
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch;
  tc.learning_rate = lr;
  tc.seed = seed;
  TrainResult tr = train(x, label_vector(train_rows), tc);
  m.net = std::move(tr.net);
  m.threshold = threshold;
  if (loss_curve) *loss_curve = std::move(tr.loss_curve);
  return m;
}

int cmd_select(const std::string& train_in, const std::string& test_in,
               const std::string& scores_out, const std::string& recall_out,
               double threshold, int epochs, uint64_t seed) {
  auto train_rows = rows_from_csv(read_csv(train_in));
  auto test_rows = rows_from_csv(read_csv(test_in));
  auto mi = mutual_information(train_rows);

  CsvTable scores;
  scores.header = {"index", "feature", "mi"};
  for (int i = 0; i < kFeatureCount; i++)
    scores.rows.push_back({std::to_string(i), std::string(kFeatureNames[i]),
                           format_double(mi[i])});
  write_csv(scores_out, scores);

  CsvTable sweep;
  sweep.header = {"k", "recall_at_half", "recall_at_threshold"};
  for (int k = 1; k <= kFeatureCount; k++) {
    Model m = fit_model(train_rows, k, threshold, epochs, 200, 0.01, seed, nullptr);
    sweep.rows.push_back({std::to_string(k),
                          format_double(recall_at(m, test_rows, 0.5)),
                          format_double(recall_at(m, test_rows, threshold))});
  }
  write_csv(recall_out, sweep);

  ConfigEcho echo;
  echo.add("command", "select");
  echo.add("train", train_in);
  echo.add("test", test_in);
  echo.add("scores_out", scores_out);
  echo.add("recall_out", recall_out);
  echo.add("threshold", threshold);
  echo.add("epochs", epochs);
  echo.add("seed", seed);
  echo.write(scores_out);
  std::cout << "features=" << kFeatureCount << " swept_k=1.." << kFeatureCount << "\n";
  return 0;
}

int cmd_train(const std::string& in, const std::string& model_out,
              const std::string& loss_out, int k, double threshold, int epochs,
              int batch, double lr, uint64_t seed) {
  auto rows = rows_from_csv(read_csv(in));
  std::vector<double> loss;
  Model m = fit_model(rows, k, threshold, epochs, batch, lr, seed, &loss);
  save_model(model_out, m);
  if (!loss_out.empty()) {
    CsvTable t;
    t.header = {"epoch", "loss"};
    for (size_t e = 0; e < loss.size(); e++)
      t.rows.push_back({std::to_string(e), format_double(loss[e])});
    write_csv(loss_out, t);
  }
  ConfigEcho echo;
  echo.add("command", "train");
  echo.add("in", in);
  echo.add("model_out", model_out);
  echo.add("loss_out", loss_out);
  echo.add("k", k);
  echo.add("threshold", threshold);
  echo.add("epochs", epochs);
  echo.add("batch", batch);
  echo.add("lr", lr);
  echo.add("seed", seed);
  echo.write(model_out);
  std::cout << "rows=" << rows.size() << " inputs=" << m.mask.size()
            << " final_loss=" << (loss.empty() ? 0.0 : loss.back()) << "\n";
  return 0;
}

int cmd_eval(const std::string& in, const std::string& model_in,
             const std::string& metrics_out, const std::string& roc_out) {
  auto rows = rows_from_csv(read_csv(in));
  Model m = load_model(model_in);
  std::vector<int> y = label_vector(rows);
  std::vector<double> scores;
  scores.reserve(rows.size());
  for (const auto& r : rows) scores.push_back(m.predict_raw(r.features));
  std::vector<int> at_half;
  at_half.reserve(scores.size());
  for (double s : scores) at_half.push_back(s >= 0.5 ? 1 : 0);
  Metrics metrics = compute_metrics(y, at_half);

  CsvTable mt;
  mt.header = {"n",  "accuracy",  "precision",   "recall",
               "f1", "threshold", "recall_valid"};
  mt.rows.push_back({std::to_string(rows.size()), format_double(metrics.accuracy),
                     format_double(metrics.precision), format_double(metrics.recall),
                     format_double(metrics.f1), format_double(m.threshold),
                     format_double(recall_at(m, rows, m.threshold))});
  write_csv(metrics_out, mt);

  if (!roc_out.empty()) {
    CsvTable rt;
    rt.header = {"threshold", "fpr", "tpr"};
    for (const RocPoint& p : roc_curve(y, scores))
      rt.rows.push_back({format_double(p.threshold), format_double(p.fpr),
                         format_double(p.tpr)});
    write_csv(roc_out, rt);
  }

  ConfigEcho echo;
  echo.add("command", "eval");
  echo.add("in", in);
  echo.add("model", model_in);
  echo.add("metrics_out", metrics_out);
  echo.add("roc_out", roc_out);
  echo.write(metrics_out);
  std::cout << "n=" << rows.size() << " accuracy=" << metrics.accuracy << "\n";
  return 0;
}

int cmd_bench(const std::string& corpus, const std::string& model_in,
              const std::string& out, const std::vector<std::string>& strategy_names,
              const std::string& cache, int probes, const SynthFlags& sf,
              const OracleFlags& of) {
  std::vector<Strategy> strategies;
  for (const auto& name : strategy_names) {
    auto s = strategy_from_name(name);
    if (!s) throw std::runtime_error("unknown strategy: " + name);
    strategies.push_back(*s);
  }
  PipelineConfig cfg;
  cfg.synth = sf.resolve();
  cfg.oracle = of.resolve();
  cfg.quickcheck_probes = probes;

  Model model;
  bool have_model = !model_in.empty();
  if (have_model) model = load_model(model_in);
  for (Strategy s : strategies)
    if ((s == Strategy::PrediPrune || s == Strategy::PrediPruneQuickCheck) &&
        !have_model)
      throw std::runtime_error("strategy " + strategy_name(s) + " needs --model");

  auto patterns = load_corpus(corpus);
  std::vector<StrategyReport> reports;
  for (Strategy s : strategies) {
    CacheStore store;
    if (cache != "off")
      store = CacheStore::open(cache + "." + strategy_name(s));
    reports.push_back(run_strategy(patterns, s, cfg,
                                   have_model ? &model : nullptr,
                                   cache != "off" ? &store : nullptr));
  }
  write_csv(out, reports_to_csv(reports));

  ConfigEcho echo;
  echo.add("command", "bench");
  echo.add("corpus", corpus);
  echo.add("model", model_in);
  echo.add("out", out);
  std::string joined;
  for (const auto& n : strategy_names) joined += (joined.empty() ? "" : "+") + n;
  echo.add("strategies", joined);
  echo.add("cache", cache);
  echo.add("quickcheck_probes", probes);
  sf.echo(echo);
  of.echo(echo);
  echo.write(out);
  for (const auto& r : reports)
    std::cout << strategy_name(r.strategy) << ": oracle_calls=" << r.oracle_calls
              << " optimized=" << r.optimized << "/" << r.lhs_count
              << " cost_decrease=" << r.cost_decrease() << "\n";
  return 0;
}

int cmd_pareto(const std::string& in, const std::string& out) {
  CsvTable report = read_csv(in);
  int scol = report.column("strategy");
  int ocol = report.column("oracle_calls");
  int dcol = report.column("cost_decrease");
  if (scol < 0 || ocol < 0 || dcol < 0)
    throw std::runtime_error("report is missing strategy/oracle_calls/cost_decrease");
  std::vector<ParetoPoint> points;
  for (const auto& row : report.rows)
    points.push_back({row[scol], std::stod(row[ocol]), std::stod(row[dcol]), false});
  mark_pareto_front(points);
  CsvTable t;
  t.header = {"strategy", "oracle_calls", "cost_decrease", "on_front"};
  for (const auto& p : points)
    t.rows.push_back({p.label, format_double(p.oracle_calls),
                      format_double(p.cost_decrease), p.on_front ? "1" : "0"});
  write_csv(out, t);
  ConfigEcho echo;
  echo.add("command", "pareto");
  echo.add("in", in);
  echo.add("out", out);
  echo.write(out);
  std::cout << "points=" << points.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superoptimizer candidate-pruning pipeline"};
  app.require_subcommand(1);

  std::string corpus, in, out, train_out, test_out, model_path, loss_out;
  std::string scores_out, recall_out, metrics_out, roc_out, cache = "off";
  std::vector<std::string> strategies = {"baseline", "quickcheck", "prediprune",
                                         "prediprune_quickcheck"};
  uint64_t seed = 42;
  double ratio = 0.8, threshold = 1e-4, lr = 0.01;
  int k = 14, epochs = 400, batch = 200, probes = 64;
  SynthFlags synth_flags;
  OracleFlags oracle_flags;

  auto* dataset = app.add_subcommand(
      "dataset", "Label enumerated candidates against a pattern corpus");
  dataset->add_option("--corpus", corpus, "Directory of .sir pattern files")
      ->required();
  dataset->add_option("--out", out, "Output dataset CSV")->required();
  synth_flags.attach(dataset);
  oracle_flags.attach(dataset);
  dataset->add_option("--seed", oracle_flags.seed, "Oracle sampling seed")
      ->capture_default_str();

  auto* balance = app.add_subcommand(
      "balance", "Undersample the majority class with k-means centroids");
  balance->add_option("--in", in, "Input dataset CSV")->required();
  balance->add_option("--out", out, "Output balanced CSV")->required();
  balance->add_option("--seed", seed, "Clustering seed")->capture_default_str();

  auto* split = app.add_subcommand("split", "Stratified train/test split");
  split->add_option("--in", in, "Input dataset CSV")->required();
  split->add_option("--train-out", train_out, "Output train CSV")->required();
  split->add_option("--test-out", test_out, "Output test CSV")->required();
  split->add_option("--ratio", ratio, "Train fraction per class")
      ->capture_default_str();
  split->add_option("--seed", seed, "Shuffle seed")->capture_default_str();

  auto* select = app.add_subcommand(
      "select", "Mutual-information scores and a recall-vs-k feature sweep");
  select->add_option("--train", in, "Train CSV")->required();
  select->add_option("--test", test_out, "Held-out CSV for the sweep")->required();
  select->add_option("--scores-out", scores_out, "Per-feature MI CSV")->required();
  select->add_option("--recall-out", recall_out, "Recall-vs-k CSV")->required();
  select->add_option("--threshold", threshold, "Pruning threshold")
      ->capture_default_str();
  select->add_option("--epochs", epochs, "Training epochs per sweep point")
      ->capture_default_str();
  select->add_option("--seed", seed, "Init and shuffle seed")->capture_default_str();

  auto* train = app.add_subcommand("train", "Fit the pruning classifier");
  train->add_option("--in", in, "Train CSV")->required();
  train->add_option("--model-out", model_path, "Output model file")->required();
  train->add_option("--loss-out", loss_out, "Per-epoch loss CSV");
  train->add_option("--k", k, "Features kept by mutual information")
      ->capture_default_str();
  train->add_option("--threshold", threshold, "Pruning threshold stored in the model")
      ->capture_default_str();
  train->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
  train->add_option("--batch", batch, "Minibatch size")->capture_default_str();
  train->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
  train->add_option("--seed", seed, "Init and shuffle seed")->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on labeled rows");
  eval_cmd->add_option("--in", in, "Eval CSV")->required();
  eval_cmd->add_option("--model", model_path, "Model file")->required();
  eval_cmd->add_option("--metrics-out", metrics_out, "Metrics CSV")->required();
  eval_cmd->add_option("--roc-out", roc_out, "ROC curve CSV");

  auto* bench = app.add_subcommand(
      "bench", "Run pruning strategies over a corpus and report counters");
  bench->add_option("--corpus", corpus, "Directory of .sir pattern files")
      ->required();
  bench->add_option("--model", model_path, "Model file (classifier strategies)");
  bench->add_option("--out", out, "Report CSV")->required();
  bench
      ->add_option("--strategies", strategies,
                   "Strategies to run: baseline, quickcheck, prediprune, "
                   "prediprune_quickcheck (alias: combined)")
      ->delimiter(',')
      ->capture_default_str();
  bench
      ->add_option("--cache", cache,
                   "Verdict cache path prefix, or 'off'; each strategy appends "
                   "its name")
      ->capture_default_str();
  bench->add_option("--quickcheck-probes", probes, "Probe rows per candidate")
      ->capture_default_str();
  synth_flags.attach(bench);
  oracle_flags.attach(bench);
  bench->add_option("--seed", oracle_flags.seed, "Oracle and probe seed")
      ->capture_default_str();

  auto* pareto = app.add_subcommand(
      "pareto", "Mark the oracle-calls/cost-decrease Pareto front of a report");
  pareto->add_option("--in", in, "Report CSV from bench")->required();
  pareto->add_option("--out", out, "Pareto CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dataset->parsed()) return cmd_dataset(corpus, out, synth_flags, oracle_flags);
    if (balance->parsed()) return cmd_balance(in, out, seed);
    if (split->parsed()) return cmd_split(in, train_out, test_out, ratio, seed);
    if (select->parsed())
      return cmd_select(in, test_out, scores_out, recall_out, threshold, epochs, seed);
    if (train->parsed())
      return cmd_train(in, model_path, loss_out, k, threshold, epochs, batch, lr, seed);
    if (eval_cmd->parsed()) return cmd_eval(in, model_path, metrics_out, roc_out);
    if (bench->parsed())
      return cmd_bench(corpus, model_path, out, strategies, cache, probes,
                       synth_flags, oracle_flags);
    if (pareto->parsed()) return cmd_pareto(in, out);
  } catch (const std::exception& e) {
    std::cerr << "sopt: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
