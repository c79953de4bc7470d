// hyxnet — DNS tunnel detection engine.
// Subcommands: synth, fit-scaler, train, eval, detect, bench.
// Exit codes: 0 success, 2 usage, 3 data error, 4 model error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyxnet/ingest.hpp"
#include "hyxnet/metrics.hpp"
#include "hyxnet/model.hpp"
#include "hyxnet/stream.hpp"
#include "hyxnet/synth.hpp"
#include "hyxnet/trainer.hpp"

namespace fs = std::filesystem;
using namespace hyxnet;

namespace {

struct CommonOpts {
  std::string schema_path;
  std::string delimiter = ",";
  bool lenient = false;

  char delim() const {
    if (delimiter.size() != 1) throw DataError("--delimiter must be a single character");
    return delimiter[0];
  }
  FeatureSchema schema() const {
    return schema_path.empty() ? FeatureSchema::default_schema()
                               : FeatureSchema::parse_file(schema_path);
  }
};

LabelMap labels_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const std::string name = FeatureSchema::trim(line);
    if (!name.empty()) names.push_back(name);
  }
  if (names.empty()) throw DataError("labels file has no names: " + path);
  return LabelMap(std::move(names));
}

int run_synth(const std::string& out, int per_class, std::uint64_t seed, int classes) {
  SynthSpec spec;
  if (classes == 3)
    spec = default_synth_spec(per_class, seed);
  else if (classes == 12)
    spec = twelve_class_synth_spec(per_class, seed);
  else
    throw DataError("--classes must be 3 or 12");
  const std::vector<DnsEvent> events = generate(spec);
  write_synth_csv(events, synth_labels(spec), out);
  std::cout << "wrote " << events.size() << " events (" << classes << " classes) to " << out
            << "\n";
  return 0;
}

int run_fit_scaler(const CommonOpts& common, const std::string& data, const std::string& out) {
  const FeatureSchema schema = common.schema();
  ParseReport report;
  const std::vector<DnsEvent> events =
      parse_dataset_unlabeled(data, schema, true, common.delim(), &report);
  if (events.empty()) throw DataError("no usable rows in " + data);
  const FeatureScaler scaler = FeatureScaler::fit(events, schema.numeric_dim());

  std::ofstream file(out, std::ios::binary);
  if (!file) throw DataError("cannot open output file: " + out);
  const std::vector<std::string> names = schema.numeric_names();
  char buf[128];
  for (int j = 0; j < scaler.dim(); ++j) {
    std::snprintf(buf, sizeof(buf), " %.17g %.17g\n", scaler.mean()[j], scaler.std()[j]);
    file << names[j] << buf;
  }
  std::cout << "fit scaler over " << events.size() << " rows (" << report.rejected
            << " rejected), wrote " << out << "\n";
  return 0;
}

int run_train(const CommonOpts& common, const std::string& data, const std::string& labels_path,
              const std::string& out_dir, TrainConfig tc, bool per_step_numerics) {
  const FeatureSchema schema = common.schema();
  const LabelMap labels = labels_path.empty() ? infer_labels(data, schema, common.delim())
                                              : labels_from_file(labels_path);
  HyxnetConfig config;
  config.per_step_numerics = per_step_numerics;

  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult result =
      run_experiment(data, schema, labels, config, tc, out_dir, common.lenient, common.delim());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const std::string& w : result.train.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "splits: train=" << result.train_size << " val=" << result.val_size
            << " test=" << result.test_size << "\n";
  std::cout << "epochs run: " << result.train.epochs_run
            << ", best epoch: " << result.train.best_epoch << "\n";
  for (const TrainLogRecord& rec : result.train.log) {
    std::printf("epoch %2d  train %.6f  val %.6f  lr %.2e  (%.1fs)\n", rec.epoch, rec.train_loss,
                rec.val_loss, rec.lr, rec.elapsed_seconds);
  }
  std::cout << "\n" << format_report(result.report, result.labels);
  std::printf("wall time: %.1fs\nartifacts in %s: model.hyxn train.log report.txt confusion.csv\n",
              wall, out_dir.c_str());
  return 0;
}

int run_eval(const CommonOpts& common, const std::string& model, const std::string& data,
             int batch, int threads, const std::string& out_dir) {
  const Checkpoint ckpt = load_checkpoint(model);
  const FeatureSchema schema = common.schema();
  if (schema.numeric_dim() != ckpt.config.numeric_dim)
    throw ModelError("schema provides " + std::to_string(schema.numeric_dim()) +
                     " numeric features but the checkpoint expects " +
                     std::to_string(ckpt.config.numeric_dim));
  ParseReport report;
  const std::vector<DnsEvent> events =
      parse_dataset(data, schema, ckpt.labels, common.lenient, common.delim(), &report);
  if (events.empty()) throw DataError("no usable rows in " + data);
  const EncodedSet set = encode_events(events, ckpt.scaler);
  const EvalReport eval = evaluate(ckpt.params, ckpt.config, set, batch, threads);
  std::cout << format_report(eval, ckpt.labels);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream rep(fs::path(out_dir) / "report.txt", std::ios::binary);
    rep << format_report(eval, ckpt.labels);
    std::ofstream cm(fs::path(out_dir) / "confusion.csv", std::ios::binary);
    cm << confusion_csv(eval, ckpt.labels);
  }
  return 0;
}

int run_detect(const CommonOpts& common, const std::string& model, const std::string& input,
               double threshold, double block_threshold,
               const std::vector<std::string>& benign) {
  const Checkpoint ckpt = load_checkpoint(model);
  const StreamDetector detector(ckpt, common.schema(), threshold, block_threshold, benign);

  StreamSummary summary;
  if (input.empty() || input == "-") {
    summary = detector.run(std::cin, std::cout);
  } else {
    std::ifstream in(input);
    if (!in) throw DataError("cannot open input: " + input);
    summary = detector.run(in, std::cout);
  }
  std::cerr << "processed " << summary.processed << ", alerted " << summary.alerted
            << ", malformed " << summary.malformed << "\n";
  for (int k = 0; k < static_cast<int>(summary.per_class.size()); ++k)
    if (summary.per_class[k] > 0)
      std::cerr << "  " << ckpt.labels.name(k) << ": " << summary.per_class[k] << "\n";
  return 0;
}

int run_bench(const CommonOpts& common, const std::string& model, const std::string& data,
              int reps, int threads) {
  const Checkpoint ckpt = load_checkpoint(model);
  const FeatureSchema schema = common.schema();
  if (schema.numeric_dim() != ckpt.config.numeric_dim)
    throw ModelError("schema provides " + std::to_string(schema.numeric_dim()) +
                     " numeric features but the checkpoint expects " +
                     std::to_string(ckpt.config.numeric_dim));
  const std::vector<DnsEvent> events =
      parse_dataset_unlabeled(data, schema, true, common.delim(), nullptr);
  if (events.empty()) throw DataError("no usable rows in " + data);
  const BenchReport report = bench(ckpt, events, reps, threads);
  std::cout << format_bench(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNS tunnel detection: tokenizing recurrent classifier over DNS event streams"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read default flag values from an INI file");

  CommonOpts common;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic DNS corpus (CSV)");
  std::string synth_out = "synth.csv";
  int synth_per_class = 1000, synth_classes = 3;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "Output CSV path")->capture_default_str();
  synth->add_option("--per-class", synth_per_class, "Events per class")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("--classes", synth_classes, "Class count: 3 or 12")->capture_default_str();

  // fit-scaler
  auto* fit = app.add_subcommand("fit-scaler", "Fit feature standardization and write it as text");
  std::string fit_data, fit_out = "scaler.txt";
  fit->add_option("--data", fit_data, "Input dataset CSV")->required();
  fit->add_option("--out", fit_out, "Output scaler path")->capture_default_str();
  fit->add_option("--schema", common.schema_path, "Schema file (name:kind per line)");
  fit->add_option("--delimiter", common.delimiter, "Field delimiter")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train a detector and write run artifacts");
  std::string train_data, train_labels, train_out;
  TrainConfig tc;
  bool per_step_numerics = false;
  train->add_option("--data", train_data, "Labeled dataset CSV")->required();
  train->add_option("--out", train_out, "Output directory for artifacts")->required();
  train->add_option("--schema", common.schema_path, "Schema file (name:kind per line)");
  train->add_option("--labels", train_labels, "Label order file (one name per line)");
  train->add_option("--train-ratio", tc.train_ratio, "Train split fraction")->capture_default_str();
  train->add_option("--val-ratio", tc.val_ratio, "Validation split fraction")->capture_default_str();
  train->add_option("--seed", tc.seed, "Run seed")->capture_default_str();
  train->add_option("--batch", tc.batch_size, "Mini-batch size")->capture_default_str();
  train->add_option("--epochs", tc.max_epochs, "Epoch cap")->capture_default_str();
  train->add_option("--lr", tc.lr, "Initial learning rate")->capture_default_str();
  train->add_option("--weight-decay", tc.weight_decay, "Decoupled weight decay")
      ->capture_default_str();
  train->add_option("--clip", tc.clip, "Global gradient-norm clip")->capture_default_str();
  train->add_option("--threads", tc.threads, "Evaluation threads")->capture_default_str();
  train->add_option("--delimiter", common.delimiter, "Field delimiter")->capture_default_str();
  train->add_flag("--lenient", common.lenient, "Skip malformed rows instead of failing");
  train->add_flag("--per-step-numerics", per_step_numerics,
                  "Also feed standardized numerics into every recurrent step");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled dataset");
  std::string eval_model, eval_data, eval_out;
  int eval_batch = 512, eval_threads = 1;
  eval->add_option("--model", eval_model, "Checkpoint path")->required();
  eval->add_option("--data", eval_data, "Labeled dataset CSV")->required();
  eval->add_option("--schema", common.schema_path, "Schema file (name:kind per line)");
  eval->add_option("--batch", eval_batch, "Scoring batch size")->capture_default_str();
  eval->add_option("--threads", eval_threads, "Scoring threads")->capture_default_str();
  eval->add_option("--out", eval_out, "Optional directory for report.txt / confusion.csv");
  eval->add_option("--delimiter", common.delimiter, "Field delimiter")->capture_default_str();
  eval->add_flag("--lenient", common.lenient, "Skip malformed rows instead of failing");

  // detect
  auto* detect = app.add_subcommand(
      "detect", "Stream detection: read event lines, write alert JSON lines to stdout");
  std::string detect_model, detect_input = "-";
  double threshold = 0.5, block_threshold = 0.9;
  std::vector<std::string> benign;
  detect->add_option("--model", detect_model, "Checkpoint path")->required();
  detect->add_option("--input", detect_input, "Input file, or - for stdin")
      ->capture_default_str();
  detect->add_option("--schema", common.schema_path, "Schema file (name:kind per line)");
  detect->add_option("--threshold", threshold, "Alert confidence threshold")
      ->capture_default_str();
  detect->add_option("--block-threshold", block_threshold,
                     "Confidence at which alerts escalate to block-recommend")
      ->capture_default_str();
  detect->add_option("--benign", benign,
                     "Benign class names (default: normal, wildcard when present)");
  detect->add_option("--delimiter", common.delimiter, "Field delimiter")->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Per-sample latency/throughput benchmark");
  std::string bench_model, bench_data;
  int reps = 3, bench_threads = 1;
  bench_cmd->add_option("--model", bench_model, "Checkpoint path")->required();
  bench_cmd->add_option("--data", bench_data, "Dataset CSV of samples to score")->required();
  bench_cmd->add_option("--schema", common.schema_path, "Schema file (name:kind per line)");
  bench_cmd->add_option("--reps", reps, "Timed repetitions (median reported)")
      ->capture_default_str();
  bench_cmd->add_option("--threads", bench_threads, "Parallel workers")->capture_default_str();
  bench_cmd->add_option("--delimiter", common.delimiter, "Field delimiter")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return run_synth(synth_out, synth_per_class, synth_seed, synth_classes);
    if (*fit) return run_fit_scaler(common, fit_data, fit_out);
    if (*train) return run_train(common, train_data, train_labels, train_out, tc,
                                 per_step_numerics);
    if (*eval) return run_eval(common, eval_model, eval_data, eval_batch, eval_threads, eval_out);
    if (*detect)
      return run_detect(common, detect_model, detect_input, threshold, block_threshold, benign);
    if (*bench_cmd) return run_bench(common, bench_model, bench_data, reps, bench_threads);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
