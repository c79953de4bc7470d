#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "hyxnet/encoder.hpp"
#include "hyxnet/ingest.hpp"
#include "hyxnet/metrics.hpp"
#include "hyxnet/model.hpp"
#include "hyxnet/optim.hpp"

namespace hyxnet {

struct TrainConfig {
  int batch_size = 512;
  int max_epochs = 50;
  std::uint64_t seed = 1;
  double lr = 2e-3;
  double weight_decay = 1e-4;
  double clip = 1.0;
  double train_ratio = 0.6;
  double val_ratio = 0.2;
  // plateau schedule / early stop
  double lr_factor = 0.5;
  double min_delta = 1e-4;
  int lr_patience = 2;
  int stop_patience = 5;
  double lr_floor = 1e-5;
  int threads = 1;  // evaluation only; the update loop is sequential by design

  void validate() const {
    require(batch_size > 0 && max_epochs >= 1, "batch size and epoch cap must be positive");
    require(lr > 0.0 && weight_decay >= 0.0 && clip > 0.0, "lr/decay/clip out of range");
    require(threads >= 1, "thread count must be >= 1");
  }
};

/// Dataset after tokenization + standardization, ready for the model.
struct EncodedSet {
  Tensor2<std::int32_t> tokens;
  Tensor2<float> numerics;
  std::vector<int> labels;  // empty for unlabeled data

  int size() const { return tokens.rows; }
};

inline EncodedSet encode_events(const std::vector<DnsEvent>& events, const FeatureScaler& scaler,
                                bool with_labels = true) {
  EncodedSet set;
  set.tokens = tokenize_batch(events);
  set.numerics = scaler.transform(events);
  if (with_labels) {
    set.labels.reserve(events.size());
    for (const DnsEvent& e : events) {
      if (!e.label) throw DataError("unlabeled event in a labeled set");
      set.labels.push_back(*e.label);
    }
  }
  return set;
}

namespace detail {

inline EncodedSet take_rows(const EncodedSet& set, const std::vector<int>& rows, int count) {
  EncodedSet out;
  out.tokens = Tensor2<std::int32_t>(count, set.tokens.cols);
  out.numerics = Tensor2<float>(count, set.numerics.cols);
  out.labels.reserve(set.labels.empty() ? 0 : count);
  for (int i = 0; i < count; ++i) {
    const int src = rows[i];
    std::copy(set.tokens.row(src), set.tokens.row(src) + set.tokens.cols, out.tokens.row(i));
    std::copy(set.numerics.row(src), set.numerics.row(src) + set.numerics.cols,
              out.numerics.row(i));
    if (!set.labels.empty()) out.labels.push_back(set.labels[src]);
  }
  return out;
}

inline EncodedSet slice_rows(const EncodedSet& set, int first, int count) {
  std::vector<int> rows(count);
  for (int i = 0; i < count; ++i) rows[i] = first + i;
  return take_rows(set, rows, count);
}

}  // namespace detail

/// Mean cross-entropy over a set, dropout off, batched; double accumulation.
template <typename T>
double dataset_loss(const ModelParams<T>& params, const HyxnetConfig& config,
                    const EncodedSet& set, int batch_size) {
  require(!set.labels.empty(), "loss needs labels");
  double total = 0.0;
  for (int first = 0; first < set.size(); first += batch_size) {
    const int count = std::min(batch_size, set.size() - first);
    EncodedSet chunk = detail::slice_rows(set, first, count);
    Tensor2<T> numerics(count, set.numerics.cols);
    for (std::size_t i = 0; i < numerics.size(); ++i)
      numerics.data[i] = static_cast<T>(chunk.numerics.data[i]);
    const Tensor2<T> probs =
        model_forward(params, config, chunk.tokens, numerics, false, 0, nullptr);
    total += cross_entropy_mean(probs, chunk.labels) * count;
  }
  return total / set.size();
}

/// Argmax predictions for a whole set; row ranges may be scored in parallel
/// (forward is read-only on the params).
template <typename T>
std::vector<int> predict_set(const ModelParams<T>& params, const HyxnetConfig& config,
                             const EncodedSet& set, int batch_size, int threads = 1) {
  std::vector<int> preds(set.size());
  const auto score_range = [&](int begin, int end) {
    for (int first = begin; first < end; first += batch_size) {
      const int count = std::min(batch_size, end - first);
      EncodedSet chunk = detail::slice_rows(set, first, count);
      Tensor2<T> numerics(count, set.numerics.cols);
      for (std::size_t i = 0; i < numerics.size(); ++i)
        numerics.data[i] = static_cast<T>(chunk.numerics.data[i]);
      const Tensor2<T> probs =
          model_forward(params, config, chunk.tokens, numerics, false, 0, nullptr);
      for (int r = 0; r < count; ++r) preds[first + r] = predict_row(probs, r).label;
    }
  };
  threads = std::max(1, std::min(threads, set.size()));
  if (threads == 1) {
    score_range(0, set.size());
  } else {
    std::vector<std::thread> pool;
    const int per = (set.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * per, end = std::min(set.size(), begin + per);
      if (begin < end) pool.emplace_back(score_range, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }
  return preds;
}

template <typename T>
EvalReport evaluate(const ModelParams<T>& params, const HyxnetConfig& config,
                    const EncodedSet& set, int batch_size = 512, int threads = 1) {
  if (set.size() == 0) throw DataError("cannot evaluate an empty set");
  const std::vector<int> preds = predict_set(params, config, set, batch_size, threads);
  return compute_metrics(preds, set.labels, config.classes);
}

struct TrainLogRecord {
  int epoch = 0;  // 0 = pre-update snapshot
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double elapsed_seconds = 0.0;  // console-only; excluded from persisted logs
};

struct TrainResult {
  ModelParams<float> params;  // best validation epoch
  std::vector<TrainLogRecord> log;
  std::vector<std::string> warnings;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  int epochs_run = 0;
};

/// Epoch loop: seeded shuffle, mini-batch forward/backward, global-norm clip,
/// AdamW step; per epoch a validation pass drives the plateau schedule and
/// early stopping. Returns the parameters of the best validation epoch.
inline TrainResult train_model(ModelParams<float> params, const HyxnetConfig& config,
                               const EncodedSet& train, const EncodedSet& val,
                               const TrainConfig& tc) {
  tc.validate();
  require(train.size() > 0 && val.size() > 0, "train and val sets must be non-empty");

  TrainResult result;
  {
    std::set<int> seen(train.labels.begin(), train.labels.end());
    for (int k = 0; k < config.classes; ++k)
      if (!seen.count(k))
        result.warnings.push_back("class " + std::to_string(k) + " absent from the train split");
  }

  AdamW<float> opt(tc.lr, tc.weight_decay);
  opt.attach(params.all());
  TrainSchedule schedule(tc.lr, tc.lr_factor, tc.min_delta, tc.lr_patience, tc.stop_patience,
                         tc.lr_floor);
  ModelGrads<float> grads(config);

  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  // Epoch-0 snapshot before any update.
  {
    TrainLogRecord rec;
    rec.epoch = 0;
    rec.train_loss = dataset_loss(params, config, train, tc.batch_size);
    rec.val_loss = dataset_loss(params, config, val, tc.batch_size);
    rec.lr = tc.lr;
    rec.elapsed_seconds = elapsed();
    result.log.push_back(rec);
    result.best_epoch = 0;
    result.best_val_loss = rec.val_loss;
    result.params = params;
  }

  std::vector<int> order(train.size());
  for (int i = 0; i < train.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    // Seeded per-epoch permutation.
    Rng shuffle_rng(mix_seed(mix_seed(tc.seed, 101), static_cast<std::uint64_t>(epoch)));
    for (int i = train.size() - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.uniform_int(0, i));
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    int batch_index = 0;
    for (int first = 0; first < train.size(); first += tc.batch_size, ++batch_index) {
      const int count = std::min(tc.batch_size, train.size() - first);
      std::vector<int> rows(order.begin() + first, order.begin() + first + count);
      EncodedSet batch = detail::take_rows(train, rows, count);

      const std::uint64_t dropout_seed = mix_seed(
          mix_seed(mix_seed(tc.seed, 202), static_cast<std::uint64_t>(epoch)),
          static_cast<std::uint64_t>(batch_index));
      ForwardCache<float> cache;
      const Tensor2<float> probs =
          model_forward(params, config, batch.tokens, batch.numerics, true, dropout_seed, &cache);
      const double loss = cross_entropy_mean(probs, batch.labels);
      if (!std::isfinite(loss))
        throw ModelError("non-finite training loss at epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(batch_index));
      epoch_loss += loss * count;

      grads.zero();
      model_backward(params, config, batch.tokens, cache, batch.labels, grads);
      clip_global_norm(grads.all(), tc.clip);
      opt.set_learning_rate(schedule.learning_rate());
      opt.step(params.all(), const_ptrs(grads.all()));
    }

    TrainLogRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / train.size();
    rec.val_loss = dataset_loss(params, config, val, tc.batch_size);
    rec.lr = schedule.learning_rate();
    rec.elapsed_seconds = elapsed();
    result.log.push_back(rec);
    result.epochs_run = epoch;

    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      result.params = params;
    }

    const TrainSchedule::Decision d = schedule.observe(rec.val_loss);
    if (d.stop) break;
  }
  return result;
}

/// Deterministic JSONL line for one epoch record (no timing fields).
inline std::string log_record_json(const TrainLogRecord& rec) {
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "{\"epoch\":%d,\"train_loss\":%.17g,\"val_loss\":%.17g,\"lr\":%.17g}", rec.epoch,
                rec.train_loss, rec.val_loss, rec.lr);
  return buf;
}

/// Scans the label column of a dataset file and returns the label map:
/// canonical ordering when the distinct names are exactly the published
/// 12-class set, first-appearance order otherwise.
inline LabelMap infer_labels(const std::string& path, const FeatureSchema& schema,
                             char delim = ',') {
  if (!schema.has_label()) throw DataError("schema has no label column; pass labels explicitly");
  int label_col = -1;
  for (int i = 0; i < schema.column_count(); ++i)
    if (schema.columns()[i].second == ColumnKind::label) label_col = i;

  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset file is empty: " + path);

  std::vector<std::string> names;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_fields(line, delim);
    if (label_col >= static_cast<int>(fields.size())) continue;  // parse_dataset will report it
    const std::string name = FeatureSchema::trim(fields[label_col]);
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  if (names.empty()) throw DataError("no labels found in dataset: " + path);

  const LabelMap canonical = LabelMap::canonical12();
  if (names.size() == static_cast<std::size_t>(canonical.size())) {
    bool all = true;
    for (const std::string& n : names)
      if (canonical.index_of(n) < 0) all = false;
    if (all) return canonical;
  }
  return LabelMap(std::move(names));
}

struct ExperimentResult {
  EvalReport report;
  TrainResult train;
  LabelMap labels;
  FeatureScaler scaler;
  HyxnetConfig config;
  std::size_t train_size = 0, val_size = 0, test_size = 0;
};

/// End-to-end pipeline: parse, stratified split, scaler fit on train only,
/// encode, train, evaluate on test, and persist model.hyxn / train.log /
/// report.txt / confusion.csv into out_dir.
inline ExperimentResult run_experiment(const std::string& dataset_path,
                                       const FeatureSchema& schema, const LabelMap& labels,
                                       HyxnetConfig config, const TrainConfig& tc,
                                       const std::string& out_dir, bool lenient = false,
                                       char delim = ',') {
  config.numeric_dim = schema.numeric_dim();
  config.classes = labels.size();
  config.validate();

  ParseReport parse_report;
  const std::vector<DnsEvent> events =
      parse_dataset(dataset_path, schema, labels, lenient, delim, &parse_report);
  if (events.empty()) throw DataError("dataset has no usable rows: " + dataset_path);

  SplitResult split = split_events(events, tc.train_ratio, tc.val_ratio, tc.seed);
  const FeatureScaler scaler = FeatureScaler::fit(split.train, config.numeric_dim);
  const EncodedSet train = encode_events(split.train, scaler);
  const EncodedSet val = encode_events(split.val, scaler);
  const EncodedSet test = encode_events(split.test, scaler);

  ModelParams<float> init = init_params<float>(config, tc.seed);
  TrainResult trained = train_model(std::move(init), config, train, val, tc);
  trained.warnings.insert(trained.warnings.end(), split.warnings.begin(), split.warnings.end());

  const EvalReport report = evaluate(trained.params, config, test, tc.batch_size, tc.threads);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  save_checkpoint(trained.params, config, scaler, labels, (fs::path(out_dir) / "model.hyxn").string());
  {
    std::ofstream log(fs::path(out_dir) / "train.log", std::ios::binary);
    for (const TrainLogRecord& rec : trained.log) log << log_record_json(rec) << "\n";
  }
  {
    std::ofstream rep(fs::path(out_dir) / "report.txt", std::ios::binary);
    rep << format_report(report, labels);
  }
  {
    std::ofstream cm(fs::path(out_dir) / "confusion.csv", std::ios::binary);
    cm << confusion_csv(report, labels);
  }

  ExperimentResult out{report, std::move(trained), labels, scaler, config,
                       split.train.size(), split.val.size(), split.test.size()};
  return out;
}

}  // namespace hyxnet
