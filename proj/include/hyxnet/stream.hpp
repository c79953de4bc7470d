#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "hyxnet/encoder.hpp"
#include "hyxnet/ingest.hpp"
#include "hyxnet/model.hpp"

namespace hyxnet {

struct Alert {
  std::uint64_t ts = 0;  // ordinal of the record among valid stream records
  std::string qname;
  std::string class_name;
  float confidence = 0.0f;
  std::string action;  // "alert" or "block-recommend"
};

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

inline std::string alert_json(const Alert& a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.6f", a.confidence);
  return "{\"ts\":" + std::to_string(a.ts) + ",\"qname\":\"" + json_escape(a.qname) +
         "\",\"class\":\"" + json_escape(a.class_name) + "\",\"confidence\":" + buf +
         ",\"action\":\"" + a.action + "\"}";
}

struct StreamSummary {
  std::uint64_t processed = 0;
  std::uint64_t alerted = 0;
  std::uint64_t malformed = 0;
  std::vector<std::uint64_t> per_class;
};

/// Record-at-a-time detector over a loaded checkpoint. Stateless across
/// records: classification of a record never depends on earlier traffic, so
/// resident memory is constant in stream length.
class StreamDetector {
 public:
  /// `benign_override`, when non-empty, replaces the default benign set
  /// {normal, wildcard} (intersected with the model's labels).
  StreamDetector(const Checkpoint& ckpt, const FeatureSchema& schema, double threshold = 0.5,
                 double block_threshold = 0.9,
                 const std::vector<std::string>& benign_override = {})
      : ckpt_(ckpt), schema_(schema.has_label() ? schema.without_label() : schema),
        full_schema_(schema), threshold_(threshold), block_threshold_(block_threshold) {
    require(threshold > 0.0 && threshold < 1.0, "threshold must be in (0,1)");
    require(block_threshold >= threshold, "block threshold must be >= alert threshold");
    if (schema_.numeric_dim() != ckpt_.config.numeric_dim)
      throw ModelError("schema provides " + std::to_string(schema_.numeric_dim()) +
                       " numeric features but the checkpoint expects " +
                       std::to_string(ckpt_.config.numeric_dim));
    if (benign_override.empty()) {
      for (const char* name : {"normal", "wildcard"}) {
        const int idx = ckpt_.labels.index_of(name);
        if (idx >= 0) benign_.insert(idx);
      }
    } else {
      for (const std::string& name : benign_override) {
        const int idx = ckpt_.labels.index_of(name);
        if (idx < 0) throw DataError("benign class not in the model's labels: " + name);
        benign_.insert(idx);
      }
    }
  }

  const Checkpoint& checkpoint() const { return ckpt_; }
  const std::set<int>& benign_classes() const { return benign_; }

  Prediction classify(const DnsEvent& event) const {
    const TokenSeq seq = tokenize(event.qname);
    const std::vector<float> numerics = ckpt_.scaler.transform(event.numerics);
    return predict_one(ckpt_.params, ckpt_.config, seq, numerics);
  }

  /// Alert rule: non-benign prediction with confidence >= threshold;
  /// action escalates to block-recommend at the block threshold.
  std::pair<Prediction, std::optional<Alert>> detect(const DnsEvent& event,
                                                     std::uint64_t ts = 0) const {
    Prediction pred = classify(event);
    std::optional<Alert> alert;
    if (!benign_.count(pred.label) && pred.confidence >= threshold_) {
      alert = Alert{ts, event.qname, ckpt_.labels.name(pred.label), pred.confidence,
                    pred.confidence >= block_threshold_ ? "block-recommend" : "alert"};
    }
    return {std::move(pred), std::move(alert)};
  }

  /// Sequential line-at-a-time loop. Malformed lines are counted and
  /// skipped; a leading header row matching the schema is ignored. Alerts
  /// are written (and flushed) to `alerts` as they occur, one JSON object
  /// per line. Both labeled and unlabeled rows are accepted; labels are
  /// ignored.
  StreamSummary run(std::istream& in, std::ostream& alerts) const {
    StreamSummary summary;
    summary.per_class.assign(ckpt_.config.classes, 0);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (first) {
        first = false;
        if (is_header(line)) continue;
      }
      if (line.empty()) continue;
      DnsEvent event;
      try {
        event = parse_line(line);
      } catch (const DataError&) {
        ++summary.malformed;
        continue;
      }
      auto [pred, alert] = detect(event, summary.processed);
      ++summary.per_class[pred.label];
      ++summary.processed;
      if (alert) {
        alerts << alert_json(*alert) << "\n";
        alerts.flush();
        ++summary.alerted;
      }
    }
    return summary;
  }

  DnsEvent parse_line(const std::string& line, char delim = ',') const {
    const std::size_t fields = detail::split_fields(line, delim).size();
    if (full_schema_.has_label() &&
        fields == static_cast<std::size_t>(full_schema_.column_count()))
      // Labeled row (e.g. replaying a dataset file): the label is ignored.
      return parse_row(line, full_schema_, nullptr, delim);
    return parse_row(line, schema_, nullptr, delim);
  }

 private:
  bool is_header(const std::string& line, char delim = ',') const {
    const std::vector<std::string> fields = detail::split_fields(line, delim);
    const auto matches = [&](const FeatureSchema& s) {
      if (static_cast<int>(fields.size()) != s.column_count()) return false;
      for (int i = 0; i < s.column_count(); ++i)
        if (FeatureSchema::trim(fields[i]) != s.columns()[i].first) return false;
      return true;
    };
    return matches(schema_) || matches(full_schema_);
  }

  const Checkpoint& ckpt_;
  FeatureSchema schema_;       // unlabeled layout for live logs
  FeatureSchema full_schema_;  // original layout (may include a label column)
  double threshold_;
  double block_threshold_;
  std::set<int> benign_;
};

/// Best-effort peak resident set size in kB from /proc/self/status (0 when
/// unavailable).
inline std::uint64_t peak_rss_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::uint64_t kb = 0;
      std::sscanf(line.c_str(), "VmHWM: %lu", &kb);
      return kb;
    }
  }
  return 0;
}

struct BenchReport {
  std::size_t samples = 0;  // pooled over timed repetitions
  int reps = 0;
  double adt_ms = 0.0;       // median of per-repetition mean detection times
  double mean_adt_ms = 0.0;  // pooled mean (= 1000 / throughput)
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double throughput = 0.0;  // samples per second, pooled
  double peak_rss_mb = 0.0;
  std::vector<double> per_worker_adt_ms;  // parallel mode only
  std::string warning;
};

namespace detail {

inline double percentile(std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

}  // namespace detail

/// Per-sample latency benchmark. One untimed warm-up pass, then `reps` timed
/// passes; each sample's timing covers tokenize + standardize + forward.
/// `threads` > 1 splits the set across workers and reports per-worker means.
inline BenchReport bench(const Checkpoint& ckpt, const std::vector<DnsEvent>& events,
                         int reps = 3, int threads = 1) {
  require(reps >= 1 && threads >= 1, "reps and threads must be >= 1");
  if (events.empty()) throw DataError("bench needs a non-empty sample set");

  BenchReport report;
  report.reps = reps;
  if (events.size() < 1000)
    report.warning = "only " + std::to_string(events.size()) +
                     " samples; timing statistics may be unstable (1000+ recommended)";

  const auto time_range = [&](std::size_t begin, std::size_t end, std::vector<double>& out) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const TokenSeq seq = tokenize(events[i].qname);
      const std::vector<float> numerics = ckpt.scaler.transform(events[i].numerics);
      const Prediction pred = predict_one(ckpt.params, ckpt.config, seq, numerics);
      const auto t1 = std::chrono::steady_clock::now();
      (void)pred;
      out.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  };

  {  // warm-up, untimed
    std::vector<double> sink;
    sink.reserve(events.size());
    time_range(0, events.size(), sink);
  }

  std::vector<double> all;
  all.reserve(events.size() * static_cast<std::size_t>(reps));
  std::vector<double> rep_means;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> lat;
    lat.reserve(events.size());
    if (threads == 1) {
      time_range(0, events.size(), lat);
    } else {
      const std::size_t per = (events.size() + threads - 1) / static_cast<std::size_t>(threads);
      std::vector<std::vector<double>> chunks(threads);
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) {
        const std::size_t begin = static_cast<std::size_t>(t) * per;
        const std::size_t end = std::min(events.size(), begin + per);
        if (begin < end)
          pool.emplace_back([&, begin, end, t] { time_range(begin, end, chunks[t]); });
      }
      for (std::thread& th : pool) th.join();
      for (int t = 0; t < threads; ++t) {
        if (chunks[t].empty()) continue;
        double sum = 0.0;
        for (const double v : chunks[t]) sum += v;
        if (r == 0) report.per_worker_adt_ms.push_back(sum / chunks[t].size());
        lat.insert(lat.end(), chunks[t].begin(), chunks[t].end());
      }
    }
    double sum = 0.0;
    for (const double v : lat) sum += v;
    rep_means.push_back(sum / lat.size());
    all.insert(all.end(), lat.begin(), lat.end());
  }

  std::sort(rep_means.begin(), rep_means.end());
  report.adt_ms = rep_means[rep_means.size() / 2];
  double total_ms = 0.0;
  for (const double v : all) total_ms += v;
  report.samples = all.size();
  report.mean_adt_ms = total_ms / static_cast<double>(all.size());
  report.throughput = static_cast<double>(all.size()) / (total_ms / 1000.0);
  std::sort(all.begin(), all.end());
  report.p50_ms = detail::percentile(all, 0.50);
  report.p99_ms = detail::percentile(all, 0.99);
  report.peak_rss_mb = static_cast<double>(peak_rss_kb()) / 1024.0;
  return report;
}

inline std::string format_bench(const BenchReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "samples: %zu (x%d reps)\n"
                "adt: %.6f ms (median of rep means)\n"
                "mean adt: %.6f ms\n"
                "p50: %.6f ms\np99: %.6f ms\n"
                "throughput: %.1f samples/s\n"
                "peak rss: %.1f MB\n",
                r.samples, r.reps, r.adt_ms, r.mean_adt_ms, r.p50_ms, r.p99_ms, r.throughput,
                r.peak_rss_mb);
  std::string out = buf;
  for (std::size_t i = 0; i < r.per_worker_adt_ms.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "worker %zu adt: %.6f ms\n", i, r.per_worker_adt_ms[i]);
    out += buf;
  }
  if (!r.warning.empty()) out += "warning: " + r.warning + "\n";
  return out;
}

}  // namespace hyxnet
