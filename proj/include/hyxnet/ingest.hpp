#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hyxnet/rng.hpp"

namespace hyxnet {

/// Malformed or inconsistent input data (CSV rows, schema files, labels).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Checkpoint / model-shape problems.
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// One DNS query/response record. `numerics` holds the schema's numeric
/// columns in schema order; `label` is a class index when the source row
/// carried one.
struct DnsEvent {
  std::string qname;
  std::vector<double> numerics;
  std::optional<int> label;

  bool operator==(const DnsEvent&) const = default;
};

/// Ordered class names; the index of a name is its class id.
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j]) throw DataError("duplicate label name: " + names_[i]);
  }

  /// Class ordering of the public multi-class DNS tunnel corpus.
  static LabelMap canonical12() {
    return LabelMap({"normal", "wildcard", "tcp-over-dns", "dnscat2", "andiodine", "dns2tcp",
                     "iodine", "dnspot", "dns-shell", "tuns", "CobaltStrike", "OzymanDNS"});
  }

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }

  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    return -1;
  }

  bool operator==(const LabelMap&) const = default;

 private:
  std::vector<std::string> names_;
};

enum class ColumnKind { numeric, qname, label };

/// Ordered column layout of a dataset file: exactly one qname column, at
/// most one label column, any number of numeric columns.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::pair<std::string, ColumnKind>> columns)
      : columns_(std::move(columns)) {
    int qnames = 0, labels = 0;
    for (const auto& [name, kind] : columns_) {
      if (kind == ColumnKind::qname) ++qnames;
      if (kind == ColumnKind::label) ++labels;
    }
    if (qnames != 1) throw DataError("schema must have exactly one qname column");
    if (labels > 1) throw DataError("schema must have at most one label column");
  }

  /// Default 8-feature packet schema; any column subset works, this is just
  /// the layout the synthetic generator and the bundled configs use.
  static FeatureSchema default_schema() {
    return FeatureSchema({{"qname", ColumnKind::qname},
                          {"frame.len", ColumnKind::numeric},
                          {"dns.resp.ttl", ColumnKind::numeric},
                          {"qname_len", ColumnKind::numeric},
                          {"subdomain_count", ColumnKind::numeric},
                          {"qname_entropy", ColumnKind::numeric},
                          {"qtype", ColumnKind::numeric},
                          {"answer_count", ColumnKind::numeric},
                          {"inter_arrival", ColumnKind::numeric},
                          {"label", ColumnKind::label}});
  }

  /// Parses a plain-text schema file of `name:kind` lines
  /// (kind in {numeric, qname, label}; '#' starts a comment).
  static FeatureSchema parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);
    std::vector<std::pair<std::string, ColumnKind>> cols;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto colon = trimmed.rfind(':');
      if (colon == std::string::npos)
        throw DataError("schema line " + std::to_string(line_no) + ": expected name:kind");
      const std::string name = trim(trimmed.substr(0, colon));
      const std::string kind = trim(trimmed.substr(colon + 1));
      if (name.empty()) throw DataError("schema line " + std::to_string(line_no) + ": empty name");
      if (kind == "numeric")
        cols.emplace_back(name, ColumnKind::numeric);
      else if (kind == "qname")
        cols.emplace_back(name, ColumnKind::qname);
      else if (kind == "label")
        cols.emplace_back(name, ColumnKind::label);
      else
        throw DataError("schema line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
    }
    return FeatureSchema(std::move(cols));
  }

  const std::vector<std::pair<std::string, ColumnKind>>& columns() const { return columns_; }
  int column_count() const { return static_cast<int>(columns_.size()); }

  int numeric_dim() const {
    int n = 0;
    for (const auto& [name, kind] : columns_)
      if (kind == ColumnKind::numeric) ++n;
    return n;
  }

  bool has_label() const {
    for (const auto& [name, kind] : columns_)
      if (kind == ColumnKind::label) return true;
    return false;
  }

  FeatureSchema without_label() const {
    std::vector<std::pair<std::string, ColumnKind>> cols;
    for (const auto& c : columns_)
      if (c.second != ColumnKind::label) cols.push_back(c);
    return FeatureSchema(std::move(cols));
  }

  std::vector<std::string> numeric_names() const {
    std::vector<std::string> out;
    for (const auto& [name, kind] : columns_)
      if (kind == ColumnKind::numeric) out.push_back(name);
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  }

 private:
  std::vector<std::pair<std::string, ColumnKind>> columns_;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_numeric(const std::string& raw) {
  const std::string s = FeatureSchema::trim(raw);
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) throw DataError("unparseable numeric field: '" + raw + "'");
  if (!std::isfinite(value)) throw DataError("non-finite numeric field: '" + raw + "'");
  return value;
}

}  // namespace detail

/// Strips whitespace and a single trailing dot; rejects empty names.
inline std::string normalize_qname(const std::string& raw) {
  std::string q = FeatureSchema::trim(raw);
  if (!q.empty() && q.back() == '.') q.pop_back();
  if (q.empty()) throw DataError("empty qname");
  return q;
}

/// Parses one delimited row into an event. With `labels` null any label
/// column is ignored (live logs, dataset replay), so the event comes back
/// unlabeled.
inline DnsEvent parse_row(const std::string& line, const FeatureSchema& schema,
                          const LabelMap* labels, char delim = ',') {
  const std::vector<std::string> fields = detail::split_fields(line, delim);
  if (static_cast<int>(fields.size()) != schema.column_count())
    throw DataError("field count " + std::to_string(fields.size()) + " does not match schema (" +
                    std::to_string(schema.column_count()) + " columns)");
  DnsEvent event;
  event.numerics.reserve(schema.numeric_dim());
  for (int i = 0; i < schema.column_count(); ++i) {
    const auto& [name, kind] = schema.columns()[i];
    switch (kind) {
      case ColumnKind::qname:
        event.qname = normalize_qname(fields[i]);
        break;
      case ColumnKind::numeric:
        event.numerics.push_back(detail::parse_numeric(fields[i]));
        break;
      case ColumnKind::label: {
        if (!labels) break;  // caller is ignoring labels
        const std::string value = FeatureSchema::trim(fields[i]);
        const int idx = labels->index_of(value);
        if (idx < 0) throw DataError("label name absent from LabelMap: '" + value + "'");
        event.label = idx;
        break;
      }
    }
  }
  return event;
}

/// Parses one live log line: same schema minus the label column, label absent.
inline DnsEvent parse_log_line(const std::string& line, const FeatureSchema& schema,
                               char delim = ',') {
  const FeatureSchema unlabeled = schema.has_label() ? schema.without_label() : schema;
  return parse_row(line, unlabeled, nullptr, delim);
}

/// Serializes an event back to a row in schema column order. Numerics use
/// round-trip precision so parse(event_to_row(e)) == e.
inline std::string event_to_row(const DnsEvent& event, const FeatureSchema& schema,
                                const LabelMap* labels, char delim = ',') {
  std::string out;
  int numeric_index = 0;
  for (int i = 0; i < schema.column_count(); ++i) {
    if (i > 0) out += delim;
    const auto& [name, kind] = schema.columns()[i];
    switch (kind) {
      case ColumnKind::qname:
        out += event.qname;
        break;
      case ColumnKind::numeric: {
        char buf[40];
        const int len = std::snprintf(buf, sizeof(buf), "%.17g", event.numerics.at(numeric_index++));
        out.append(buf, len);
        break;
      }
      case ColumnKind::label:
        if (!event.label || !labels) throw DataError("event has no label for a labeled schema");
        out += labels->name(*event.label);
        break;
    }
  }
  return out;
}

struct ParseReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace detail {

inline std::vector<DnsEvent> parse_dataset_impl(const std::string& path,
                                                const FeatureSchema& schema,
                                                const LabelMap* labels, bool lenient, char delim,
                                                ParseReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw DataError("dataset file is empty: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const std::vector<std::string> names = detail::split_fields(header, delim);
  if (static_cast<int>(names.size()) != schema.column_count())
    throw DataError("header has " + std::to_string(names.size()) + " columns, schema expects " +
                    std::to_string(schema.column_count()));
  for (int i = 0; i < schema.column_count(); ++i) {
    if (FeatureSchema::trim(names[i]) != schema.columns()[i].first)
      throw DataError("header column '" + names[i] + "' does not match schema column '" +
                      schema.columns()[i].first + "'");
  }

  std::vector<DnsEvent> events;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      events.push_back(parse_row(line, schema, labels, delim));
      if (report) ++report->accepted;
    } catch (const DataError& e) {
      const std::string what = e.what();
      if (!lenient || what.find("label name absent") != std::string::npos)
        throw DataError("line " + std::to_string(line_no) + ": " + what);
      if (report) ++report->rejected;
    }
  }
  return events;
}

}  // namespace detail

/// Reads a header-first delimited file into events, in file order. Strict
/// mode (default) throws on the first malformed row; lenient mode skips and
/// counts malformed rows in `report`. An unknown label name is always fatal.
inline std::vector<DnsEvent> parse_dataset(const std::string& path, const FeatureSchema& schema,
                                           const LabelMap& labels, bool lenient = false,
                                           char delim = ',', ParseReport* report = nullptr) {
  return detail::parse_dataset_impl(path, schema, schema.has_label() ? &labels : nullptr, lenient,
                                    delim, report);
}

/// Same, but any label column is ignored (scaler fitting, benchmarking).
inline std::vector<DnsEvent> parse_dataset_unlabeled(const std::string& path,
                                                     const FeatureSchema& schema,
                                                     bool lenient = false, char delim = ',',
                                                     ParseReport* report = nullptr) {
  return detail::parse_dataset_impl(path, schema, nullptr, lenient, delim, report);
}

struct SplitResult {
  std::vector<DnsEvent> train;
  std::vector<DnsEvent> val;
  std::vector<DnsEvent> test;
  std::vector<std::string> warnings;
};

/// Deterministic stratified split. Per class, indices are shuffled with a
/// seeded permutation and cut at round(n*ratio) boundaries; classes with at
/// least 3 samples are guaranteed a presence in every split, smaller classes
/// stay in train and are reported.
inline SplitResult split_events(const std::vector<DnsEvent>& events, double train_ratio,
                                double val_ratio, std::uint64_t seed) {
  if (train_ratio <= 0.0 || val_ratio < 0.0 || train_ratio + val_ratio >= 1.0)
    throw DataError("split ratios must satisfy 0 < train, 0 <= val, train + val < 1");

  int max_label = -1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!events[i].label) throw DataError("split_events requires labeled events");
    max_label = std::max(max_label, *events[i].label);
  }

  std::vector<std::vector<std::size_t>> by_class(max_label + 1);
  for (std::size_t i = 0; i < events.size(); ++i) by_class[*events[i].label].push_back(i);

  SplitResult out;
  for (int cls = 0; cls <= max_label; ++cls) {
    std::vector<std::size_t>& idx = by_class[cls];
    const std::size_t n = idx.size();
    if (n == 0) continue;

    // Fisher-Yates with a per-class seeded stream.
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(idx[i], idx[j]);
    }

    if (n < 3) {
      out.warnings.push_back("class " + std::to_string(cls) + " has only " + std::to_string(n) +
                             " samples; kept in train only");
      for (const std::size_t i : idx) out.train.push_back(events[i]);
      continue;
    }

    std::size_t n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_ratio));
    std::size_t n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_ratio));
    n_train = std::min(n_train, n - 2);
    n_train = std::max<std::size_t>(n_train, 1);
    n_val = std::min(n_val, n - n_train - 1);
    n_val = std::max<std::size_t>(n_val, 1);

    for (std::size_t i = 0; i < n; ++i) {
      const DnsEvent& e = events[idx[i]];
      if (i < n_train)
        out.train.push_back(e);
      else if (i < n_train + n_val)
        out.val.push_back(e);
      else
        out.test.push_back(e);
    }
  }
  return out;
}

}  // namespace hyxnet
