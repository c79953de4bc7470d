#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hyxnet/ingest.hpp"
#include "hyxnet/tensor.hpp"

namespace hyxnet {

inline constexpr int kSeqLen = 15;
inline constexpr int kBuckets = 1 << 15;  // 32768; id 0 is padding
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

using TokenSeq = std::array<std::int32_t, kSeqLen>;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (const char ch : s) {
    h ^= static_cast<std::uint8_t>(ch);
    h *= kFnvPrime;
  }
  return h;
}

/// Lowercases the label, hashes it, and maps into [1, kBuckets-1]; 0 stays
/// reserved for padding.
inline std::int32_t bucketize(std::string_view label) {
  std::string lower(label);
  for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  const std::uint64_t h = fnv1a64(lower);
  return static_cast<std::int32_t>(h % static_cast<std::uint64_t>(kBuckets - 1)) + 1;
}

/// Splits a domain name on dots, hashes each non-empty label, keeps the last
/// kSeqLen labels of over-long names, and left-pads short ones with 0.
inline TokenSeq tokenize(std::string_view qname) {
  std::vector<std::int32_t> ids;
  std::size_t start = 0;
  while (start <= qname.size()) {
    const std::size_t dot = qname.find('.', start);
    const std::size_t end = (dot == std::string_view::npos) ? qname.size() : dot;
    if (end > start) ids.push_back(bucketize(qname.substr(start, end - start)));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  TokenSeq seq{};
  seq.fill(0);
  const std::size_t keep = std::min<std::size_t>(ids.size(), kSeqLen);
  const std::size_t src_first = ids.size() - keep;  // keep the trailing labels
  const std::size_t dst_first = kSeqLen - keep;     // left padding
  for (std::size_t i = 0; i < keep; ++i) seq[dst_first + i] = ids[src_first + i];
  return seq;
}

/// Per-column standardization fit on the training split. Statistics are kept
/// in double precision so transformed training data is zero-mean to float
/// accuracy even for large-magnitude raw columns.
class FeatureScaler {
 public:
  FeatureScaler() = default;
  FeatureScaler(std::vector<double> mean, std::vector<double> std)
      : mean_(std::move(mean)), std_(std::move(std)) {
    if (mean_.size() != std_.size()) throw DataError("scaler mean/std size mismatch");
  }

  int dim() const { return static_cast<int>(mean_.size()); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& std() const { return std_; }

  /// Population statistics over the rows; a column with std below 1e-8 gets
  /// std 1 so constant features pass through centered instead of exploding.
  static FeatureScaler fit(const std::vector<DnsEvent>& events, int numeric_dim) {
    if (events.empty()) throw DataError("cannot fit scaler on an empty split");
    std::vector<double> mean(numeric_dim, 0.0), var(numeric_dim, 0.0);
    for (const DnsEvent& e : events) {
      if (static_cast<int>(e.numerics.size()) != numeric_dim)
        throw DataError("event numeric width does not match schema");
      for (int j = 0; j < numeric_dim; ++j) mean[j] += e.numerics[j];
    }
    const double inv_n = 1.0 / static_cast<double>(events.size());
    for (int j = 0; j < numeric_dim; ++j) mean[j] *= inv_n;
    for (const DnsEvent& e : events)
      for (int j = 0; j < numeric_dim; ++j) {
        const double d = e.numerics[j] - mean[j];
        var[j] += d * d;
      }
    std::vector<double> std(numeric_dim, 1.0);
    for (int j = 0; j < numeric_dim; ++j) {
      const double s = std::sqrt(var[j] * inv_n);
      std[j] = (s < 1e-8) ? 1.0 : s;
    }
    return FeatureScaler(std::move(mean), std::move(std));
  }

  std::vector<float> transform(const std::vector<double>& numerics) const {
    if (static_cast<int>(numerics.size()) != dim())
      throw DataError("scaler dim mismatch: got " + std::to_string(numerics.size()) +
                      ", expected " + std::to_string(dim()));
    std::vector<float> out(numerics.size());
    for (int j = 0; j < dim(); ++j)
      out[j] = static_cast<float>((numerics[j] - mean_[j]) / std_[j]);
    return out;
  }

  Tensor2<float> transform(const std::vector<DnsEvent>& events) const {
    Tensor2<float> out(static_cast<int>(events.size()), dim());
    for (int i = 0; i < out.rows; ++i) {
      const std::vector<float> row = transform(events[i].numerics);
      std::copy(row.begin(), row.end(), out.row(i));
    }
    return out;
  }

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

/// Tokenizes a batch of qnames into an N x kSeqLen id matrix.
inline Tensor2<std::int32_t> tokenize_batch(const std::vector<DnsEvent>& events) {
  Tensor2<std::int32_t> out(static_cast<int>(events.size()), kSeqLen);
  for (int i = 0; i < out.rows; ++i) {
    const TokenSeq seq = tokenize(events[i].qname);
    std::copy(seq.begin(), seq.end(), out.row(i));
  }
  return out;
}

}  // namespace hyxnet
