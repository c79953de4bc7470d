// Hash tokenization and feature standardization.

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "hyxnet/encoder.hpp"
#include "hyxnet/rng.hpp"
#include "test_support.hpp"

using namespace hyxnet;

namespace {

// Reference digests computed with an independent FNV-1a-64 implementation.
struct FnvCase {
  const char* input;
  std::uint64_t hash;
  std::int32_t bucket;
};
constexpr FnvCase kFnvCases[] = {
    {"", 0xcbf29ce484222325ull, 32413},        {"a", 0xaf63dc4c8601ec8cull, 25836},
    {"www", 0x5e63e419483e75ecull, 2548},      {"example", 0x430b1483c8d66041ull, 23642},
    {"mail", 0x1f5964a2ce98072eull, 12727},    {"tunnel0", 0x235da13617e29705ull, 26258},
    {"abc123", 0x62cca2412f0aff65ull, 31979},
};

TEST(Fnv, ReferenceDigests) {
  for (const auto& c : kFnvCases) {
    EXPECT_EQ(fnv1a64(c.input), c.hash) << c.input;
    EXPECT_EQ(bucketize(c.input), c.bucket) << c.input;
  }
}

TEST(Bucketize, CaseInsensitiveAndInRange) {
  EXPECT_EQ(bucketize("WWW"), bucketize("www"));
  EXPECT_EQ(bucketize("ExAmPlE"), bucketize("example"));
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string label;
    const int len = static_cast<int>(rng.uniform_int(1, 20));
    for (int j = 0; j < len; ++j)
      label += static_cast<char>('a' + rng.uniform_int(0, 25));
    const std::int32_t b = bucketize(label);
    EXPECT_GE(b, 1);
    EXPECT_LT(b, kBuckets);
  }
}

TEST(Tokenize, LeftPadsShortNames) {
  const TokenSeq seq = tokenize("www.example.com");
  for (int i = 0; i < kSeqLen - 3; ++i) EXPECT_EQ(seq[i], 0);
  EXPECT_EQ(seq[kSeqLen - 3], bucketize("www"));
  EXPECT_EQ(seq[kSeqLen - 2], bucketize("example"));
  EXPECT_EQ(seq[kSeqLen - 1], bucketize("com"));
}

TEST(Tokenize, KeepsTrailingLabelsOfLongNames) {
  std::string qname;
  for (int i = 0; i < 20; ++i) {
    if (i) qname += '.';
    qname += "l" + std::to_string(i);
  }
  const TokenSeq seq = tokenize(qname);
  // Labels l5..l19 survive; l0..l4 fall off the front.
  for (int i = 0; i < kSeqLen; ++i)
    EXPECT_EQ(seq[i], bucketize("l" + std::to_string(i + 5))) << i;
}

TEST(Tokenize, CollapsesEmptyLabels) {
  const TokenSeq a = tokenize("a..b");
  const TokenSeq b = tokenize("a.b");
  EXPECT_EQ(a, b);
  const TokenSeq empty = tokenize("");
  for (const auto id : empty) EXPECT_EQ(id, 0);
}

TEST(TokenizeBatch, MatchesScalarTokenize) {
  std::vector<DnsEvent> events(2);
  events[0].qname = "mail.example.org";
  events[1].qname = "x";
  const Tensor2<std::int32_t> t = tokenize_batch(events);
  ASSERT_EQ(t.rows, 2);
  ASSERT_EQ(t.cols, kSeqLen);
  const TokenSeq s0 = tokenize(events[0].qname);
  for (int j = 0; j < kSeqLen; ++j) EXPECT_EQ(t(0, j), s0[j]);
  EXPECT_EQ(t(1, kSeqLen - 1), bucketize("x"));
}

std::vector<DnsEvent> scaler_events() {
  Rng rng(9);
  std::vector<DnsEvent> events(500);
  for (auto& e : events) {
    e.qname = "host.example";
    e.numerics = {rng.uniform(-3.0, 3.0) * 1e6 + 5e6,  // large-magnitude column
                  rng.normal() * 0.01,                  // tiny-scale column
                  42.0};                                // constant column
  }
  return events;
}

TEST(FeatureScaler, StandardizesToZeroMeanUnitStd) {
  const auto events = scaler_events();
  const FeatureScaler scaler = FeatureScaler::fit(events, 3);
  const Tensor2<float> x = scaler.transform(events);

  for (int j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (int i = 0; i < x.rows; ++i) mean += x(i, j);
    mean /= x.rows;
    double var = 0.0;
    for (int i = 0; i < x.rows; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= x.rows;
    EXPECT_LT(std::abs(mean), 1e-7) << "column " << j;
    EXPECT_NEAR(var, 1.0, 1e-5) << "column " << j;
  }
  // Constant column: std guard keeps it finite and centered at zero.
  for (int i = 0; i < x.rows; ++i) EXPECT_FLOAT_EQ(x(i, 2), 0.0f);
  EXPECT_DOUBLE_EQ(scaler.std()[2], 1.0);
}

TEST(FeatureScaler, DeterministicAndDimChecked) {
  const auto events = scaler_events();
  const FeatureScaler a = FeatureScaler::fit(events, 3);
  const FeatureScaler b = FeatureScaler::fit(events, 3);
  EXPECT_EQ(a.mean(), b.mean());
  EXPECT_EQ(a.std(), b.std());

  EXPECT_THROW(a.transform(std::vector<double>{1.0, 2.0}), DataError);
  EXPECT_THROW(FeatureScaler::fit({}, 3), DataError);
  EXPECT_THROW(FeatureScaler({1.0}, {1.0, 2.0}), DataError);

  DnsEvent short_event;
  short_event.qname = "a.b";
  short_event.numerics = {1.0};
  EXPECT_THROW(FeatureScaler::fit({short_event}, 3), DataError);
}

TEST(FeatureScaler, TransformAppliesStoredStatistics) {
  const FeatureScaler scaler({10.0, -2.0}, {2.0, 0.5});
  const std::vector<float> out = scaler.transform(std::vector<double>{14.0, -2.0});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_FLOAT_EQ(out[0], 2.0f);
  EXPECT_FLOAT_EQ(out[1], 0.0f);
}

}  // namespace
