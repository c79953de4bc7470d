// Synthetic corpus generator: determinism, separability, self-consistency.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hyxnet/synth.hpp"
#include "test_support.hpp"

using namespace hyxnet;

namespace {

TEST(ShannonEntropy, ClosedCases) {
  EXPECT_DOUBLE_EQ(shannon_entropy(""), 0.0);
  EXPECT_DOUBLE_EQ(shannon_entropy("aaaa"), 0.0);
  EXPECT_DOUBLE_EQ(shannon_entropy("ab"), 1.0);
  EXPECT_DOUBLE_EQ(shannon_entropy("abab"), 1.0);
  EXPECT_DOUBLE_EQ(shannon_entropy("abcd"), 2.0);
  EXPECT_NEAR(shannon_entropy("aab"), -(2.0 / 3) * std::log2(2.0 / 3) - (1.0 / 3) * std::log2(1.0 / 3),
              1e-15);
}

TEST(Generate, CountsAndLabels) {
  const SynthSpec spec = default_synth_spec(50, 3);
  const auto events = generate(spec);
  ASSERT_EQ(events.size(), 150u);
  for (int cls = 0; cls < 3; ++cls) {
    const auto n = std::count_if(events.begin(), events.end(),
                                 [cls](const DnsEvent& e) { return *e.label == cls; });
    EXPECT_EQ(n, 50);
  }
  const LabelMap labels = synth_labels(spec);
  EXPECT_EQ(labels.names(), (std::vector<std::string>{"normal", "tunnel-a", "tunnel-b"}));
  for (const DnsEvent& e : events) EXPECT_EQ(e.numerics.size(), 8u);
}

TEST(Generate, DeterministicBySeed) {
  const auto a = generate(default_synth_spec(30, 7));
  const auto b = generate(default_synth_spec(30, 7));
  const auto c = generate(default_synth_spec(30, 8));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Generate, DerivedNumericsMatchTheQname) {
  const auto events = generate(default_synth_spec(40, 11));
  for (const DnsEvent& e : events) {
    EXPECT_DOUBLE_EQ(e.numerics[2], double(e.qname.size()));
    const auto dots = std::count(e.qname.begin(), e.qname.end(), '.');
    EXPECT_DOUBLE_EQ(e.numerics[3], double(dots));
    EXPECT_DOUBLE_EQ(e.numerics[4], shannon_entropy(e.qname));
  }
}

TEST(Generate, SampledNumericsRespectTheRecipes) {
  const SynthSpec spec = default_synth_spec(60, 13);
  const auto events = generate(spec);
  for (const DnsEvent& e : events) {
    const ClassRecipe& r = spec.recipes[static_cast<std::size_t>(*e.label)];
    EXPECT_GE(e.numerics[0], r.frame_len.lo);
    EXPECT_LE(e.numerics[0], r.frame_len.hi);
    EXPECT_GE(e.numerics[1], r.ttl.lo);
    EXPECT_LE(e.numerics[1], r.ttl.hi);
    EXPECT_NE(std::find(r.qtypes.begin(), r.qtypes.end(), int(e.numerics[5])), r.qtypes.end());
    EXPECT_GE(e.numerics[6], r.answers.lo);
    EXPECT_LE(e.numerics[6], r.answers.hi);
  }
}

TEST(Generate, TunnelTrafficLooksLikeTunnelTraffic) {
  const auto events = generate(default_synth_spec(100, 17));
  double len_normal = 0, len_tunnel = 0, ent_normal = 0, ent_tunnel = 0;
  int n_normal = 0, n_tunnel = 0;
  for (const DnsEvent& e : events) {
    if (*e.label == 0) {
      len_normal += e.qname.size();
      ent_normal += e.numerics[4];
      ++n_normal;
    } else {
      len_tunnel += e.qname.size();
      ent_tunnel += e.numerics[4];
      ++n_tunnel;
    }
  }
  EXPECT_GT(len_tunnel / n_tunnel, 2.0 * len_normal / n_normal);  // long payload chunks
  EXPECT_GT(ent_tunnel / n_tunnel, ent_normal / n_normal);        // higher character entropy
}

TEST(Generate, SingleRuleSeparability) {
  // The frame-length bands are disjoint by construction, so one threshold
  // per boundary classifies perfectly; require better than 95% to leave the
  // generator room to evolve.
  const SynthSpec spec = default_synth_spec(200, 19);
  const auto events = generate(spec);
  int correct_frame = 0, correct_qlen = 0;
  for (const DnsEvent& e : events) {
    const double f = e.numerics[0];
    const int by_frame = f < 160.0 ? 0 : (f < 345.0 ? 1 : 2);
    correct_frame += by_frame == *e.label;
    const int by_qlen = e.qname.size() < 40 ? 0 : 1;  // benign vs any tunnel
    correct_qlen += by_qlen == (*e.label == 0 ? 0 : 1);
  }
  EXPECT_GT(correct_frame, int(events.size() * 95) / 100);
  EXPECT_GT(correct_qlen, int(events.size() * 95) / 100);
}

TEST(Generate, RejectsEmptySpec) {
  SynthSpec empty;
  empty.recipes.clear();
  EXPECT_THROW(generate(empty), std::invalid_argument);
  SynthSpec zero = default_synth_spec();
  zero.per_class = 0;
  EXPECT_THROW(generate(zero), std::invalid_argument);
}

TEST(WriteSynthCsv, RoundTripsThroughParseDataset) {
  const SynthSpec spec = default_synth_spec(25, 23);
  const auto events = generate(spec);
  const LabelMap labels = synth_labels(spec);
  const std::string path = testsup::temp_path("synth_roundtrip.csv");
  write_synth_csv(events, labels, path);

  const auto parsed = parse_dataset(path, FeatureSchema::default_schema(), labels);
  ASSERT_EQ(parsed.size(), events.size());
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(parsed[i], events[i]) << i;
}

TEST(TwelveClassSpec, CanonicalNamesAndDisjointBands) {
  const SynthSpec spec = twelve_class_synth_spec(10, 1);
  ASSERT_EQ(spec.recipes.size(), 12u);
  EXPECT_EQ(synth_labels(spec).names(), LabelMap::canonical12().names());
  for (std::size_t k = 0; k + 1 < spec.recipes.size(); ++k)
    EXPECT_LT(spec.recipes[k].frame_len.hi, spec.recipes[k + 1].frame_len.lo) << k;

  const auto events = generate(spec);
  EXPECT_EQ(events.size(), 120u);
  // Tunnel recipes produce deep, long names.
  for (const DnsEvent& e : events)
    if (*e.label >= 2) EXPECT_GE(e.numerics[3], 3.0) << e.qname;  // >= 3 dots
}

}  // namespace
