#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hyxnet/ingest.hpp"
#include "hyxnet/rng.hpp"
#include "hyxnet/tensor.hpp"

namespace hyxnet {

/// Shannon entropy of a string in bits per character.
inline double shannon_entropy(const std::string& s) {
  if (s.empty()) return 0.0;
  std::map<char, int> counts;
  for (const char ch : s) ++counts[ch];
  double h = 0.0;
  for (const auto& [ch, n] : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(s.size());
    h -= p * std::log2(p);
  }
  return h;
}

struct Range {
  double lo = 0.0, hi = 0.0;
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
};

struct IntRange {
  int lo = 0, hi = 0;
  int sample(Rng& rng) const { return static_cast<int>(rng.uniform_int(lo, hi)); }
};

/// Distributional recipe for one traffic class. Label text is either drawn
/// from a short dictionary (benign-like) or random over `alphabet`
/// (tunnel-like payload chunks).
struct ClassRecipe {
  std::string name;
  std::string base_domain = "example.com";
  bool dictionary_labels = true;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  IntRange label_len{4, 8};
  IntRange depth{1, 2};  // subdomains under the base domain
  Range frame_len{60, 140};
  Range ttl{300, 3600};
  std::vector<int> qtypes{1, 28};
  IntRange answers{1, 2};
  Range inter_arrival{0.05, 2.0};
};

struct SynthSpec {
  int per_class = 100;
  std::uint64_t seed = 1;
  std::vector<ClassRecipe> recipes;
};

/// Benign-like and two tunnel-like recipes with class-disjoint frame-length
/// bands: any threshold inside a gap separates them perfectly, so frame.len
/// (and qname_len, which tracks the label recipes) are each one-rule
/// separable by construction.
inline SynthSpec default_synth_spec(int per_class = 100, std::uint64_t seed = 1) {
  SynthSpec spec;
  spec.per_class = per_class;
  spec.seed = seed;

  ClassRecipe normal;
  normal.name = "normal";
  normal.dictionary_labels = true;
  normal.label_len = {3, 9};
  normal.depth = {1, 2};
  normal.frame_len = {60, 140};
  normal.ttl = {300, 3600};
  normal.qtypes = {1, 28};
  normal.answers = {1, 2};
  normal.inter_arrival = {0.05, 2.0};

  ClassRecipe tunnel_a;
  tunnel_a.name = "tunnel-a";
  tunnel_a.base_domain = "exfil-a.net";
  tunnel_a.dictionary_labels = false;
  tunnel_a.alphabet = "0123456789abcdef";
  tunnel_a.label_len = {24, 40};
  tunnel_a.depth = {3, 5};
  tunnel_a.frame_len = {180, 330};
  tunnel_a.ttl = {0, 30};
  tunnel_a.qtypes = {16};
  tunnel_a.answers = {1, 1};
  tunnel_a.inter_arrival = {0.001, 0.05};

  ClassRecipe tunnel_b;
  tunnel_b.name = "tunnel-b";
  tunnel_b.base_domain = "exfil-b.org";
  tunnel_b.dictionary_labels = false;
  tunnel_b.alphabet = "abcdefghijklmnopqrstuvwxyz234567";
  tunnel_b.label_len = {30, 55};
  tunnel_b.depth = {4, 6};
  tunnel_b.frame_len = {360, 520};
  tunnel_b.ttl = {0, 10};
  tunnel_b.qtypes = {10};
  tunnel_b.answers = {1, 1};
  tunnel_b.inter_arrival = {0.001, 0.02};

  spec.recipes = {normal, tunnel_a, tunnel_b};
  return spec;
}

/// Twelve-class demo corpus matching the public corpus label set: two
/// benign-like recipes plus ten tunnel tools, every class in its own
/// frame-length band so the demo trains to high accuracy quickly.
inline SynthSpec twelve_class_synth_spec(int per_class = 100, std::uint64_t seed = 1) {
  SynthSpec spec;
  spec.per_class = per_class;
  spec.seed = seed;

  const std::vector<std::string> names = LabelMap::canonical12().names();
  const std::array<const char*, 5> alphabets = {
      "0123456789abcdef", "abcdefghijklmnopqrstuvwxyz234567",
      "abcdefghijklmnopqrstuvwxyz0123456789", "02468acegikmoqsuwy", "bdfhjlnprtvxz13579"};
  for (std::size_t k = 0; k < names.size(); ++k) {
    ClassRecipe r;
    r.name = names[k];
    r.frame_len = {60.0 + 40.0 * k, 90.0 + 40.0 * k};  // disjoint bands
    if (k < 2) {  // normal, wildcard
      r.dictionary_labels = true;
      r.base_domain = k == 0 ? "example.com" : "wild.example.net";
      r.label_len = {3, 9};
      r.depth = k == 0 ? IntRange{1, 2} : IntRange{2, 3};
      r.ttl = {300, 3600};
      r.qtypes = {1, 28};
      r.answers = {1, 2};
      r.inter_arrival = {0.05, 2.0};
    } else {
      r.dictionary_labels = false;
      r.base_domain = "c" + std::to_string(k) + ".exfil.net";
      r.alphabet = alphabets[k % alphabets.size()];
      r.label_len = {20 + 3 * static_cast<int>(k), 30 + 3 * static_cast<int>(k)};
      r.depth = {3, 5};
      r.ttl = {0, 30};
      r.qtypes = {static_cast<int>(std::array<int, 5>{16, 10, 5, 12, 33}[k % 5])};
      r.answers = {1, 1};
      r.inter_arrival = {0.001, 0.05};
    }
    spec.recipes.push_back(std::move(r));
  }
  return spec;
}

namespace detail {

inline const std::array<const char*, 24>& word_pool() {
  static const std::array<const char*, 24> kWords = {
      "mail", "www",  "api",    "cdn",  "login", "static", "docs",  "shop",
      "img",  "news", "search", "blog", "auth",  "play",   "store", "video",
      "chat", "time", "maps",   "code", "data",  "home",   "cloud", "edge"};
  return kWords;
}

inline std::string make_label(const ClassRecipe& recipe, Rng& rng) {
  if (recipe.dictionary_labels) {
    const auto& pool = word_pool();
    std::string word = pool[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(pool.size() - 1)))];
    const int target = recipe.label_len.sample(rng);
    while (static_cast<int>(word.size()) < target)
      word += static_cast<char>('a' + rng.uniform_int(0, 25));
    return word;
  }
  const int len = recipe.label_len.sample(rng);
  std::string out;
  out.reserve(len);
  for (int i = 0; i < len; ++i)
    out += recipe.alphabet[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(recipe.alphabet.size() - 1)))];
  return out;
}

}  // namespace detail

/// Deterministic corpus for default_schema() column order; class index i in
/// the output corresponds to spec.recipes[i]. Derived numerics (qname_len,
/// subdomain_count, qname_entropy) are measured from the generated qname,
/// not drawn, so the corpus is self-consistent.
inline std::vector<DnsEvent> generate(const SynthSpec& spec) {
  require(spec.per_class > 0 && !spec.recipes.empty(), "synth spec needs recipes and counts");
  std::vector<DnsEvent> events;
  events.reserve(static_cast<std::size_t>(spec.per_class) * spec.recipes.size());
  for (std::size_t cls = 0; cls < spec.recipes.size(); ++cls) {
    const ClassRecipe& recipe = spec.recipes[cls];
    Rng rng(mix_seed(spec.seed, 0x53594eull + cls));
    for (int i = 0; i < spec.per_class; ++i) {
      const int depth = recipe.depth.sample(rng);
      std::string qname;
      for (int d = 0; d < depth; ++d) {
        qname += detail::make_label(recipe, rng);
        qname += '.';
      }
      qname += recipe.base_domain;

      int subdomains = 0;
      for (const char ch : qname)
        if (ch == '.') ++subdomains;

      DnsEvent e;
      e.qname = qname;
      e.label = static_cast<int>(cls);
      const double qtype = recipe.qtypes[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(recipe.qtypes.size() - 1)))];
      e.numerics = {recipe.frame_len.sample(rng),
                    recipe.ttl.sample(rng),
                    static_cast<double>(qname.size()),
                    static_cast<double>(subdomains),
                    shannon_entropy(qname),
                    qtype,
                    static_cast<double>(recipe.answers.sample(rng)),
                    recipe.inter_arrival.sample(rng)};
      events.push_back(std::move(e));
    }
  }
  return events;
}

inline LabelMap synth_labels(const SynthSpec& spec) {
  std::vector<std::string> names;
  for (const ClassRecipe& r : spec.recipes) names.push_back(r.name);
  return LabelMap(std::move(names));
}

/// Writes the corpus as a dataset CSV (header + rows, default schema order).
inline void write_synth_csv(const std::vector<DnsEvent>& events, const LabelMap& labels,
                            const std::string& path) {
  const FeatureSchema schema = FeatureSchema::default_schema();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  std::string header;
  for (int i = 0; i < schema.column_count(); ++i) {
    if (i > 0) header += ',';
    header += schema.columns()[i].first;
  }
  out << header << "\n";
  for (const DnsEvent& e : events) out << event_to_row(e, schema, &labels) << "\n";
  if (!out) throw DataError("write failure: " + path);
}

}  // namespace hyxnet
