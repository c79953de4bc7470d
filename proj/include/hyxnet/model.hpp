#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "hyxnet/encoder.hpp"
#include "hyxnet/ingest.hpp"
#include "hyxnet/nn.hpp"
#include "hyxnet/rng.hpp"
#include "hyxnet/tensor.hpp"
#include "hyxnet/xlstm.hpp"

namespace hyxnet {

struct HyxnetConfig {
  int seq_len = kSeqLen;
  int buckets = kBuckets;
  int emb_dim = 64;
  int hidden = 128;
  int layers = 2;  // fixed at 2 in this implementation
  int numeric_dim = 8;
  int classes = 12;
  float dropout = 0.2f;
  int head1 = 256;
  int head2 = 128;
  // Optional variant: broadcast the standardized numerics into every
  // per-step recurrent input in addition to the head fusion. Default off;
  // the published configuration fuses at the head only.
  bool per_step_numerics = false;

  int layer1_input() const { return emb_dim + (per_step_numerics ? numeric_dim : 0); }

  void validate() const {
    require(seq_len > 0 && buckets > 1 && emb_dim > 0 && hidden > 0, "config dims must be positive");
    require(numeric_dim >= 0 && classes >= 2, "config needs >= 0 numerics and >= 2 classes");
    require(layers == 2, "this build supports exactly two recurrent layers");
    require(dropout >= 0.0f && dropout < 1.0f, "dropout must be in [0, 1)");
    require(head1 > 0 && head2 > 0, "head widths must be positive");
  }
};

inline std::int64_t count_params(const HyxnetConfig& c) {
  const std::int64_t h4 = 4ll * c.hidden;
  std::int64_t n = static_cast<std::int64_t>(c.buckets) * c.emb_dim;
  n += static_cast<std::int64_t>(c.layer1_input()) * h4 + static_cast<std::int64_t>(c.hidden) * h4 + h4;
  n += static_cast<std::int64_t>(c.hidden) * h4 + static_cast<std::int64_t>(c.hidden) * h4 + h4;
  const std::int64_t fused = c.numeric_dim + c.hidden;
  n += fused * c.head1 + c.head1;
  n += static_cast<std::int64_t>(c.head1) * c.head2 + c.head2;
  n += static_cast<std::int64_t>(c.head2) * c.classes + c.classes;
  return n;
}

template <typename T>
struct ModelParams {
  Tensor2<T> embedding;
  XlstmCellParams<T> l1, l2;
  DenseParams<T> head1, head2, head_out;

  ModelParams() = default;
  explicit ModelParams(const HyxnetConfig& c)
      : embedding(c.buckets, c.emb_dim),
        l1(c.layer1_input(), c.hidden),
        l2(c.hidden, c.hidden),
        head1(c.numeric_dim + c.hidden, c.head1),
        head2(c.head1, c.head2),
        head_out(c.head2, c.classes) {}

  /// Canonical tensor order; checkpoint layout and optimizer slots follow it.
  std::vector<Tensor2<T>*> all() {
    return {&embedding, &l1.w_x, &l1.w_h, &l1.b, &l2.w_x, &l2.w_h, &l2.b,
            &head1.w,   &head1.b, &head2.w, &head2.b, &head_out.w, &head_out.b};
  }
  std::vector<const Tensor2<T>*> all() const {
    return {&embedding, &l1.w_x, &l1.w_h, &l1.b, &l2.w_x, &l2.w_h, &l2.b,
            &head1.w,   &head1.b, &head2.w, &head2.b, &head_out.w, &head_out.b};
  }

  std::int64_t param_count() const {
    std::int64_t n = 0;
    for (const Tensor2<T>* t : all()) n += static_cast<std::int64_t>(t->size());
    return n;
  }
};

namespace detail {

template <typename T>
void fill_uniform(Tensor2<T>& t, Rng& rng, double lo, double hi) {
  for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = static_cast<T>(rng.uniform(lo, hi));
}

}  // namespace detail

/// Embedding ~U(-0.05, 0.05); recurrent/head weights ~U(+-1/sqrt(fan_in));
/// biases zero except the forget-gate block at -1 (slow initial decay).
template <typename T>
ModelParams<T> init_params(const HyxnetConfig& c, std::uint64_t seed) {
  c.validate();
  ModelParams<T> p(c);
  std::uint64_t stream = 0;
  {
    Rng rng(mix_seed(seed, stream++));
    detail::fill_uniform(p.embedding, rng, -0.05, 0.05);
  }
  for (Tensor2<T>* w : {&p.l1.w_x, &p.l1.w_h, &p.l2.w_x, &p.l2.w_h, &p.head1.w, &p.head2.w,
                        &p.head_out.w}) {
    Rng rng(mix_seed(seed, stream++));
    const double bound = 1.0 / std::sqrt(static_cast<double>(w->rows));
    detail::fill_uniform(*w, rng, -bound, bound);
  }
  for (Tensor2<T>* b : {&p.l1.b, &p.l2.b, &p.head1.b, &p.head2.b, &p.head_out.b}) b->zero();
  for (int j = c.hidden; j < 2 * c.hidden; ++j) {  // forget-gate block of [i|f|o|g]
    p.l1.b(0, j) = static_cast<T>(-1);
    p.l2.b(0, j) = static_cast<T>(-1);
  }
  return p;
}

template <typename T>
struct ModelGrads {
  ModelParams<T> g;
  explicit ModelGrads(const HyxnetConfig& c) : g(c) { zero(); }
  void zero() {
    for (Tensor2<T>* t : g.all()) t->zero();
  }
  std::vector<Tensor2<T>*> all() { return g.all(); }
};

template <typename T>
struct ForwardCache {
  std::vector<Tensor2<T>> emb_steps;
  XlstmLayerCache<T> l1, l2;
  Tensor2<T> numerics;  // scaled inputs, kept for the fusion split
  Tensor2<T> z;
  Tensor2<T> pre1, drop1_in;
  DropoutResult<T> drop1;
  Tensor2<T> pre2, drop2_in;
  DropoutResult<T> drop2;
  Tensor2<T> probs;
};

/// Batched forward pass. `tokens` is N x seq_len bucket ids, `numerics` is
/// N x numeric_dim already standardized. With train=true the two head
/// dropouts draw masks from mix_seed(dropout_seed, {1,2}).
template <typename T>
Tensor2<T> model_forward(const ModelParams<T>& params, const HyxnetConfig& c,
                         const Tensor2<std::int32_t>& tokens, const Tensor2<T>& numerics,
                         bool train, std::uint64_t dropout_seed,
                         std::type_identity_t<ForwardCache<T>*> cache) {
  require(tokens.cols == c.seq_len, "token sequence length does not match config");
  require(numerics.rows == tokens.rows, "token/numeric batch sizes differ");
  require(numerics.cols == c.numeric_dim, "numeric width does not match config");

  std::vector<Tensor2<T>> emb = embedding_forward(tokens, params.embedding);
  if (c.per_step_numerics)
    for (Tensor2<T>& step : emb) step = concat_cols(step, numerics);
  XlstmLayerCache<T> l1_cache, l2_cache;
  XlstmLayerOutput<T> l1 =
      xlstm_layer_forward(emb, params.l1, cache ? &l1_cache : nullptr);
  XlstmLayerOutput<T> l2 =
      xlstm_layer_forward(l1.hs, params.l2, cache ? &l2_cache : nullptr);

  Tensor2<T> z = concat_cols(numerics, l2.final_state.h);  // z = [numerics | h_T]

  Tensor2<T> pre1 = dense_forward(z, params.head1);
  Tensor2<T> act1 = relu(pre1);
  DropoutResult<T> d1 = dropout_forward(act1, c.dropout, train, mix_seed(dropout_seed, 1));

  Tensor2<T> pre2 = dense_forward(d1.y, params.head2);
  Tensor2<T> act2 = relu(pre2);
  DropoutResult<T> d2 = dropout_forward(act2, c.dropout, train, mix_seed(dropout_seed, 2));

  Tensor2<T> logits = dense_forward(d2.y, params.head_out);
  Tensor2<T> probs = softmax_rows(logits);
  assert_finite(probs, "model probabilities");

  if (cache) {
    cache->emb_steps = std::move(emb);
    cache->l1 = std::move(l1_cache);
    cache->l2 = std::move(l2_cache);
    cache->numerics = numerics;
    cache->z = std::move(z);
    cache->pre1 = std::move(pre1);
    cache->drop1_in = std::move(act1);
    cache->drop1 = std::move(d1);
    cache->pre2 = std::move(pre2);
    cache->drop2_in = std::move(act2);
    cache->drop2 = std::move(d2);
    cache->probs = probs;
  }
  return probs;
}

/// Backward for mean cross-entropy over the batch; accumulates into `grads`.
template <typename T>
void model_backward(const ModelParams<T>& params, const HyxnetConfig& c,
                    const Tensor2<std::int32_t>& tokens, const ForwardCache<T>& cache,
                    const std::vector<int>& labels, ModelGrads<T>& grads) {
  Tensor2<T> d_logits = softmax_ce_backward(cache.probs, labels);

  Tensor2<T> d_drop2 = dense_backward(d_logits, cache.drop2.y, params.head_out,
                                      grads.g.head_out.w, grads.g.head_out.b, true);
  Tensor2<T> d_act2 = dropout_backward(d_drop2, cache.drop2.mask);
  Tensor2<T> d_pre2 = relu_backward(d_act2, cache.pre2);

  Tensor2<T> d_drop1 = dense_backward(d_pre2, cache.drop1.y, params.head2, grads.g.head2.w,
                                      grads.g.head2.b, true);
  Tensor2<T> d_act1 = dropout_backward(d_drop1, cache.drop1.mask);
  Tensor2<T> d_pre1 = relu_backward(d_act1, cache.pre1);

  Tensor2<T> d_z = dense_backward(d_pre1, cache.z, params.head1, grads.g.head1.w,
                                  grads.g.head1.b, true);
  Tensor2<T> d_hT = slice_cols(d_z, c.numeric_dim, c.hidden);

  // Upstream per-step grads into layer 2: only the last step receives d_hT.
  const int steps = c.seq_len;
  std::vector<Tensor2<T>> d_hs2(steps);
  for (int t = 0; t < steps; ++t) {
    d_hs2[t] = Tensor2<T>(tokens.rows, c.hidden);
    d_hs2[t].zero();
  }
  d_hs2[steps - 1] = std::move(d_hT);

  XlstmCellGrads<T> g2(params.l2);
  std::vector<Tensor2<T>> d_hs1 = xlstm_layer_backward(d_hs2, cache.l2, params.l2, g2);
  add_inplace(grads.g.l2.w_x, g2.w_x);
  add_inplace(grads.g.l2.w_h, g2.w_h);
  add_inplace(grads.g.l2.b, g2.b);

  XlstmCellGrads<T> g1(params.l1);
  std::vector<Tensor2<T>> d_emb = xlstm_layer_backward(d_hs1, cache.l1, params.l1, g1);
  add_inplace(grads.g.l1.w_x, g1.w_x);
  add_inplace(grads.g.l1.w_h, g1.w_h);
  add_inplace(grads.g.l1.b, g1.b);

  if (c.per_step_numerics)  // keep only the embedding slice of each step grad
    for (Tensor2<T>& step : d_emb) step = slice_cols(step, 0, c.emb_dim);
  embedding_backward(d_emb, tokens, grads.g.embedding);
}

struct Prediction {
  std::vector<float> probs;
  int label = 0;
  float confidence = 0.0f;
};

template <typename T>
Prediction predict_row(const Tensor2<T>& probs, int row) {
  Prediction p;
  p.probs.resize(probs.cols);
  for (int j = 0; j < probs.cols; ++j) p.probs[j] = static_cast<float>(probs(row, j));
  p.label = 0;
  for (int j = 1; j < probs.cols; ++j)
    if (p.probs[j] > p.probs[p.label]) p.label = j;
  p.confidence = p.probs[p.label];
  return p;
}

/// Inference on one encoded event (dropout off).
template <typename T>
Prediction predict_one(const ModelParams<T>& params, const HyxnetConfig& c, const TokenSeq& seq,
                       const std::vector<T>& numerics) {
  Tensor2<std::int32_t> tokens(1, c.seq_len);
  std::copy(seq.begin(), seq.end(), tokens.row(0));
  Tensor2<T> num(1, c.numeric_dim);
  require(static_cast<int>(numerics.size()) == c.numeric_dim, "numeric width mismatch");
  std::copy(numerics.begin(), numerics.end(), num.row(0));
  Tensor2<T> probs = model_forward(params, c, tokens, num, false, 0, nullptr);
  return predict_row(probs, 0);
}

// ---------------------------------------------------------------------------
// Checkpoint container. Layout (all integers little-endian):
//   "HYXN" | u32 version=1
//   u32 x11: seq_len, buckets, emb_dim, hidden, layers, numeric_dim,
//            classes, head1, head2, per_step_numerics(0/1), label_count
//   f32 dropout
//   per label: u32 byte length, bytes
//   u32 scaler_dim | f64 mean[dim] | f64 std[dim]
//   per tensor in ModelParams::all() order: u32 rows, u32 cols, f32 data
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'H', 'Y', 'X', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ModelError("checkpoint truncated while reading an integer");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

inline float read_f32(std::istream& in) {
  const std::uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u32(out, static_cast<std::uint32_t>(bits));
  write_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

inline double read_f64(std::istream& in) {
  const std::uint64_t lo = read_u32(in);
  const std::uint64_t hi = read_u32(in);
  const std::uint64_t bits = lo | (hi << 32);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

inline void save_checkpoint(const ModelParams<float>& params, const HyxnetConfig& c,
                            const FeatureScaler& scaler, const LabelMap& labels,
                            const std::string& path) {
  require(scaler.dim() == c.numeric_dim, "scaler width does not match config");
  require(labels.size() == c.classes, "label count does not match config");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot open checkpoint for writing: " + path);

  out.write(kCheckpointMagic, 4);
  detail::write_u32(out, kCheckpointVersion);
  for (const int v : {c.seq_len, c.buckets, c.emb_dim, c.hidden, c.layers, c.numeric_dim,
                      c.classes, c.head1, c.head2, c.per_step_numerics ? 1 : 0, labels.size()})
    detail::write_u32(out, static_cast<std::uint32_t>(v));
  detail::write_f32(out, c.dropout);
  for (int i = 0; i < labels.size(); ++i) {
    const std::string& name = labels.name(i);
    detail::write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  detail::write_u32(out, static_cast<std::uint32_t>(scaler.dim()));
  for (const double m : scaler.mean()) detail::write_f64(out, m);
  for (const double s : scaler.std()) detail::write_f64(out, s);
  for (const Tensor2<float>* t : params.all()) {
    detail::write_u32(out, static_cast<std::uint32_t>(t->rows));
    detail::write_u32(out, static_cast<std::uint32_t>(t->cols));
    for (const float v : t->data) detail::write_f32(out, v);
  }
  if (!out) throw ModelError("write failure on checkpoint: " + path);
}

struct Checkpoint {
  HyxnetConfig config;
  ModelParams<float> params;
  FeatureScaler scaler;
  LabelMap labels;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open checkpoint: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw ModelError("not a model checkpoint (bad magic): " + path);
  const std::uint32_t version = detail::read_u32(in);
  if (version != kCheckpointVersion)
    throw ModelError("unsupported checkpoint version " + std::to_string(version));

  HyxnetConfig c;
  c.seq_len = static_cast<int>(detail::read_u32(in));
  c.buckets = static_cast<int>(detail::read_u32(in));
  c.emb_dim = static_cast<int>(detail::read_u32(in));
  c.hidden = static_cast<int>(detail::read_u32(in));
  c.layers = static_cast<int>(detail::read_u32(in));
  c.numeric_dim = static_cast<int>(detail::read_u32(in));
  c.classes = static_cast<int>(detail::read_u32(in));
  c.head1 = static_cast<int>(detail::read_u32(in));
  c.head2 = static_cast<int>(detail::read_u32(in));
  const std::uint32_t per_step = detail::read_u32(in);
  if (per_step > 1) throw ModelError("corrupt per-step-numerics flag in checkpoint");
  c.per_step_numerics = per_step == 1;
  const std::uint32_t label_count = detail::read_u32(in);
  c.dropout = detail::read_f32(in);
  c.validate();
  if (static_cast<int>(label_count) != c.classes)
    throw ModelError("checkpoint label count disagrees with class count");

  std::vector<std::string> names;
  names.reserve(label_count);
  for (std::uint32_t i = 0; i < label_count; ++i) {
    const std::uint32_t len = detail::read_u32(in);
    if (len > 4096) throw ModelError("implausible label length in checkpoint");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw ModelError("checkpoint truncated inside label names");
    names.push_back(std::move(name));
  }

  const std::uint32_t scaler_dim = detail::read_u32(in);
  if (static_cast<int>(scaler_dim) != c.numeric_dim)
    throw ModelError("checkpoint scaler width disagrees with config");
  std::vector<double> mean(scaler_dim), std(scaler_dim);
  for (auto& m : mean) m = detail::read_f64(in);
  for (auto& s : std) s = detail::read_f64(in);

  Checkpoint ckpt{c, ModelParams<float>(c), FeatureScaler(std::move(mean), std::move(std)),
                  LabelMap(std::move(names))};
  for (Tensor2<float>* t : ckpt.params.all()) {
    const std::uint32_t rows = detail::read_u32(in);
    const std::uint32_t cols = detail::read_u32(in);
    if (static_cast<int>(rows) != t->rows || static_cast<int>(cols) != t->cols)
      throw ModelError("checkpoint tensor shape " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " disagrees with config-implied " +
                       std::to_string(t->rows) + "x" + std::to_string(t->cols));
    for (float& v : t->data) v = detail::read_f32(in);
    if (!in) throw ModelError("checkpoint truncated inside weights");
  }
  char extra;
  if (in.read(&extra, 1)) throw ModelError("trailing bytes after checkpoint payload");
  return ckpt;
}

}  // namespace hyxnet
