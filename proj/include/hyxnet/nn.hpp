#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hyxnet/rng.hpp"
#include "hyxnet/tensor.hpp"

namespace hyxnet {

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) {
    const T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
T stable_softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// ---------------------------------------------------------------------------
// Dense (affine) layer
// ---------------------------------------------------------------------------

template <typename T>
struct DenseParams {
  Tensor2<T> w;  // in x out
  Tensor2<T> b;  // 1 x out

  DenseParams() = default;
  DenseParams(int in, int out) : w(in, out), b(1, out) {}
  int in_dim() const { return w.rows; }
  int out_dim() const { return w.cols; }
};

template <typename T>
Tensor2<T> dense_forward(const Tensor2<T>& x, const DenseParams<T>& p) {
  require(x.cols == p.w.rows, "dense_forward: input width does not match weight rows");
  Tensor2<T> y;
  matmul(x, p.w, y);
  add_bias_rows(y, p.b);
  return y;
}

/// Gradients for y = x*W + b given upstream dy. dw/db accumulate so one
/// gradient buffer can gather contributions across time steps.
template <typename T>
Tensor2<T> dense_backward(const Tensor2<T>& dy, const Tensor2<T>& x, const DenseParams<T>& p,
                          Tensor2<T>& dw, Tensor2<T>& db, bool accumulate = false) {
  matmul_transa(x, dy, dw, accumulate);
  column_sums(dy, db, accumulate);
  Tensor2<T> dx;
  const Tensor2<T> wt = transpose(p.w);
  matmul(dy, wt, dx);
  return dx;
}

// ---------------------------------------------------------------------------
// Elementwise activations
// ---------------------------------------------------------------------------

template <typename T>
Tensor2<T> relu(const Tensor2<T>& x) {
  Tensor2<T> y = x;
  for (T& v : y.data)
    if (v < T(0)) v = T(0);
  return y;
}

template <typename T>
Tensor2<T> relu_backward(const Tensor2<T>& dy, const Tensor2<T>& pre) {
  require(dy.same_shape(pre), "relu_backward: shape mismatch");
  Tensor2<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (pre.data[i] <= T(0)) dx.data[i] = T(0);
  return dx;
}

// ---------------------------------------------------------------------------
// Dropout (inverted scaling: kept units are divided by 1-p at train time so
// inference applies no correction)
// ---------------------------------------------------------------------------

template <typename T>
struct DropoutResult {
  Tensor2<T> y;
  Tensor2<T> mask;  // 0 for dropped, 1/(1-p) for kept
};

template <typename T>
DropoutResult<T> dropout_forward(const Tensor2<T>& x, double p, bool train, std::uint64_t seed) {
  DropoutResult<T> out;
  out.y = x;
  out.mask = Tensor2<T>(x.rows, x.cols, T(1));
  if (!train || p <= 0.0) return out;
  const T keep_scale = T(1.0 / (1.0 - p));
  Rng rng(seed);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.uniform01() < p) {
      out.mask.data[i] = T(0);
      out.y.data[i] = T(0);
    } else {
      out.mask.data[i] = keep_scale;
      out.y.data[i] = x.data[i] * keep_scale;
    }
  }
  return out;
}

template <typename T>
Tensor2<T> dropout_backward(const Tensor2<T>& dy, const Tensor2<T>& mask) {
  require(dy.same_shape(mask), "dropout_backward: shape mismatch");
  Tensor2<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= mask.data[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Softmax and cross-entropy
// ---------------------------------------------------------------------------

/// Row-wise max-subtracted softmax.
template <typename T>
Tensor2<T> softmax_rows(const Tensor2<T>& logits) {
  Tensor2<T> p(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const T* in = logits.row(i);
    T* out = p.row(i);
    T mx = in[0];
    for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
    T sum = T(0);
    for (int j = 0; j < logits.cols; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (int j = 0; j < logits.cols; ++j) out[j] /= sum;
  }
  return p;
}

/// Mean of -log p[label] over the batch.
template <typename T>
double cross_entropy_mean(const Tensor2<T>& probs, const std::vector<int>& labels) {
  require(static_cast<int>(labels.size()) == probs.rows, "cross_entropy: label count");
  double total = 0.0;
  for (int i = 0; i < probs.rows; ++i) {
    require(labels[i] >= 0 && labels[i] < probs.cols, "cross_entropy: label out of range");
    total += -std::log(static_cast<double>(probs(i, labels[i])));
  }
  return total / probs.rows;
}

/// Gradient of mean cross-entropy w.r.t. the logits that produced `probs`
/// through softmax: (p - onehot) / N.
template <typename T>
Tensor2<T> softmax_ce_backward(const Tensor2<T>& probs, const std::vector<int>& labels) {
  require(static_cast<int>(labels.size()) == probs.rows, "softmax_ce_backward: label count");
  Tensor2<T> d = probs;
  const T inv_n = T(1) / T(probs.rows);
  for (int i = 0; i < probs.rows; ++i) {
    T* r = d.row(i);
    r[labels[i]] -= T(1);
    for (int j = 0; j < probs.cols; ++j) r[j] *= inv_n;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Embedding lookup
// ---------------------------------------------------------------------------

/// Gathers token rows from the table into time-major step matrices:
/// result[t] is batch x emb_dim. Pad id 0 gathers row 0 like any other row.
template <typename T>
std::vector<Tensor2<T>> embedding_forward(const Tensor2<std::int32_t>& tokens,
                                          const Tensor2<T>& table) {
  const int batch = tokens.rows;
  const int steps = tokens.cols;
  std::vector<Tensor2<T>> out(steps);
  for (int t = 0; t < steps; ++t) {
    out[t] = Tensor2<T>(batch, table.cols);
    for (int n = 0; n < batch; ++n) {
      const std::int32_t id = tokens(n, t);
      require(id >= 0 && id < table.rows, "embedding_forward: token id out of range");
      const T* src = table.row(id);
      T* dst = out[t].row(n);
      for (int j = 0; j < table.cols; ++j) dst[j] = src[j];
    }
  }
  return out;
}

/// Scatter-adds per-step gradients back into the table gradient. Repeated
/// ids accumulate additively.
template <typename T>
void embedding_backward(const std::vector<Tensor2<T>>& d_steps, const Tensor2<std::int32_t>& tokens,
                        Tensor2<T>& d_table) {
  for (int t = 0; t < static_cast<int>(d_steps.size()); ++t) {
    const Tensor2<T>& ds = d_steps[t];
    for (int n = 0; n < ds.rows; ++n) {
      T* dst = d_table.row(tokens(n, t));
      const T* src = ds.row(n);
      for (int j = 0; j < ds.cols; ++j) dst[j] += src[j];
    }
  }
}

}  // namespace hyxnet
