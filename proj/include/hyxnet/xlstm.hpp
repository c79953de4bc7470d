#pragma once

#include <type_traits>
#include <vector>

#include "hyxnet/nn.hpp"
#include "hyxnet/tensor.hpp"

namespace hyxnet {

/// Recurrent cell with an exponential forget path: the classic forget gate is
/// replaced by a continuous decay alpha = exp(-softplus(f)) in (0, 1] applied
/// multiplicatively to the cell state,
///
///   [i, f, o, g] = x*W_x + h_prev*W_h + b
///   i = sigmoid(i), o = sigmoid(o), g = tanh(g)
///   alpha = exp(-softplus(f))
///   c = alpha .* c_prev + i .* g
///   h = o .* tanh(c)
///
/// Gate blocks are packed [i | f | o | g], each `hidden` wide.
template <typename T>
struct XlstmCellParams {
  Tensor2<T> w_x;  // input_dim x 4*hidden
  Tensor2<T> w_h;  // hidden x 4*hidden
  Tensor2<T> b;    // 1 x 4*hidden

  XlstmCellParams() = default;
  XlstmCellParams(int input_dim, int hidden)
      : w_x(input_dim, 4 * hidden), w_h(hidden, 4 * hidden), b(1, 4 * hidden) {}

  int input_dim() const { return w_x.rows; }
  int hidden() const { return w_h.rows; }
};

template <typename T>
struct CellState {
  Tensor2<T> h;  // batch x hidden
  Tensor2<T> c;  // batch x hidden

  CellState() = default;
  CellState(int batch, int hidden) : h(batch, hidden), c(batch, hidden) {}
};

/// Everything backward needs; activations are recomputed from pre_gates to
/// keep per-step memory at five matrices.
template <typename T>
struct CellCache {
  Tensor2<T> x;
  Tensor2<T> h_prev;
  Tensor2<T> c_prev;
  Tensor2<T> pre_gates;  // batch x 4*hidden
  Tensor2<T> c;          // batch x hidden, post-update
};

template <typename T>
struct XlstmCellGrads {
  Tensor2<T> w_x;
  Tensor2<T> w_h;
  Tensor2<T> b;

  XlstmCellGrads() = default;
  explicit XlstmCellGrads(const XlstmCellParams<T>& p)
      : w_x(p.w_x.rows, p.w_x.cols), w_h(p.w_h.rows, p.w_h.cols), b(1, p.b.cols) {}
};

template <typename T>
CellState<T> xlstm_cell_forward(const Tensor2<T>& x, const CellState<T>& state,
                                const XlstmCellParams<T>& params,
                                std::type_identity_t<CellCache<T>*> cache = nullptr) {
  const int hidden = params.hidden();
  require(x.cols == params.input_dim(), "xlstm_cell_forward: input width");
  require(state.h.rows == x.rows && state.h.cols == hidden, "xlstm_cell_forward: state shape");

  Tensor2<T> pre;
  matmul(x, params.w_x, pre);
  matmul(state.h, params.w_h, pre, /*accumulate=*/true);
  add_bias_rows(pre, params.b);

  CellState<T> next(x.rows, hidden);
  for (int n = 0; n < x.rows; ++n) {
    const T* g_row = pre.row(n);
    const T* cp = state.c.row(n);
    T* c_out = next.c.row(n);
    T* h_out = next.h.row(n);
    for (int j = 0; j < hidden; ++j) {
      const T gi = stable_sigmoid(g_row[j]);
      const T alpha = std::exp(-stable_softplus(g_row[hidden + j]));
      const T go = stable_sigmoid(g_row[2 * hidden + j]);
      const T gg = std::tanh(g_row[3 * hidden + j]);
      c_out[j] = alpha * cp[j] + gi * gg;
      h_out[j] = go * std::tanh(c_out[j]);
    }
  }
  assert_finite(next.h, "xlstm cell h");
  assert_finite(next.c, "xlstm cell c");

  if (cache) {
    cache->x = x;
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->pre_gates = std::move(pre);
    cache->c = next.c;
  }
  return next;
}

/// Reverse-mode gradients of the cell equations. The alpha path uses
/// d(alpha)/d(pre_f) = -alpha * sigmoid(pre_f). Parameter gradients
/// accumulate into `grads`; returns (grad_x, grad_state_prev).
template <typename T>
std::pair<Tensor2<T>, CellState<T>> xlstm_cell_backward(const Tensor2<T>& grad_h,
                                                        const Tensor2<T>& grad_c,
                                                        const CellCache<T>& cache,
                                                        const XlstmCellParams<T>& params,
                                                        XlstmCellGrads<T>& grads) {
  const int hidden = params.hidden();
  const int batch = cache.x.rows;
  require(grad_h.rows == batch && grad_h.cols == hidden, "xlstm_cell_backward: grad_h shape");
  require(grad_c.rows == batch && grad_c.cols == hidden, "xlstm_cell_backward: grad_c shape");

  Tensor2<T> d_pre(batch, 4 * hidden);
  CellState<T> d_state(batch, hidden);

  for (int n = 0; n < batch; ++n) {
    const T* g_row = cache.pre_gates.row(n);
    const T* cp = cache.c_prev.row(n);
    const T* cn = cache.c.row(n);
    const T* dh = grad_h.row(n);
    const T* dc_in = grad_c.row(n);
    T* dp = d_pre.row(n);
    T* dc_prev = d_state.c.row(n);
    for (int j = 0; j < hidden; ++j) {
      const T pre_i = g_row[j];
      const T pre_f = g_row[hidden + j];
      const T pre_o = g_row[2 * hidden + j];
      const T pre_g = g_row[3 * hidden + j];
      const T gi = stable_sigmoid(pre_i);
      const T alpha = std::exp(-stable_softplus(pre_f));
      const T go = stable_sigmoid(pre_o);
      const T gg = std::tanh(pre_g);
      const T tanh_c = std::tanh(cn[j]);

      const T dc_total = dh[j] * go * (T(1) - tanh_c * tanh_c) + dc_in[j];
      dp[j] = dc_total * gg * gi * (T(1) - gi);
      dp[hidden + j] = -dc_total * cp[j] * alpha * stable_sigmoid(pre_f);
      dp[2 * hidden + j] = dh[j] * tanh_c * go * (T(1) - go);
      dp[3 * hidden + j] = dc_total * gi * (T(1) - gg * gg);
      dc_prev[j] = dc_total * alpha;
    }
  }

  matmul_transa(cache.x, d_pre, grads.w_x, /*accumulate=*/true);
  matmul_transa(cache.h_prev, d_pre, grads.w_h, /*accumulate=*/true);
  column_sums(d_pre, grads.b, /*accumulate=*/true);

  Tensor2<T> dx;
  {
    const Tensor2<T> wxt = transpose(params.w_x);
    matmul(d_pre, wxt, dx);
  }
  {
    const Tensor2<T> wht = transpose(params.w_h);
    matmul(d_pre, wht, d_state.h);
  }
  return {std::move(dx), std::move(d_state)};
}

// ---------------------------------------------------------------------------
// Layer: sequential scan over T time-major step matrices
// ---------------------------------------------------------------------------

template <typename T>
struct XlstmLayerOutput {
  std::vector<Tensor2<T>> hs;  // per step, batch x hidden
  CellState<T> final_state;
};

template <typename T>
struct XlstmLayerCache {
  std::vector<CellCache<T>> steps;
};

template <typename T>
XlstmLayerOutput<T> xlstm_layer_forward(const std::vector<Tensor2<T>>& steps,
                                        const XlstmCellParams<T>& params,
                                        std::type_identity_t<XlstmLayerCache<T>*> cache = nullptr) {
  require(!steps.empty(), "xlstm_layer_forward: empty sequence");
  const int batch = steps[0].rows;
  XlstmLayerOutput<T> out;
  out.hs.reserve(steps.size());
  if (cache) cache->steps.resize(steps.size());

  CellState<T> state(batch, params.hidden());  // zero initial state
  for (std::size_t t = 0; t < steps.size(); ++t) {
    state = xlstm_cell_forward(steps[t], state, params, cache ? &cache->steps[t] : nullptr);
    out.hs.push_back(state.h);
  }
  out.final_state = std::move(state);
  return out;
}

/// Backpropagates per-step upstream gradients (grad_hs[t] w.r.t. hs[t])
/// through the scan. Returns per-step input gradients; parameter gradients
/// accumulate into `grads`.
template <typename T>
std::vector<Tensor2<T>> xlstm_layer_backward(const std::vector<Tensor2<T>>& grad_hs,
                                             const XlstmLayerCache<T>& cache,
                                             const XlstmCellParams<T>& params,
                                             XlstmCellGrads<T>& grads) {
  const int steps = static_cast<int>(cache.steps.size());
  require(static_cast<int>(grad_hs.size()) == steps, "xlstm_layer_backward: step count");
  const int batch = cache.steps[0].x.rows;
  const int hidden = params.hidden();

  std::vector<Tensor2<T>> d_inputs(steps);
  Tensor2<T> carry_h(batch, hidden);
  Tensor2<T> carry_c(batch, hidden);
  for (int t = steps - 1; t >= 0; --t) {
    for (std::size_t i = 0; i < carry_h.size(); ++i) carry_h.data[i] += grad_hs[t].data[i];
    auto [dx, d_state] = xlstm_cell_backward(carry_h, carry_c, cache.steps[t], params, grads);
    d_inputs[t] = std::move(dx);
    carry_h = std::move(d_state.h);
    carry_c = std::move(d_state.c);
  }
  return d_inputs;
}

}  // namespace hyxnet
