#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyxnet {

/// Dense row-major matrix. The scalar type is a template parameter so the
/// same kernels run in float for production and double for gradient checks.
template <typename T>
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Tensor2() = default;
  Tensor2(int r, int c, T fill = T{})
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  T* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const T* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

  T& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }
  void zero() { fill(T{}); }
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

template <typename T>
void assert_finite(const Tensor2<T>& t, const char* context) {
  for (const T& v : t.data) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string("non-finite value in ") + context);
  }
}

/// C = A * B, or C += A * B when accumulate is set.
/// A: n x k, B: k x m, C: n x m. The j-inner loop is what the compiler
/// vectorizes; keep it a plain contiguous accumulation.
template <typename T>
void matmul(const Tensor2<T>& a, const Tensor2<T>& b, Tensor2<T>& c, bool accumulate = false) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  if (!accumulate || c.rows != a.rows || c.cols != b.cols) {
    c = Tensor2<T>(a.rows, b.cols);
  }
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const T* arow = a.row(i);
    T* crow = c.row(i);
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b.row(p);
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

/// C (+)= A^T * B with A: n x k, B: n x m, C: k x m.
/// Used for weight gradients (input^T * upstream) without materializing A^T.
template <typename T>
void matmul_transa(const Tensor2<T>& a, const Tensor2<T>& b, Tensor2<T>& c, bool accumulate = false) {
  require(a.rows == b.rows, "matmul_transa: row counts differ");
  if (!accumulate || c.rows != a.cols || c.cols != b.cols) {
    c = Tensor2<T>(a.cols, b.cols);
  }
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const T* arow = a.row(i);
    const T* brow = b.row(i);
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c.row(p);
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
Tensor2<T> transpose(const Tensor2<T>& a) {
  Tensor2<T> out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

/// Adds a 1 x m bias row to every row of x.
template <typename T>
void add_bias_rows(Tensor2<T>& x, const Tensor2<T>& bias) {
  require(bias.rows == 1 && bias.cols == x.cols, "add_bias_rows: bias shape");
  const T* b = bias.row(0);
  for (int i = 0; i < x.rows; ++i) {
    T* r = x.row(i);
    for (int j = 0; j < x.cols; ++j) r[j] += b[j];
  }
}

/// out (1 x m) (+)= column sums of x. Bias gradient reduction.
template <typename T>
void column_sums(const Tensor2<T>& x, Tensor2<T>& out, bool accumulate = false) {
  if (!accumulate || out.rows != 1 || out.cols != x.cols) out = Tensor2<T>(1, x.cols);
  T* o = out.row(0);
  for (int i = 0; i < x.rows; ++i) {
    const T* r = x.row(i);
    for (int j = 0; j < x.cols; ++j) o[j] += r[j];
  }
}

/// Column-wise concatenation: [a | b].
template <typename T>
Tensor2<T> concat_cols(const Tensor2<T>& a, const Tensor2<T>& b) {
  require(a.rows == b.rows, "concat_cols: row counts differ");
  Tensor2<T> out(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    T* o = out.row(i);
    const T* ra = a.row(i);
    const T* rb = b.row(i);
    for (int j = 0; j < a.cols; ++j) o[j] = ra[j];
    for (int j = 0; j < b.cols; ++j) o[a.cols + j] = rb[j];
  }
  return out;
}

/// dst += src, elementwise.
template <typename T>
void add_inplace(Tensor2<T>& dst, const Tensor2<T>& src) {
  require(dst.same_shape(src), "add_inplace: shape mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

/// View conversion for APIs that take read-only tensor lists.
template <typename T>
std::vector<const Tensor2<T>*> const_ptrs(const std::vector<Tensor2<T>*>& v) {
  return std::vector<const Tensor2<T>*>(v.begin(), v.end());
}

template <typename T>
Tensor2<T> slice_cols(const Tensor2<T>& a, int first, int count) {
  require(first >= 0 && first + count <= a.cols, "slice_cols: range out of bounds");
  Tensor2<T> out(a.rows, count);
  for (int i = 0; i < a.rows; ++i) {
    const T* r = a.row(i) + first;
    T* o = out.row(i);
    for (int j = 0; j < count; ++j) o[j] = r[j];
  }
  return out;
}

}  // namespace hyxnet
