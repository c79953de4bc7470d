#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hyxnet/tensor.hpp"

namespace hyxnet {

/// AdamW: Adam moment updates with bias correction plus decoupled weight
/// decay (w -= lr*wd*w applied separately from the gradient term).
template <typename T>
class AdamW {
 public:
  AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8)
      : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(const std::vector<Tensor2<T>*>& params) {
    m_.clear();
    v_.clear();
    for (const Tensor2<T>* p : params) {
      m_.emplace_back(p->rows, p->cols);
      v_.emplace_back(p->rows, p->cols);
    }
    step_count_ = 0;
  }

  void step(const std::vector<Tensor2<T>*>& params, const std::vector<const Tensor2<T>*>& grads) {
    require(params.size() == m_.size() && grads.size() == m_.size(), "adamw: parameter list changed");
    ++step_count_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor2<T>& p = *params[k];
      const Tensor2<T>& g = *grads[k];
      require(p.same_shape(g), "adamw: grad shape mismatch");
      Tensor2<T>& m = m_[k];
      Tensor2<T>& v = v_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const T gi = g.data[i];
        m.data[i] = T(beta1_) * m.data[i] + T(1.0 - beta1_) * gi;
        v.data[i] = T(beta2_) * v.data[i] + T(1.0 - beta2_) * gi * gi;
        const T mhat = m.data[i] / T(bc1);
        const T vhat = v.data[i] / T(bc2);
        p.data[i] -= T(lr_ * weight_decay_) * p.data[i];
        p.data[i] -= T(lr_) * mhat / (std::sqrt(vhat) + T(eps_));
      }
    }
  }

  long step_count() const { return step_count_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_;
  double weight_decay_;
  double beta1_;
  double beta2_;
  double eps_;
  long step_count_ = 0;
  std::vector<Tensor2<T>> m_;
  std::vector<Tensor2<T>> v_;
};

/// Scales all gradients by max_norm/norm when the global L2 norm across every
/// tensor exceeds max_norm. Returns the pre-clip norm.
template <typename T>
double clip_global_norm(const std::vector<Tensor2<T>*>& grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor2<T>* g : grads)
    for (const T& v : g->data) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T scale = T(max_norm / norm);
    for (Tensor2<T>* g : grads)
      for (T& v : g->data) v *= scale;
  }
  return norm;
}

/// Validation-loss driven learning-rate plateau schedule and early stopping.
/// An epoch "improves" when val loss drops below the best seen by at least
/// min_delta. Two consecutive non-improving epochs halve the lr (floor
/// 1e-5, counter resets on reduction); five without improvement stop.
class TrainSchedule {
 public:
  struct Decision {
    bool improved = false;
    bool reduced = false;
    bool stop = false;
    double lr = 0.0;
  };

  explicit TrainSchedule(double initial_lr, double factor = 0.5, double min_delta = 1e-4,
                         int lr_patience = 2, int stop_patience = 5, double lr_floor = 1e-5)
      : lr_(initial_lr),
        factor_(factor),
        min_delta_(min_delta),
        lr_patience_(lr_patience),
        stop_patience_(stop_patience),
        lr_floor_(lr_floor) {}

  Decision observe(double val_loss) {
    Decision d;
    if (val_loss < best_ - min_delta_) {
      best_ = val_loss;
      sched_bad_ = 0;
      stop_bad_ = 0;
      d.improved = true;
    } else {
      ++sched_bad_;
      ++stop_bad_;
      if (sched_bad_ >= lr_patience_) {
        lr_ = std::max(lr_ * factor_, lr_floor_);
        sched_bad_ = 0;
        d.reduced = true;
      }
      if (stop_bad_ >= stop_patience_) d.stop = true;
    }
    d.lr = lr_;
    return d;
  }

  double learning_rate() const { return lr_; }
  double best_loss() const { return best_; }

 private:
  double lr_;
  double factor_;
  double min_delta_;
  int lr_patience_;
  int stop_patience_;
  double lr_floor_;
  double best_ = std::numeric_limits<double>::infinity();
  int sched_bad_ = 0;
  int stop_bad_ = 0;
};

}  // namespace hyxnet
