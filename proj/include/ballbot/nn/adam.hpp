#pragma once

#include <cmath>
#include <vector>

#include "ballbot/nn/param_store.hpp"
#include "ballbot/nn/tensor.hpp"

namespace ballbot::nn {

// Adam with torch-style coupled L2 weight decay, applied only to params
// flagged weight_decay (weight matrices; never biases, norms or log_std).
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<Param<T>*> params, double lr = 1e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        weight_decay_(weight_decay) {
    for (auto* p : params_) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void zero_grad() {
    for (auto* p : params_) p->grad.zero();
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Param<T>* p = params_[k];
      if (!p->trainable) continue;
      for (std::int64_t i = 0; i < p->value.size(); ++i) {
        double g = static_cast<double>(p->grad[i]);
        if (p->weight_decay && weight_decay_ != 0.0)
          g += weight_decay_ * static_cast<double>(p->value[i]);
        const double m = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
        const double v = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
        m_[k][i] = static_cast<T>(m);
        v_[k][i] = static_cast<T>(v);
        p->value[i] -= static_cast<T>(lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_));
      }
    }
  }

  // Optimizer state rides along in checkpoints under an "adam/" prefix.
  void export_state(ParameterStore& store, const std::string& prefix) const {
    for (std::size_t k = 0; k < params_.size(); ++k) {
      store.put_tensor(prefix + "/m/" + params_[k]->name, m_[k]);
      store.put_tensor(prefix + "/v/" + params_[k]->name, v_[k]);
    }
    store.put(prefix + "/t", {1}, {static_cast<double>(t_)});
  }

  void import_state(const ParameterStore& store, const std::string& prefix) {
    for (std::size_t k = 0; k < params_.size(); ++k) {
      store.load_tensor(prefix + "/m/" + params_[k]->name, m_[k]);
      store.load_tensor(prefix + "/v/" + params_[k]->name, v_[k]);
    }
    t_ = static_cast<long long>(store.get(prefix + "/t").data.at(0));
  }

 private:
  std::vector<Param<T>*> params_;
  std::vector<Tensor<T>> m_, v_;
  double lr_, beta1_, beta2_, eps_, weight_decay_;
  long long t_ = 0;
};

}  // namespace ballbot::nn
