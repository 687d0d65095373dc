#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <vector>

#include "ballbot/nn/tensor.hpp"

namespace ballbot::nn {

template <typename T>
using EigenMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<EigenMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const EigenMatrix<T>>;

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, bool train) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
};

template <typename T>
class Linear final : public Layer<T> {
 public:
  Linear(std::string prefix, std::int64_t in, std::int64_t out)
      : in_(in), out_(out),
        weight_(prefix + "/W", {out, in}, true, true),
        bias_(prefix + "/b", {out}) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    if (x.ndim() != 2 || x.dim(1) != in_)
      throw InvalidParameter("linear: expected [N," + std::to_string(in_) + "], got " +
                             x.shape_str());
    input_ = x;
    const std::int64_t n = x.dim(0);
    Tensor<T> y({n, out_});
    ConstMatMap<T> xm(x.data(), n, in_);
    ConstMatMap<T> wm(weight_.value.data(), out_, in_);
    MatMap<T> ym(y.data(), n, out_);
    ym.noalias() = xm * wm.transpose();
    ym.rowwise() += Eigen::Map<const Eigen::RowVector<T, Eigen::Dynamic>>(
        bias_.value.data(), out_);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::int64_t n = input_.dim(0);
    ConstMatMap<T> gym(gy.data(), n, out_);
    ConstMatMap<T> xm(input_.data(), n, in_);
    MatMap<T> gw(weight_.grad.data(), out_, in_);
    gw.noalias() += gym.transpose() * xm;
    Eigen::Map<Eigen::RowVector<T, Eigen::Dynamic>>(bias_.grad.data(), out_) +=
        gym.colwise().sum();
    Tensor<T> gx({n, in_});
    MatMap<T> gxm(gx.data(), n, in_);
    ConstMatMap<T> wm(weight_.value.data(), out_, in_);
    gxm.noalias() = gym * wm;
    return gx;
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  std::int64_t in_, out_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(std::string prefix, std::int64_t in_ch, std::int64_t out_ch, int kernel,
         int stride, int pad)
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), s_(stride), p_(pad),
        weight_(prefix + "/W", {out_ch, in_ch, kernel, kernel}, true, true),
        bias_(prefix + "/b", {out_ch}) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    if (x.ndim() != 4 || x.dim(1) != in_ch_)
      throw InvalidParameter("conv2d: expected [N," + std::to_string(in_ch_) +
                             ",H,W], got " + x.shape_str());
    input_ = x;
    const std::int64_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::int64_t ho = (h + 2 * p_ - k_) / s_ + 1;
    const std::int64_t wo = (w + 2 * p_ - k_) / s_ + 1;
    Tensor<T> y({n, out_ch_, ho, wo});
    const T* wd = weight_.value.data();
    for (std::int64_t in = 0; in < n; ++in)
      for (std::int64_t f = 0; f < out_ch_; ++f) {
        const T b = bias_.value[f];
        for (std::int64_t oy = 0; oy < ho; ++oy)
          for (std::int64_t ox = 0; ox < wo; ++ox) {
            T acc = b;
            for (std::int64_t c = 0; c < in_ch_; ++c) {
              const T* xc = x.data() + ((in * in_ch_ + c) * h) * w;
              const T* wf = wd + ((f * in_ch_ + c) * k_) * k_;
              for (int ky = 0; ky < k_; ++ky) {
                const std::int64_t iy = oy * s_ + ky - p_;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < k_; ++kx) {
                  const std::int64_t ix = ox * s_ + kx - p_;
                  if (ix < 0 || ix >= w) continue;
                  acc += xc[iy * w + ix] * wf[ky * k_ + kx];
                }
              }
            }
            y[((in * out_ch_ + f) * ho + oy) * wo + ox] = acc;
          }
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::int64_t n = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
    const std::int64_t ho = gy.dim(2), wo = gy.dim(3);
    Tensor<T> gx({n, in_ch_, h, w});
    const T* wd = weight_.value.data();
    for (std::int64_t in = 0; in < n; ++in)
      for (std::int64_t f = 0; f < out_ch_; ++f)
        for (std::int64_t oy = 0; oy < ho; ++oy)
          for (std::int64_t ox = 0; ox < wo; ++ox) {
            const T g = gy[((in * out_ch_ + f) * ho + oy) * wo + ox];
            bias_.grad[f] += g;
            for (std::int64_t c = 0; c < in_ch_; ++c) {
              const T* xc = input_.data() + ((in * in_ch_ + c) * h) * w;
              T* gxc = gx.data() + ((in * in_ch_ + c) * h) * w;
              const T* wf = wd + ((f * in_ch_ + c) * k_) * k_;
              T* gwf = weight_.grad.data() + ((f * in_ch_ + c) * k_) * k_;
              for (int ky = 0; ky < k_; ++ky) {
                const std::int64_t iy = oy * s_ + ky - p_;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < k_; ++kx) {
                  const std::int64_t ix = ox * s_ + kx - p_;
                  if (ix < 0 || ix >= w) continue;
                  gwf[ky * k_ + kx] += g * xc[iy * w + ix];
                  gxc[iy * w + ix] += g * wf[ky * k_ + kx];
                }
              }
            }
          }
    return gx;
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  Param<T>& weight() { return weight_; }

 private:
  std::int64_t in_ch_, out_ch_;
  int k_, s_, p_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

template <typename T>
class ConvTranspose2d final : public Layer<T> {
 public:
  ConvTranspose2d(std::string prefix, std::int64_t in_ch, std::int64_t out_ch, int kernel,
                  int stride, int pad, int out_pad)
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), s_(stride), p_(pad), op_(out_pad),
        weight_(prefix + "/W", {in_ch, out_ch, kernel, kernel}, true, true),
        bias_(prefix + "/b", {out_ch}) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    if (x.ndim() != 4 || x.dim(1) != in_ch_)
      throw InvalidParameter("conv_transpose2d: bad input " + x.shape_str());
    input_ = x;
    const std::int64_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::int64_t ho = (h - 1) * s_ - 2 * p_ + k_ + op_;
    const std::int64_t wo = (w - 1) * s_ - 2 * p_ + k_ + op_;
    Tensor<T> y({n, out_ch_, ho, wo});
    for (std::int64_t in = 0; in < n; ++in) {
      for (std::int64_t co = 0; co < out_ch_; ++co) {
        T* yc = y.data() + ((in * out_ch_ + co) * ho) * wo;
        const T b = bias_.value[co];
        for (std::int64_t i = 0; i < ho * wo; ++i) yc[i] = b;
      }
      for (std::int64_t ci = 0; ci < in_ch_; ++ci) {
        const T* xc = x.data() + ((in * in_ch_ + ci) * h) * w;
        for (std::int64_t iy = 0; iy < h; ++iy)
          for (std::int64_t ix = 0; ix < w; ++ix) {
            const T v = xc[iy * w + ix];
            for (std::int64_t co = 0; co < out_ch_; ++co) {
              T* yc = y.data() + ((in * out_ch_ + co) * ho) * wo;
              const T* wf = weight_.value.data() + ((ci * out_ch_ + co) * k_) * k_;
              for (int ky = 0; ky < k_; ++ky) {
                const std::int64_t oy = iy * s_ + ky - p_;
                if (oy < 0 || oy >= ho) continue;
                for (int kx = 0; kx < k_; ++kx) {
                  const std::int64_t ox = ix * s_ + kx - p_;
                  if (ox < 0 || ox >= wo) continue;
                  yc[oy * wo + ox] += v * wf[ky * k_ + kx];
                }
              }
            }
          }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::int64_t n = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
    const std::int64_t ho = gy.dim(2), wo = gy.dim(3);
    Tensor<T> gx({n, in_ch_, h, w});
    for (std::int64_t in = 0; in < n; ++in) {
      for (std::int64_t co = 0; co < out_ch_; ++co) {
        const T* gyc = gy.data() + ((in * out_ch_ + co) * ho) * wo;
        for (std::int64_t i = 0; i < ho * wo; ++i) bias_.grad[co] += gyc[i];
      }
      for (std::int64_t ci = 0; ci < in_ch_; ++ci) {
        const T* xc = input_.data() + ((in * in_ch_ + ci) * h) * w;
        T* gxc = gx.data() + ((in * in_ch_ + ci) * h) * w;
        for (std::int64_t iy = 0; iy < h; ++iy)
          for (std::int64_t ix = 0; ix < w; ++ix) {
            T acc = T(0);
            for (std::int64_t co = 0; co < out_ch_; ++co) {
              const T* gyc = gy.data() + ((in * out_ch_ + co) * ho) * wo;
              const T* wf = weight_.value.data() + ((ci * out_ch_ + co) * k_) * k_;
              T* gwf = weight_.grad.data() + ((ci * out_ch_ + co) * k_) * k_;
              for (int ky = 0; ky < k_; ++ky) {
                const std::int64_t oy = iy * s_ + ky - p_;
                if (oy < 0 || oy >= ho) continue;
                for (int kx = 0; kx < k_; ++kx) {
                  const std::int64_t ox = ix * s_ + kx - p_;
                  if (ox < 0 || ox >= wo) continue;
                  acc += gyc[oy * wo + ox] * wf[ky * k_ + kx];
                  gwf[ky * k_ + kx] += gyc[oy * wo + ox] * xc[iy * w + ix];
                }
              }
            }
            gxc[iy * w + ix] = acc;
          }
      }
    }
    return gx;
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

 private:
  std::int64_t in_ch_, out_ch_;
  int k_, s_, p_, op_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

// BatchNorm over (N) or (N,H,W) per channel; torch-default momentum and eps.
template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  BatchNorm(std::string prefix, std::int64_t channels, T momentum = T(0.1),
            T eps = T(1e-5))
      : c_(channels), momentum_(momentum), eps_(eps),
        gamma_(prefix + "/gamma", {channels}),
        beta_(prefix + "/beta", {channels}),
        running_mean_(prefix + "/running_mean", {channels}, false),
        running_var_(prefix + "/running_var", {channels}, false) {
    gamma_.value.fill(T(1));
    running_var_.value.fill(T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    if (!(x.ndim() == 2 || x.ndim() == 4) || x.dim(1) != c_)
      throw InvalidParameter("batchnorm: bad input " + x.shape_str());
    input_ = x;
    train_ = train;
    const std::int64_t n = x.dim(0);
    const std::int64_t spatial = (x.ndim() == 4) ? x.dim(2) * x.dim(3) : 1;
    const std::int64_t m = n * spatial;
    mean_.assign(c_, T(0));
    invstd_.assign(c_, T(0));
    Tensor<T> y(x.shape());
    xhat_ = Tensor<T>(x.shape());

    for (std::int64_t ch = 0; ch < c_; ++ch) {
      T mean, var;
      if (train) {
        T sum = 0, sq = 0;
        for (std::int64_t in = 0; in < n; ++in) {
          const T* p = x.data() + (in * c_ + ch) * spatial;
          for (std::int64_t ispc = 0; ispc < spatial; ++ispc) {
            sum += p[ispc];
            sq += p[ispc] * p[ispc];
          }
        }
        mean = sum / m;
        var = sq / m - mean * mean;
        if (var < T(0)) var = T(0);
        const T unbiased = (m > 1) ? var * T(m) / T(m - 1) : var;
        running_mean_.value[ch] =
            (T(1) - momentum_) * running_mean_.value[ch] + momentum_ * mean;
        running_var_.value[ch] =
            (T(1) - momentum_) * running_var_.value[ch] + momentum_ * unbiased;
      } else {
        mean = running_mean_.value[ch];
        var = running_var_.value[ch];
      }
      const T invstd = T(1) / std::sqrt(var + eps_);
      mean_[static_cast<std::size_t>(ch)] = mean;
      invstd_[static_cast<std::size_t>(ch)] = invstd;
      const T g = gamma_.value[ch], b = beta_.value[ch];
      for (std::int64_t in = 0; in < n; ++in) {
        const T* p = x.data() + (in * c_ + ch) * spatial;
        T* xh = xhat_.data() + (in * c_ + ch) * spatial;
        T* yp = y.data() + (in * c_ + ch) * spatial;
        for (std::int64_t ispc = 0; ispc < spatial; ++ispc) {
          xh[ispc] = (p[ispc] - mean) * invstd;
          yp[ispc] = g * xh[ispc] + b;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::int64_t n = input_.dim(0);
    const std::int64_t spatial = (input_.ndim() == 4) ? input_.dim(2) * input_.dim(3) : 1;
    const std::int64_t m = n * spatial;
    Tensor<T> gx(input_.shape());
    for (std::int64_t ch = 0; ch < c_; ++ch) {
      T sum_gy = 0, sum_gy_xhat = 0;
      for (std::int64_t in = 0; in < n; ++in) {
        const T* g = gy.data() + (in * c_ + ch) * spatial;
        const T* xh = xhat_.data() + (in * c_ + ch) * spatial;
        for (std::int64_t ispc = 0; ispc < spatial; ++ispc) {
          sum_gy += g[ispc];
          sum_gy_xhat += g[ispc] * xh[ispc];
        }
      }
      gamma_.grad[ch] += sum_gy_xhat;
      beta_.grad[ch] += sum_gy;
      const T gamma = gamma_.value[ch];
      const T invstd = invstd_[static_cast<std::size_t>(ch)];
      for (std::int64_t in = 0; in < n; ++in) {
        const T* g = gy.data() + (in * c_ + ch) * spatial;
        const T* xh = xhat_.data() + (in * c_ + ch) * spatial;
        T* gxp = gx.data() + (in * c_ + ch) * spatial;
        for (std::int64_t ispc = 0; ispc < spatial; ++ispc) {
          if (train_) {
            gxp[ispc] = gamma * invstd / T(m) *
                        (T(m) * g[ispc] - sum_gy - xh[ispc] * sum_gy_xhat);
          } else {
            gxp[ispc] = gamma * invstd * g[ispc];
          }
        }
      }
    }
    return gx;
  }

  std::vector<Param<T>*> params() override {
    return {&gamma_, &beta_, &running_mean_, &running_var_};
  }

 private:
  std::int64_t c_;
  T momentum_, eps_;
  Param<T> gamma_, beta_, running_mean_, running_var_;
  Tensor<T> input_, xhat_;
  std::vector<T> mean_, invstd_;
  bool train_ = true;
};

template <typename T>
class LeakyReLU final : public Layer<T> {
 public:
  explicit LeakyReLU(T slope = T(0.01)) : slope_(slope) {}
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    input_ = x;
    Tensor<T> y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i)
      y[i] = x[i] > T(0) ? x[i] : slope_ * x[i];
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(input_.shape());
    for (std::int64_t i = 0; i < gy.size(); ++i)
      gx[i] = input_[i] > T(0) ? gy[i] : slope_ * gy[i];
    return gx;
  }

 private:
  T slope_;
  Tensor<T> input_;
};

template <typename T>
class Tanh final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    output_ = Tensor<T>(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) output_[i] = std::tanh(x[i]);
    return output_;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(output_.shape());
    for (std::int64_t i = 0; i < gy.size(); ++i)
      gx[i] = gy[i] * (T(1) - output_[i] * output_[i]);
    return gx;
  }

 private:
  Tensor<T> output_;
};

template <typename T>
class Sigmoid final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    output_ = Tensor<T>(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i)
      output_[i] = T(1) / (T(1) + std::exp(-x[i]));
    return output_;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(output_.shape());
    for (std::int64_t i = 0; i < gy.size(); ++i)
      gx[i] = gy[i] * output_[i] * (T(1) - output_[i]);
    return gx;
  }

 private:
  Tensor<T> output_;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    in_shape_ = x.shape();
    return x.reshaped({x.dim(0), x.size() / x.dim(0)});
  }
  Tensor<T> backward(const Tensor<T>& gy) override { return gy.reshaped(in_shape_); }

 private:
  std::vector<std::int64_t> in_shape_;
};

template <typename T>
class Sequential final : public Layer<T> {
 public:
  Sequential() = default;
  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    Tensor<T> h = x;
    for (auto& l : layers_) h = l->forward(h, train);
    return h;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> g = gy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }
  std::vector<Param<T>*> params() override {
    std::vector<Param<T>*> out;
    for (auto& l : layers_) {
      auto p = l->params();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }
  std::size_t num_layers() const { return layers_.size(); }
  Layer<T>* layer(std::size_t i) { return layers_[i].get(); }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace ballbot::nn
