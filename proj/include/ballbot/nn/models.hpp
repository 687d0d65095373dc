#pragma once

#include <random>

#include "ballbot/nn/init.hpp"
#include "ballbot/nn/layers.hpp"

namespace ballbot::nn {

inline std::int64_t conv_out_dim(std::int64_t in, int kernel = 3, int stride = 2,
                                 int pad = 1) {
  return (in + 2 * pad - kernel) / stride + 1;
}

template <typename T>
class Reshape final : public Layer<T> {
 public:
  explicit Reshape(std::vector<std::int64_t> trailing) : trailing_(std::move(trailing)) {}
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    in_shape_ = x.shape();
    std::vector<std::int64_t> shape{x.dim(0)};
    shape.insert(shape.end(), trailing_.begin(), trailing_.end());
    return x.reshaped(std::move(shape));
  }
  Tensor<T> backward(const Tensor<T>& gy) override { return gy.reshaped(in_shape_); }

 private:
  std::vector<std::int64_t> trailing_;
  std::vector<std::int64_t> in_shape_;
};

// Depth-image encoder: two strided conv+BN+LeakyReLU blocks, flatten, linear
// to 20 features, BN, Tanh. Output components lie in (-1, 1).
template <typename T>
class Encoder {
 public:
  explicit Encoder(int resolution, std::uint64_t init_seed = 0)
      : resolution_(resolution) {
    const std::int64_t h1 = conv_out_dim(resolution);
    const std::int64_t h2 = conv_out_dim(h1);
    flat_dim_ = 32 * h2 * h2;

    auto conv1 = std::make_unique<Conv2d<T>>("encoder/conv1", 1, 32, 3, 2, 1);
    auto conv2 = std::make_unique<Conv2d<T>>("encoder/conv2", 32, 32, 3, 2, 1);
    auto linear = std::make_unique<Linear<T>>("encoder/linear", flat_dim_, 20);
    std::mt19937_64 rng(init_seed ^ 0x656e636f64657200ull);
    orthogonal_init(conv1->weight().value, std::sqrt(2.0), rng);
    orthogonal_init(conv2->weight().value, std::sqrt(2.0), rng);
    orthogonal_init(linear->weight().value, std::sqrt(2.0), rng);

    net_.add(std::move(conv1));
    net_.add(std::make_unique<BatchNorm<T>>("encoder/bn1", 32));
    net_.add(std::make_unique<LeakyReLU<T>>());
    net_.add(std::move(conv2));
    net_.add(std::make_unique<BatchNorm<T>>("encoder/bn2", 32));
    net_.add(std::make_unique<LeakyReLU<T>>(T(0.01)));
    net_.add(std::make_unique<Flatten<T>>());
    net_.add(std::move(linear));
    net_.add(std::make_unique<BatchNorm<T>>("encoder/bn3", 20));
    net_.add(std::make_unique<Tanh<T>>());
  }

  // images: [N,1,res,res] -> [N,20]
  Tensor<T> forward(const Tensor<T>& images, bool train) {
    if (images.ndim() != 4 || images.dim(2) != resolution_ || images.dim(3) != resolution_)
      throw InvalidParameter("encoder: expected [N,1," + std::to_string(resolution_) +
                             "," + std::to_string(resolution_) + "], got " +
                             images.shape_str());
    return net_.forward(images, train);
  }
  Tensor<T> backward(const Tensor<T>& gz) { return net_.backward(gz); }
  std::vector<Param<T>*> params() { return net_.params(); }

  int resolution() const { return resolution_; }
  std::int64_t flat_dim() const { return flat_dim_; }

 private:
  int resolution_;
  std::int64_t flat_dim_ = 0;
  Sequential<T> net_;
};

// Mirror decoder used only for autoencoder pretraining of the encoder.
template <typename T>
class Decoder {
 public:
  explicit Decoder(int resolution, std::uint64_t init_seed = 0) {
    const std::int64_t h1 = conv_out_dim(resolution);
    const std::int64_t h2 = conv_out_dim(h1);
    auto linear = std::make_unique<Linear<T>>("decoder/linear", 20, 32 * h2 * h2);
    auto deconv1 =
        std::make_unique<ConvTranspose2d<T>>("decoder/deconv1", 32, 32, 3, 2, 1,
                                             static_cast<int>(h1 - (2 * h2 - 1)));
    auto deconv2 =
        std::make_unique<ConvTranspose2d<T>>("decoder/deconv2", 32, 1, 3, 2, 1,
                                             static_cast<int>(resolution - (2 * h1 - 1)));
    std::mt19937_64 rng(init_seed ^ 0x6465636f64657200ull);
    orthogonal_init(linear->weight().value, std::sqrt(2.0), rng);
    for (auto* p : deconv1->params())
      if (p->name.ends_with("/W")) orthogonal_init(p->value, std::sqrt(2.0), rng);
    for (auto* p : deconv2->params())
      if (p->name.ends_with("/W")) orthogonal_init(p->value, 1.0, rng);

    net_.add(std::move(linear));
    net_.add(std::make_unique<LeakyReLU<T>>());
    net_.add(std::make_unique<Reshape<T>>(std::vector<std::int64_t>{32, h2, h2}));
    net_.add(std::move(deconv1));
    net_.add(std::make_unique<LeakyReLU<T>>());
    net_.add(std::move(deconv2));
    net_.add(std::make_unique<Sigmoid<T>>());
  }

  Tensor<T> forward(const Tensor<T>& z, bool train) { return net_.forward(z, train); }
  Tensor<T> backward(const Tensor<T>& gy) { return net_.backward(gy); }
  std::vector<Param<T>*> params() { return net_.params(); }

 private:
  Sequential<T> net_;
};

// Five-linear-layer MLP trunk shared by the policy and value heads.
template <typename T>
Sequential<T> make_mlp(const std::string& prefix, std::int64_t in_dim,
                       std::int64_t out_dim, double out_gain, std::mt19937_64& rng,
                       std::int64_t hidden = 128) {
  Sequential<T> net;
  const std::int64_t dims[6] = {in_dim, hidden, hidden, hidden, hidden, out_dim};
  for (int l = 0; l < 5; ++l) {
    auto linear = std::make_unique<Linear<T>>(prefix + "/l" + std::to_string(l),
                                              dims[l], dims[l + 1]);
    orthogonal_init(linear->weight().value, l == 4 ? out_gain : std::sqrt(2.0), rng);
    net.add(std::move(linear));
    if (l < 4) net.add(std::make_unique<LeakyReLU<T>>());
  }
  return net;
}

// Policy head: outputs the pre-sigmoid action mean; the squashed Gaussian
// distribution lives in distributions.hpp. log_std is state independent.
template <typename T>
class PolicyNet {
 public:
  PolicyNet(int obs_dim, std::uint64_t init_seed = 0)
      : obs_dim_(obs_dim), log_std_("policy/log_std", {3}) {
    std::mt19937_64 rng(init_seed ^ 0x706f6c6963790000ull);
    net_ = make_mlp<T>("policy", obs_dim, 3, 0.01, rng);
    log_std_.value.fill(static_cast<T>(std::log(0.3)));
  }

  Tensor<T> forward(const Tensor<T>& obs, bool train = true) {
    check_obs(obs);
    return net_.forward(obs, train);
  }
  Tensor<T> backward(const Tensor<T>& g_raw) { return net_.backward(g_raw); }

  std::vector<Param<T>*> params() {
    auto p = net_.params();
    p.push_back(&log_std_);
    return p;
  }
  Param<T>& log_std() { return log_std_; }
  int obs_dim() const { return obs_dim_; }

 private:
  void check_obs(const Tensor<T>& obs) const {
    if (obs.ndim() != 2 || obs.dim(1) != obs_dim_)
      throw InvalidParameter("policy: expected [N," + std::to_string(obs_dim_) +
                             "], got " + obs.shape_str());
  }
  int obs_dim_;
  Sequential<T> net_;
  Param<T> log_std_;
};

template <typename T>
class ValueNet {
 public:
  ValueNet(int obs_dim, std::uint64_t init_seed = 0) : obs_dim_(obs_dim) {
    std::mt19937_64 rng(init_seed ^ 0x76616c7565000000ull);
    net_ = make_mlp<T>("value", obs_dim, 1, 1.0, rng);
  }

  // [N,obs_dim] -> [N,1]
  Tensor<T> forward(const Tensor<T>& obs, bool train = true) {
    if (obs.ndim() != 2 || obs.dim(1) != obs_dim_)
      throw InvalidParameter("value: expected [N," + std::to_string(obs_dim_) +
                             "], got " + obs.shape_str());
    return net_.forward(obs, train);
  }
  Tensor<T> backward(const Tensor<T>& gv) { return net_.backward(gv); }
  std::vector<Param<T>*> params() { return net_.params(); }
  int obs_dim() const { return obs_dim_; }

 private:
  int obs_dim_;
  Sequential<T> net_;
};

}  // namespace ballbot::nn
