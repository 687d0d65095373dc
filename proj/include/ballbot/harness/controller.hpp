#pragma once

#include <random>

#include "ballbot/dynamics.hpp"
#include "ballbot/nn/distributions.hpp"
#include "ballbot/nn/models.hpp"
#include "ballbot/sensors.hpp"

namespace ballbot::harness {

// Anything that can drive an episode: the learned policy, the PID baseline,
// or synthetic test controllers.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset() {}
  virtual Action act(const BallbotState& state, const Observation& obs) = 0;
};

// Learned policy; deterministic (sigmoid of the raw mean) by default,
// stochastic sampling behind a flag.
class PolicyController final : public Controller {
 public:
  PolicyController(nn::PolicyNet<float>& policy, bool stochastic = false,
                   std::uint64_t sample_seed = 0)
      : policy_(policy), stochastic_(stochastic), rng_(sample_seed) {}

  Action act(const BallbotState&, const Observation& obs) override {
    nn::Tensor<float> x({1, obs.dim()});
    for (int i = 0; i < obs.dim(); ++i) x[i] = static_cast<float>(obs.values[i]);
    const nn::Tensor<float> raw = policy_.forward(x, false);
    if (stochastic_) {
      const nn::SquashedSample s =
          nn::sample_squashed(raw.data(), policy_.log_std().value.data(), rng_);
      return Action::clamped(s.action[0], s.action[1], s.action[2]);
    }
    return Action::clamped(nn::sigmoid(raw[0]), nn::sigmoid(raw[1]), nn::sigmoid(raw[2]));
  }

 private:
  nn::PolicyNet<float>& policy_;
  bool stochastic_;
  std::mt19937_64 rng_;
};

}  // namespace ballbot::harness
