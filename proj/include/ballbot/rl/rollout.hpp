#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ballbot/nn/models.hpp"
#include "ballbot/rl/env.hpp"
#include "ballbot/rl/gae.hpp"

namespace ballbot::rl {

struct EpisodeStat {
  double reward_sum = 0.0;
  int length = 0;
  bool diverged = false;
};

// Per-env transition storage, env-major: index(env, t) = env*steps + t.
class RolloutBuffer {
 public:
  RolloutBuffer(int num_envs, int steps, int obs_dim);

  std::int64_t index(int env, int t) const {
    return static_cast<std::int64_t>(env) * steps_ + t;
  }
  std::int64_t size() const { return static_cast<std::int64_t>(num_envs_) * steps_; }
  int num_envs() const { return num_envs_; }
  int steps() const { return steps_; }
  int obs_dim() const { return obs_dim_; }

  float* obs_row(std::int64_t i) { return observations.data() + i * obs_dim_; }
  const float* obs_row(std::int64_t i) const { return observations.data() + i * obs_dim_; }

  // GAE per environment; no advantage crosses an episode boundary.
  void compute_advantages(double gamma, double lambda);

  std::vector<float> observations;
  std::vector<std::array<double, 3>> actions;
  std::vector<double> log_probs, rewards, values, bootstrap_values;
  std::vector<std::uint8_t> terminals, truncateds;
  std::vector<double> advantages, returns;

  // Episodes completed while filling this buffer (for metrics).
  std::vector<EpisodeStat> finished_episodes;
  long long divergence_count = 0;

 private:
  int num_envs_, steps_, obs_dim_;
};

// Fill one rollout: 'steps' transitions from each env against a fixed policy
// snapshot. current_obs carries episode state across successive rollouts.
RolloutBuffer collect_rollouts(std::vector<BallbotEnv>& envs,
                               nn::PolicyNet<float>& policy, nn::ValueNet<float>& value,
                               const PpoConfig& config,
                               std::vector<Observation>& current_obs,
                               std::mt19937_64& sample_rng);

}  // namespace ballbot::rl
