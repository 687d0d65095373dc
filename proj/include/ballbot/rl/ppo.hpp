#pragma once

#include <random>

#include "ballbot/config.hpp"
#include "ballbot/nn/adam.hpp"
#include "ballbot/nn/models.hpp"
#include "ballbot/rl/rollout.hpp"

namespace ballbot::rl {

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;     // mean over the last completed epoch
  double clip_fraction = 0.0;
  int epochs_run = 0;
  double lr = 0.0;
};

// Clipped-surrogate update: epochs_per_update passes of batch_size
// minibatches, epoch loop early-stopped when mean KL exceeds target_kl.
// Advantages are used as stored (normalization off by default).
// Throws on non-finite losses, with the stats snapshot in the message.
UpdateStats ppo_update(RolloutBuffer& buffer, nn::PolicyNet<float>& policy,
                       nn::ValueNet<float>& value, nn::Adam<float>& optimizer,
                       const PpoConfig& config, std::mt19937_64& shuffle_rng);

}  // namespace ballbot::rl
