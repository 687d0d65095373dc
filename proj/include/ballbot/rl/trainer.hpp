#pragma once

#include <iosfwd>
#include <string>

#include "ballbot/config.hpp"

namespace ballbot::rl {

struct TrainSummary {
  long long env_steps = 0;
  long long updates = 0;
  double best_eval_mean_reward = 0.0;
  double best_eval_mean_length = 0.0;
  std::string metrics_path;
  std::string latest_checkpoint;
  std::string best_checkpoint;
  std::string final_checkpoint;
};

// Full training run: alternate rollout collection and clipped-surrogate
// updates until total_steps, evaluating and checkpointing on a fixed cadence.
// Deterministic given (config, seed). Set resume to continue from
// checkpoint_latest.bbck in out_dir.
TrainSummary train(const RunConfig& config, const std::string& out_dir,
                   std::uint64_t seed, bool resume = false, std::ostream* log = nullptr);

}  // namespace ballbot::rl
