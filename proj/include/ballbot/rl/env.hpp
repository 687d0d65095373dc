#pragma once

#include <memory>
#include <optional>
#include <random>

#include "ballbot/config.hpp"
#include "ballbot/nn/models.hpp"
#include "ballbot/nn/param_store.hpp"
#include "ballbot/random.hpp"
#include "ballbot/rl/reward.hpp"
#include "ballbot/sensors.hpp"

namespace ballbot::rl {

// Frozen encoder inference for observation assembly (eval-mode BatchNorm).
class EncoderRuntime {
 public:
  explicit EncoderRuntime(int resolution, std::uint64_t init_seed = 0)
      : encoder_(resolution, init_seed) {}

  static std::unique_ptr<EncoderRuntime> from_checkpoint(const std::string& path,
                                                         int resolution);

  void encode(const DepthFrame& frame, std::vector<double>& z);
  nn::Encoder<float>& net() { return encoder_; }

 private:
  nn::Encoder<float> encoder_;
};

// One simulated environment: 500 Hz physics, camera clocking, observation
// assembly and the shaped reward. Fresh terrain per episode.
class BallbotEnv {
 public:
  struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool terminal = false;   // failure (tilt > 20 deg) or diverged
    bool truncated = false;  // horizon cut
  };

  BallbotEnv(const RunConfig& config, EncoderRuntime* encoder, std::uint64_t run_seed,
             int env_index, bool eval_mode);

  Observation reset();
  // Reset onto a specific terrain seed (harness protocols pin seeds).
  Observation reset_with_seed(std::uint64_t terrain_seed);
  StepResult step(const Action& action);

  const BallbotState& state() const { return state_; }
  const HeightField& terrain() const { return *terrain_; }
  std::uint64_t terrain_seed() const { return terrain_seed_value_; }
  int episode_step() const { return episode_step_; }
  const Action& last_action() const { return last_action_; }
  const RewardParams& config_reward() const { return config_.reward; }
  int observation_dim() const { return config_.observation_dim(); }
  int horizon() const { return horizon_; }
  void set_horizon(int horizon) { horizon_ = horizon; }
  bool diverged() const { return diverged_; }

 private:
  Observation observe();
  void capture_frames();

  RunConfig config_;
  EncoderRuntime* encoder_;  // null in proprio-only mode
  std::optional<DepthCameraRig> rig_;
  std::uint64_t run_seed_;
  int env_index_;
  bool eval_mode_;
  std::uint64_t episode_counter_ = 0;
  std::uint64_t terrain_seed_value_ = 0;
  std::unique_ptr<TerrainField> terrain_;
  BallbotState state_;
  Action last_action_;
  CameraClock clock_;
  std::vector<double> z1_, z2_;
  double dt_since_frame_ = 0.0;
  int episode_step_ = 0;
  int horizon_ = 4000;
  bool diverged_ = false;
  std::mt19937_64 rng_;
};

}  // namespace ballbot::rl
