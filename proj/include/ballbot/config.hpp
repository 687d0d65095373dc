#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ballbot/dynamics.hpp"
#include "ballbot/sensors.hpp"
#include "ballbot/terrain.hpp"

namespace ballbot {

struct RewardParams {
  double alpha_velocity = 0.01;   // alpha_1
  double alpha_survival = 0.02;   // alpha_2
  double alpha_action = 0.0001;   // alpha_3
  Vec2 goal_direction{0.0, 1.0};  // unit vector

  void validate() const;
};

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_range = 0.015;
  double entropy_coef = 0.001;
  double value_coef = 2.0;
  int batch_size = 256;
  int epochs_per_update = 5;
  int steps_per_rollout = 2048;  // per environment
  double target_kl = 0.3;
  int num_envs = 10;
  double weight_decay = 0.01;
  long long total_steps = 8'000'000;
  double learning_rate = 1e-4;
  std::vector<long long> lr_milestones{3'000'000, 6'000'000};
  double lr_divisor = 3.0;
  bool normalize_advantages = false;
  int horizon = 4000;            // training episode cap
  double init_tilt_deg = 2.0;    // reset perturbation bound
  int eval_every_updates = 10;
  bool finetune_encoder = false;
  std::string encoder_checkpoint;  // produced by pretrain-encoder

  void validate() const;
  long long rollout_size() const {
    return static_cast<long long>(steps_per_rollout) * num_envs;
  }
  double lr_at_step(long long env_steps) const;
};

struct EvalConfig {
  int num_envs = 10;
  int horizon = 4000;
  bool stochastic = false;

  void validate() const;
};

struct PidGains {
  double inner_kp = 60.0;
  double inner_ki = 20.0;
  double inner_kd = 8.0;
  double outer_kp = 0.04;
  double outer_ki = 0.01;
  double outer_kd = 0.0;
  double integrator_clamp = 0.5;
  double max_lean_deg = 4.0;
  double target_speed = 0.5;  // m/s along the goal direction

  void validate() const;
};

struct RunConfig {
  TerrainParams terrain;
  PhysicalParams physics;
  RigParams rig;
  RewardParams reward;
  PpoConfig ppo;
  EvalConfig eval;
  PidGains pid;

  void validate() const;
  int observation_dim() const { return rig.enabled ? kObservationDim : kProprioDim; }

  // Canonical JSON dump (sorted keys, fixed formatting) and its FNV-1a hash;
  // the hash is stamped into checkpoints and CSV headers.
  std::string to_json() const;
  std::uint64_t hash() const;

  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace ballbot
