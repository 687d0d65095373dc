#include "ballbot/rl/env.hpp"

#include "ballbot/errors.hpp"

namespace ballbot::rl {

std::unique_ptr<EncoderRuntime> EncoderRuntime::from_checkpoint(const std::string& path,
                                                                int resolution) {
  auto runtime = std::make_unique<EncoderRuntime>(resolution);
  const nn::ParameterStore store = nn::ParameterStore::load(path);
  for (auto* p : runtime->encoder_.params()) store.load_tensor(p->name, p->value);
  return runtime;
}

void EncoderRuntime::encode(const DepthFrame& frame, std::vector<double>& z) {
  const int res = frame.resolution;
  nn::Tensor<float> img({1, 1, res, res});
  for (std::size_t i = 0; i < frame.depths.size(); ++i)
    img[static_cast<std::int64_t>(i)] = frame.depths[i];
  const nn::Tensor<float> out = encoder_.forward(img, /*train=*/false);
  z.resize(kEmbeddingDim);
  for (int i = 0; i < kEmbeddingDim; ++i) z[static_cast<std::size_t>(i)] = out[i];
}

BallbotEnv::BallbotEnv(const RunConfig& config, EncoderRuntime* encoder,
                       std::uint64_t run_seed, int env_index, bool eval_mode)
    : config_(config), encoder_(encoder), run_seed_(run_seed), env_index_(env_index),
      eval_mode_(eval_mode), horizon_(eval_mode ? config.eval.horizon : config.ppo.horizon),
      rng_(mix_seed(mix_seed(run_seed, 0xe0ull + static_cast<std::uint64_t>(env_index)),
                    eval_mode ? 1 : 0)) {
  if (config_.rig.enabled) {
    if (encoder_ == nullptr)
      throw InvalidParameter("env: depth mode requires an encoder runtime");
    rig_.emplace(config_.rig);
  }
  z1_.assign(kEmbeddingDim, 0.0);
  z2_.assign(kEmbeddingDim, 0.0);
}

Observation BallbotEnv::reset() {
  const std::uint64_t seed =
      eval_mode_ ? eval_terrain_seed(run_seed_, env_index_, episode_counter_)
                 : train_terrain_seed(run_seed_, env_index_, episode_counter_);
  ++episode_counter_;
  return reset_with_seed(seed);
}

Observation BallbotEnv::reset_with_seed(std::uint64_t terrain_seed) {
  TerrainParams tp = config_.terrain;
  tp.seed = terrain_seed;
  terrain_seed_value_ = terrain_seed;
  terrain_ = std::make_unique<TerrainField>(tp);

  // Upright start with a uniform tilt perturbation and zero velocities.
  const double tilt = config_.ppo.init_tilt_deg *
                      (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
  const double azimuth = 2.0 * kPi * (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
  state_ = rest_state(*terrain_, config_.physics, 0.0, 0.0, tilt, azimuth);

  last_action_ = Action{};
  episode_step_ = 0;
  diverged_ = false;
  clock_.reset();
  std::fill(z1_.begin(), z1_.end(), 0.0);
  std::fill(z2_.begin(), z2_.end(), 0.0);
  dt_since_frame_ = 0.0;
  if (rig_) capture_frames();
  return observe();
}

void BallbotEnv::capture_frames() {
  const CameraClock::Sample sample = clock_.tick(state_.time, config_.rig);
  if (sample.use_new_frame) {
    encoder_->encode(render_depth(state_, *terrain_, *rig_, 0), z1_);
    encoder_->encode(render_depth(state_, *terrain_, *rig_, 1), z2_);
  }
  dt_since_frame_ = sample.dt_since_frame;
}

Observation BallbotEnv::observe() {
  return assemble_observation(state_, last_action_, z1_, z2_, dt_since_frame_,
                              !config_.rig.enabled);
}

BallbotEnv::StepResult BallbotEnv::step(const Action& action) {
  StepResult result;
  try {
    state_ = ballbot::step(state_, action, *terrain_, config_.physics);
  } catch (const SimulationDiverged&) {
    // Recorded as a failure; the caller resets the environment.
    diverged_ = true;
    result.reward = reward(state_, action, config_.reward);
    result.terminal = true;
    result.observation = observe();
    return result;
  }
  last_action_ = action;
  ++episode_step_;
  if (rig_) capture_frames();

  result.reward = reward(state_, action, config_.reward);
  result.terminal = is_failure(state_);
  result.truncated = !result.terminal && episode_step_ >= horizon_;
  result.observation = observe();
  return result;
}

}  // namespace ballbot::rl
