#include "ballbot/rl/pretrain.hpp"

#include <numeric>
#include <ostream>

#include "ballbot/errors.hpp"
#include "ballbot/nn/adam.hpp"
#include "ballbot/nn/models.hpp"
#include "ballbot/nn/param_store.hpp"
#include "ballbot/pid.hpp"
#include "ballbot/random.hpp"

namespace ballbot::rl {

namespace {

constexpr int kMinDataset = 512;

// Depth frames gathered by driving the PID baseline over fresh terrains.
std::vector<DepthFrame> collect_frames(const RunConfig& config, std::uint64_t seed,
                                       int num_frames, std::ostream* log) {
  std::vector<DepthFrame> frames;
  frames.reserve(static_cast<std::size_t>(num_frames));
  const DepthCameraRig rig(config.rig);
  std::mt19937_64 rng(mix_seed(seed, 0xda7aull));
  std::uint64_t episode = 0;

  while (static_cast<int>(frames.size()) < num_frames) {
    TerrainParams tp = config.terrain;
    tp.seed = train_terrain_seed(seed, /*env_index=*/99, episode++);
    const TerrainField terrain(tp);
    CascadedPid pid(config.pid, config.physics, config.reward.goal_direction);
    const double tilt0 = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    const double azim = 2.0 * kPi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    BallbotState state = rest_state(terrain, config.physics, 0.0, 0.0, tilt0, azim);
    CameraClock clock;
    Observation dummy;

    for (int t = 0; t < config.ppo.horizon; ++t) {
      const CameraClock::Sample s = clock.tick(state.time, config.rig);
      if (s.use_new_frame) {
        frames.push_back(render_depth(state, terrain, rig, 0));
        frames.push_back(render_depth(state, terrain, rig, 1));
        if (static_cast<int>(frames.size()) >= num_frames) break;
      }
      try {
        state = step(state, pid.act(state, dummy), terrain, config.physics);
      } catch (const SimulationDiverged&) {
        break;
      }
      if (is_failure(state)) break;
    }
    if (log)
      *log << "pretrain: episode " << episode << " collected " << frames.size() << "/"
           << num_frames << " frames\n";
  }
  return frames;
}

nn::Tensor<float> batch_tensor(const std::vector<DepthFrame>& frames,
                               const std::vector<int>& indices, std::size_t start,
                               std::size_t count, int res) {
  nn::Tensor<float> batch({static_cast<std::int64_t>(count), 1, res, res});
  for (std::size_t b = 0; b < count; ++b) {
    const DepthFrame& f = frames[static_cast<std::size_t>(indices[start + b])];
    std::copy(f.depths.begin(), f.depths.end(),
              batch.data() + static_cast<std::int64_t>(b) * res * res);
  }
  return batch;
}

double mse(const nn::Tensor<float>& a, const nn::Tensor<float>& b) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

}  // namespace

PretrainReport pretrain_encoder(const RunConfig& config, const std::string& out_path,
                                std::uint64_t seed, int num_frames, int epochs,
                                std::ostream* log) {
  if (!config.rig.enabled)
    throw InvalidParameter("pretrain-encoder: rig must be enabled");
  if (num_frames < kMinDataset)
    throw InvalidParameter("pretrain-encoder: dataset too small (need >= " +
                           std::to_string(kMinDataset) + " frames)");
  const int res = config.rig.resolution;
  if (nn::conv_out_dim(nn::conv_out_dim(res)) * 4 != res)
    throw InvalidParameter(
        "pretrain-encoder: camera resolution must be a multiple of 4");

  const std::vector<DepthFrame> frames = collect_frames(config, seed, num_frames, log);

  // Deterministic shuffle, last tenth held out.
  std::vector<int> order(frames.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(mix_seed(seed, 0x5417ull));
  deterministic_shuffle(order, shuffle_rng);
  const std::size_t holdout = frames.size() / 10;
  const std::size_t train_count = frames.size() - holdout;

  nn::Encoder<float> encoder(res, mix_seed(seed, 0xe));
  nn::Decoder<float> decoder(res, mix_seed(seed, 0xd));
  std::vector<nn::Param<float>*> params = encoder.params();
  for (auto* p : decoder.params()) params.push_back(p);
  nn::Adam<float> optimizer(params, 1e-3);

  constexpr std::size_t kBatch = 64;
  PretrainReport report;
  report.dataset_size = static_cast<int>(frames.size());
  report.holdout_size = static_cast<int>(holdout);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Reshuffle the training segment each epoch.
    std::vector<int> train_order(order.begin(), order.begin() + train_count);
    deterministic_shuffle(train_order, shuffle_rng);

    double epoch_loss = 0.0;
    long long batches = 0;
    for (std::size_t start = 0; start + kBatch <= train_count; start += kBatch) {
      const nn::Tensor<float> images = batch_tensor(frames, train_order, start, kBatch, res);
      const nn::Tensor<float> z = encoder.forward(images, true);
      const nn::Tensor<float> recon = decoder.forward(z, true);

      epoch_loss += mse(recon, images);
      ++batches;

      nn::Tensor<float> grad(recon.shape());
      const double scale = 2.0 / static_cast<double>(recon.size());
      for (std::int64_t i = 0; i < recon.size(); ++i)
        grad[i] = static_cast<float>(scale * (static_cast<double>(recon[i]) -
                                              static_cast<double>(images[i])));
      optimizer.zero_grad();
      encoder.backward(decoder.backward(grad));
      optimizer.step();
    }
    report.train_losses.push_back(epoch_loss / std::max(1ll, batches));

    double holdout_loss = 0.0;
    long long hbatches = 0;
    for (std::size_t start = train_count; start + kBatch <= frames.size();
         start += kBatch) {
      const nn::Tensor<float> images = batch_tensor(frames, order, start, kBatch, res);
      const nn::Tensor<float> z = encoder.forward(images, false);
      const nn::Tensor<float> recon = decoder.forward(z, false);
      holdout_loss += mse(recon, images);
      ++hbatches;
    }
    report.holdout_losses.push_back(hbatches ? holdout_loss / hbatches
                                             : report.train_losses.back());
    if (log)
      *log << "pretrain: epoch " << epoch + 1 << "/" << epochs
           << " train_mse=" << report.train_losses.back()
           << " holdout_mse=" << report.holdout_losses.back() << "\n";
  }

  nn::ParameterStore store;
  store.step = static_cast<std::uint64_t>(frames.size());
  store.config_hash = config.hash();
  for (auto* p : encoder.params()) store.put_tensor(p->name, p->value);
  store.save(out_path);
  report.encoder_path = out_path;
  return report;
}

}  // namespace ballbot::rl
