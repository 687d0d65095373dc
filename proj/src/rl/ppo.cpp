#include "ballbot/rl/ppo.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ballbot/nn/distributions.hpp"
#include "ballbot/random.hpp"

namespace ballbot::rl {

UpdateStats ppo_update(RolloutBuffer& buffer, nn::PolicyNet<float>& policy,
                       nn::ValueNet<float>& value, nn::Adam<float>& optimizer,
                       const PpoConfig& config, std::mt19937_64& shuffle_rng) {
  const std::int64_t n = buffer.size();
  const int batch = config.batch_size;
  const int obs_dim = buffer.obs_dim();
  if (n % batch != 0)
    throw InvalidParameter("ppo_update: batch size must divide the rollout size");

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  stats.lr = optimizer.lr();
  double sum_pg = 0.0, sum_v = 0.0, sum_ent = 0.0, sum_clip = 0.0;
  long long batches_done = 0;

  nn::Tensor<float> obs_mb({batch, obs_dim});
  std::vector<double> mb_adv(static_cast<std::size_t>(batch));
  std::vector<double> mb_ret(static_cast<std::size_t>(batch));
  std::vector<double> mb_old_logp(static_cast<std::size_t>(batch));
  std::vector<std::array<double, 3>> mb_actions(static_cast<std::size_t>(batch));

  for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    deterministic_shuffle(order, shuffle_rng);
    double epoch_kl = 0.0;
    int epoch_batches = 0;

    for (std::int64_t start = 0; start < n; start += batch) {
      for (int b = 0; b < batch; ++b) {
        const std::int64_t idx = order[static_cast<std::size_t>(start + b)];
        const float* src = buffer.obs_row(idx);
        std::copy(src, src + obs_dim, obs_mb.data() + static_cast<std::int64_t>(b) * obs_dim);
        mb_adv[static_cast<std::size_t>(b)] = buffer.advantages[static_cast<std::size_t>(idx)];
        mb_ret[static_cast<std::size_t>(b)] = buffer.returns[static_cast<std::size_t>(idx)];
        mb_old_logp[static_cast<std::size_t>(b)] =
            buffer.log_probs[static_cast<std::size_t>(idx)];
        mb_actions[static_cast<std::size_t>(b)] =
            buffer.actions[static_cast<std::size_t>(idx)];
      }

      if (config.normalize_advantages) {
        double mean = 0.0, sq = 0.0;
        for (double a : mb_adv) mean += a;
        mean /= batch;
        for (double a : mb_adv) sq += (a - mean) * (a - mean);
        const double sd = std::sqrt(sq / batch) + 1e-8;
        for (double& a : mb_adv) a = (a - mean) / sd;
      }

      const nn::Tensor<float> raw = policy.forward(obs_mb, true);
      const nn::Tensor<float> vpred = value.forward(obs_mb, true);
      const float* log_std = policy.log_std().value.data();

      nn::Tensor<float> g_raw({batch, 3});
      nn::Tensor<float> g_v({batch, 1});
      double g_log_std[3] = {0.0, 0.0, 0.0};
      double pg_loss = 0.0, v_loss = 0.0, kl = 0.0, clipped_count = 0.0;

      for (int b = 0; b < batch; ++b) {
        const float* raw_b = raw.data() + static_cast<std::int64_t>(b) * 3;
        const double new_logp =
            nn::log_prob_squashed(raw_b, log_std, mb_actions[static_cast<std::size_t>(b)]);
        const double log_ratio = new_logp - mb_old_logp[static_cast<std::size_t>(b)];
        const double ratio = std::exp(log_ratio);
        const double adv = mb_adv[static_cast<std::size_t>(b)];

        const double unclipped = -adv * ratio;
        const double ratio_clamped =
            std::clamp(ratio, 1.0 - config.clip_range, 1.0 + config.clip_range);
        const double clipped = -adv * ratio_clamped;
        pg_loss += std::max(unclipped, clipped);
        kl += (ratio - 1.0) - log_ratio;
        if (std::abs(ratio - 1.0) > config.clip_range) clipped_count += 1.0;

        // Gradient flows only through the unclipped branch when it is active.
        if (unclipped >= clipped) {
          const double dl_dlogp = -adv * ratio / batch;
          double d_mean[3], d_ls[3];
          nn::log_prob_grads(raw_b, log_std, mb_actions[static_cast<std::size_t>(b)],
                             d_mean, d_ls);
          for (int j = 0; j < 3; ++j) {
            g_raw[static_cast<std::int64_t>(b) * 3 + j] =
                static_cast<float>(dl_dlogp * d_mean[j]);
            g_log_std[j] += dl_dlogp * d_ls[j];
          }
        } else {
          for (int j = 0; j < 3; ++j) g_raw[static_cast<std::int64_t>(b) * 3 + j] = 0.0f;
        }

        const double verr = static_cast<double>(vpred[b]) - mb_ret[static_cast<std::size_t>(b)];
        v_loss += verr * verr;
        g_v[b] = static_cast<float>(config.value_coef * 2.0 * verr / batch);
      }
      pg_loss /= batch;
      v_loss /= batch;
      kl /= batch;
      const double entropy = nn::entropy_base(log_std);
      const double total_loss =
          pg_loss + config.value_coef * v_loss - config.entropy_coef * entropy;
      if (!std::isfinite(total_loss)) {
        std::ostringstream msg;
        msg << "ppo_update aborted: non-finite loss (policy=" << pg_loss
            << ", value=" << v_loss << ", entropy=" << entropy << ", kl=" << kl
            << ", epoch=" << epoch << ")";
        throw std::runtime_error(msg.str());
      }

      optimizer.zero_grad();
      policy.backward(g_raw);
      value.backward(g_v);
      for (int j = 0; j < 3; ++j)
        policy.log_std().grad[j] +=
            static_cast<float>(g_log_std[j] - config.entropy_coef);
      optimizer.step();

      sum_pg += pg_loss;
      sum_v += v_loss;
      sum_ent += entropy;
      sum_clip += clipped_count / batch;
      epoch_kl += kl;
      ++epoch_batches;
      ++batches_done;
    }

    stats.approx_kl = epoch_kl / epoch_batches;
    stats.epochs_run = epoch + 1;
    if (stats.approx_kl > config.target_kl) break;
  }

  stats.policy_loss = sum_pg / static_cast<double>(batches_done);
  stats.value_loss = sum_v / static_cast<double>(batches_done);
  stats.entropy = sum_ent / static_cast<double>(batches_done);
  stats.clip_fraction = sum_clip / static_cast<double>(batches_done);
  return stats;
}

}  // namespace ballbot::rl
