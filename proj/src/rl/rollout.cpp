#include "ballbot/rl/rollout.hpp"

#include "ballbot/errors.hpp"
#include "ballbot/nn/distributions.hpp"

namespace ballbot::rl {

RolloutBuffer::RolloutBuffer(int num_envs, int steps, int obs_dim)
    : num_envs_(num_envs), steps_(steps), obs_dim_(obs_dim) {
  const std::size_t n = static_cast<std::size_t>(num_envs) * steps;
  observations.assign(n * obs_dim, 0.0f);
  actions.assign(n, {0.5, 0.5, 0.5});
  log_probs.assign(n, 0.0);
  rewards.assign(n, 0.0);
  values.assign(n, 0.0);
  bootstrap_values.assign(n, 0.0);
  terminals.assign(n, 0);
  truncateds.assign(n, 0);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
}

void RolloutBuffer::compute_advantages(double gamma, double lambda) {
  for (int e = 0; e < num_envs_; ++e) {
    const std::size_t off = static_cast<std::size_t>(e) * steps_;
    const GaeResult res =
        gae({rewards.data() + off, static_cast<std::size_t>(steps_)},
            {values.data() + off, static_cast<std::size_t>(steps_)},
            {terminals.data() + off, static_cast<std::size_t>(steps_)},
            {truncateds.data() + off, static_cast<std::size_t>(steps_)},
            {bootstrap_values.data() + off, static_cast<std::size_t>(steps_)}, gamma,
            lambda);
    std::copy(res.advantages.begin(), res.advantages.end(), advantages.begin() + off);
    std::copy(res.returns.begin(), res.returns.end(), returns.begin() + off);
  }
}

namespace {

void fill_obs_tensor(nn::Tensor<float>& t, int row, const Observation& obs) {
  float* dst = t.data() + static_cast<std::int64_t>(row) * obs.dim();
  for (int i = 0; i < obs.dim(); ++i) dst[i] = static_cast<float>(obs.values[i]);
}

double value_of(nn::ValueNet<float>& value, const Observation& obs) {
  nn::Tensor<float> t({1, obs.dim()});
  fill_obs_tensor(t, 0, obs);
  return static_cast<double>(value.forward(t, false)[0]);
}

}  // namespace

RolloutBuffer collect_rollouts(std::vector<BallbotEnv>& envs,
                               nn::PolicyNet<float>& policy, nn::ValueNet<float>& value,
                               const PpoConfig& config,
                               std::vector<Observation>& current_obs,
                               std::mt19937_64& sample_rng) {
  const int n_envs = static_cast<int>(envs.size());
  if (n_envs == 0 || current_obs.size() != envs.size())
    throw InvalidParameter("collect_rollouts: env/observation bookkeeping mismatch");
  const int obs_dim = envs.front().observation_dim();
  const int steps = config.steps_per_rollout;
  RolloutBuffer buffer(n_envs, steps, obs_dim);

  std::vector<EpisodeStat> running(static_cast<std::size_t>(n_envs));
  for (auto& env : envs) env.set_horizon(config.horizon);

  nn::Tensor<float> obs_batch({n_envs, obs_dim});
  const float* log_std = policy.log_std().value.data();

  for (int t = 0; t < steps; ++t) {
    for (int e = 0; e < n_envs; ++e) fill_obs_tensor(obs_batch, e, current_obs[e]);
    const nn::Tensor<float> raw = policy.forward(obs_batch, false);
    const nn::Tensor<float> vals = value.forward(obs_batch, false);

    for (int e = 0; e < n_envs; ++e) {
      const std::int64_t idx = buffer.index(e, t);
      for (int i = 0; i < obs_dim; ++i)
        buffer.obs_row(idx)[i] = static_cast<float>(current_obs[e].values[i]);

      const nn::SquashedSample sample =
          nn::sample_squashed(raw.data() + static_cast<std::int64_t>(e) * 3, log_std,
                              sample_rng);
      Action action = Action::clamped(sample.action[0], sample.action[1], sample.action[2]);

      buffer.actions[static_cast<std::size_t>(idx)] = sample.action;
      buffer.log_probs[static_cast<std::size_t>(idx)] = sample.log_prob;
      buffer.values[static_cast<std::size_t>(idx)] =
          static_cast<double>(vals[static_cast<std::int64_t>(e)]);

      BallbotEnv::StepResult result = envs[e].step(action);
      buffer.rewards[static_cast<std::size_t>(idx)] = result.reward;
      running[static_cast<std::size_t>(e)].reward_sum += result.reward;
      running[static_cast<std::size_t>(e)].length += 1;

      if (result.terminal) {
        buffer.terminals[static_cast<std::size_t>(idx)] = 1;
        if (envs[e].diverged()) {
          running[static_cast<std::size_t>(e)].diverged = true;
          ++buffer.divergence_count;
        }
        buffer.finished_episodes.push_back(running[static_cast<std::size_t>(e)]);
        running[static_cast<std::size_t>(e)] = EpisodeStat{};
        current_obs[e] = envs[e].reset();
      } else if (result.truncated) {
        buffer.truncateds[static_cast<std::size_t>(idx)] = 1;
        buffer.bootstrap_values[static_cast<std::size_t>(idx)] =
            value_of(value, result.observation);
        buffer.finished_episodes.push_back(running[static_cast<std::size_t>(e)]);
        running[static_cast<std::size_t>(e)] = EpisodeStat{};
        current_obs[e] = envs[e].reset();
      } else {
        current_obs[e] = std::move(result.observation);
      }
    }
  }

  // Rollout edge: bootstrap unfinished episodes without ending them.
  for (int e = 0; e < n_envs; ++e) {
    const std::int64_t idx = buffer.index(e, steps - 1);
    if (!buffer.terminals[static_cast<std::size_t>(idx)] &&
        !buffer.truncateds[static_cast<std::size_t>(idx)]) {
      buffer.truncateds[static_cast<std::size_t>(idx)] = 1;
      buffer.bootstrap_values[static_cast<std::size_t>(idx)] =
          value_of(value, current_obs[e]);
    }
  }
  return buffer;
}

}  // namespace ballbot::rl
