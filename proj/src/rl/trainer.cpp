#include "ballbot/rl/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "ballbot/errors.hpp"
#include "ballbot/harness/protocols.hpp"
#include "ballbot/nn/adam.hpp"
#include "ballbot/random.hpp"
#include "ballbot/rl/ppo.hpp"

namespace ballbot::rl {

namespace fs = std::filesystem;

namespace {

void append_metrics_row(std::ofstream& out, long long env_steps, long long update,
                        const harness::EvalSummary* eval_summary, int full_horizon,
                        const UpdateStats& stats) {
  char buf[512];
  std::string eval_cols = ",,,";
  if (eval_summary) {
    char ebuf[160];
    std::snprintf(ebuf, sizeof(ebuf), "%.9g,%.9g,%.9g,%d", eval_summary->mean_reward,
                  eval_summary->median_reward, eval_summary->mean_length, full_horizon);
    eval_cols = ebuf;
  }
  std::snprintf(buf, sizeof(buf), "%lld,%lld,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                env_steps, update, eval_cols.c_str(), stats.policy_loss,
                stats.value_loss, stats.entropy, stats.approx_kl, stats.clip_fraction,
                stats.lr);
  out << buf;
  out.flush();
}

}  // namespace

TrainSummary train(const RunConfig& config, const std::string& out_dir,
                   std::uint64_t seed, bool resume, std::ostream* log) {
  config.validate();
  if (config.ppo.finetune_encoder)
    throw ConfigError(
        "ppo.finetune_encoder is not supported by the trainer; increase "
        "pretraining epochs instead");

  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "eval");

  std::unique_ptr<EncoderRuntime> encoder;
  if (config.rig.enabled) {
    if (config.ppo.encoder_checkpoint.empty())
      throw ConfigError(
          "depth mode requires ppo.encoder_checkpoint (run pretrain-encoder first)");
    encoder = EncoderRuntime::from_checkpoint(config.ppo.encoder_checkpoint,
                                              config.rig.resolution);
  }

  const int obs_dim = config.observation_dim();
  nn::PolicyNet<float> policy(obs_dim, mix_seed(seed, 0x1));
  nn::ValueNet<float> value(obs_dim, mix_seed(seed, 0x2));

  std::vector<nn::Param<float>*> trainable = policy.params();
  for (auto* p : value.params()) trainable.push_back(p);
  nn::Adam<float> optimizer(trainable, config.ppo.learning_rate, 0.9, 0.999, 1e-8,
                            config.ppo.weight_decay);

  TrainSummary summary;
  summary.metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  summary.latest_checkpoint = (fs::path(out_dir) / "checkpoint_latest.bbck").string();
  summary.best_checkpoint = (fs::path(out_dir) / "checkpoint_best.bbck").string();
  summary.final_checkpoint = (fs::path(out_dir) / "checkpoint_final.bbck").string();

  long long env_steps = 0, update = 0;
  std::uint64_t eval_round = 0;
  double best_reward = -1e300;
  const std::uint64_t config_hash = config.hash();

  auto save_checkpoint = [&](const std::string& path) {
    nn::ParameterStore store;
    store.step = static_cast<std::uint64_t>(env_steps);
    store.config_hash = config_hash;
    for (auto* p : trainable) store.put_tensor(p->name, p->value);
    optimizer.export_state(store, "adam");
    store.put("trainer/update", {1}, {static_cast<double>(update)});
    store.put("trainer/eval_round", {1}, {static_cast<double>(eval_round)});
    store.put("trainer/best_reward", {1}, {best_reward});
    store.save(path);
  };

  std::ofstream metrics;
  if (resume && fs::exists(summary.latest_checkpoint)) {
    const nn::ParameterStore store = nn::ParameterStore::load(summary.latest_checkpoint);
    if (store.config_hash != config_hash)
      throw CheckpointError("resume: checkpoint was produced with a different config");
    for (auto* p : trainable) store.load_tensor(p->name, p->value);
    optimizer.import_state(store, "adam");
    env_steps = static_cast<long long>(store.step);
    update = static_cast<long long>(store.get("trainer/update").data.at(0));
    eval_round = static_cast<std::uint64_t>(store.get("trainer/eval_round").data.at(0));
    best_reward = store.get("trainer/best_reward").data.at(0);
    metrics.open(summary.metrics_path, std::ios::app);
    if (log) *log << "resumed from " << summary.latest_checkpoint << " at step "
                  << env_steps << "\n";
  } else {
    metrics.open(summary.metrics_path, std::ios::trunc);
    char head[96];
    std::snprintf(head, sizeof(head), "# ballbot-csv v1 kind=metrics config=%016llx\n",
                  static_cast<unsigned long long>(config_hash));
    metrics << head;
    metrics << "total_steps,update,eval_mean_reward,eval_median_reward,"
               "eval_mean_length,eval_full_horizon_episodes,policy_loss,value_loss,"
               "entropy,approx_kl,clip_fraction,lr\n";
    metrics.flush();
  }

  std::vector<BallbotEnv> envs;
  envs.reserve(static_cast<std::size_t>(config.ppo.num_envs));
  for (int e = 0; e < config.ppo.num_envs; ++e)
    envs.emplace_back(config, encoder.get(), seed, e, /*eval_mode=*/false);
  std::vector<Observation> current_obs;
  current_obs.reserve(envs.size());
  for (auto& env : envs) current_obs.push_back(env.reset());

  std::mt19937_64 sample_rng(mix_seed(seed, 0x5a + static_cast<std::uint64_t>(update)));
  std::mt19937_64 shuffle_rng(mix_seed(seed, 0x7f + static_cast<std::uint64_t>(update)));

  const auto run_eval = [&]() {
    harness::PolicyController controller(policy, config.eval.stochastic,
                                         mix_seed(seed, 0xe + eval_round));
    const harness::EvalSummary eval_summary =
        harness::evaluate(controller, config, encoder.get(), config.eval.num_envs,
                          config.eval.horizon, seed, eval_round);
    int full = 0;
    for (const auto& e : eval_summary.episodes)
      if (e.length >= config.eval.horizon) ++full;
    char name[64];
    std::snprintf(name, sizeof(name), "eval/eval_round_%05llu.csv",
                  static_cast<unsigned long long>(eval_round));
    harness::write_episodes_csv((fs::path(out_dir) / name).string(), "train-eval",
                                eval_summary, config_hash);
    ++eval_round;
    if (eval_summary.mean_reward > best_reward) {
      best_reward = eval_summary.mean_reward;
      summary.best_eval_mean_reward = eval_summary.mean_reward;
      summary.best_eval_mean_length = eval_summary.mean_length;
      save_checkpoint(summary.best_checkpoint);
    }
    if (log)
      *log << "eval @" << env_steps << " steps: mean_reward=" << eval_summary.mean_reward
           << " mean_length=" << eval_summary.mean_length << " full=" << full << "/"
           << eval_summary.episodes.size() << "\n";
    return std::pair<harness::EvalSummary, int>(eval_summary, full);
  };

  while (env_steps < config.ppo.total_steps) {
    optimizer.set_lr(config.ppo.lr_at_step(env_steps));
    RolloutBuffer buffer =
        collect_rollouts(envs, policy, value, config.ppo, current_obs, sample_rng);
    buffer.compute_advantages(config.ppo.gamma, config.ppo.gae_lambda);
    const UpdateStats stats =
        ppo_update(buffer, policy, value, optimizer, config.ppo, shuffle_rng);
    env_steps += buffer.size();
    ++update;

    if (update % config.ppo.eval_every_updates == 0) {
      const auto [eval_summary, full] = run_eval();
      append_metrics_row(metrics, env_steps, update, &eval_summary, full, stats);
      save_checkpoint(summary.latest_checkpoint);
    } else {
      append_metrics_row(metrics, env_steps, update, nullptr, 0, stats);
    }
    if (log && update % 5 == 0)
      *log << "update " << update << " steps " << env_steps
           << " pg=" << stats.policy_loss << " v=" << stats.value_loss
           << " kl=" << stats.approx_kl << " epochs=" << stats.epochs_run
           << " episodes=" << buffer.finished_episodes.size() << "\n";
  }

  // Final evaluation and checkpoints.
  const auto [final_summary, final_full] = run_eval();
  UpdateStats empty_stats;
  empty_stats.lr = optimizer.lr();
  append_metrics_row(metrics, env_steps, update, &final_summary, final_full, empty_stats);
  save_checkpoint(summary.latest_checkpoint);
  save_checkpoint(summary.final_checkpoint);

  summary.env_steps = env_steps;
  summary.updates = update;
  summary.best_eval_mean_reward = best_reward;
  return summary;
}

}  // namespace ballbot::rl
