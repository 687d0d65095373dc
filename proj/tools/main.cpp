#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "ballbot/config.hpp"
#include "ballbot/errors.hpp"
#include "ballbot/harness/protocols.hpp"
#include "ballbot/pid.hpp"
#include "ballbot/rl/pretrain.hpp"
#include "ballbot/rl/trainer.hpp"

namespace fs = std::filesystem;
using namespace ballbot;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

RunConfig load_config(const GlobalArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = RunConfig::load(args.config_path);
  cfg.validate();
  return cfg;
}

std::unique_ptr<rl::EncoderRuntime> load_encoder_if_needed(const RunConfig& cfg) {
  if (!cfg.rig.enabled) return nullptr;
  if (cfg.ppo.encoder_checkpoint.empty())
    throw ConfigError("depth mode requires ppo.encoder_checkpoint; run pretrain-encoder");
  return rl::EncoderRuntime::from_checkpoint(cfg.ppo.encoder_checkpoint,
                                             cfg.rig.resolution);
}

struct LoadedPolicy {
  std::unique_ptr<nn::PolicyNet<float>> policy;
  std::unique_ptr<nn::ValueNet<float>> value;
};

LoadedPolicy load_policy(const RunConfig& cfg, const std::string& checkpoint) {
  if (checkpoint.empty())
    throw ConfigError("a policy checkpoint is required (--checkpoint PATH)");
  LoadedPolicy lp;
  lp.policy = std::make_unique<nn::PolicyNet<float>>(cfg.observation_dim());
  lp.value = std::make_unique<nn::ValueNet<float>>(cfg.observation_dim());
  const nn::ParameterStore store = nn::ParameterStore::load(checkpoint);
  for (auto* p : lp.policy->params()) store.load_tensor(p->name, p->value);
  for (auto* p : lp.value->params()) store.load_tensor(p->name, p->value);
  return lp;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ballbot: uneven-terrain ballbot simulation, training and evaluation"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "Run config JSON path (defaults built in)");
  app.add_option("--seed", g.seed, "Run seed");
  app.add_option("--out", g.out_dir, "Output directory");

  // gen-terrain
  auto* gen = app.add_subcommand("gen-terrain", "Export a terrain grid (CSV + 16-bit PGM)");
  std::uint64_t gen_seed = 0;
  double gen_extent = 40.0;
  int gen_resolution = 256;
  std::string gen_out = "terrain";
  gen->add_option("--seed", gen_seed, "Terrain seed")->required();
  gen->add_option("--extent", gen_extent, "Grid extent in meters (centered on origin)");
  gen->add_option("--resolution", gen_resolution, "Samples per side");
  gen->add_option("--out", gen_out, "Output path prefix (writes PREFIX.csv, PREFIX.pgm)");

  // train
  auto* tr = app.add_subcommand("train", "Run PPO training");
  bool tr_resume = false;
  tr->add_flag("--resume", tr_resume, "Resume from checkpoint_latest.bbck in --out");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a policy checkpoint on unseen terrains");
  std::string ev_checkpoint;
  int ev_terrains = 10;
  int ev_horizon = 0;
  ev->add_option("--checkpoint", ev_checkpoint, "Policy checkpoint path");
  ev->add_option("--terrains", ev_terrains, "Number of evaluation terrains");
  ev->add_option("--horizon", ev_horizon, "Episode horizon (default: eval config)");

  // pid-tune
  auto* pt = app.add_subcommand("pid-tune", "Grid-search PID gains on flat terrain");
  int pt_seeds = 10;
  pt->add_option("--trials", pt_seeds, "Seeds per gain configuration");

  // pid-compare
  auto* pc = app.add_subcommand("pid-compare",
                                "PID vs policy, flat and uneven, paired terrain seeds");
  std::string pc_checkpoint;
  int pc_terrains = 100;
  int pc_horizon = 4000;
  pc->add_option("--checkpoint", pc_checkpoint, "Policy checkpoint path");
  pc->add_option("--terrains", pc_terrains, "Terrains per condition");
  pc->add_option("--horizon", pc_horizon, "Episode horizon");

  // horizon-scan
  auto* hs = app.add_subcommand("horizon-scan", "Reward scaling beyond the training horizon");
  std::string hs_checkpoint;
  std::vector<int> hs_grid{0, 2000, 4000, 8000};
  int hs_envs = 30;
  hs->add_option("--checkpoint", hs_checkpoint, "Policy checkpoint path");
  hs->add_option("--psi", hs_grid, "Horizon offsets added to the training horizon");
  hs->add_option("--envs", hs_envs, "Terrains per grid point");

  // export-trajectory
  auto* et = app.add_subcommand("export-trajectory", "Dump one episode as a CSV time series");
  std::string et_checkpoint;
  std::uint64_t et_terrain_seed = 1;
  int et_horizon = 4000;
  bool et_pid = false;
  et->add_option("--checkpoint", et_checkpoint, "Policy checkpoint path");
  et->add_option("--terrain-seed", et_terrain_seed, "Terrain seed for the episode");
  et->add_option("--horizon", et_horizon, "Episode horizon");
  et->add_flag("--pid", et_pid, "Drive with the PID baseline instead of a policy");

  // pretrain-encoder
  auto* pe = app.add_subcommand("pretrain-encoder",
                                "Train the depth encoder from PID-driven rollouts");
  int pe_frames = 4096;
  int pe_epochs = 8;
  pe->add_option("--frames", pe_frames, "Dataset size (depth frames)");
  pe->add_option("--epochs", pe_epochs, "Autoencoder epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the error and usage hint
    return 2;
  }

  try {
    const RunConfig cfg = load_config(g);
    fs::create_directories(g.out_dir);

    if (gen->parsed()) {
      TerrainParams tp = cfg.terrain;
      tp.seed = gen_seed;
      const TerrainField field(tp);
      const TerrainGrid grid = field.rasterize(gen_extent, gen_resolution);
      grid.write_csv(gen_out + ".csv");
      grid.write_pgm16(gen_out + ".pgm", tp.height_bound());
      std::cout << "wrote " << gen_out << ".csv and " << gen_out << ".pgm\n";
      return 0;
    }

    if (tr->parsed()) {
      const rl::TrainSummary summary =
          rl::train(cfg, g.out_dir, g.seed, tr_resume, &std::cout);
      std::cout << "training done: " << summary.env_steps << " steps, "
                << summary.updates << " updates, best eval mean reward "
                << summary.best_eval_mean_reward << "\n"
                << "metrics: " << summary.metrics_path << "\n";
      return 0;
    }

    if (ev->parsed()) {
      auto encoder = load_encoder_if_needed(cfg);
      LoadedPolicy lp = load_policy(cfg, ev_checkpoint);
      harness::PolicyController controller(*lp.policy, cfg.eval.stochastic, g.seed);
      const int horizon = ev_horizon > 0 ? ev_horizon : cfg.eval.horizon;
      const harness::EvalSummary s = harness::evaluate(
          controller, cfg, encoder.get(), ev_terrains, horizon, g.seed, 0x1000);
      const std::string path = (fs::path(g.out_dir) / "eval_episodes.csv").string();
      harness::write_episodes_csv(path, "eval", s, cfg.hash());
      std::cout << "eval: mean_reward=" << s.mean_reward
                << " median_reward=" << s.median_reward
                << " mean_length=" << s.mean_length << "\n"
                << "episodes: " << path << "\n";
      return 0;
    }

    if (pt->parsed()) {
      const TuneResult result = tune_flat(cfg, pt_seeds, &std::cout);
      const std::string report_path = (fs::path(g.out_dir) / "pid_tune_report.csv").string();
      write_tune_report_csv(report_path, result, cfg.hash());
      RunConfig tuned = cfg;
      tuned.pid = result.best;
      const std::string cfg_path = (fs::path(g.out_dir) / "config_tuned.json").string();
      tuned.save(cfg_path);
      std::cout << "selected gains: inner(kp=" << result.best.inner_kp
                << ",ki=" << result.best.inner_ki << ",kd=" << result.best.inner_kd
                << ") outer(kp=" << result.best.outer_kp << ",ki=" << result.best.outer_ki
                << ",kd=" << result.best.outer_kd << ")\n"
                << "report: " << report_path << "\nconfig: " << cfg_path << "\n";
      return 0;
    }

    if (pc->parsed()) {
      auto encoder = load_encoder_if_needed(cfg);
      LoadedPolicy lp = load_policy(cfg, pc_checkpoint);
      harness::PolicyController policy_ctl(*lp.policy, false, g.seed);
      CascadedPid pid_ctl(cfg.pid, cfg.physics, cfg.reward.goal_direction);
      const auto conditions = harness::pid_comparison(
          policy_ctl, pid_ctl, cfg, encoder.get(), pc_terrains, pc_horizon, g.seed);
      const std::string path = (fs::path(g.out_dir) / "pid_comparison.csv").string();
      harness::write_comparison_csv(path, conditions, cfg.hash());
      for (const auto& c : conditions)
        std::cout << c.controller_name << "/" << c.terrain_name
                  << ": velocity_reward=" << c.summary.mean_velocity_reward << "+-"
                  << c.summary.std_velocity_reward
                  << " length=" << c.summary.mean_length << "\n";
      std::cout << "episodes: " << path << "\n";
      return 0;
    }

    if (hs->parsed()) {
      auto encoder = load_encoder_if_needed(cfg);
      LoadedPolicy lp = load_policy(cfg, hs_checkpoint);
      harness::PolicyController controller(*lp.policy, false, g.seed);
      const harness::HorizonScan scan = harness::horizon_scaling(
          controller, cfg, encoder.get(), hs_grid, hs_envs, g.seed);
      const std::string path = (fs::path(g.out_dir) / "horizon_scan.csv").string();
      harness::write_horizon_csv(path, scan, cfg.hash());
      std::cout << "horizon scan: slope=" << scan.slope << " r2=" << scan.r_squared
                << "\ntable: " << path << "\n";
      return 0;
    }

    if (et->parsed()) {
      auto encoder = load_encoder_if_needed(cfg);
      std::vector<harness::TrajectoryRow> rows;
      if (et_pid) {
        RunConfig pid_cfg = cfg;
        pid_cfg.rig.enabled = false;
        CascadedPid pid_ctl(cfg.pid, cfg.physics, cfg.reward.goal_direction);
        rows = harness::export_trajectory(pid_ctl, pid_cfg, nullptr, et_terrain_seed,
                                          et_horizon);
      } else {
        LoadedPolicy lp = load_policy(cfg, et_checkpoint);
        harness::PolicyController controller(*lp.policy, false, g.seed);
        rows = harness::export_trajectory(controller, cfg, encoder.get(),
                                          et_terrain_seed, et_horizon);
      }
      const std::string path = (fs::path(g.out_dir) / "trajectory.csv").string();
      harness::write_trajectory_csv(path, rows, cfg.hash());
      std::cout << "trajectory (" << rows.size() << " rows): " << path << "\n";
      return 0;
    }

    if (pe->parsed()) {
      const std::string path = (fs::path(g.out_dir) / "encoder.bbck").string();
      const rl::PretrainReport report =
          rl::pretrain_encoder(cfg, path, g.seed, pe_frames, pe_epochs, &std::cout);
      std::cout << "encoder saved: " << report.encoder_path << " (dataset "
                << report.dataset_size << " frames, final holdout mse "
                << report.holdout_losses.back() << ")\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
