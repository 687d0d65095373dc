#include "ballbot/harness/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ballbot/errors.hpp"
#include "ballbot/random.hpp"

namespace ballbot::harness {

namespace {

EpisodeResult run_episode(Controller& controller, rl::BallbotEnv& env,
                          std::uint64_t terrain_seed, int horizon) {
  env.set_horizon(horizon);
  Observation obs = env.reset_with_seed(terrain_seed);
  controller.reset();

  EpisodeResult result;
  result.terrain_seed = terrain_seed;
  while (true) {
    const Action action = controller.act(env.state(), obs);
    const rl::BallbotEnv::StepResult sr = env.step(action);
    result.reward_sum += sr.reward;
    result.velocity_reward += rl::velocity_reward(env.state(), env.config_reward());
    result.length += 1;
    obs = sr.observation;
    if (sr.terminal || sr.truncated) break;
  }
  result.mean_step_reward = result.reward_sum / std::max(1, result.length);
  return result;
}

void csv_header(std::ofstream& out, const std::string& kind, std::uint64_t config_hash) {
  char head[96];
  std::snprintf(head, sizeof(head), "# ballbot-csv v1 kind=%s config=%016llx\n",
                kind.c_str(), static_cast<unsigned long long>(config_hash));
  out << head;
}

}  // namespace

EvalSummary summarize(std::vector<EpisodeResult> episodes) {
  EvalSummary s;
  // Order-insensitive aggregation: sort by seed before reporting.
  std::sort(episodes.begin(), episodes.end(),
            [](const EpisodeResult& a, const EpisodeResult& b) {
              return a.terrain_seed < b.terrain_seed;
            });
  s.episodes = std::move(episodes);
  const std::size_t n = s.episodes.size();
  if (n == 0) return s;
  std::vector<double> rewards;
  rewards.reserve(n);
  for (const auto& e : s.episodes) {
    s.mean_reward += e.reward_sum;
    s.mean_length += e.length;
    s.mean_velocity_reward += e.velocity_reward;
    rewards.push_back(e.reward_sum);
  }
  s.mean_reward /= static_cast<double>(n);
  s.mean_length /= static_cast<double>(n);
  s.mean_velocity_reward /= static_cast<double>(n);
  double var = 0.0, vvar = 0.0;
  for (const auto& e : s.episodes) {
    var += (e.reward_sum - s.mean_reward) * (e.reward_sum - s.mean_reward);
    vvar += (e.velocity_reward - s.mean_velocity_reward) *
            (e.velocity_reward - s.mean_velocity_reward);
  }
  s.std_reward = std::sqrt(var / static_cast<double>(n));
  s.std_velocity_reward = std::sqrt(vvar / static_cast<double>(n));
  std::sort(rewards.begin(), rewards.end());
  s.median_reward = (n % 2 == 1) ? rewards[n / 2]
                                 : 0.5 * (rewards[n / 2 - 1] + rewards[n / 2]);
  return s;
}

EvalSummary evaluate(Controller& controller, const RunConfig& config,
                     rl::EncoderRuntime* encoder, int num_terrains, int horizon,
                     std::uint64_t run_seed, std::uint64_t round) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(num_terrains));
  for (int k = 0; k < num_terrains; ++k)
    seeds.push_back(eval_terrain_seed(run_seed, k, round));
  return evaluate_on_seeds(controller, config, encoder, seeds, horizon);
}

EvalSummary evaluate_on_seeds(Controller& controller, const RunConfig& config,
                              rl::EncoderRuntime* encoder,
                              const std::vector<std::uint64_t>& terrain_seeds,
                              int horizon) {
  std::vector<EpisodeResult> episodes;
  episodes.reserve(terrain_seeds.size());
  rl::BallbotEnv env(config, encoder, /*run_seed=*/0xEA51ull, /*env_index=*/0,
                     /*eval_mode=*/true);
  for (const std::uint64_t seed : terrain_seeds)
    episodes.push_back(run_episode(controller, env, seed, horizon));
  return summarize(std::move(episodes));
}

void write_episodes_csv(const std::string& path, const std::string& kind,
                        const EvalSummary& summary, std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  csv_header(out, kind, config_hash);
  out << "terrain_seed,reward_sum,mean_step_reward,episode_length,velocity_reward\n";
  char buf[192];
  for (const auto& e : summary.episodes) {
    std::snprintf(buf, sizeof(buf), "%llu,%.9g,%.9g,%d,%.9g\n",
                  static_cast<unsigned long long>(e.terrain_seed), e.reward_sum,
                  e.mean_step_reward, e.length, e.velocity_reward);
    out << buf;
  }
}

HorizonScan horizon_scaling(Controller& controller, const RunConfig& config,
                            rl::EncoderRuntime* encoder,
                            const std::vector<int>& psi_grid, int envs_per_point,
                            std::uint64_t run_seed) {
  HorizonScan scan;
  const int base = config.ppo.horizon;
  std::uint64_t round = 0x8000;  // distinct from training evaluation rounds
  for (const int psi : psi_grid) {
    const int horizon = base + psi;
    const EvalSummary s =
        evaluate(controller, config, encoder, envs_per_point, horizon, run_seed, round++);
    scan.points.push_back({horizon, s.mean_reward, s.std_reward, s.mean_length});
  }

  const std::size_t n = scan.points.size();
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : scan.points) {
      sx += p.horizon;
      sy += p.mean_reward;
      sxx += static_cast<double>(p.horizon) * p.horizon;
      sxy += p.horizon * p.mean_reward;
      syy += p.mean_reward * p.mean_reward;
    }
    const double dn = static_cast<double>(n);
    const double cov = sxy - sx * sy / dn;
    const double varx = sxx - sx * sx / dn;
    const double vary = syy - sy * sy / dn;
    scan.slope = cov / varx;
    scan.intercept = (sy - scan.slope * sx) / dn;
    scan.r_squared = (vary > 0.0) ? (cov * cov) / (varx * vary) : 1.0;
  }
  return scan;
}

void write_horizon_csv(const std::string& path, const HorizonScan& scan,
                       std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  csv_header(out, "horizon-scan", config_hash);
  char buf[192];
  std::snprintf(buf, sizeof(buf), "# fit slope=%.9g intercept=%.9g r_squared=%.9g\n",
                scan.slope, scan.intercept, scan.r_squared);
  out << buf;
  out << "horizon,mean_reward,std_reward,mean_length\n";
  for (const auto& p : scan.points) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", p.horizon, p.mean_reward,
                  p.std_reward, p.mean_length);
    out << buf;
  }
}

std::vector<ComparisonCondition> pid_comparison(Controller& policy, Controller& pid,
                                                const RunConfig& config,
                                                rl::EncoderRuntime* encoder,
                                                int num_terrains, int horizon,
                                                std::uint64_t run_seed) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < num_terrains; ++k)
    seeds.push_back(eval_terrain_seed(run_seed, k, 0xc0));

  RunConfig flat = config;
  flat.terrain.amplitude = 0.0;
  RunConfig flat_pid = flat;
  flat_pid.rig.enabled = false;  // PID never consumes depth
  RunConfig uneven_pid = config;
  uneven_pid.rig.enabled = false;

  std::vector<ComparisonCondition> out;
  out.push_back({"pid", "flat",
                 evaluate_on_seeds(pid, flat_pid, nullptr, seeds, horizon)});
  out.push_back({"policy", "flat",
                 evaluate_on_seeds(policy, flat, encoder, seeds, horizon)});
  out.push_back({"pid", "uneven",
                 evaluate_on_seeds(pid, uneven_pid, nullptr, seeds, horizon)});
  out.push_back({"policy", "uneven",
                 evaluate_on_seeds(policy, config, encoder, seeds, horizon)});
  return out;
}

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonCondition>& conditions,
                          std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  csv_header(out, "pid-compare", config_hash);
  out << "controller,terrain,terrain_seed,velocity_reward,episode_length\n";
  char buf[192];
  for (const auto& c : conditions)
    for (const auto& e : c.summary.episodes) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%.9g,%d\n", c.controller_name.c_str(),
                    c.terrain_name.c_str(), static_cast<unsigned long long>(e.terrain_seed),
                    e.velocity_reward, e.length);
      out << buf;
    }
}

std::vector<TrajectoryRow> export_trajectory(Controller& controller,
                                             const RunConfig& config,
                                             rl::EncoderRuntime* encoder,
                                             std::uint64_t terrain_seed, int horizon) {
  rl::BallbotEnv env(config, encoder, 0xEA51ull, 0, true);
  env.set_horizon(horizon);
  Observation obs = env.reset_with_seed(terrain_seed);
  controller.reset();

  std::vector<TrajectoryRow> rows;
  while (true) {
    const Action action = controller.act(env.state(), obs);
    const rl::BallbotEnv::StepResult sr = env.step(action);
    const BallbotState& s = env.state();
    rows.push_back({s.time, s.ball_position.x(), s.ball_position.y(),
                    s.ball_position.z(), s.body_orientation.w(), s.body_orientation.x(),
                    s.body_orientation.y(), s.body_orientation.z(), tilt_angle(s),
                    action.a[0], action.a[1], action.a[2], sr.reward});
    obs = sr.observation;
    if (sr.terminal || sr.truncated) break;
  }
  return rows;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows,
                          std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  csv_header(out, "trajectory", config_hash);
  out << "t,x,y,z,qw,qx,qy,qz,tilt_deg,a0,a1,a2,reward\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.6g,%.9g,%.9g,%.9g,%.9g\n",
                  r.t, r.x, r.y, r.z, r.qw, r.qx, r.qy, r.qz, r.tilt_deg, r.a0, r.a1,
                  r.a2, r.reward);
    out << buf;
  }
}

}  // namespace ballbot::harness
