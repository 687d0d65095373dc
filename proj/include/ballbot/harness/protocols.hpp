#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ballbot/harness/controller.hpp"
#include "ballbot/rl/env.hpp"

namespace ballbot::harness {

struct EpisodeResult {
  std::uint64_t terrain_seed = 0;
  double reward_sum = 0.0;
  double mean_step_reward = 0.0;
  int length = 0;
  double velocity_reward = 0.0;  // velocity term only, summed
};

struct EvalSummary {
  std::vector<EpisodeResult> episodes;
  double mean_reward = 0.0;
  double median_reward = 0.0;
  double std_reward = 0.0;
  double mean_length = 0.0;
  double mean_velocity_reward = 0.0;
  double std_velocity_reward = 0.0;
};

EvalSummary summarize(std::vector<EpisodeResult> episodes);

// Run N episodes on terrains from the evaluation seed range (disjoint from
// training seeds by construction). Deterministic given (run_seed, round).
EvalSummary evaluate(Controller& controller, const RunConfig& config,
                     rl::EncoderRuntime* encoder, int num_terrains, int horizon,
                     std::uint64_t run_seed, std::uint64_t round = 0);

// As evaluate(), but on explicit terrain seeds (paired comparisons).
EvalSummary evaluate_on_seeds(Controller& controller, const RunConfig& config,
                              rl::EncoderRuntime* encoder,
                              const std::vector<std::uint64_t>& terrain_seeds,
                              int horizon);

void write_episodes_csv(const std::string& path, const std::string& kind,
                        const EvalSummary& summary, std::uint64_t config_hash);

struct HorizonPoint {
  int horizon = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double mean_length = 0.0;
};

struct HorizonScan {
  std::vector<HorizonPoint> points;
  double slope = 0.0;      // least-squares reward-vs-horizon
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Reward scaling beyond the training horizon: psi_grid offsets are added to
// the base horizon, 30 fresh terrains per point by default.
HorizonScan horizon_scaling(Controller& controller, const RunConfig& config,
                            rl::EncoderRuntime* encoder,
                            const std::vector<int>& psi_grid, int envs_per_point,
                            std::uint64_t run_seed);

void write_horizon_csv(const std::string& path, const HorizonScan& scan,
                       std::uint64_t config_hash);

struct ComparisonCondition {
  std::string controller_name;  // "pid" or "policy"
  std::string terrain_name;     // "flat" or "uneven"
  EvalSummary summary;
};

// Four-condition protocol: {PID, policy} x {flat, uneven}, identical terrain
// seeds for both controllers within each terrain condition. Velocity-only
// rewards are what the comparison reports.
std::vector<ComparisonCondition> pid_comparison(Controller& policy, Controller& pid,
                                                const RunConfig& config,
                                                rl::EncoderRuntime* encoder,
                                                int num_terrains, int horizon,
                                                std::uint64_t run_seed);

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonCondition>& conditions,
                          std::uint64_t config_hash);

// Single-episode time series for top-down trajectory plots.
struct TrajectoryRow {
  double t, x, y, z;
  double qw, qx, qy, qz;
  double tilt_deg;
  double a0, a1, a2;
  double reward;
};

std::vector<TrajectoryRow> export_trajectory(Controller& controller,
                                             const RunConfig& config,
                                             rl::EncoderRuntime* encoder,
                                             std::uint64_t terrain_seed, int horizon);

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows,
                          std::uint64_t config_hash);

}  // namespace ballbot::harness
