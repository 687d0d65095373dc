#pragma once

#include <iosfwd>
#include <vector>

#include "ballbot/config.hpp"
#include "ballbot/harness/controller.hpp"

namespace ballbot {

// Cascaded PID: the outer loop turns the planar velocity error into lean
// setpoints; the inner loop balances onto those setpoints by commanding ball
// torque through the inverse wheel coupling. Runs at the full 500 Hz.
class CascadedPid final : public harness::Controller {
 public:
  CascadedPid(const PidGains& gains, const PhysicalParams& physics,
              const Vec2& goal_direction);

  void reset() override;
  Action act(const BallbotState& state, const Observation& obs) override;

  // Velocity PID -> (roll, pitch) setpoints in radians, clamped to max lean.
  Vec2 outer_loop(const BallbotState& state, const Vec2& target_velocity, double dt);
  // Balance PID on the setpoints -> normalized wheel commands.
  Action inner_loop(const BallbotState& state, const Vec2& setpoints, double dt);

  const PidGains& gains() const { return gains_; }

 private:
  PidGains gains_;
  PhysicalParams physics_;
  WheelGeometry geometry_;
  Vec2 goal_direction_;
  Vec2 outer_integrator_ = Vec2::Zero();
  Vec2 inner_integrator_ = Vec2::Zero();
  Vec2 prev_velocity_ = Vec2::Zero();
  bool has_prev_velocity_ = false;
};

struct TuneReportRow {
  PidGains gains;
  int survived = 0;      // out of trials
  int trials = 0;
  double mean_velocity_reward = 0.0;
  double mean_abs_tilt_deg = 0.0;
  int stage = 0;
};

struct TuneResult {
  PidGains best;
  std::vector<TuneReportRow> report;
};

// Staged coordinate search on flat terrain: inner gains for survival first,
// then outer gains for velocity reward with survival preserved. Throws if no
// configuration survives.
TuneResult tune_flat(const RunConfig& config, int seeds_per_trial = 10,
                     std::ostream* log = nullptr);

void write_tune_report_csv(const std::string& path, const TuneResult& result,
                           std::uint64_t config_hash);

}  // namespace ballbot
