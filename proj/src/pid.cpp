#include "ballbot/pid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "ballbot/errors.hpp"
#include "ballbot/random.hpp"
#include "ballbot/rl/reward.hpp"

namespace ballbot {

namespace {
constexpr double kControlDt = 0.002;
}

CascadedPid::CascadedPid(const PidGains& gains, const PhysicalParams& physics,
                         const Vec2& goal_direction)
    : gains_(gains), physics_(physics), geometry_(physics),
      goal_direction_(goal_direction) {
  gains_.validate();
}

void CascadedPid::reset() {
  outer_integrator_.setZero();
  inner_integrator_.setZero();
  prev_velocity_.setZero();
  has_prev_velocity_ = false;
}

Vec2 CascadedPid::outer_loop(const BallbotState& state, const Vec2& target_velocity,
                             double dt) {
  const Vec2 velocity(state.ball_velocity.x(), state.ball_velocity.y());
  const Vec2 err = target_velocity - velocity;

  outer_integrator_ += err * dt;
  const double iclamp = gains_.integrator_clamp;
  outer_integrator_ = outer_integrator_.cwiseMax(-iclamp).cwiseMin(iclamp);

  // Derivative on the measurement to avoid setpoint kicks.
  Vec2 accel = Vec2::Zero();
  if (has_prev_velocity_) accel = (velocity - prev_velocity_) / dt;
  prev_velocity_ = velocity;
  has_prev_velocity_ = true;

  // Desired lean vector: tip toward the velocity deficit.
  Vec2 lean = gains_.outer_kp * err + gains_.outer_ki * outer_integrator_ -
              gains_.outer_kd * accel;
  const double max_lean = deg_to_rad(gains_.max_lean_deg);
  const double norm = lean.norm();
  if (norm > max_lean) lean *= max_lean / norm;

  // lean = (tilt toward +x, tilt toward +y) -> (roll, pitch) = (-lean_y, lean_x)
  return {-lean.y(), lean.x()};
}

Action CascadedPid::inner_loop(const BallbotState& state, const Vec2& setpoints,
                               double dt) {
  // Tilt measured as the horizontal components of the body z-axis.
  const Vec3 body_z = state.body_orientation * Vec3::UnitZ();
  const Vec2 tilt(body_z.x(), body_z.y());
  const Vec2 desired(std::sin(setpoints.y()), -std::sin(setpoints.x()));
  const Vec2 err = tilt - desired;  // excess lean toward +x/+y

  inner_integrator_ += err * dt;
  const double iclamp = gains_.integrator_clamp;
  inner_integrator_ = inner_integrator_.cwiseMax(-iclamp).cwiseMin(iclamp);

  // Tilt rate from d(body_z)/dt = omega x body_z (derivative on measurement).
  const Vec3 tilt_rate3 = state.body_omega.cross(body_z);
  const Vec2 tilt_rate(tilt_rate3.x(), tilt_rate3.y());

  const Vec2 pd = gains_.inner_kp * err + gains_.inner_kd * tilt_rate +
                  gains_.inner_ki * inner_integrator_;

  // Roll the ball under the falling side: tilt excess toward +x needs ball
  // torque about +y, excess toward +y needs torque about -x.
  const Vec3 torque_world(-pd.y(), pd.x(), 0.0);
  const Mat3 body_rot = state.body_orientation.toRotationMatrix();
  Vec3 torque_body = body_rot.transpose() * torque_world;
  torque_body.z() = 0.0;  // yaw control is out of scope

  const Vec3 wheel_torque = geometry_.coupling_inv() * torque_body;
  Action action;
  for (int i = 0; i < 3; ++i)
    action.a[i] = std::clamp(0.5 + wheel_torque[i] / (2.0 * physics_.max_wheel_torque),
                             0.0, 1.0);
  return action;
}

Action CascadedPid::act(const BallbotState& state, const Observation&) {
  const Vec2 target = gains_.target_speed * goal_direction_;
  const Vec2 setpoints = outer_loop(state, target, kControlDt);
  return inner_loop(state, setpoints, kControlDt);
}

namespace {

struct TrialOutcome {
  int survived = 0;
  double mean_velocity_reward = 0.0;
  double mean_abs_tilt = 0.0;
};

TrialOutcome run_flat_trials(const RunConfig& config, const PidGains& gains,
                             bool engage_outer, int seeds, int horizon) {
  RunConfig cfg = config;
  cfg.terrain.amplitude = 0.0;
  cfg.rig.enabled = false;
  PidGains g = gains;
  if (!engage_outer) {
    g.outer_kp = g.outer_ki = g.outer_kd = 0.0;
    g.target_speed = 0.0;
  }

  TrialOutcome out;
  double tilt_accum = 0.0;
  long long tilt_samples = 0;
  for (int trial = 0; trial < seeds; ++trial) {
    CascadedPid pid(g, cfg.physics, cfg.reward.goal_direction);
    TerrainParams tp = cfg.terrain;
    tp.seed = static_cast<std::uint64_t>(trial);
    TerrainField terrain(tp);
    std::mt19937_64 rng(mix_seed(0x9147u, static_cast<std::uint64_t>(trial)));
    const double tilt0 = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    const double azim = 2.0 * kPi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    BallbotState state = rest_state(terrain, cfg.physics, 0.0, 0.0, tilt0, azim);

    bool alive = true;
    double vel_reward = 0.0;
    Observation dummy;
    for (int t = 0; t < horizon; ++t) {
      const Action a = pid.act(state, dummy);
      try {
        state = step(state, a, terrain, cfg.physics, kControlDt);
      } catch (const SimulationDiverged&) {
        alive = false;
        break;
      }
      vel_reward += rl::velocity_reward(state, cfg.reward);
      tilt_accum += tilt_angle(state);
      ++tilt_samples;
      if (is_failure(state)) {
        alive = false;
        break;
      }
    }
    if (alive) ++out.survived;
    out.mean_velocity_reward += vel_reward;
  }
  out.mean_velocity_reward /= seeds;
  out.mean_abs_tilt = (tilt_samples > 0) ? tilt_accum / tilt_samples : 90.0;
  return out;
}

}  // namespace

TuneResult tune_flat(const RunConfig& config, int seeds_per_trial, std::ostream* log) {
  const int horizon = config.ppo.horizon;
  TuneResult result;
  result.best = config.pid;

  // Stage 1: inner-loop balance (outer disabled).
  const double kp_grid[] = {30.0, 60.0, 90.0, 140.0};
  const double kd_grid[] = {2.0, 5.0, 10.0, 16.0};
  const double ki_grid[] = {0.0, 20.0};
  bool any_survivor = false;
  PidGains best_inner = config.pid;
  double best_inner_tilt = 1e9;
  for (double kp : kp_grid)
    for (double kd : kd_grid)
      for (double ki : ki_grid) {
        PidGains g = config.pid;
        g.inner_kp = kp;
        g.inner_kd = kd;
        g.inner_ki = ki;
        const TrialOutcome t = run_flat_trials(config, g, false, seeds_per_trial, horizon);
        TuneReportRow row{g, t.survived, seeds_per_trial, t.mean_velocity_reward,
                          t.mean_abs_tilt, 1};
        result.report.push_back(row);
        if (log)
          *log << "pid-tune stage1 kp=" << kp << " kd=" << kd << " ki=" << ki
               << " survived=" << t.survived << "/" << seeds_per_trial
               << " mean_tilt=" << t.mean_abs_tilt << "\n";
        if (t.survived == seeds_per_trial && t.mean_abs_tilt < best_inner_tilt) {
          best_inner_tilt = t.mean_abs_tilt;
          best_inner = g;
          any_survivor = true;
        }
      }
  if (!any_survivor)
    throw std::runtime_error(
        "pid tuning failed: no inner-loop gains survive flat balance; see report");

  // Stage 2: outer velocity loop on top of the best inner gains.
  const double okp_grid[] = {0.0, 0.02, 0.05, 0.1};
  const double oki_grid[] = {0.0, 0.01, 0.04};
  PidGains best = best_inner;
  double best_vel = -1e18;
  for (double okp : okp_grid)
    for (double oki : oki_grid) {
      PidGains g = best_inner;
      g.outer_kp = okp;
      g.outer_ki = oki;
      g.outer_kd = 0.0;
      const TrialOutcome t = run_flat_trials(config, g, true, seeds_per_trial, horizon);
      TuneReportRow row{g, t.survived, seeds_per_trial, t.mean_velocity_reward,
                        t.mean_abs_tilt, 2};
      result.report.push_back(row);
      if (log)
        *log << "pid-tune stage2 okp=" << okp << " oki=" << oki
             << " survived=" << t.survived << "/" << seeds_per_trial
             << " vel_reward=" << t.mean_velocity_reward << "\n";
      if (t.survived == seeds_per_trial && t.mean_velocity_reward > best_vel) {
        best_vel = t.mean_velocity_reward;
        best = g;
      }
    }
  if (best_vel <= -1e17)
    throw std::runtime_error(
        "pid tuning failed: outer loop destabilizes every configuration; see report");

  result.best = best;
  return result;
}

void write_tune_report_csv(const std::string& path, const TuneResult& result,
                           std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char head[64];
  std::snprintf(head, sizeof(head), "# ballbot-csv v1 kind=pid-tune config=%016llx\n",
                static_cast<unsigned long long>(config_hash));
  out << head;
  out << "stage,inner_kp,inner_ki,inner_kd,outer_kp,outer_ki,outer_kd,survived,trials,"
         "mean_velocity_reward,mean_abs_tilt_deg\n";
  char buf[256];
  for (const auto& r : result.report) {
    std::snprintf(buf, sizeof(buf), "%d,%g,%g,%g,%g,%g,%g,%d,%d,%.9g,%.6g\n", r.stage,
                  r.gains.inner_kp, r.gains.inner_ki, r.gains.inner_kd, r.gains.outer_kp,
                  r.gains.outer_ki, r.gains.outer_kd, r.survived, r.trials,
                  r.mean_velocity_reward, r.mean_abs_tilt_deg);
    out << buf;
  }
}

}  // namespace ballbot
