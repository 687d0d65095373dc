#pragma once

#include "ballbot/config.hpp"
#include "ballbot/dynamics.hpp"

namespace ballbot::rl {

// alpha_1 * (v_xy . g): the navigation term on its own, used by the
// PID-vs-policy comparison protocols.
inline double velocity_reward(const BallbotState& state, const RewardParams& params) {
  const double along = state.ball_velocity.x() * params.goal_direction.x() +
                       state.ball_velocity.y() * params.goal_direction.y();
  return params.alpha_velocity * along;
}

// Full shaped reward: velocity term + survival bonus - action penalty. The
// action penalty uses the normalized commands, not physical torques.
inline double reward(const BallbotState& state, const Action& action,
                     const RewardParams& params) {
  double r = velocity_reward(state, params);
  if (!is_failure(state)) r += params.alpha_survival;
  r -= params.alpha_action * action.squared_norm();
  return r;
}

}  // namespace ballbot::rl
