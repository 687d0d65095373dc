#include "ballbot/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "ballbot/errors.hpp"

namespace ballbot {

Action Action::clamped(double a0, double a1, double a2) {
  Action act;
  act.a = {std::clamp(a0, 0.0, 1.0), std::clamp(a1, 0.0, 1.0), std::clamp(a2, 0.0, 1.0)};
  return act;
}

void PhysicalParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(ball_radius) || !positive(ball_mass) || !positive(ball_inertia) ||
      !positive(body_mass) || !positive(com_height) || !positive(max_wheel_torque) ||
      !positive(friction_mu) || !positive(wheel_radius) || !positive(wheel_inertia) ||
      !positive(contact_stiffness) || !positive(gravity))
    throw InvalidParameter("physics: masses, inertias, radii, torque, friction must be > 0");
  if (!(body_inertia.array() > 0.0).all())
    throw InvalidParameter("physics: body inertia diagonal must be > 0");
  if (!(wheel_zenith_deg > 0.0 && wheel_zenith_deg < 90.0))
    throw InvalidParameter("physics: wheel zenith angle must be in (0, 90) degrees");
  if (contact_damping < 0.0 || drive_damping < 0.0 || idler_damping < 0.0 ||
      drive_slip_cap <= 0.0)
    throw InvalidParameter("physics: damping terms must be >= 0, slip cap > 0");
}

WheelGeometry::WheelGeometry(const PhysicalParams& params) {
  const double zen = deg_to_rad(params.wheel_zenith_deg);
  const double sz = std::sin(zen), cz = std::cos(zen);
  for (int i = 0; i < 3; ++i) {
    const double az = deg_to_rad(params.wheel_azimuth_deg[i]);
    const double ca = std::cos(az), sa = std::sin(az);
    u_[i] = Vec3(sz * ca, sz * sa, cz);
    d_[i] = Vec3(-sa, ca, 0.0);
    j_[i] = u_[i].cross(d_[i]);
    coupling_.col(i) = j_[i];
  }
  const double det = coupling_.determinant();
  if (std::abs(det) < 1e-9)
    throw InvalidParameter("physics: wheel geometry gives a singular coupling matrix");
  coupling_inv_ = coupling_.inverse();
}

Vec3 wheel_command_torques(const Action& a, const PhysicalParams& params) {
  Vec3 tau;
  for (int i = 0; i < 3; ++i)
    tau[i] = (2.0 * std::clamp(a.a[i], 0.0, 1.0) - 1.0) * params.max_wheel_torque;
  return tau;
}

Vec3 wheel_torque_map(const Action& a, const PhysicalParams& params) {
  const WheelGeometry geom(params);
  return geom.coupling() * wheel_command_torques(a, params);
}

namespace {

void check_finite(const BallbotState& s, const char* where) {
  const bool ok = s.ball_position.allFinite() && s.ball_velocity.allFinite() &&
                  s.ball_omega.allFinite() && s.body_omega.allFinite() &&
                  s.wheel_speeds.allFinite() && std::isfinite(s.body_orientation.w()) &&
                  s.body_orientation.vec().allFinite();
  if (!ok) {
    std::ostringstream msg;
    msg << "simulation diverged (" << where << "): non-finite state at t=" << s.time;
    throw SimulationDiverged(msg.str(), s.time);
  }
}

// Surface point nearest to the ball center along the local normal, found by
// a short fixed-point iteration (terrain slopes are bounded).
void locate_contact(const Vec3& center, const HeightField& terrain, double radius,
                    Vec3& surface_point, Vec3& normal, double& center_distance) {
  double cx = center.x(), cy = center.y();
  for (int it = 0; it < 3; ++it) {
    const Vec3 n = terrain.surface_normal(cx, cy);
    cx = center.x() - radius * n.x();
    cy = center.y() - radius * n.y();
  }
  normal = terrain.surface_normal(cx, cy);
  surface_point = Vec3(cx, cy, terrain.height(cx, cy));
  center_distance = (center - surface_point).dot(normal);
}

}  // namespace

ContactFrame compute_contact(const BallbotState& state, const HeightField& terrain,
                             const PhysicalParams& params) {
  const Vec3& p = state.ball_position;
  if (p.z() < terrain.height(p.x(), p.y())) {
    std::ostringstream msg;
    msg << "non-recoverable penetration: ball center below surface at t=" << state.time;
    throw SimulationDiverged(msg.str(), state.time);
  }

  ContactFrame frame;
  Vec3 surface_point, n;
  double dist;
  locate_contact(p, terrain, params.ball_radius, surface_point, n, dist);

  frame.normal = n;
  frame.tangent1 = (std::abs(n.z()) > 0.999) ? Vec3::UnitX()
                                             : Vec3(Vec3::UnitZ().cross(n)).normalized();
  frame.tangent2 = n.cross(frame.tangent1);

  const double penetration = params.ball_radius - dist;
  if (penetration <= 0.0) {
    frame.point = p - params.ball_radius * n;
    return frame;  // airborne: N = 0
  }

  frame.in_contact = true;
  frame.point = p - dist * n;
  const double pen_rate = -state.ball_velocity.dot(n);
  frame.normal_force = std::max(
      0.0, params.contact_stiffness * penetration + params.contact_damping * pen_rate);

  const Vec3 v_contact = state.ball_velocity + state.ball_omega.cross(frame.point - p);
  frame.slip_velocity = v_contact - v_contact.dot(n) * n;
  return frame;
}

BallbotState step(const BallbotState& state, const Action& action,
                  const HeightField& terrain, const PhysicalParams& params, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("step: dt must be > 0");
  check_finite(state, "input");

  const WheelGeometry geom(params);
  const Mat3 body_rot = state.body_orientation.toRotationMatrix();
  const double m_ball = params.ball_mass, m_body = params.body_mass;
  const Vec3 gravity(0.0, 0.0, -params.gravity);

  // Ground contact: spring-damper normal plus Coulomb friction. The friction
  // impulse is capped at what would cancel the slip this step (stick/rolling)
  // and at mu*N (kinetic sliding).
  const ContactFrame contact = compute_contact(state, terrain, params);
  Vec3 contact_force = Vec3::Zero();
  if (contact.in_contact) {
    contact_force = contact.normal_force * contact.normal;
    const double slip = contact.slip_velocity.norm();
    if (slip > 1e-12) {
      const double inv_eff_mass =
          1.0 / m_ball + params.ball_radius * params.ball_radius / params.ball_inertia;
      const double stick_force = slip / (dt * inv_eff_mass);
      const double friction = std::min(stick_force, params.friction_mu * contact.normal_force);
      contact_force -= friction * (contact.slip_velocity / slip);
    }
  }

  // Drive: commanded wheel torques, slip-capped, plus back-drive and idler
  // damping on the relative ball-body rotation. Ball and body receive an
  // equal and opposite couple.
  const Vec3 tau_cmd = wheel_command_torques(action, params);
  const double cap = params.drive_slip_cap * params.ball_radius;
  const Vec3 omega_rel = state.ball_omega - state.body_omega;
  Vec3 tau_couple_world = Vec3::Zero();
  Vec3 tau_transmitted;
  for (int i = 0; i < 3; ++i) {
    tau_transmitted[i] = std::clamp(tau_cmd[i], -cap, cap);
    const Vec3 j_w = body_rot * geom.coupling_col(i);
    const Vec3 d_w = body_rot * geom.drive_dir(i);
    tau_couple_world += tau_transmitted[i] * j_w;
    tau_couple_world -= params.drive_damping * omega_rel.dot(j_w) * j_w;
    tau_couple_world -= params.idler_damping * omega_rel.dot(d_w) * d_w;
  }

  // Reduced-coordinate two-body solve. Unknown body angular acceleration
  // alpha solves M_eff alpha = rhs, then the joint force and ball linear
  // acceleration follow.
  const Vec3 r = body_rot * Vec3(0.0, 0.0, params.com_height);  // pivot -> COM
  const Mat3 inertia_world =
      body_rot * params.body_inertia.asDiagonal() * body_rot.transpose();
  const double mass_ratio = 1.0 + m_body / m_ball;
  const Vec3 accel_free = gravity + contact_force / m_ball;
  const Vec3 centripetal = state.body_omega.cross(state.body_omega.cross(r));
  const Vec3 d_vec = m_body * (accel_free + centripetal - gravity);

  const Mat3 m_eff = inertia_world +
                     (m_body / mass_ratio) *
                         (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
  const Vec3 rhs = -(1.0 / mass_ratio) * r.cross(d_vec) - tau_couple_world -
                   state.body_omega.cross(inertia_world * state.body_omega);
  const Vec3 alpha_body = m_eff.ldlt().solve(rhs);
  const Vec3 joint_force = (m_body * alpha_body.cross(r) + d_vec) / mass_ratio;
  const Vec3 accel_ball = accel_free - joint_force / m_ball;

  const Vec3 tau_contact = contact.in_contact
                               ? Vec3((contact.point - state.ball_position).cross(contact_force))
                               : Vec3::Zero();
  const Vec3 alpha_ball = (tau_contact + tau_couple_world) / params.ball_inertia;

  BallbotState next = state;
  next.ball_velocity += dt * accel_ball;
  next.ball_omega += dt * alpha_ball;
  next.body_omega += dt * alpha_body;
  next.ball_position += dt * next.ball_velocity;
  next.body_orientation = integrate_quat(state.body_orientation, next.body_omega, dt);
  next.time = state.time + dt;

  // Wheel speeds follow the no-slip kinematics; when the slip cap binds the
  // untransmitted torque spins the rotor up instead.
  const Mat3 body_rot_next = next.body_orientation.toRotationMatrix();
  const Vec3 omega_rel_next = next.ball_omega - next.body_omega;
  for (int i = 0; i < 3; ++i) {
    const Vec3 j_w = body_rot_next * geom.coupling_col(i);
    const double surface_speed = params.ball_radius * omega_rel_next.dot(j_w);
    next.wheel_speeds[i] = surface_speed / params.wheel_radius +
                           dt * (tau_cmd[i] - tau_transmitted[i]) / params.wheel_inertia;
  }

  check_finite(next, "output");
  return next;
}

double tilt_angle(const BallbotState& state) {
  const Vec3 body_z = state.body_orientation * Vec3::UnitZ();
  const double c = std::clamp(body_z.z() / body_z.norm(), -1.0, 1.0);
  return rad_to_deg(std::acos(c));
}

bool is_failure(const BallbotState& state) {
  return tilt_angle(state) > kFailureTiltDeg;
}

BallbotState rest_state(const HeightField& terrain, const PhysicalParams& params,
                        double x, double y, double tilt_deg, double tilt_axis_azimuth_rad) {
  // Settle the contact spring so N exactly carries the weight.
  const double settle = params.total_mass() * params.gravity / params.contact_stiffness;

  Vec3 surface_point, n;
  double dist;
  locate_contact(Vec3(x, y, terrain.height(x, y) + params.ball_radius), terrain,
                 params.ball_radius, surface_point, n, dist);

  BallbotState s;
  s.ball_position = surface_point + (params.ball_radius - settle) * n;
  if (tilt_deg != 0.0) {
    const Vec3 axis(std::cos(tilt_axis_azimuth_rad), std::sin(tilt_axis_azimuth_rad), 0.0);
    s.body_orientation = Quat(Eigen::AngleAxisd(deg_to_rad(tilt_deg), axis));
  }
  return s;
}

double total_energy(const BallbotState& state, const HeightField& terrain,
                    const PhysicalParams& params) {
  const Mat3 body_rot = state.body_orientation.toRotationMatrix();
  const Vec3 r = body_rot * Vec3(0.0, 0.0, params.com_height);
  const Vec3 com_velocity = state.ball_velocity + state.body_omega.cross(r);
  const Mat3 inertia_world =
      body_rot * params.body_inertia.asDiagonal() * body_rot.transpose();

  double e = 0.5 * params.ball_mass * state.ball_velocity.squaredNorm();
  e += 0.5 * params.ball_inertia * state.ball_omega.squaredNorm();
  e += 0.5 * params.body_mass * com_velocity.squaredNorm();
  e += 0.5 * state.body_omega.dot(inertia_world * state.body_omega);
  e += params.ball_mass * params.gravity * state.ball_position.z();
  e += params.body_mass * params.gravity * (state.ball_position + r).z();

  Vec3 surface_point, n;
  double dist;
  locate_contact(state.ball_position, terrain, params.ball_radius, surface_point, n, dist);
  const double penetration = params.ball_radius - dist;
  if (penetration > 0.0)
    e += 0.5 * params.contact_stiffness * penetration * penetration;
  return e;
}

}  // namespace ballbot
