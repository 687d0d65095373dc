#pragma once

#include <array>
#include <cstdint>

#include "ballbot/geometry.hpp"
#include "ballbot/terrain.hpp"

namespace ballbot {

// Normalized motor commands, one per omniwheel, each in [0, 1].
// 0.5 encodes zero torque; 0 and 1 are full reverse/forward.
struct Action {
  std::array<double, 3> a{0.5, 0.5, 0.5};

  static Action clamped(double a0, double a1, double a2);
  double squared_norm() const { return a[0] * a[0] + a[1] * a[1] + a[2] * a[2]; }
};

struct PhysicalParams {
  double ball_radius = 0.12;        // m
  double ball_mass = 2.0;           // kg
  double ball_inertia = 0.0192;     // kg m^2 (hollow shell: 2/3 m R^2)
  double body_mass = 8.0;           // kg
  Vec3 body_inertia{0.3, 0.3, 0.12};  // kg m^2, principal diag in body frame
  double com_height = 0.3;          // m, body COM above ball center
  std::array<double, 3> wheel_azimuth_deg{0.0, 120.0, 240.0};
  double wheel_zenith_deg = 45.0;   // angle from body z-axis to wheel contact
  double wheel_radius = 0.05;       // m
  double wheel_inertia = 2.0e-4;    // kg m^2, rotor + gearing
  double max_wheel_torque = 4.0;    // N m
  double friction_mu = 0.8;         // ball-ground Coulomb coefficient
  double drive_slip_cap = 60.0;     // N, max tangential force a wheel transmits
  double drive_damping = 0.02;      // N m s, back-drive resistance per wheel
  double idler_damping = 1.0e-4;    // N m s, idler-roller resistance per wheel
  double contact_stiffness = 2.0e5; // N/m
  double contact_damping = 500.0;   // N s/m
  double gravity = 9.81;            // m/s^2

  void validate() const;
  double total_mass() const { return ball_mass + body_mass; }
};

struct BallbotState {
  Vec3 ball_position = Vec3::Zero();      // ball center, world frame (m)
  Vec3 ball_velocity = Vec3::Zero();      // m/s
  Vec3 ball_omega = Vec3::Zero();         // rad/s, world frame
  Quat body_orientation = Quat::Identity();  // body -> world
  Vec3 body_omega = Vec3::Zero();         // rad/s, world frame
  Vec3 wheel_speeds = Vec3::Zero();       // rad/s, wheel frames
  double time = 0.0;                      // s
};

struct ContactFrame {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 tangent1 = Vec3::UnitX();
  Vec3 tangent2 = Vec3::UnitY();
  double normal_force = 0.0;   // N, >= 0
  Vec3 slip_velocity = Vec3::Zero();  // tangential relative velocity at contact
  bool in_contact = false;
};

// Fixed wheel geometry derived from azimuths/zenith, all in the body frame:
// contact direction u_i (ball center -> wheel contact), drive direction d_i
// (tangent, azimuthal), torque coupling column j_i = u_i x d_i.
class WheelGeometry {
 public:
  explicit WheelGeometry(const PhysicalParams& params);

  const Vec3& contact_dir(int i) const { return u_[i]; }
  const Vec3& drive_dir(int i) const { return d_[i]; }
  const Vec3& coupling_col(int i) const { return j_[i]; }
  const Mat3& coupling() const { return coupling_; }        // J, columns j_i
  const Mat3& coupling_inv() const { return coupling_inv_; }

 private:
  std::array<Vec3, 3> u_, d_, j_;
  Mat3 coupling_, coupling_inv_;
};

// Per-wheel torque from normalized commands: tau_i = (2 a_i - 1) * tau_max.
Vec3 wheel_command_torques(const Action& a, const PhysicalParams& params);

// Ball torque in the body frame for a command: tau_ball = J * tau_wheels.
Vec3 wheel_torque_map(const Action& a, const PhysicalParams& params);

// Locate the ball-terrain contact and evaluate the spring-damper normal force.
// Throws SimulationDiverged if the ball center is below the surface.
ContactFrame compute_contact(const BallbotState& state, const HeightField& terrain,
                             const PhysicalParams& params);

// One semi-implicit Euler step of the two-body model at dt (default 2 ms).
// Throws SimulationDiverged on NaN/Inf.
BallbotState step(const BallbotState& state, const Action& action,
                  const HeightField& terrain, const PhysicalParams& params,
                  double dt = 0.002);

// Angle between the body z-axis and world up, degrees in [0, 180].
double tilt_angle(const BallbotState& state);

// Failure iff tilt strictly exceeds 20 degrees.
bool is_failure(const BallbotState& state);
inline constexpr double kFailureTiltDeg = 20.0;

// Upright state resting at the settled contact compression above (x, y),
// optionally tilted by tilt_deg about the given horizontal axis azimuth.
BallbotState rest_state(const HeightField& terrain, const PhysicalParams& params,
                        double x = 0.0, double y = 0.0, double tilt_deg = 0.0,
                        double tilt_axis_azimuth_rad = 0.0);

// Kinetic + gravitational potential + contact spring energy; used by the
// energy-conservation and dissipation tests.
double total_energy(const BallbotState& state, const HeightField& terrain,
                    const PhysicalParams& params);

}  // namespace ballbot
