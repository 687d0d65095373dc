#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace ballbot {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Intrinsic roll-pitch-yaw (x-y'-z'' convention): q = Rz(yaw)*Ry(pitch)*Rx(roll).
inline Vec3 quat_to_rpy(const Quat& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double sinr = 2.0 * (w * x + y * z);
  const double cosr = 1.0 - 2.0 * (x * x + y * y);
  const double roll = std::atan2(sinr, cosr);
  double sinp = 2.0 * (w * y - z * x);
  sinp = std::clamp(sinp, -1.0, 1.0);
  const double pitch = std::asin(sinp);
  const double siny = 2.0 * (w * z + x * y);
  const double cosy = 1.0 - 2.0 * (y * y + z * z);
  const double yaw = std::atan2(siny, cosy);
  return {roll, pitch, yaw};
}

// Quaternion derivative integration: q' = q + dt/2 * omega_world (*) q, renormalized.
inline Quat integrate_quat(const Quat& q, const Vec3& omega_world, double dt) {
  const Quat omega_q(0.0, omega_world.x(), omega_world.y(), omega_world.z());
  Quat dq = omega_q * q;
  Quat out(q.w() + 0.5 * dt * dq.w(), q.x() + 0.5 * dt * dq.x(),
           q.y() + 0.5 * dt * dq.y(), q.z() + 0.5 * dt * dq.z());
  out.normalize();
  return out;
}

}  // namespace ballbot
