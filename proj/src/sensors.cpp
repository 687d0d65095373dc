#include "ballbot/sensors.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "ballbot/errors.hpp"

namespace ballbot {

void RigParams::validate() const {
  if (resolution < 8) throw InvalidParameter("rig: resolution must be >= 8");
  if (!(near_clip > 0.0 && near_clip < far_clip))
    throw InvalidParameter("rig: need 0 < near < far");
  if (!(frame_hz > 0.0)) throw InvalidParameter("rig: frame_hz must be > 0");
  if (!(fov_v_deg > 0.0 && fov_v_deg < 180.0 && fov_h_deg > 0.0 && fov_h_deg < 180.0))
    throw InvalidParameter("rig: FOV must be in (0, 180) degrees");
}

DepthCameraRig::DepthCameraRig(const RigParams& params) : params_(params) {
  params_.validate();
  const Vec3 aim(0.0, 0.0, -params_.aim_depth);
  for (int k = 0; k < 2; ++k) {
    // Forward is +y; cameras sit at +/- azimuth around the body axis.
    const double az = deg_to_rad((k == 0 ? 1.0 : -1.0) * params_.azimuth_deg);
    const Vec3 pos(params_.mount_radius * std::sin(az), params_.mount_radius * std::cos(az),
                   params_.mount_height);
    const Vec3 forward = (aim - pos).normalized();
    Vec3 right = forward.cross(Vec3::UnitZ());
    if (right.norm() < 1e-9) right = Vec3::UnitX();
    right.normalize();
    const Vec3 down = forward.cross(right);
    positions_[k] = pos;
    bases_[k].col(0) = right;
    bases_[k].col(1) = down;
    bases_[k].col(2) = forward;
  }
}

namespace {

constexpr double kMarchStep = 0.05;     // m
constexpr double kBisectTol = 1.0e-4;   // m

// Signed clearance of the ray point above the terrain.
inline double clearance(const HeightField& terrain, const Vec3& origin, const Vec3& dir,
                        double t) {
  const Vec3 p = origin + t * dir;
  return p.z() - terrain.height(p.x(), p.y());
}

double march_ray(const HeightField& terrain, const Vec3& origin, const Vec3& dir,
                 double near, double far, double band) {
  double t = near;
  // Skip ahead to where the ray can first reach the terrain band.
  if (std::isfinite(band) && origin.z() + t * dir.z() > band) {
    if (dir.z() >= 0.0) return far;  // climbing away: miss
    t = std::max(t, (origin.z() - band) / -dir.z());
    if (t >= far) return far;
  }

  double phi = clearance(terrain, origin, dir, t);
  if (phi <= 0.0) return t;  // already at/under the surface
  while (t < far) {
    const double t_next = std::min(t + kMarchStep, far);
    const double phi_next = clearance(terrain, origin, dir, t_next);
    if (phi_next <= 0.0) {
      double lo = t, hi = t_next;
      while (hi - lo > kBisectTol) {
        const double mid = 0.5 * (lo + hi);
        (clearance(terrain, origin, dir, mid) <= 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    if (std::isfinite(band) && origin.z() + t_next * dir.z() > band && dir.z() >= 0.0)
      return far;
    t = t_next;
    phi = phi_next;
  }
  return far;
}

double field_band(const HeightField& terrain) {
  if (const auto* tf = dynamic_cast<const TerrainField*>(&terrain))
    return tf->params().height_bound();
  return std::numeric_limits<double>::infinity();
}

}  // namespace

DepthFrame render_depth(const BallbotState& state, const HeightField& terrain,
                        const DepthCameraRig& rig, int camera_index) {
  if (camera_index < 0 || camera_index > 1)
    throw InvalidParameter("render_depth: camera_index must be 0 or 1");
  const RigParams& rp = rig.params();
  const Mat3 body_rot = state.body_orientation.toRotationMatrix();
  const Vec3 origin = state.ball_position + body_rot * rig.camera_position(camera_index);
  const Mat3 basis = body_rot * rig.camera_basis(camera_index);
  const Vec3 right = basis.col(0), down = basis.col(1), forward = basis.col(2);

  const double tan_h = std::tan(0.5 * deg_to_rad(rp.fov_h_deg));
  const double tan_v = std::tan(0.5 * deg_to_rad(rp.fov_v_deg));
  const double band = field_band(terrain);
  const int res = rp.resolution;

  DepthFrame frame;
  frame.resolution = res;
  frame.capture_time = state.time;
  frame.depths.resize(static_cast<std::size_t>(res) * res);
  const double inv_span = 1.0 / (rp.far_clip - rp.near_clip);
  for (int row = 0; row < res; ++row) {
    const double v = (2.0 * (row + 0.5) / res - 1.0) * tan_v;
    for (int col = 0; col < res; ++col) {
      const double u = (2.0 * (col + 0.5) / res - 1.0) * tan_h;
      const Vec3 dir = (forward + u * right + v * down).normalized();
      const double t = march_ray(terrain, origin, dir, rp.near_clip, rp.far_clip, band);
      const double depth = std::clamp((t - rp.near_clip) * inv_span, 0.0, 1.0);
      frame.depths[static_cast<std::size_t>(row) * res + col] = static_cast<float>(depth);
    }
  }
  return frame;
}

void DepthFrame::write_pgm16(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P5\n" << resolution << " " << resolution << "\n65535\n";
  for (float d : depths) {
    const auto v = static_cast<std::uint16_t>(
        std::lround(std::clamp(static_cast<double>(d), 0.0, 1.0) * 65535.0));
    const unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
}

CameraClock::Sample CameraClock::tick(double sim_time, const RigParams& rig) {
  Sample s;
  if (!started_ || sim_time - last_capture_ >= rig.frame_interval() - 1e-9) {
    started_ = true;
    last_capture_ = sim_time;
    s.use_new_frame = true;
  }
  s.dt_since_frame = sim_time - last_capture_;
  return s;
}

Observation assemble_observation(const BallbotState& state, const Action& last_action,
                                 const std::vector<double>& z1,
                                 const std::vector<double>& z2, double dt_since_frame,
                                 bool proprio_only) {
  Observation obs;
  obs.proprio_only = proprio_only;
  obs.values.reserve(proprio_only ? kProprioDim : kObservationDim);

  const Vec3 rpy = quat_to_rpy(state.body_orientation);
  for (int i = 0; i < 3; ++i) obs.values.push_back(rpy[i]);
  for (int i = 0; i < 3; ++i) obs.values.push_back(state.body_omega[i]);
  for (int i = 0; i < 3; ++i) obs.values.push_back(state.ball_velocity[i]);
  for (int i = 0; i < 3; ++i) obs.values.push_back(state.wheel_speeds[i]);
  for (int i = 0; i < 3; ++i) obs.values.push_back(last_action.a[i]);
  if (proprio_only) return obs;

  if (z1.size() != kEmbeddingDim || z2.size() != kEmbeddingDim)
    throw InvalidParameter("assemble_observation: embeddings must have dimension 20");
  obs.values.insert(obs.values.end(), z1.begin(), z1.end());
  obs.values.insert(obs.values.end(), z2.begin(), z2.end());
  obs.values.push_back(dt_since_frame);
  if (obs.dim() != kObservationDim)
    throw InvalidParameter("assemble_observation: bad observation dimension");
  return obs;
}

}  // namespace ballbot
