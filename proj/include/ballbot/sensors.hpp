#pragma once

#include <string>
#include <vector>

#include "ballbot/dynamics.hpp"
#include "ballbot/geometry.hpp"
#include "ballbot/terrain.hpp"

namespace ballbot {

struct RigParams {
  bool enabled = true;        // false: proprio-only flat mode
  int resolution = 32;        // pixels per side (paper-scale: 128)
  double fov_v_deg = 60.0;
  double fov_h_deg = 60.0;
  double near_clip = 0.05;    // m
  double far_clip = 2.0;      // m
  double frame_hz = 80.0;
  double mount_height = 0.3;  // m above ball center, body frame
  double mount_radius = 0.06; // m radial offset from body axis
  double azimuth_deg = 35.0;  // cameras at +/- this azimuth about forward (+y)
  double aim_depth = 0.12;    // m below ball center the optical axes converge

  double frame_interval() const { return 1.0 / frame_hz; }
  void validate() const;
};

// Two-camera rig fixed to the body; optical axes pass through the nominal
// ball-ground contact point when upright.
class DepthCameraRig {
 public:
  explicit DepthCameraRig(const RigParams& params);

  const RigParams& params() const { return params_; }
  // Mounting pose, body frame.
  const Vec3& camera_position(int index) const { return positions_[index]; }
  const Mat3& camera_basis(int index) const { return bases_[index]; }  // cols: right, down, forward

 private:
  RigParams params_;
  Vec3 positions_[2];
  Mat3 bases_[2];
};

struct DepthFrame {
  int resolution = 0;
  std::vector<float> depths;  // normalized [0,1], row-major; 1.0 = far clip / miss
  double capture_time = 0.0;

  void write_pgm16(const std::string& path) const;
};

// Ray-march one camera against the terrain height function.
DepthFrame render_depth(const BallbotState& state, const HeightField& terrain,
                        const DepthCameraRig& rig, int camera_index);

// Camera shutter bookkeeping for the control/camera rate mismatch.
class CameraClock {
 public:
  struct Sample {
    bool use_new_frame = false;
    double dt_since_frame = 0.0;
  };

  void reset() { last_capture_ = 0.0; started_ = false; }
  Sample tick(double sim_time, const RigParams& rig);
  double last_capture_time() const { return last_capture_; }

 private:
  double last_capture_ = 0.0;
  bool started_ = false;
};

inline constexpr int kEmbeddingDim = 20;
inline constexpr int kProprioDim = 15;
inline constexpr int kObservationDim = 56;  // 15 + 20 + 20 + 1

struct Observation {
  std::vector<double> values;
  bool proprio_only = false;

  int dim() const { return static_cast<int>(values.size()); }
};

// Fixed layout: (rpy, body omega, velocity, wheel speeds, last action,
// z1, z2, dt). Proprio-only mode stops after the last action.
Observation assemble_observation(const BallbotState& state, const Action& last_action,
                                 const std::vector<double>& z1,
                                 const std::vector<double>& z2, double dt_since_frame,
                                 bool proprio_only);

}  // namespace ballbot
