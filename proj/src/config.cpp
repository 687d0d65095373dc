#include "ballbot/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ballbot/errors.hpp"

namespace ballbot {

using nlohmann::json;

void RewardParams::validate() const {
  if (alpha_velocity < 0.0 || alpha_survival < 0.0 || alpha_action < 0.0)
    throw InvalidParameter("reward: coefficients must be >= 0");
  if (std::abs(goal_direction.norm() - 1.0) > 1e-9)
    throw InvalidParameter("reward: goal direction must be unit norm");
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameter("ppo: gamma must be in (0,1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw InvalidParameter("ppo: lambda must be in [0,1]");
  if (!(clip_range > 0.0)) throw InvalidParameter("ppo: clip range must be > 0");
  if (batch_size <= 0 || rollout_size() % batch_size != 0)
    throw InvalidParameter("ppo: batch size must divide the rollout size");
  if (num_envs <= 0 || steps_per_rollout <= 0 || epochs_per_update <= 0 || horizon <= 0)
    throw InvalidParameter("ppo: counts must be positive");
  if (!(learning_rate > 0.0) || !(lr_divisor > 1.0))
    throw InvalidParameter("ppo: bad learning-rate schedule");
}

double PpoConfig::lr_at_step(long long env_steps) const {
  double lr = learning_rate;
  for (long long milestone : lr_milestones)
    if (env_steps >= milestone) lr /= lr_divisor;
  return lr;
}

void EvalConfig::validate() const {
  if (num_envs <= 0 || horizon <= 0) throw InvalidParameter("eval: counts must be positive");
}

void PidGains::validate() const {
  for (double g : {inner_kp, inner_ki, inner_kd, outer_kp, outer_ki, outer_kd})
    if (!std::isfinite(g)) throw InvalidParameter("pid: gains must be finite");
  if (!(integrator_clamp > 0.0)) throw InvalidParameter("pid: integrator clamp must be > 0");
  if (!(max_lean_deg > 0.0 && max_lean_deg < kFailureTiltDeg))
    throw InvalidParameter("pid: max lean must be in (0, 20) degrees");
}

void RunConfig::validate() const {
  terrain.validate();
  physics.validate();
  rig.validate();
  reward.validate();
  ppo.validate();
  eval.validate();
  pid.validate();
}

namespace {

class SectionReader {
 public:
  SectionReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {}
  ~SectionReader() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) out = it->get<T>();
  }

  void get_vec2(const char* key, Vec2& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      auto v = it->get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError("config [" + section_ + "] " + key +
                                           ": expected 2 elements");
      out = Vec2(v[0], v[1]);
    }
  }

  void get_vec3(const char* key, Vec3& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      auto v = it->get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("config [" + section_ + "] " + key +
                                           ": expected 3 elements");
      out = Vec3(v[0], v[1], v[2]);
    }
  }

  void get_arr3(const char* key, std::array<double, 3>& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      auto v = it->get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("config [" + section_ + "] " + key +
                                           ": expected 3 elements");
      std::copy(v.begin(), v.end(), out.begin());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError("config [" + section_ + "]: unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

json section_or_empty(const json& root, const char* name) {
  if (auto it = root.find(name); it != root.end()) {
    if (!it->is_object()) throw ConfigError(std::string("config: section '") + name +
                                            "' must be an object");
    return *it;
  }
  return json::object();
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  static const std::set<std::string> known = {"terrain", "physics", "rig", "reward",
                                              "ppo",     "eval",    "pid"};
  for (auto it = root.begin(); it != root.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config: unknown section '" + it.key() + "'");

  RunConfig cfg;
  {
    SectionReader r(section_or_empty(root, "terrain"), "terrain");
    r.get("scale", cfg.terrain.scale);
    r.get("octaves", cfg.terrain.octaves);
    r.get("persistence", cfg.terrain.persistence);
    r.get("lacunarity", cfg.terrain.lacunarity);
    r.get("amplitude", cfg.terrain.amplitude);
    r.get("seed", cfg.terrain.seed);
    r.finish();
  }
  {
    SectionReader r(section_or_empty(root, "physics"), "physics");
    r.get("ball_radius", cfg.physics.ball_radius);
    r.get("ball_mass", cfg.physics.ball_mass);
    r.get("ball_inertia", cfg.physics.ball_inertia);
    r.get("body_mass", cfg.physics.body_mass);
    r.get_vec3("body_inertia", cfg.physics.body_inertia);
    r.get("com_height", cfg.physics.com_height);
    r.get_arr3("wheel_azimuth_deg", cfg.physics.wheel_azimuth_deg);
    r.get("wheel_zenith_deg", cfg.physics.wheel_zenith_deg);
    r.get("wheel_radius", cfg.physics.wheel_radius);
    r.get("wheel_inertia", cfg.physics.wheel_inertia);
    r.get("max_wheel_torque", cfg.physics.max_wheel_torque);
    r.get("friction_mu", cfg.physics.friction_mu);
    r.get("drive_slip_cap", cfg.physics.drive_slip_cap);
    r.get("drive_damping", cfg.physics.drive_damping);
    r.get("idler_damping", cfg.physics.idler_damping);
    r.get("contact_stiffness", cfg.physics.contact_stiffness);
    r.get("contact_damping", cfg.physics.contact_damping);
    r.get("gravity", cfg.physics.gravity);
    r.finish();
  }
  {
    SectionReader r(section_or_empty(root, "rig"), "rig");
    r.get("enabled", cfg.rig.enabled);
    r.get("resolution", cfg.rig.resolution);
    r.get("fov_v_deg", cfg.rig.fov_v_deg);
    r.get("fov_h_deg", cfg.rig.fov_h_deg);
    r.get("near_clip", cfg.rig.near_clip);
    r.get("far_clip", cfg.rig.far_clip);
    r.get("frame_hz", cfg.rig.frame_hz);
    r.get("mount_height", cfg.rig.mount_height);
    r.get("mount_radius", cfg.rig.mount_radius);
    r.get("azimuth_deg", cfg.rig.azimuth_deg);
    r.get("aim_depth", cfg.rig.aim_depth);
    r.finish();
  }
  {
    SectionReader r(section_or_empty(root, "reward"), "reward");
    r.get("alpha_velocity", cfg.reward.alpha_velocity);
    r.get("alpha_survival", cfg.reward.alpha_survival);
    r.get("alpha_action", cfg.reward.alpha_action);
    r.get_vec2("goal_direction", cfg.reward.goal_direction);
    r.finish();
  }
  {
    SectionReader r(section_or_empty(root, "ppo"), "ppo");
    r.get("gamma", cfg.ppo.gamma);
    r.get("gae_lambda", cfg.ppo.gae_lambda);
    r.get("clip_range", cfg.ppo.clip_range);
    r.get("entropy_coef", cfg.ppo.entropy_coef);
    r.get("value_coef", cfg.ppo.value_coef);
    r.get("batch_size", cfg.ppo.batch_size);
    r.get("epochs_per_update", cfg.ppo.epochs_per_update);
    r.get("steps_per_rollout", cfg.ppo.steps_per_rollout);
    r.get("target_kl", cfg.ppo.target_kl);
    r.get("num_envs", cfg.ppo.num_envs);
    r.get("weight_decay", cfg.ppo.weight_decay);
    r.get("total_steps", cfg.ppo.total_steps);
    r.get("learning_rate", cfg.ppo.learning_rate);
    r.get("lr_milestones", cfg.ppo.lr_milestones);
    r.get("lr_divisor", cfg.ppo.lr_divisor);
    r.get("normalize_advantages", cfg.ppo.normalize_advantages);
    r.get("horizon", cfg.ppo.horizon);
    r.get("init_tilt_deg", cfg.ppo.init_tilt_deg);
    r.get("eval_every_updates", cfg.ppo.eval_every_updates);
    r.get("finetune_encoder", cfg.ppo.finetune_encoder);
    r.get("encoder_checkpoint", cfg.ppo.encoder_checkpoint);
    r.finish();
  }
  {
    SectionReader r(section_or_empty(root, "eval"), "eval");
    r.get("num_envs", cfg.eval.num_envs);
    r.get("horizon", cfg.eval.horizon);
    r.get("stochastic", cfg.eval.stochastic);
    r.finish();
  }
  {
    SectionReader r(section_or_empty(root, "pid"), "pid");
    r.get("inner_kp", cfg.pid.inner_kp);
    r.get("inner_ki", cfg.pid.inner_ki);
    r.get("inner_kd", cfg.pid.inner_kd);
    r.get("outer_kp", cfg.pid.outer_kp);
    r.get("outer_ki", cfg.pid.outer_ki);
    r.get("outer_kd", cfg.pid.outer_kd);
    r.get("integrator_clamp", cfg.pid.integrator_clamp);
    r.get("max_lean_deg", cfg.pid.max_lean_deg);
    r.get("target_speed", cfg.pid.target_speed);
    r.finish();
  }
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_json() const {
  json root;
  root["terrain"] = {{"scale", terrain.scale},
                     {"octaves", terrain.octaves},
                     {"persistence", terrain.persistence},
                     {"lacunarity", terrain.lacunarity},
                     {"amplitude", terrain.amplitude},
                     {"seed", terrain.seed}};
  root["physics"] = {
      {"ball_radius", physics.ball_radius},
      {"ball_mass", physics.ball_mass},
      {"ball_inertia", physics.ball_inertia},
      {"body_mass", physics.body_mass},
      {"body_inertia", {physics.body_inertia.x(), physics.body_inertia.y(),
                        physics.body_inertia.z()}},
      {"com_height", physics.com_height},
      {"wheel_azimuth_deg", physics.wheel_azimuth_deg},
      {"wheel_zenith_deg", physics.wheel_zenith_deg},
      {"wheel_radius", physics.wheel_radius},
      {"wheel_inertia", physics.wheel_inertia},
      {"max_wheel_torque", physics.max_wheel_torque},
      {"friction_mu", physics.friction_mu},
      {"drive_slip_cap", physics.drive_slip_cap},
      {"drive_damping", physics.drive_damping},
      {"idler_damping", physics.idler_damping},
      {"contact_stiffness", physics.contact_stiffness},
      {"contact_damping", physics.contact_damping},
      {"gravity", physics.gravity}};
  root["rig"] = {{"enabled", rig.enabled},
                 {"resolution", rig.resolution},
                 {"fov_v_deg", rig.fov_v_deg},
                 {"fov_h_deg", rig.fov_h_deg},
                 {"near_clip", rig.near_clip},
                 {"far_clip", rig.far_clip},
                 {"frame_hz", rig.frame_hz},
                 {"mount_height", rig.mount_height},
                 {"mount_radius", rig.mount_radius},
                 {"azimuth_deg", rig.azimuth_deg},
                 {"aim_depth", rig.aim_depth}};
  root["reward"] = {{"alpha_velocity", reward.alpha_velocity},
                    {"alpha_survival", reward.alpha_survival},
                    {"alpha_action", reward.alpha_action},
                    {"goal_direction", {reward.goal_direction.x(), reward.goal_direction.y()}}};
  root["ppo"] = {{"gamma", ppo.gamma},
                 {"gae_lambda", ppo.gae_lambda},
                 {"clip_range", ppo.clip_range},
                 {"entropy_coef", ppo.entropy_coef},
                 {"value_coef", ppo.value_coef},
                 {"batch_size", ppo.batch_size},
                 {"epochs_per_update", ppo.epochs_per_update},
                 {"steps_per_rollout", ppo.steps_per_rollout},
                 {"target_kl", ppo.target_kl},
                 {"num_envs", ppo.num_envs},
                 {"weight_decay", ppo.weight_decay},
                 {"total_steps", ppo.total_steps},
                 {"learning_rate", ppo.learning_rate},
                 {"lr_milestones", ppo.lr_milestones},
                 {"lr_divisor", ppo.lr_divisor},
                 {"normalize_advantages", ppo.normalize_advantages},
                 {"horizon", ppo.horizon},
                 {"init_tilt_deg", ppo.init_tilt_deg},
                 {"eval_every_updates", ppo.eval_every_updates},
                 {"finetune_encoder", ppo.finetune_encoder},
                 {"encoder_checkpoint", ppo.encoder_checkpoint}};
  root["eval"] = {{"num_envs", eval.num_envs},
                  {"horizon", eval.horizon},
                  {"stochastic", eval.stochastic}};
  root["pid"] = {{"inner_kp", pid.inner_kp},
                 {"inner_ki", pid.inner_ki},
                 {"inner_kd", pid.inner_kd},
                 {"outer_kp", pid.outer_kp},
                 {"outer_ki", pid.outer_ki},
                 {"outer_kd", pid.outer_kd},
                 {"integrator_clamp", pid.integrator_clamp},
                 {"max_lean_deg", pid.max_lean_deg},
                 {"target_speed", pid.target_speed}};
  return root.dump(2);
}

std::uint64_t RunConfig::hash() const {
  const std::string text = to_json();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << to_json() << "\n";
}

}  // namespace ballbot
