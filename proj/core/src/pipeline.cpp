#include "cocarry/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "cocarry/ik.hpp"

namespace fs = std::filesystem;

namespace cocarry {

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

Eigen::Quaterniond quat_from(const Config& cfg, const std::string& key) {
  if (!cfg.has(key)) return Eigen::Quaterniond::Identity();
  const auto arr = cfg.get_array(key);
  if (arr.size() != 4)
    throw ConfigError("config key '" + key + "' must be [w, x, y, z]");
  Eigen::Quaterniond q(arr[0], arr[1], arr[2], arr[3]);
  if (q.norm() < 1e-12) throw ConfigError("config key '" + key + "' is a zero quaternion");
  q.normalize();
  return q;
}

// Flat key,value files for stage hand-off; %.17g round-trips doubles exactly.
using KvList = std::vector<std::pair<std::string, double>>;

void write_kv(const std::string& path, const KvList& kv) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot open " + path + " for writing");
  std::fprintf(f, "key,value\n");
  for (const auto& [k, v] : kv) std::fprintf(f, "%s,%.17g\n", k.c_str(), v);
  std::fclose(f);
}

std::map<std::string, double> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::map<std::string, double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "key,value" || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected key,value", lineno);
    try {
      out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("malformed value in '" + line + "'", lineno);
    }
  }
  return out;
}

double kv(const std::map<std::string, double>& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) throw Error("stage file is missing key '" + key + "'");
  return it->second;
}

Vec3 kv3(const std::map<std::string, double>& m, const std::string& prefix) {
  return Vec3(kv(m, prefix + "_x"), kv(m, prefix + "_y"), kv(m, prefix + "_z"));
}

void push3(KvList& out, const std::string& prefix, const Vec3& v) {
  out.emplace_back(prefix + "_x", v.x());
  out.emplace_back(prefix + "_y", v.y());
  out.emplace_back(prefix + "_z", v.z());
}

void push_pose(KvList& out, const std::string& prefix, const Pose& p) {
  push3(out, prefix, p.position);
  out.emplace_back(prefix + "_qw", p.orientation.w());
  out.emplace_back(prefix + "_qx", p.orientation.x());
  out.emplace_back(prefix + "_qy", p.orientation.y());
  out.emplace_back(prefix + "_qz", p.orientation.z());
}

Pose kv_pose(const std::map<std::string, double>& m, const std::string& prefix) {
  Pose p;
  p.position = kv3(m, prefix);
  p.orientation = Eigen::Quaterniond(kv(m, prefix + "_qw"), kv(m, prefix + "_qx"),
                                     kv(m, prefix + "_qy"), kv(m, prefix + "_qz"));
  return p;
}

std::string stage_path(const Scenario& s, const char* file) {
  return (fs::path(s.out_dir) / file).string();
}

template <class F>
auto guarded(const char* stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

Scenario load_scenario(const std::string& config_path) {
  return load_scenario(Config::parse_file(config_path));
}

Scenario load_scenario(const Config& cfg) {
  Scenario s;
  s.config = cfg;
  const std::string base =
      cfg.origin() == "<string>" ? fs::current_path().string()
                                 : fs::path(cfg.origin()).parent_path().string();

  s.name = cfg.get_string("scenario.name", "scenario");
  s.frames_path = resolve(base, cfg.get_string("scenario.frames"));
  s.frame_index = cfg.get_int("scenario.frame_index", 0);
  s.out_dir = resolve(base, cfg.get_string("scenario.out", s.name + ".out"));

  s.geom.upper_arm = cfg.get_double("geometry.upper_arm", 0.30);
  s.geom.forearm = cfg.get_double("geometry.forearm", 0.25);
  s.geom.shoulder_left = cfg.get_vec3("geometry.shoulder_left", Vec3(0.0, 0.18, 0.0));
  s.geom.shoulder_right = cfg.get_vec3("geometry.shoulder_right", Vec3(0.0, -0.18, 0.0));
  if (!s.geom.valid()) throw ConfigError("invalid body geometry");

  PostureProblem& p = s.posture;
  p.geom = s.geom;
  p.alpha = cfg.get_double("optimizer.alpha", 1.0);
  p.beta = cfg.get_double("optimizer.beta", 0.5);
  p.gamma = cfg.get_double("optimizer.gamma", 0.2);
  p.eps = cfg.get_double("optimizer.eps", 0.02);
  Vec3 load_dir = cfg.get_vec3("optimizer.load_dir", Vec3(0.0, 0.0, 1.0));
  if (load_dir.norm() < 1e-12) throw ConfigError("optimizer.load_dir must be nonzero");
  p.load_dir = load_dir.normalized();
  if (cfg.has("optimizer.m0")) p.m0 = cfg.get_double("optimizer.m0");
  p.opts.kappa = cfg.get_double("optimizer.kappa", 50.0);
  p.opts.multistarts = cfg.get_int("optimizer.multistarts", 8);
  p.opts.perturb_sigma = cfg.get_double("optimizer.perturb_sigma", 0.15);
  p.opts.seed = static_cast<std::uint64_t>(cfg.get_double("optimizer.seed", 0x5eed));
  p.opts.inner_iterations = cfg.get_int("optimizer.inner_iterations", 150);
  p.opts.al_rounds = cfg.get_int("optimizer.al_rounds", 6);
  const std::string formula = cfg.get_string("optimizer.capacity_formula", "radius");
  if (formula == "radius") {
    p.opts.capacity_formula = CapacityFormula::Radius;
  } else if (formula == "major_axis") {
    p.opts.capacity_formula = CapacityFormula::MajorAxisProjection;
  } else {
    throw ConfigError("optimizer.capacity_formula must be 'radius' or 'major_axis'");
  }

  s.object.position = cfg.get_vec3("object.position", Vec3::Zero());
  s.object.orientation = quat_from(cfg, "object.orientation");
  s.object_mass = cfg.get_double("object.mass", 5.0);

  s.ee_left.position = cfg.get_vec3("robot.ee_left_position", Vec3::Zero());
  s.ee_left.orientation = quat_from(cfg, "robot.ee_left_orientation");
  s.ee_right.position = cfg.get_vec3("robot.ee_right_position", Vec3::Zero());
  s.ee_right.orientation = quat_from(cfg, "robot.ee_right_orientation");

  s.timing.max_linear_speed = cfg.get_double("trajectory.max_linear_speed", 0.25);
  s.timing.max_angular_speed = cfg.get_double("trajectory.max_angular_speed", 0.5);
  s.timing.min_duration = cfg.get_double("trajectory.min_duration", 2.0);
  s.sample_rate = cfg.get_double("trajectory.sample_rate", 100.0);
  if (s.sample_rate <= 0.0) throw ConfigError("trajectory.sample_rate must be positive");

  const double dt = cfg.get_double("controller.dt", 0.01);
  if (dt <= 0.0) throw ConfigError("controller.dt must be positive");
  s.model = InteractionModel::bimanual_cartesian(
      cfg.get_double("controller.virtual_mass", 5.0),
      cfg.get_double("controller.virtual_damping", 0.0), dt);
  s.gains = MpcGains::bimanual_defaults(s.model);
  const double stiffness = cfg.get_double("controller.stiffness", 400.0);
  const double damping = cfg.get_double("controller.damping", 40.0);
  for (int arm = 0; arm < 2; ++arm)
    for (int i = 0; i < 3; ++i) {
      s.gains.K_I(arm * 3 + i, arm * 6 + i) = stiffness;
      s.gains.K_I(arm * 3 + i, arm * 6 + 3 + i) = damping;
    }
  s.gains.K_C = cfg.get_double("controller.k_c", 200.0) * Mat3::Identity();
  s.gains.K_F = cfg.get_double("controller.k_f", 0.5) * MatX::Identity(6, 6);
  s.gains.Q_I = cfg.get_double("controller.q_i", 1.0) * MatX::Identity(6, 6);
  s.gains.Q_C = cfg.get_double("controller.q_c", 1.0) * MatX::Identity(6, 6);
  s.gains.Q_F = cfg.get_double("controller.q_f", 0.1) * MatX::Identity(6, 6);
  s.gains.Q_u = cfg.get_double("controller.q_u", 0.01) * MatX::Identity(6, 6);
  s.gains.horizon = cfg.get_int("controller.horizon", 20);
  s.gains.u_max = VecX::Constant(6, cfg.get_double("controller.u_max", 150.0));
  const double x_pos = cfg.get_double("controller.x_max_pos", 3.0);
  const double x_vel = cfg.get_double("controller.x_max_vel", 2.0);
  for (int arm = 0; arm < 2; ++arm) {
    s.gains.x_max.segment(arm * 6, 3).setConstant(x_pos);
    s.gains.x_max.segment(arm * 6 + 3, 3).setConstant(x_vel);
  }
  s.gains.flip_force_feedback = cfg.get_bool("controller.flip_force_feedback", false);

  s.plant.virtual_mass = cfg.get_double("simulation.virtual_mass", 5.0);
  s.plant.virtual_damping = cfg.get_double("simulation.virtual_damping", 0.0);
  s.plant.object_coupling = cfg.get_bool("simulation.object_coupling", false);
  s.plant.object_mass = cfg.get_double("simulation.object_mass", s.object_mass);
  s.plant.spring_stiffness = cfg.get_double("simulation.spring_stiffness", 10e3);
  s.plant.spring_damping = cfg.get_double("simulation.spring_damping", 50.0);
  s.plant.gravity = cfg.get_vec3("simulation.gravity", Vec3::Zero());
  s.plant.substeps = cfg.get_int("simulation.substeps", 10);
  s.settle_time = cfg.get_double("simulation.settle_time", 2.0);
  if (cfg.has("simulation.disturbances"))
    s.disturbance_path = resolve(base, cfg.get_string("simulation.disturbances"));

  return s;
}

// ---- stage computations ----

IkStageResult stage_ik(const Scenario& scenario) {
  const auto frames = ingest_frames(scenario.frames_path);
  if (frames.empty()) throw Error("frames file " + scenario.frames_path + " is empty");
  if (scenario.frame_index < 0 ||
      scenario.frame_index >= static_cast<int>(frames.size()))
    throw Error("frame_index " + std::to_string(scenario.frame_index) +
                " out of range (file has " + std::to_string(frames.size()) + " frames)");
  const SkeletonFrame& frame = frames[static_cast<std::size_t>(scenario.frame_index)];

  const auto [left, right] =
      solve_frame_ik(frame, scenario.geom, Vec4::Zero(), Vec4::Zero());
  IkStageResult r;
  r.q.head<4>() = left.state.q;
  r.q.tail<4>() = right.state.q;
  r.residual_left = left.residual;
  r.residual_right = right.residual;
  r.shoulder_left = frame.left.shoulder;
  r.shoulder_right = frame.right.shoulder;
  r.wrist_left = frame.left.wrist;
  r.wrist_right = frame.right.wrist;
  return r;
}

PostureSolution stage_optimize(const Scenario& scenario, const IkStageResult& ik) {
  PostureProblem prob = scenario.posture;
  prob.q_init = ik.q;
  prob.shoulder_left = ik.shoulder_left;
  prob.shoulder_right = ik.shoulder_right;
  return optimize_posture(prob);
}

TargetPoses stage_posegen(const Scenario& scenario, const IkStageResult& ik,
                          const PostureSolution& posture) {
  GraspConfiguration g;
  g.wrist_left = posture.wrist_left_init;
  g.wrist_right = posture.wrist_right_init;
  g.wrist_left_opt = posture.wrist_left_opt;
  g.wrist_right_opt = posture.wrist_right_opt;
  g.object = scenario.object;
  g.ee_left = scenario.ee_left;
  g.ee_right = scenario.ee_right;
  (void)ik;
  return generate_targets(g);
}

PlanStageResult stage_plan(const Scenario& scenario, const TargetPoses& targets) {
  // Shared duration keeps the two arms synchronous sample for sample.
  const double duration =
      std::max(default_duration(scenario.ee_left, targets.ee_left, scenario.timing),
               default_duration(scenario.ee_right, targets.ee_right, scenario.timing));
  PlanStageResult r;
  r.duration = duration;
  MinJerkSegment seg;
  seg.duration = duration;
  seg.sample_rate = scenario.sample_rate;
  seg.start = scenario.ee_left;
  seg.goal = targets.ee_left;
  r.left = plan(seg);
  seg.start = scenario.ee_right;
  seg.goal = targets.ee_right;
  r.right = plan(seg);
  return r;
}

SimulationResult stage_simulate(const Scenario& scenario, const PlanStageResult& pl) {
  const double expected_rate = 1.0 / scenario.model.dt;
  if (std::abs(scenario.sample_rate - expected_rate) > 1e-9 * expected_rate)
    throw Error("trajectory sample rate (" + std::to_string(scenario.sample_rate) +
                " Hz) must match the controller rate (" +
                std::to_string(expected_rate) + " Hz)");
  std::vector<Disturbance> disturbances;
  if (!scenario.disturbance_path.empty())
    disturbances = parse_disturbance_script(scenario.disturbance_path);
  SimulateOptions opts;
  opts.settle_time = scenario.settle_time;
  opts.qp = scenario.qp;
  return simulate(scenario.model, scenario.gains, scenario.plant, pl.left, pl.right,
                  disturbances, opts);
}

// ---- stage file serialization ----

void write_ik_result(const std::string& path, const IkStageResult& r) {
  KvList kv;
  for (int i = 0; i < 8; ++i) kv.emplace_back("q" + std::to_string(i), r.q[i]);
  kv.emplace_back("residual_left", r.residual_left);
  kv.emplace_back("residual_right", r.residual_right);
  push3(kv, "shoulder_left", r.shoulder_left);
  push3(kv, "shoulder_right", r.shoulder_right);
  push3(kv, "wrist_left", r.wrist_left);
  push3(kv, "wrist_right", r.wrist_right);
  write_kv(path, kv);
}

IkStageResult read_ik_result(const std::string& path) {
  const auto m = read_kv(path);
  IkStageResult r;
  for (int i = 0; i < 8; ++i) r.q[i] = kv(m, "q" + std::to_string(i));
  r.residual_left = kv(m, "residual_left");
  r.residual_right = kv(m, "residual_right");
  r.shoulder_left = kv3(m, "shoulder_left");
  r.shoulder_right = kv3(m, "shoulder_right");
  r.wrist_left = kv3(m, "wrist_left");
  r.wrist_right = kv3(m, "wrist_right");
  return r;
}

void write_posture_result(const std::string& path, const PostureSolution& s) {
  KvList kv;
  for (int i = 0; i < 8; ++i) kv.emplace_back("q_opt" + std::to_string(i), s.q_opt[i]);
  kv.emplace_back("improved", s.improved ? 1.0 : 0.0);
  kv.emplace_back("winning_start", s.winning_start);
  kv.emplace_back("cost_init", s.cost_init);
  kv.emplace_back("cost_opt", s.cost_opt);
  kv.emplace_back("ergonomic_term", s.ergonomic_term);
  kv.emplace_back("manipulability_term", s.manipulability_term);
  kv.emplace_back("deviation_term", s.deviation_term);
  kv.emplace_back("score_init", s.score_init);
  kv.emplace_back("score_opt", s.score_opt);
  push3(kv, "wrist_left_init", s.wrist_left_init);
  push3(kv, "wrist_right_init", s.wrist_right_init);
  push3(kv, "wrist_left_opt", s.wrist_left_opt);
  push3(kv, "wrist_right_opt", s.wrist_right_opt);
  kv.emplace_back("constraint_residual", s.constraint_residual);
  write_kv(path, kv);
}

PostureSolution read_posture_result(const std::string& path) {
  const auto m = read_kv(path);
  PostureSolution s;
  for (int i = 0; i < 8; ++i) s.q_opt[i] = kv(m, "q_opt" + std::to_string(i));
  s.improved = kv(m, "improved") != 0.0;
  s.winning_start = static_cast<int>(kv(m, "winning_start"));
  s.cost_init = kv(m, "cost_init");
  s.cost_opt = kv(m, "cost_opt");
  s.ergonomic_term = kv(m, "ergonomic_term");
  s.manipulability_term = kv(m, "manipulability_term");
  s.deviation_term = kv(m, "deviation_term");
  s.score_init = kv(m, "score_init");
  s.score_opt = kv(m, "score_opt");
  s.wrist_left_init = kv3(m, "wrist_left_init");
  s.wrist_right_init = kv3(m, "wrist_right_init");
  s.wrist_left_opt = kv3(m, "wrist_left_opt");
  s.wrist_right_opt = kv3(m, "wrist_right_opt");
  s.constraint_residual = kv(m, "constraint_residual");
  return s;
}

void write_targets(const std::string& path, const TargetPoses& t) {
  KvList kv;
  push_pose(kv, "object", t.object);
  push_pose(kv, "ee_left", t.ee_left);
  push_pose(kv, "ee_right", t.ee_right);
  kv.emplace_back("antiparallel", t.antiparallel ? 1.0 : 0.0);
  write_kv(path, kv);
}

TargetPoses read_targets(const std::string& path) {
  const auto m = read_kv(path);
  TargetPoses t;
  t.object = kv_pose(m, "object");
  t.ee_left = kv_pose(m, "ee_left");
  t.ee_right = kv_pose(m, "ee_right");
  t.antiparallel = kv(m, "antiparallel") != 0.0;
  return t;
}

std::vector<TrajectorySample> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trajectory file " + path);
  std::vector<TrajectorySample> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + tok + "'", lineno);
      }
    }
    if (vals.size() != 14)
      throw ParseError("expected 14 columns, got " + std::to_string(vals.size()), lineno);
    TrajectorySample s;
    s.t = vals[0];
    s.pose.position = Vec3(vals[1], vals[2], vals[3]);
    s.pose.orientation = Eigen::Quaterniond(vals[4], vals[5], vals[6], vals[7]);
    for (int i = 0; i < 6; ++i) s.velocity[i] = vals[8 + static_cast<std::size_t>(i)];
    samples.push_back(s);
  }
  return samples;
}

// ---- file-backed stage entry points ----

namespace {

IkStageResult ensure_ik(const Scenario& s) {
  const std::string path = stage_path(s, "ik_result.csv");
  if (fs::exists(path))
    return guarded("ik", [&] { return read_ik_result(path); });
  return run_stage_ik(s);
}

PostureSolution ensure_posture(const Scenario& s) {
  const std::string path = stage_path(s, "posture_result.csv");
  if (fs::exists(path))
    return guarded("optimize", [&] { return read_posture_result(path); });
  return run_stage_optimize(s);
}

TargetPoses ensure_targets(const Scenario& s) {
  const std::string path = stage_path(s, "targets.csv");
  if (fs::exists(path))
    return guarded("posegen", [&] { return read_targets(path); });
  return run_stage_posegen(s);
}

PlanStageResult ensure_plan(const Scenario& s) {
  const std::string lp = stage_path(s, "trajectory_left.csv");
  const std::string rp = stage_path(s, "trajectory_right.csv");
  if (fs::exists(lp) && fs::exists(rp)) {
    return guarded("plan", [&] {
      PlanStageResult r;
      r.left = read_trajectory_csv(lp);
      r.right = read_trajectory_csv(rp);
      r.duration = r.left.empty() ? 0.0 : r.left.back().t;
      return r;
    });
  }
  return run_stage_plan(s);
}

}  // namespace

IkStageResult run_stage_ik(const Scenario& s) {
  return guarded("ik", [&] {
    fs::create_directories(s.out_dir);
    const IkStageResult r = stage_ik(s);
    write_ik_result(stage_path(s, "ik_result.csv"), r);
    return r;
  });
}

PostureSolution run_stage_optimize(const Scenario& s) {
  const IkStageResult ik = ensure_ik(s);
  return guarded("optimize", [&] {
    const PostureSolution sol = stage_optimize(s, ik);
    write_posture_result(stage_path(s, "posture_result.csv"), sol);
    return sol;
  });
}

TargetPoses run_stage_posegen(const Scenario& s) {
  const IkStageResult ik = ensure_ik(s);
  const PostureSolution sol = ensure_posture(s);
  return guarded("posegen", [&] {
    const TargetPoses t = stage_posegen(s, ik, sol);
    write_targets(stage_path(s, "targets.csv"), t);
    return t;
  });
}

PlanStageResult run_stage_plan(const Scenario& s) {
  const TargetPoses targets = ensure_targets(s);
  return guarded("plan", [&] {
    const PlanStageResult r = stage_plan(s, targets);
    write_trajectory_csv(stage_path(s, "trajectory_left.csv"), r.left);
    write_trajectory_csv(stage_path(s, "trajectory_right.csv"), r.right);
    return r;
  });
}

SimulationResult run_stage_simulate(const Scenario& s) {
  const PlanStageResult pl = ensure_plan(s);
  return guarded("simulate", [&] {
    const SimulationResult r = stage_simulate(s, pl);
    write_simulation_csv(stage_path(s, "simulation.csv"), r);
    return r;
  });
}

// ---- full run ----

std::string RunReport::serialize() const {
  std::ostringstream os;
  os.precision(12);
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(config_hash));
  os << "scenario: " << scenario_name << "\n";
  os << "config_hash: " << hash_buf << "\n";
  os << "\n[ik]\n";
  os << "residual_left: " << ik.residual_left << "\n";
  os << "residual_right: " << ik.residual_right << "\n";
  os << "q_init:";
  for (int i = 0; i < 8; ++i) os << " " << ik.q[i];
  os << "\n";
  os << "\n[optimize]\n";
  os << "improved: " << (posture.improved ? "yes" : "no") << "\n";
  os << "cost_init: " << posture.cost_init << "\n";
  os << "cost_opt: " << posture.cost_opt << "\n";
  os << "score_init: " << posture.score_init << "\n";
  os << "score_opt: " << posture.score_opt << "\n";
  os << "ergonomic_term: " << posture.ergonomic_term << "\n";
  os << "manipulability_term: " << posture.manipulability_term << "\n";
  os << "deviation_term: " << posture.deviation_term << "\n";
  os << "constraint_residual: " << posture.constraint_residual << "\n";
  os << "q_opt:";
  for (int i = 0; i < 8; ++i) os << " " << posture.q_opt[i];
  os << "\n";
  os << "\n[posegen]\n";
  os << "object_position: " << targets.object.position.transpose() << "\n";
  os << "ee_left_position: " << targets.ee_left.position.transpose() << "\n";
  os << "ee_right_position: " << targets.ee_right.position.transpose() << "\n";
  os << "antiparallel: " << (targets.antiparallel ? "yes" : "no") << "\n";
  os << "\n[plan]\n";
  os << "duration: " << trajectory_duration << "\n";
  os << "samples_per_arm: " << trajectory_samples << "\n";
  os << "\n[simulate]\n";
  os << "steps: " << simulation.rows.size() << "\n";
  os << "terminal_error: " << simulation.terminal_error << "\n";
  os << "fallback_steps: " << simulation.fallback_steps << "\n";
  os << "max_state_violation: " << simulation.max_state_violation << "\n";
  os << "diverged: " << (simulation.diverged ? "yes" : "no") << "\n";
  return os.str();
}

RunReport run_pipeline(const Scenario& scenario, bool verbose) {
  RunReport report;
  report.config_hash = scenario.config.hash();
  report.scenario_name = scenario.name;

  if (verbose) std::fprintf(stderr, "[%s] ik\n", scenario.name.c_str());
  report.ik = run_stage_ik(scenario);
  if (verbose) std::fprintf(stderr, "[%s] optimize\n", scenario.name.c_str());
  report.posture = run_stage_optimize(scenario);
  if (verbose) std::fprintf(stderr, "[%s] posegen\n", scenario.name.c_str());
  report.targets = run_stage_posegen(scenario);
  if (verbose) std::fprintf(stderr, "[%s] plan\n", scenario.name.c_str());
  const PlanStageResult pl = run_stage_plan(scenario);
  report.trajectory_duration = pl.duration;
  report.trajectory_samples = pl.left.size();
  if (verbose) std::fprintf(stderr, "[%s] simulate\n", scenario.name.c_str());
  report.simulation = run_stage_simulate(scenario);

  std::ofstream out(stage_path(scenario, "report.txt"));
  if (!out) throw Error("cannot write report.txt under " + scenario.out_dir);
  out << report.serialize();
  return report;
}

std::vector<std::string> run_batch(const std::string& dir, bool verbose) {
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".toml")
      configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());

  std::vector<std::future<std::string>> futures;
  futures.reserve(configs.size());
  for (const auto& path : configs) {
    futures.push_back(std::async(std::launch::async, [path, verbose]() -> std::string {
      try {
        Scenario s = load_scenario(path.string());
        // Per-scenario output isolation: batch runs always write next to
        // their config, named after it.
        s.out_dir = (path.parent_path() / (path.stem().string() + ".out")).string();
        run_pipeline(s, verbose);
        return "";
      } catch (const std::exception& e) {
        return path.filename().string() + ": " + e.what();
      }
    }));
  }
  std::vector<std::string> errors;
  for (auto& f : futures) {
    std::string err = f.get();
    if (!err.empty()) errors.push_back(std::move(err));
  }
  return errors;
}

}  // namespace cocarry
