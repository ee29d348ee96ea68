#pragma once

#include <string>
#include <vector>

#include "cocarry/config.hpp"
#include "cocarry/errors.hpp"
#include "cocarry/frames.hpp"
#include "cocarry/mpic.hpp"
#include "cocarry/pose_gen.hpp"
#include "cocarry/posture_opt.hpp"
#include "cocarry/trajectory.hpp"

namespace cocarry {

/// A stage failure tagged with the stage that raised it.
struct StageError : Error {
  StageError(const std::string& stage_name, const std::string& what)
      : Error("[" + stage_name + "] " + what), stage(stage_name) {}
  std::string stage;
};

/// Everything one end-to-end run needs, loaded from a single config file.
/// Relative file paths are resolved against the config file's directory.
struct Scenario {
  std::string name;
  std::string frames_path;
  int frame_index = 0;
  std::string out_dir;

  BodyGeometry geom;
  PostureProblem posture;  // q_init filled by the ik stage

  Pose object;
  double object_mass = 5.0;
  Pose ee_left, ee_right;

  TimingPolicy timing;
  double sample_rate = 100.0;

  InteractionModel model;
  MpcGains gains;
  QpSettings qp;
  PlantConfig plant;
  std::string disturbance_path;  // empty: none
  double settle_time = 2.0;

  Config config;  // retained verbatim for the report hash
};

Scenario load_scenario(const std::string& config_path);
Scenario load_scenario(const Config& cfg);

// Stage outputs live under Scenario::out_dir with fixed names; each stage
// reads only the previous stage's file so `run` equals the composition of
// the five stage commands on the same config.
//   ik        -> ik_result.csv
//   optimize  -> posture_result.csv     (reads ik_result.csv)
//   posegen   -> targets.csv            (reads ik_result, posture_result)
//   plan      -> trajectory_left.csv, trajectory_right.csv  (reads targets)
//   simulate  -> simulation.csv         (reads the trajectories)
//   run       -> all of the above plus report.txt

struct IkStageResult {
  Vec8 q = Vec8::Zero();  // left then right
  double residual_left = 0.0, residual_right = 0.0;
  Vec3 shoulder_left, shoulder_right;
  Vec3 wrist_left, wrist_right;
};

IkStageResult stage_ik(const Scenario& scenario);
PostureSolution stage_optimize(const Scenario& scenario, const IkStageResult& ik);
TargetPoses stage_posegen(const Scenario& scenario, const IkStageResult& ik,
                          const PostureSolution& posture);

struct PlanStageResult {
  std::vector<TrajectorySample> left, right;
  double duration = 0.0;
};

PlanStageResult stage_plan(const Scenario& scenario, const TargetPoses& targets);
SimulationResult stage_simulate(const Scenario& scenario, const PlanStageResult& plan);

// File-backed stage entry points used by the CLI: load inputs from out_dir,
// compute, write outputs. Each throws StageError on failure.
IkStageResult run_stage_ik(const Scenario& scenario);
PostureSolution run_stage_optimize(const Scenario& scenario);
TargetPoses run_stage_posegen(const Scenario& scenario);
PlanStageResult run_stage_plan(const Scenario& scenario);
SimulationResult run_stage_simulate(const Scenario& scenario);

// Stage-file (de)serialization.
void write_ik_result(const std::string& path, const IkStageResult& r);
IkStageResult read_ik_result(const std::string& path);
void write_posture_result(const std::string& path, const PostureSolution& s);
PostureSolution read_posture_result(const std::string& path);
void write_targets(const std::string& path, const TargetPoses& t);
TargetPoses read_targets(const std::string& path);
std::vector<TrajectorySample> read_trajectory_csv(const std::string& path);

struct RunReport {
  std::uint64_t config_hash = 0;
  std::string scenario_name;
  IkStageResult ik;
  PostureSolution posture;
  TargetPoses targets;
  double trajectory_duration = 0.0;
  std::size_t trajectory_samples = 0;
  SimulationResult simulation;

  /// Deterministic structured-text body (no timestamps).
  std::string serialize() const;
};

/// Full ik -> optimize -> posegen -> plan -> simulate run; writes every
/// stage file plus report.txt under the scenario's output directory.
RunReport run_pipeline(const Scenario& scenario, bool verbose = false);

/// Runs every *.toml scenario under `dir` concurrently, each with its own
/// output directory. Returns the per-scenario error messages (empty = all ok).
std::vector<std::string> run_batch(const std::string& dir, bool verbose = false);

}  // namespace cocarry
