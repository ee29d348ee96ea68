#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cocarry/pipeline.hpp"
#include "helpers.hpp"

using namespace cocarry;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Scenario quick_scenario(const std::string& out_name) {
  Scenario s = load_scenario(testutil::fixture("identity.toml"));
  s.out_dir = testutil::temp_dir(out_name);
  s.gains.horizon = 8;
  s.settle_time = 0.5;
  return s;
}

#ifdef CLI_PATH
int run_cli(const std::string& args) {
  const int status = std::system((std::string(CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}
#endif

}  // namespace

TEST_CASE("config parses sections, scalars, strings, arrays, and comments") {
  const Config cfg = Config::parse_string(
      "# comment\n"
      "top = 1.5\n"
      "[alpha]\n"
      "count = 3\n"
      "flag = true\n"
      "name = \"hello world\"  # trailing comment\n"
      "vec = [1.0, -2.5, 3e-2]\n"
      "[beta]\n"
      "flag = false\n");
  CHECK(cfg.get_double("top") == 1.5);
  CHECK(cfg.get_int("alpha.count", 0) == 3);
  CHECK(cfg.get_bool("alpha.flag", false));
  CHECK_FALSE(cfg.get_bool("beta.flag", true));
  CHECK(cfg.get_string("alpha.name") == "hello world");
  const auto v = cfg.get_array("alpha.vec");
  REQUIRE(v.size() == 3);
  CHECK(v[1] == -2.5);
  CHECK(cfg.get_vec3("alpha.vec", Vec3::Zero()) == Vec3(1.0, -2.5, 3e-2));
  CHECK(cfg.has("alpha.flag"));
  CHECK_FALSE(cfg.has("alpha.missing"));
  CHECK(cfg.get_double("alpha.missing", 7.0) == 7.0);
  CHECK_THROWS_AS(cfg.get_double("alpha.missing"), ConfigError);
  CHECK_THROWS_AS(cfg.get_double("alpha.name"), ConfigError);
}

TEST_CASE("config parse errors carry line numbers") {
  try {
    Config::parse_string("a = 1\nnot a key value\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(Config::parse_string("x = [1, oops]\n"), ParseError);
  CHECK_THROWS_AS(Config::parse_file("/nonexistent/path.toml"), ConfigError);
}

TEST_CASE("config hash is deterministic and key-sensitive") {
  const std::string text = "[a]\nx = 1.0\ny = \"s\"\n";
  const std::uint64_t h1 = Config::parse_string(text).hash();
  const std::uint64_t h2 = Config::parse_string(text).hash();
  CHECK(h1 == h2);
  CHECK(h1 != Config::parse_string("[a]\nx = 2.0\ny = \"s\"\n").hash());
  CHECK(h1 != Config::parse_string("[a]\nx = 1.0\ny = \"t\"\n").hash());
}

TEST_CASE("frames ingest sorts rows and validates content") {
  const auto frames = ingest_frames(testutil::fixture("table_frames.csv"));
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].timestamp == 0.0);
  CHECK(frames[2].timestamp == doctest::Approx(0.02));
  for (const auto& f : frames) {
    CHECK((f.left.elbow - f.left.shoulder).norm() == doctest::Approx(0.3).epsilon(1e-9));
    CHECK((f.right.wrist - f.right.elbow).norm() == doctest::Approx(0.25).epsilon(1e-9));
  }

  // Shuffled rows come back time-sorted.
  const fs::path dir = testutil::temp_dir("frames_shuffle");
  auto shuffled = frames;
  std::swap(shuffled[0], shuffled[2]);
  const auto path = (dir / "shuffled.csv").string();
  write_frames_csv(path, shuffled);
  const auto reread = ingest_frames(path);
  REQUIRE(reread.size() == 3);
  CHECK(reread[0].timestamp <= reread[1].timestamp);
  CHECK(reread[1].timestamp <= reread[2].timestamp);
  CHECK((reread[0].left.wrist - frames[0].left.wrist).norm() < 1e-12);
}

TEST_CASE("malformed frame rows raise parse errors with line numbers") {
  const fs::path dir = testutil::temp_dir("frames_bad");
  const auto bad = (dir / "bad.csv").string();
  {
    std::ofstream out(bad);
    out << "0.0, 0,0.18,0, 0,0.18,-0.3, 0,0.43,-0.3,"
           " 0,-0.18,0, 0,-0.18,-0.3, 0,-0.43,-0.3\n";
    out << "0.01,1,2,3\n";
  }
  try {
    ingest_frames(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("implausible segment lengths are rejected as unit errors") {
  const fs::path dir = testutil::temp_dir("frames_units");
  const auto path = (dir / "mm.csv").string();
  {
    // Looks like millimeters: 300 units from shoulder to elbow.
    std::ofstream out(path);
    out << "0.0, 0,180,0, 0,180,-300, 0,430,-300, 0,-180,0, 0,-180,-300, 0,-430,-300\n";
  }
  CHECK_THROWS_AS(ingest_frames(path), UnitSanityError);
}

TEST_CASE("scenario loading resolves paths and fills every stage knob") {
  const Scenario s = load_scenario(testutil::fixture("table.toml"));
  CHECK(s.name == "table-carry");
  CHECK(fs::path(s.frames_path).is_absolute());
  CHECK(fs::exists(s.frames_path));
  CHECK(fs::path(s.out_dir).filename() == "table-carry.out");
  CHECK(s.geom.upper_arm == 0.30);
  CHECK(s.geom.shoulder_left == Vec3(0.0, 0.18, 0.0));
  CHECK(s.posture.alpha == 1.0);
  CHECK(s.posture.beta == 0.5);
  CHECK(s.posture.gamma == doctest::Approx(0.2));
  CHECK(s.posture.opts.seed == 24285);
  CHECK(s.object.position == Vec3(0.0, 0.0, 0.05));
  CHECK(s.object_mass == 5.0);
  CHECK(s.ee_left.position == Vec3(0.0, -0.4, 0.05));
  CHECK(s.sample_rate == 100.0);
  CHECK(s.model.dt == 0.01);
  CHECK(s.gains.horizon == 20);
  CHECK(s.gains.K_I(0, 0) == 400.0);
  CHECK(s.plant.virtual_mass == 5.0);
  CHECK(s.settle_time == 2.0);
}

TEST_CASE("stage files roundtrip exactly") {
  const fs::path dir = testutil::temp_dir("stage_files");
  Rng rng(81);

  IkStageResult ik;
  for (int i = 0; i < 8; ++i) ik.q[i] = rng.normal();
  ik.residual_left = 1.23e-9;
  ik.residual_right = 4.5e-8;
  ik.shoulder_left = Vec3(0.1, 0.18, -0.3);
  ik.shoulder_right = Vec3(0.1, -0.18, -0.3);
  ik.wrist_left = Vec3(rng.normal(), rng.normal(), rng.normal());
  ik.wrist_right = Vec3(rng.normal(), rng.normal(), rng.normal());
  const auto ik_path = (dir / "ik_result.csv").string();
  write_ik_result(ik_path, ik);
  const IkStageResult ik2 = read_ik_result(ik_path);
  CHECK(ik2.q == ik.q);
  CHECK(ik2.residual_left == ik.residual_left);
  CHECK(ik2.residual_right == ik.residual_right);
  CHECK(ik2.wrist_left == ik.wrist_left);
  CHECK(ik2.shoulder_right == ik.shoulder_right);

  PostureSolution ps;
  for (int i = 0; i < 8; ++i) ps.q_opt[i] = rng.normal();
  ps.improved = true;
  ps.winning_start = 5;
  ps.cost_init = 13.205;
  ps.cost_opt = 1.8437;
  ps.score_init = 3.5;
  ps.score_opt = 1.0;
  ps.constraint_residual = 0.0195;
  ps.wrist_left_init = Vec3(0.1, 0.2, 0.3);
  ps.wrist_right_init = Vec3(0.1, -0.2, 0.3);
  ps.wrist_left_opt = Vec3(0.15, 0.21, 0.05);
  ps.wrist_right_opt = Vec3(0.15, -0.21, 0.05);
  const auto ps_path = (dir / "posture_result.csv").string();
  write_posture_result(ps_path, ps);
  const PostureSolution ps2 = read_posture_result(ps_path);
  CHECK(ps2.q_opt == ps.q_opt);
  CHECK(ps2.improved == ps.improved);
  CHECK(ps2.winning_start == ps.winning_start);
  CHECK(ps2.cost_init == ps.cost_init);
  CHECK(ps2.cost_opt == ps.cost_opt);
  CHECK(ps2.constraint_residual == ps.constraint_residual);
  CHECK(ps2.wrist_left_opt == ps.wrist_left_opt);

  TargetPoses t;
  t.object.position = Vec3(rng.normal(), rng.normal(), rng.normal());
  t.object.orientation = Eigen::Quaterniond(0.5, 0.5, 0.5, 0.5);
  t.ee_left.position = Vec3(rng.normal(), rng.normal(), rng.normal());
  t.ee_right.position = Vec3(rng.normal(), rng.normal(), rng.normal());
  t.antiparallel = false;
  const auto t_path = (dir / "targets.csv").string();
  write_targets(t_path, t);
  const TargetPoses t2 = read_targets(t_path);
  CHECK(t2.object.position == t.object.position);
  CHECK(t2.object.orientation.coeffs() == t.object.orientation.coeffs());
  CHECK(t2.ee_left.position == t.ee_left.position);
  CHECK(t2.antiparallel == t.antiparallel);
}

TEST_CASE("trajectory csv roundtrips through the reader") {
  const fs::path dir = testutil::temp_dir("traj_roundtrip");
  MinJerkSegment seg;
  seg.start.position = Vec3(0.0, 0.1, 0.2);
  seg.goal.position = Vec3(0.3, 0.1, 0.0);
  seg.goal.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(0.4, Vec3::UnitZ()));
  const auto samples = plan(seg);
  const auto path = (dir / "traj.csv").string();
  write_trajectory_csv(path, samples);
  const auto reread = read_trajectory_csv(path);
  REQUIRE(reread.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(std::abs(reread[i].t - samples[i].t) < 1e-9);
    CHECK((reread[i].pose.position - samples[i].pose.position).norm() < 1e-9);
    CHECK(reread[i].pose.orientation.angularDistance(samples[i].pose.orientation) < 1e-9);
    CHECK((reread[i].velocity - samples[i].velocity).norm() < 1e-9);
  }
}

TEST_CASE("identity scenario leaves the grasp untouched end to end") {
  const Scenario s = quick_scenario("identity_run");
  const IkStageResult ik = stage_ik(s);
  CHECK(ik.residual_left < 1e-6);
  CHECK(ik.residual_right < 1e-6);

  const PostureSolution posture = stage_optimize(s, ik);
  CHECK_FALSE(posture.improved);
  CHECK((posture.q_opt - ik.q).norm() == 0.0);

  const TargetPoses targets = stage_posegen(s, ik, posture);
  CHECK((targets.object.position - s.object.position).norm() < 1e-9);
  CHECK((targets.ee_left.position - s.ee_left.position).norm() < 1e-9);
  CHECK((targets.ee_right.position - s.ee_right.position).norm() < 1e-9);

  const PlanStageResult traj = stage_plan(s, targets);
  REQUIRE_FALSE(traj.left.empty());
  for (const auto& sample : traj.left)
    CHECK((sample.pose.position - s.ee_left.position).norm() < 1e-12);

  const SimulationResult sim = stage_simulate(s, traj);
  CHECK_FALSE(sim.diverged);
  CHECK(sim.terminal_error < 1e-6);
  CHECK(sim.fallback_steps == 0);
}

TEST_CASE("pipeline reports are deterministic") {
  const Scenario s1 = quick_scenario("det_run_a");
  const Scenario s2 = quick_scenario("det_run_b");
  const RunReport r1 = run_pipeline(s1);
  const RunReport r2 = run_pipeline(s2);
  CHECK(r1.config_hash == r2.config_hash);
  CHECK(r1.serialize() == r2.serialize());
  CHECK(fs::exists(fs::path(s1.out_dir) / "report.txt"));
  CHECK(fs::exists(fs::path(s1.out_dir) / "ik_result.csv"));
  CHECK(fs::exists(fs::path(s1.out_dir) / "simulation.csv"));
  // The stage files themselves are byte-identical across the two runs.
  for (const char* name : {"ik_result.csv", "posture_result.csv", "targets.csv",
                           "trajectory_left.csv", "simulation.csv", "report.txt"})
    CHECK(slurp((fs::path(s1.out_dir) / name).string()) ==
          slurp((fs::path(s2.out_dir) / name).string()));
}

TEST_CASE("file-backed stages consume their predecessors' outputs") {
  Scenario s = quick_scenario("staged_run");
  const IkStageResult ik = run_stage_ik(s);
  CHECK(fs::exists(fs::path(s.out_dir) / "ik_result.csv"));
  const PostureSolution posture = run_stage_optimize(s);
  CHECK(fs::exists(fs::path(s.out_dir) / "posture_result.csv"));
  CHECK((posture.q_opt - ik.q).norm() == 0.0);
  run_stage_posegen(s);
  const PlanStageResult traj = run_stage_plan(s);
  CHECK(fs::exists(fs::path(s.out_dir) / "trajectory_right.csv"));
  CHECK(traj.duration > 0.0);
  const SimulationResult sim = run_stage_simulate(s);
  CHECK(fs::exists(fs::path(s.out_dir) / "simulation.csv"));
  CHECK_FALSE(sim.diverged);
}

TEST_CASE("stage errors carry the failing stage tag") {
  Scenario s = quick_scenario("staged_fail");
  s.frames_path = "/nonexistent/frames.csv";
  try {
    run_stage_optimize(s);  // must pull the ik stage in and fail there
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage == "ik");
  }
}

TEST_CASE("batch runs execute every scenario in a directory") {
  const fs::path dir = testutil::temp_dir("batch_dir");
  for (const char* name : {"one", "two"}) {
    std::ofstream out(dir / (std::string(name) + ".toml"));
    out << "[scenario]\n"
        << "name = \"" << name << "\"\n"
        << "frames = \"" << testutil::fixture("identity_frames.csv") << "\"\n"
        << "[optimizer]\nalpha = 0.0\nbeta = 0.0\ngamma = 1.0\n"
        << "[controller]\nhorizon = 8\n"
        << "[simulation]\nsettle_time = 0.5\n";
  }
  const auto errors = run_batch(dir.string());
  CHECK(errors.empty());
  CHECK(fs::exists(dir / "one.out" / "report.txt"));
  CHECK(fs::exists(dir / "two.out" / "report.txt"));
}

#ifdef CLI_PATH

TEST_CASE("cli stage command succeeds and writes its artifact") {
  const fs::path out = testutil::temp_dir("cli_ik");
  const int code = run_cli("ik --config " + testutil::fixture("identity.toml") +
                           " --out " + out.string());
  CHECK(code == 0);
  CHECK(fs::exists(out / "ik_result.csv"));
}

TEST_CASE("cli reports config errors with exit code 2") {
  CHECK(run_cli("ik --config /nonexistent.toml") == 2);
  CHECK(run_cli("plan") == 2);  // --config is required
}

TEST_CASE("cli reports stage failures with exit code 1") {
  const fs::path dir = testutil::temp_dir("cli_badframes");
  {
    std::ofstream out(dir / "bad.csv");
    out << "0.0,1,2,3\n";
  }
  {
    std::ofstream out(dir / "bad.toml");
    out << "[scenario]\nname = \"bad\"\nframes = \"bad.csv\"\n";
  }
  CHECK(run_cli("ik --config " + (dir / "bad.toml").string()) == 1);
}

#endif
