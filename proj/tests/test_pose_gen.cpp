#include <doctest.h>

#include <numbers>

#include "cocarry/pose_gen.hpp"
#include "cocarry/rng.hpp"
#include "helpers.hpp"

using namespace cocarry;

namespace {
constexpr double kPi = std::numbers::pi;

Vec3 random_vec(Rng& rng, double scale = 1.0) {
  return scale * Vec3(rng.normal(), rng.normal(), rng.normal());
}

GraspConfiguration random_grasp(Rng& rng) {
  GraspConfiguration g;
  g.wrist_left = random_vec(rng);
  do {
    g.wrist_right = random_vec(rng);
  } while ((g.wrist_right - g.wrist_left).norm() < 0.1);
  g.object.position = random_vec(rng);
  g.object.orientation = Eigen::Quaterniond::UnitRandom();
  g.ee_left.position = random_vec(rng);
  g.ee_left.orientation = Eigen::Quaterniond::UnitRandom();
  g.ee_right.position = random_vec(rng);
  g.ee_right.orientation = Eigen::Quaterniond::UnitRandom();
  // Build the optimized wrist pair by an exact rigid motion so the
  // configuration is self-consistent.
  const Mat3 R = Eigen::AngleAxisd(rng.uniform(-kPi, kPi),
                                   random_vec(rng).normalized())
                     .toRotationMatrix();
  const Vec3 shift = random_vec(rng, 0.2);
  g.wrist_left_opt = g.wrist_left + shift;
  g.wrist_right_opt = g.wrist_left_opt + R * (g.wrist_right - g.wrist_left);
  return g;
}

}  // namespace

TEST_CASE("relative rotation of a vector onto itself is the identity") {
  const auto rr = relative_rotation(Vec3(0.3, -0.2, 0.9), Vec3(0.6, -0.4, 1.8));
  CHECK((rr.rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK_FALSE(rr.antiparallel);
}

TEST_CASE("x onto y is a quarter turn about z") {
  const auto rr = relative_rotation(Vec3::UnitX(), Vec3::UnitY());
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((rr.rotation - expected).norm() < 1e-12);
}

TEST_CASE("relative rotation maps the source direction onto the target") {
  Rng rng(61);
  for (int n = 0; n < 500; ++n) {
    Vec3 a = random_vec(rng), b = random_vec(rng);
    if (a.norm() < 1e-3 || b.norm() < 1e-3) continue;
    const auto rr = relative_rotation(a, b);
    CHECK((rr.rotation * a.normalized() - b.normalized()).norm() < 1e-9);
    CHECK((rr.rotation.transpose() * rr.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(rr.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("antiparallel vectors still produce a valid half turn") {
  const Vec3 v(0.1, 0.7, -0.3);
  const auto rr = relative_rotation(v, -v);
  CHECK(rr.antiparallel);
  CHECK((rr.rotation * v.normalized() + v.normalized()).norm() < 1e-9);
  CHECK(rr.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unchanged wrists give unchanged targets") {
  Rng rng(62);
  GraspConfiguration g = random_grasp(rng);
  g.wrist_left_opt = g.wrist_left;
  g.wrist_right_opt = g.wrist_right;
  const TargetPoses t = generate_targets(g);
  CHECK((t.object.position - g.object.position).norm() < 1e-12);
  CHECK(t.object.orientation.angularDistance(g.object.orientation) < 1e-12);
  CHECK((t.ee_left.position - g.ee_left.position).norm() < 1e-12);
  CHECK((t.ee_right.position - g.ee_right.position).norm() < 1e-12);
  CHECK_FALSE(t.antiparallel);
}

TEST_CASE("target generation is a rigid transport of the grasp frame") {
  Rng rng(63);
  for (int n = 0; n < 500; ++n) {
    const GraspConfiguration g = random_grasp(rng);
    const TargetPoses t = generate_targets(g);

    // Pairwise distances among the transported points are preserved.
    const std::array<Vec3, 3> before = {g.object.position, g.ee_left.position,
                                        g.ee_right.position};
    const std::array<Vec3, 3> after = {t.object.position, t.ee_left.position,
                                       t.ee_right.position};
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        CHECK(std::abs((after[i] - after[j]).norm() -
                       (before[i] - before[j]).norm()) < 1e-9);
    // Anchoring: distances to the optimized left wrist match the original
    // distances to the initial left wrist.
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs((after[i] - g.wrist_left_opt).norm() -
                     (before[i] - g.wrist_left).norm()) < 1e-9);
  }
}

TEST_CASE("targets match the homogeneous-transform oracle") {
  Rng rng(64);
  for (int n = 0; n < 200; ++n) {
    const GraspConfiguration g = random_grasp(rng);
    const TargetPoses t = generate_targets(g);

    const Mat3 R = relative_rotation(g.wrist_right - g.wrist_left,
                                     g.wrist_right_opt - g.wrist_left_opt)
                       .rotation;
    const Vec3 p = g.wrist_left_opt - R * g.wrist_left;
    const auto apply = [&](const Pose& x) {
      Pose out;
      out.position = R * x.position + p;
      out.orientation = Eigen::Quaterniond(R) * x.orientation;
      return out;
    };
    for (const auto& [got, want] :
         {std::pair{t.object, apply(g.object)},
          std::pair{t.ee_left, apply(g.ee_left)},
          std::pair{t.ee_right, apply(g.ee_right)}}) {
      CHECK((got.position - want.position).norm() < 1e-9);
      CHECK(got.orientation.angularDistance(want.orientation) < 1e-9);
    }
  }
}

TEST_CASE("transported wrist vector direction matches the optimized one") {
  Rng rng(65);
  for (int n = 0; n < 200; ++n) {
    const GraspConfiguration g = random_grasp(rng);
    const Vec3 v_init = (g.wrist_right - g.wrist_left).normalized();
    const Vec3 v_opt = (g.wrist_right_opt - g.wrist_left_opt).normalized();
    const Mat3 R = relative_rotation(v_init, v_opt).rotation;
    CHECK((R * v_init - v_opt).norm() < 1e-8);
  }
}
