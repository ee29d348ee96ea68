#include <benchmark/benchmark.h>

#include "cocarry/manipulability.hpp"
#include "cocarry/mpic.hpp"
#include "cocarry/posture_opt.hpp"
#include "cocarry/rng.hpp"
#include "cocarry/skeleton.hpp"

namespace {

using namespace cocarry;

Vec4 random_in_limits(Rng& rng) {
  Vec4 q;
  for (int i = 0; i < 4; ++i)
    q[i] = rng.uniform(joint_limits::lower[static_cast<std::size_t>(i)],
                       joint_limits::upper[static_cast<std::size_t>(i)]);
  return q;
}

void bm_forward_kinematics(benchmark::State& state) {
  BodyGeometry geom;
  Rng rng(1);
  ArmState arm;
  arm.q = random_in_limits(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_kinematics(arm, geom));
  }
}
BENCHMARK(bm_forward_kinematics);

void bm_position_jacobian(benchmark::State& state) {
  BodyGeometry geom;
  Rng rng(2);
  ArmState arm;
  arm.q = random_in_limits(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(position_jacobian(arm, geom));
  }
}
BENCHMARK(bm_position_jacobian);

void bm_force_capacity(benchmark::State& state) {
  BodyGeometry geom;
  Rng rng(3);
  ArmState arm;
  arm.q = random_in_limits(rng);
  const ArmJacobian J = position_jacobian(arm, geom);
  const Vec3 d(0.0, 0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(force_capacity_along(J, d));
  }
}
BENCHMARK(bm_force_capacity);

void bm_posture_cost(benchmark::State& state) {
  PostureProblem prob;
  prob.m0 = 3.0;
  Rng rng(4);
  Vec8 q;
  q.head<4>() = random_in_limits(rng);
  q.tail<4>() = random_in_limits(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(posture_cost(q, prob));
  }
}
BENCHMARK(bm_posture_cost);

void bm_control_step(benchmark::State& state) {
  const auto model = InteractionModel::bimanual_cartesian(5.0, 0.0, 0.01);
  const auto gains = MpcGains::bimanual_defaults(model);
  MpcController controller(model, gains);
  MpcStep step;
  step.state = VecX::Zero(12);
  step.state[0] = 0.01;  // small left-arm position error
  step.reference.assign(static_cast<std::size_t>(gains.horizon) + 1, VecX::Zero(12));
  step.external_force = VecX::Zero(6);
  step.reference_force = VecX::Zero(6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(controller.step(step));
  }
}
BENCHMARK(bm_control_step);

}  // namespace

BENCHMARK_MAIN();
