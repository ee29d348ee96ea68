#pragma once

#include <string>
#include <vector>

#include "cocarry/pose_gen.hpp"
#include "cocarry/types.hpp"

namespace cocarry {

struct MinJerkScalar {
  double s, ds, dds;
};

/// 10-15-6 quintic with zero boundary velocity and acceleration,
/// tau in [0, 1].
MinJerkScalar min_jerk_scalar(double tau);

struct TimingPolicy {
  double max_linear_speed = 0.25;   // m/s
  double max_angular_speed = 0.5;   // rad/s
  double min_duration = 2.0;        // s
};

/// Conservative segment duration for a start/goal pose pair.
double default_duration(const Pose& start, const Pose& goal,
                        const TimingPolicy& policy = {});

struct MinJerkSegment {
  Pose start;
  Pose goal;
  double duration = 2.0;      // seconds, > 0
  double sample_rate = 100.0; // Hz
};

struct TrajectorySample {
  double t;
  Pose pose;
  Vec6 velocity;  // linear (m/s) then angular (rad/s), world frame
};

/// Straight-line position path and shortest-arc constant-axis orientation
/// path, both parameterized by the min-jerk scalar. First and last samples
/// match the endpoints exactly.
std::vector<TrajectorySample> plan(const MinJerkSegment& seg);

/// CSV export: t,x,y,z,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz per row.
void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& samples);

}  // namespace cocarry
