#include "cocarry/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cocarry/errors.hpp"

namespace cocarry {

MinJerkScalar min_jerk_scalar(double tau) {
  const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
  return {10.0 * t3 - 15.0 * t4 + 6.0 * t5,
          30.0 * t2 - 60.0 * t3 + 30.0 * t4,
          60.0 * tau - 180.0 * t2 + 120.0 * t3};
}

double default_duration(const Pose& start, const Pose& goal,
                        const TimingPolicy& policy) {
  const double dist = (goal.position - start.position).norm();
  const double angle = start.orientation.angularDistance(goal.orientation);
  return std::max({dist / policy.max_linear_speed,
                   angle / policy.max_angular_speed, policy.min_duration});
}

std::vector<TrajectorySample> plan(const MinJerkSegment& seg) {
  if (seg.duration <= 0.0) throw ConfigError("segment duration must be positive");
  if (seg.sample_rate <= 0.0) throw ConfigError("sample rate must be positive");

  // Shortest-arc relative rotation, constant axis in the start frame.
  Eigen::Quaterniond q0 = seg.start.orientation.normalized();
  Eigen::Quaterniond q1 = seg.goal.orientation.normalized();
  if (q0.dot(q1) < 0.0) q1.coeffs() = -q1.coeffs();
  const Eigen::AngleAxisd rel(q0.conjugate() * q1);
  const Vec3 axis_world = q0 * rel.axis();
  const double angle = rel.angle();
  const Vec3 delta = seg.goal.position - seg.start.position;

  const int n = std::max(1, static_cast<int>(std::ceil(seg.duration * seg.sample_rate)));
  std::vector<TrajectorySample> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = (k == n) ? seg.duration : k / seg.sample_rate;
    const double tau = std::clamp(t / seg.duration, 0.0, 1.0);
    const MinJerkScalar s = min_jerk_scalar(tau);

    TrajectorySample smp;
    smp.t = t;
    smp.pose.position = seg.start.position + s.s * delta;
    smp.pose.orientation =
        (q0 * Eigen::Quaterniond(Eigen::AngleAxisd(s.s * angle, rel.axis())))
            .normalized();
    smp.velocity.head<3>() = delta * (s.ds / seg.duration);
    smp.velocity.tail<3>() = axis_world * (angle * s.ds / seg.duration);
    if (k == n) {  // exact endpoint
      smp.pose.position = seg.goal.position;
      smp.pose.orientation = q1;
      smp.velocity.setZero();
    }
    out.push_back(smp);
  }
  return out;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& samples) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot open " + path + " for writing");
  std::fprintf(f, "t,x,y,z,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz\n");
  for (const auto& s : samples) {
    const auto& p = s.pose.position;
    const auto& q = s.pose.orientation;
    std::fprintf(f,
                 "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                 "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                 s.t, p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z(),
                 s.velocity[0], s.velocity[1], s.velocity[2], s.velocity[3],
                 s.velocity[4], s.velocity[5]);
  }
  std::fclose(f);
}

}  // namespace cocarry
