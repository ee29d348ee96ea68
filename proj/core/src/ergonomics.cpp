#include "cocarry/ergonomics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cocarry {

namespace {
constexpr double kPi = std::numbers::pi;
}

double piecewise_linear(double x, const std::vector<std::pair<double, double>>& anchors) {
  if (x <= anchors.front().first) return anchors.front().second;
  if (x >= anchors.back().first) return anchors.back().second;
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    if (x <= anchors[i].first) {
      const auto& [x0, y0] = anchors[i - 1];
      const auto& [x1, y1] = anchors[i];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return anchors.back().second;
}

const ErgonomicsTables& ErgonomicsTables::defaults() {
  static const ErgonomicsTables t = [] {
    ErgonomicsTables d;
    d.shoulder_flexion = {
        {-kPi / 3.0, 2.0}, {-2.0 * kPi / 9.0, 1.0}, {0.0, 0.0},
        {2.0 * kPi / 9.0, 1.0}, {kPi / 4.0, 2.0}, {kPi / 2.0, 3.0}, {kPi, 4.0}};
    d.elbow_flexion = {
        {0.0, 2.0}, {kPi / 3.0, 1.0}, {5.0 * kPi / 9.0, 1.0}, {5.0 * kPi / 6.0, 2.0}};
    d.abduction_ramp_start = kPi / 6.0;
    d.abduction_ramp_end = kPi / 3.0;
    d.rotation_ramp_start = kPi / 4.0;
    d.rotation_ramp_end = kPi / 2.0;
    return d;
  }();
  return t;
}

double shoulder_score(double q2, const ErgonomicsTables& t) {
  return piecewise_linear(q2, t.shoulder_flexion);
}

double elbow_score(double q4, const ErgonomicsTables& t) {
  // Anatomical elbow flexion: the q = 0 rest pose already bends the elbow
  // 90 degrees, so phi = q4 + pi/2.
  return piecewise_linear(q4 + kPi / 2.0, t.elbow_flexion);
}

namespace {
double ramp(double x, double start, double end) {
  if (x <= start) return 0.0;
  if (x >= end) return 1.0;
  return (x - start) / (end - start);
}
}  // namespace

double abduction_score(double q1, const ErgonomicsTables& t) {
  return ramp(std::abs(q1), t.abduction_ramp_start, t.abduction_ramp_end);
}

double rotation_score(double q3, const ErgonomicsTables& t) {
  return ramp(std::abs(q3), t.rotation_ramp_start, t.rotation_ramp_end);
}

double arm_score(const Vec4& q, const ErgonomicsTables& t) {
  return shoulder_score(q[1], t) + abduction_score(q[0], t) +
         rotation_score(q[2], t) + elbow_score(q[3], t);
}

ErgonomicScore bimanual_score(const ArmState& left, const ArmState& right,
                              const ErgonomicsTables& t) {
  ErgonomicScore s;
  s.s_shoulder_left = shoulder_score(left.q[1], t) + abduction_score(left.q[0], t) +
                      rotation_score(left.q[2], t);
  s.s_elbow_left = elbow_score(left.q[3], t);
  s.s_shoulder_right = shoulder_score(right.q[1], t) + abduction_score(right.q[0], t) +
                       rotation_score(right.q[2], t);
  s.s_elbow_right = elbow_score(right.q[3], t);
  s.s_left = s.s_shoulder_left + s.s_elbow_left;
  s.s_right = s.s_shoulder_right + s.s_elbow_right;
  s.s_overall = std::max(s.s_left, s.s_right);
  return s;
}

double smooth_max(double a, double b, double kappa) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(kappa * (a - m)) + std::exp(kappa * (b - m))) / kappa;
}

}  // namespace cocarry
