#pragma once

#include <utility>
#include <vector>

#include "cocarry/skeleton.hpp"
#include "cocarry/types.hpp"

namespace cocarry {

/// Piecewise-linear interpolation through sorted (x, y) anchors; clamped to
/// the end values outside the anchor range.
double piecewise_linear(double x, const std::vector<std::pair<double, double>>& anchors);

// Anchor points of the continuous REBA-derived score functions. Exposed so
// scenario configs can adjust the reconstructed elbow band without a rebuild.
struct ErgonomicsTables {
  // Shoulder flexion/extension score over q2. Continuous interpolant through
  // the REBA anchor bands, extension mirrored with a penalty of 2 at the
  // extension limit.
  std::vector<std::pair<double, double>> shoulder_flexion;
  // Elbow score over the anatomical flexion angle phi = q4 + pi/2 (phi = 0 is
  // the straight arm). Score 1 on the 60-100 degree band, 2 at full extension
  // and at the flexion limit.
  std::vector<std::pair<double, double>> elbow_flexion;
  // REBA "+1 if abducted / rotated" as ramps over |q1| and |q3|.
  double abduction_ramp_start, abduction_ramp_end;
  double rotation_ramp_start, rotation_ramp_end;

  static const ErgonomicsTables& defaults();
};

/// Continuous shoulder flexion/extension score.
double shoulder_score(double q2, const ErgonomicsTables& t = ErgonomicsTables::defaults());

/// Continuous elbow flexion/extension score.
double elbow_score(double q4, const ErgonomicsTables& t = ErgonomicsTables::defaults());

/// Abduction (q1) and rotation (q3) contributions added into the shoulder score.
double abduction_score(double q1, const ErgonomicsTables& t = ErgonomicsTables::defaults());
double rotation_score(double q3, const ErgonomicsTables& t = ErgonomicsTables::defaults());

/// Per-arm score s(q) = s_shoulder(q1,q2,q3) + s_elbow(q4).
double arm_score(const Vec4& q, const ErgonomicsTables& t = ErgonomicsTables::defaults());

struct ErgonomicScore {
  double s_shoulder_left = 0.0, s_elbow_left = 0.0;
  double s_shoulder_right = 0.0, s_elbow_right = 0.0;
  double s_left = 0.0, s_right = 0.0;
  double s_overall = 0.0;  // max(s_left, s_right)
};

/// Bimanual worst-case aggregation.
ErgonomicScore bimanual_score(const ArmState& left, const ArmState& right,
                              const ErgonomicsTables& t = ErgonomicsTables::defaults());

/// Smooth stand-in for max(a, b) used during optimization:
/// log(exp(kappa a) + exp(kappa b)) / kappa.
double smooth_max(double a, double b, double kappa);

}  // namespace cocarry
