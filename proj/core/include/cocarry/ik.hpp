#pragma once

#include <optional>

#include "cocarry/skeleton.hpp"
#include "cocarry/types.hpp"

namespace cocarry {

/// One arm's observed marker positions in the torso frame.
struct ArmObservation {
  Vec3 shoulder;
  Vec3 elbow;
  Vec3 wrist;
};

struct SkeletonFrame {
  double timestamp = 0.0;
  ArmObservation left;
  ArmObservation right;
};

/// Observed segment lengths must be within `tolerance` (relative) of the
/// calibrated geometry; mocap glitches are rejected, not repaired.
bool frame_is_sane(const SkeletonFrame& frame, const BodyGeometry& geom,
                   double tolerance = 0.2);
bool arm_observation_is_sane(const ArmObservation& obs, const BodyGeometry& geom,
                             double tolerance = 0.2);

enum class IkStatus { Converged, NonConvergence };

struct IkResult {
  ArmState state;
  double residual = 0.0;  // sqrt of the summed squared elbow+wrist position error, meters
  IkStatus status = IkStatus::Converged;
};

struct IkOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  // Residual below which a frame is accepted without trying more seeds.
  double accept_residual = 1e-9;
};

/// Constrained least-squares joint angle recovery for one arm. The shoulder
/// origin is taken from the observation. Throws InfeasibleFrame when the
/// segment-length sanity check fails.
IkResult solve_ik(const ArmObservation& obs, Side side, const BodyGeometry& geom,
                  const Vec4& q_seed, const IkOptions& opts = {});

/// Both arms of a frame; seeds typically come from the previous frame.
std::pair<IkResult, IkResult> solve_frame_ik(const SkeletonFrame& frame,
                                             const BodyGeometry& geom,
                                             const Vec4& seed_left,
                                             const Vec4& seed_right,
                                             const IkOptions& opts = {});

}  // namespace cocarry
