#include "cocarry/ik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

constexpr double kPi = std::numbers::pi;

bool segment_ok(double observed, double calibrated, double tol) {
  return std::abs(observed - calibrated) <= tol * calibrated;
}

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Residual {
  Eigen::Matrix<double, 6, 1> r;
  Eigen::Matrix<double, 6, 4> jac;
};

Residual evaluate(const Vec4& q, Side side, const BodyGeometry& geom,
                  const ArmObservation& obs) {
  ArmState s{q, side};
  const ArmPoints pts = forward_kinematics(s, geom, obs.shoulder);
  Residual out;
  out.r.head<3>() = pts.elbow - obs.elbow;
  out.r.tail<3>() = pts.wrist - obs.wrist;
  out.jac.topRows<3>() = elbow_jacobian(s, geom);
  out.jac.bottomRows<3>() = position_jacobian(s, geom);
  return out;
}

// Norm of the gradient projected onto the feasible directions of the box.
double projected_gradient_norm(const Vec4& q, const Vec4& grad) {
  double nrm2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    double g = grad[i];
    if (q[i] <= joint_limits::lower[i] + 1e-14 && g > 0.0) g = 0.0;
    if (q[i] >= joint_limits::upper[i] - 1e-14 && g < 0.0) g = 0.0;
    nrm2 += g * g;
  }
  return std::sqrt(nrm2);
}

struct PolishResult {
  Vec4 q;
  double cost;  // 0.5 * ||r||^2
  bool converged;
};

// Projected Levenberg-Marquardt on the smooth least-squares objective.
PolishResult polish(Vec4 q, Side side, const BodyGeometry& geom,
                    const ArmObservation& obs, const IkOptions& opts) {
  q = clamp_to_limits(q);
  double lambda = 1e-6;
  Residual ev = evaluate(q, side, geom, obs);
  double cost = 0.5 * ev.r.squaredNorm();
  bool converged = false;

  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vec4 grad = ev.jac.transpose() * ev.r;
    if (projected_gradient_norm(q, grad) < opts.gradient_tolerance) {
      converged = true;
      break;
    }
    const Eigen::Matrix4d h = ev.jac.transpose() * ev.jac;
    bool accepted = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      const Vec4 step =
          (h + lambda * Eigen::Matrix4d::Identity()).ldlt().solve(-grad);
      const Vec4 q_new = clamp_to_limits(q + step);
      const Residual ev_new = evaluate(q_new, side, geom, obs);
      const double cost_new = 0.5 * ev_new.r.squaredNorm();
      if (cost_new < cost) {
        if ((q_new - q).norm() < opts.step_tolerance) {
          q = q_new;
          ev = ev_new;
          cost = cost_new;
          converged = true;
          accepted = true;
          break;
        }
        q = q_new;
        ev = ev_new;
        cost = cost_new;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || converged) {
      converged = converged || !accepted;
      break;
    }
  }
  return {q, cost, converged};
}

// Closed-form branch candidates from the observed segment directions. With
// clean data these land on the exact solution; the polish step then only
// has to absorb measurement noise and the box projection.
void analytic_seeds(const ArmObservation& obs, Side side, const BodyGeometry& geom,
                    const Vec4& fallback, std::vector<Vec4>& seeds) {
  const Mat3 mirror = side == Side::Left
                          ? Vec3(1.0, -1.0, 1.0).asDiagonal().toDenseMatrix()
                          : Mat3::Identity();
  const Vec3 ue = mirror * (obs.elbow - obs.shoulder);
  const Vec3 uw = mirror * (obs.wrist - obs.elbow);
  if (ue.norm() < 1e-9 || uw.norm() < 1e-9) return;
  const Vec3 u = ue.normalized();

  // Upper arm direction: u = [-s1 c2, s2, -c1 c2].
  const double q2a = std::asin(std::clamp(u.y(), -1.0, 1.0));
  for (double q2 : {q2a, wrap_angle(kPi - q2a)}) {
    const double c2 = std::cos(q2);
    double q1 = fallback[0];
    if (std::abs(c2) > 1e-9) q1 = std::atan2(-u.x() / c2, -u.z() / c2);

    // Forearm direction in the post-(R1 R2) frame: w = [-s3 c4, c3 c4, s4].
    const Mat3 r12 = rotation_matrices(Vec4(q1, q2, 0.0, 0.0))[0] *
                     rotation_matrices(Vec4(q1, q2, 0.0, 0.0))[1];
    const Vec3 w = (r12.transpose() * uw).normalized();
    const double q4a = std::asin(std::clamp(w.z(), -1.0, 1.0));
    for (double q4 : {q4a, wrap_angle(kPi - q4a)}) {
      const double c4 = std::cos(q4);
      double q3 = fallback[2];
      if (std::abs(c4) > 1e-9) q3 = std::atan2(-w.x() / c4, w.y() / c4);
      seeds.push_back(Vec4(q1, q2, q3, q4));
    }
  }
  (void)geom;
}

}  // namespace

bool arm_observation_is_sane(const ArmObservation& obs, const BodyGeometry& geom,
                             double tolerance) {
  return segment_ok((obs.elbow - obs.shoulder).norm(), geom.upper_arm, tolerance) &&
         segment_ok((obs.wrist - obs.elbow).norm(), geom.forearm, tolerance);
}

bool frame_is_sane(const SkeletonFrame& frame, const BodyGeometry& geom,
                   double tolerance) {
  return arm_observation_is_sane(frame.left, geom, tolerance) &&
         arm_observation_is_sane(frame.right, geom, tolerance);
}

IkResult solve_ik(const ArmObservation& obs, Side side, const BodyGeometry& geom,
                  const Vec4& q_seed, const IkOptions& opts) {
  if (!arm_observation_is_sane(obs, geom))
    throw InfeasibleFrame("observed segment lengths deviate more than 20% from calibration");

  std::vector<Vec4> seeds;
  seeds.push_back(clamp_to_limits(q_seed));
  analytic_seeds(obs, side, geom, q_seed, seeds);

  PolishResult best{seeds.front(), std::numeric_limits<double>::infinity(), false};
  double best_seed_dist = std::numeric_limits<double>::infinity();
  for (const Vec4& seed : seeds) {
    const PolishResult cand = polish(seed, side, geom, obs, opts);
    const double seed_dist = (cand.q - q_seed).norm();
    // Warm-start branch selection: prefer lower residual, break near-ties
    // toward the solution closest to the seed.
    const bool better =
        cand.cost < best.cost - 1e-18 ||
        (cand.cost < best.cost + 1e-18 && seed_dist < best_seed_dist);
    if (better) {
      best = cand;
      best_seed_dist = seed_dist;
    }
    if (best.converged && best.cost < 0.5 * opts.accept_residual * opts.accept_residual)
      break;
  }

  IkResult out;
  out.state = ArmState{best.q, side};
  out.residual = std::sqrt(2.0 * best.cost);
  out.status = best.converged ? IkStatus::Converged : IkStatus::NonConvergence;
  return out;
}

std::pair<IkResult, IkResult> solve_frame_ik(const SkeletonFrame& frame,
                                             const BodyGeometry& geom,
                                             const Vec4& seed_left,
                                             const Vec4& seed_right,
                                             const IkOptions& opts) {
  return {solve_ik(frame.left, Side::Left, geom, seed_left, opts),
          solve_ik(frame.right, Side::Right, geom, seed_right, opts)};
}

}  // namespace cocarry
