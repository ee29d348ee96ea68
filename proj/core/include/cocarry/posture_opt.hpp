#pragma once

#include <cstdint>
#include <limits>

#include "cocarry/ergonomics.hpp"
#include "cocarry/manipulability.hpp"
#include "cocarry/skeleton.hpp"
#include "cocarry/types.hpp"

namespace cocarry {

struct PostureOptOptions {
  // Smoothing of the bimanual max; kappa = 50 keeps the smoothed/exact gap
  // below 0.014.
  double kappa = 50.0;
  int multistarts = 8;          // q_init plus (multistarts - 1) perturbations
  int global_starts = 24;       // additional uniform samples over the box
  // Deterministic coarse-lattice seeding: the best feasible lattice points
  // are kept as candidates and polished by local descent, so the optimizer
  // cannot lose to a coarse global scan. 0 disables.
  int lattice_levels = 5;
  int lattice_starts = 8;
  double perturb_sigma = 0.15;  // radians
  std::uint64_t seed = 0x5eedULL;
  int inner_iterations = 150;
  int al_rounds = 6;
  double al_mu0 = 10.0;
  double al_mu_growth = 5.0;
  double gradient_tolerance = 1e-7;
  CapacityFormula capacity_formula = CapacityFormula::Radius;
};

struct PostureProblem {
  Vec8 q_init = Vec8::Zero();  // left q1..q4 then right q1..q4
  BodyGeometry geom;
  // Shoulder origins held fixed during optimization; default to geom's.
  Vec3 shoulder_left = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  Vec3 shoulder_right = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  Vec3 load_dir = Vec3(0.0, 0.0, 1.0);  // unit, typically gravity-opposing
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 0.2;
  // Reference force capacity m_0; NaN means "median capacity over the
  // feasible box", sampled deterministically.
  double m0 = std::numeric_limits<double>::quiet_NaN();
  double eps = 0.02;  // wrist-distance slack, meters
  ErgonomicsTables tables = ErgonomicsTables::defaults();
  PostureOptOptions opts;

  Vec3 shoulder(Side s) const;
  bool valid() const;
};

/// Median force capacity along load_dir over the joint-limit box (fixed-seed
/// sampling; deterministic).
double default_reference_capacity(const BodyGeometry& geom, const Vec3& load_dir,
                                  CapacityFormula formula = CapacityFormula::Radius);

/// m(q) = sqrt((m(q_l) - m0)^2 + (m(q_r) - m0)^2) with per-arm capacities
/// taken along the load direction.
double manip_deviation(const Vec8& q, const PostureProblem& prob);

struct CostEval {
  double value = 0.0;       // smoothed cost used by the optimizer
  double exact_value = 0.0; // same cost with the exact bimanual max
  Vec8 gradient = Vec8::Zero();
  double ergonomic_term = 0.0;     // alpha * s(q)^2, exact max
  double manipulability_term = 0.0;
  double deviation_term = 0.0;
};

CostEval posture_cost(const Vec8& q, const PostureProblem& prob);

struct PostureSolution {
  Vec8 q_opt = Vec8::Zero();
  bool improved = false;  // false means NoImprovement: q_init returned
  int winning_start = 0;
  double cost_init = 0.0;
  double cost_opt = 0.0;
  double ergonomic_term = 0.0;
  double manipulability_term = 0.0;
  double deviation_term = 0.0;
  double score_init = 0.0;  // exact bimanual ergonomic score before/after
  double score_opt = 0.0;
  Vec3 wrist_left_init, wrist_right_init;
  Vec3 wrist_left_opt, wrist_right_opt;
  double constraint_residual = 0.0;  // | ||dw_opt|| - ||dw_init|| |
};

/// Minimizes the weighted ergonomics/manipulability/deviation cost over both
/// arms subject to the joint-limit box and wrist-distance preservation.
/// Throws InfeasibleStart when q_init violates the box.
PostureSolution optimize_posture(const PostureProblem& prob);

}  // namespace cocarry
