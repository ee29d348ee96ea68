#include "cocarry/posture_opt.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cocarry/errors.hpp"
#include "cocarry/rng.hpp"

namespace cocarry {

namespace {

Vec8 clamp8(const Vec8& q) {
  Vec8 out;
  out.head<4>() = clamp_to_limits(q.head<4>());
  out.tail<4>() = clamp_to_limits(q.tail<4>());
  return out;
}

bool inside8(const Vec8& q, double tol = 1e-12) {
  return (q - clamp8(q)).cwiseAbs().maxCoeff() <= tol;
}

double arm_capacity(const Vec4& q, Side side, const PostureProblem& prob) {
  ArmState s{q, side};
  return force_capacity_along(position_jacobian(s, prob.geom), prob.load_dir,
                              prob.opts.capacity_formula);
}

double effective_m0(const PostureProblem& prob) {
  if (std::isfinite(prob.m0)) return prob.m0;
  return default_reference_capacity(prob.geom, prob.load_dir,
                                    prob.opts.capacity_formula);
}

struct WristPair {
  Vec3 left, right;
};

WristPair wrists(const Vec8& q, const PostureProblem& prob) {
  const ArmPoints l = forward_kinematics({q.head<4>(), Side::Left}, prob.geom,
                                         prob.shoulder(Side::Left));
  const ArmPoints r = forward_kinematics({q.tail<4>(), Side::Right}, prob.geom,
                                         prob.shoulder(Side::Right));
  return {l.wrist, r.wrist};
}

double wrist_distance(const Vec8& q, const PostureProblem& prob) {
  const WristPair w = wrists(q, prob);
  return (w.left - w.right).norm();
}

// Smoothed cost with user weights normalized to sum 1, which makes the
// optimizer's trajectory invariant to a common scaling of alpha/beta/gamma.
struct CostCore {
  const PostureProblem& prob;
  double m0;
  double wsum;

  explicit CostCore(const PostureProblem& p)
      : prob(p), m0(effective_m0(p)), wsum(p.alpha + p.beta + p.gamma) {}

  double smooth_score(const Vec8& q) const {
    return smooth_max(arm_score(q.head<4>(), prob.tables),
                      arm_score(q.tail<4>(), prob.tables), prob.opts.kappa);
  }

  double deviation(const Vec8& q) const {
    const double ml = arm_capacity(q.head<4>(), Side::Left, prob);
    const double mr = arm_capacity(q.tail<4>(), Side::Right, prob);
    return std::sqrt((ml - m0) * (ml - m0) + (mr - m0) * (mr - m0));
  }

  double smooth_value(const Vec8& q) const {
    const double s = smooth_score(q);
    const double m = deviation(q);
    const double d = (q - prob.q_init).squaredNorm();
    return (prob.alpha * s * s + prob.beta * m * m + prob.gamma * d) / wsum;
  }

  double exact_value(const Vec8& q) const {
    const double s = std::max(arm_score(q.head<4>(), prob.tables),
                              arm_score(q.tail<4>(), prob.tables));
    const double m = deviation(q);
    const double d = (q - prob.q_init).squaredNorm();
    return (prob.alpha * s * s + prob.beta * m * m + prob.gamma * d) / wsum;
  }
};

template <typename F>
Vec8 central_gradient(const F& f, const Vec8& q, double h = 1e-6) {
  Vec8 g;
  Vec8 x = q;
  for (int i = 0; i < 8; ++i) {
    const double step = h * std::max(1.0, std::abs(q[i]));
    x[i] = q[i] + step;
    const double fp = f(x);
    x[i] = q[i] - step;
    const double fm = f(x);
    x[i] = q[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

double projected_grad_norm8(const Vec8& q, const Vec8& g) {
  double nrm2 = 0.0;
  for (int i = 0; i < 8; ++i) {
    const int j = i % 4;
    double gi = g[i];
    if (q[i] <= joint_limits::lower[j] + 1e-14 && gi > 0.0) gi = 0.0;
    if (q[i] >= joint_limits::upper[j] - 1e-14 && gi < 0.0) gi = 0.0;
    nrm2 += gi * gi;
  }
  return std::sqrt(nrm2);
}

// Projected gradient descent with Barzilai-Borwein steps and Armijo
// backtracking. The objective is smooth except at the piecewise-linear REBA
// kinks; backtracking handles those as subgradient steps.
template <typename F>
Vec8 projected_descent(const F& f, Vec8 q, int max_iters, double grad_tol) {
  double fq = f(q);
  Vec8 g = central_gradient(f, q);
  double t = 1.0 / std::max(1e-12, g.template lpNorm<Eigen::Infinity>());
  Vec8 q_prev = q, g_prev = g;

  for (int it = 0; it < max_iters; ++it) {
    if (projected_grad_norm8(q, g) < grad_tol) break;
    bool accepted = false;
    double step = t;
    for (int bt = 0; bt < 40; ++bt) {
      const Vec8 q_new = clamp8(q - step * g);
      const double f_new = f(q_new);
      const double decrease = g.dot(q - q_new);
      if (f_new <= fq - 1e-4 * decrease && f_new < fq) {
        q_prev = q;
        g_prev = g;
        q = q_new;
        fq = f_new;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    g = central_gradient(f, q);
    const Vec8 dq = q - q_prev;
    const Vec8 dg = g - g_prev;
    const double denom = dq.dot(dg);
    t = denom > 1e-16 ? dq.squaredNorm() / denom
                      : 1.0 / std::max(1e-12, g.template lpNorm<Eigen::Infinity>());
    t = std::clamp(t, 1e-8, 1e4);
  }
  return q;
}

}  // namespace

Vec3 PostureProblem::shoulder(Side s) const {
  const Vec3& v = s == Side::Left ? shoulder_left : shoulder_right;
  return v.allFinite() ? v : geom.shoulder(s);
}

bool PostureProblem::valid() const {
  return geom.valid() && alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0 &&
         alpha + beta + gamma > 0.0 && eps > 0.0 &&
         std::abs(load_dir.norm() - 1.0) < 1e-9;
}

double default_reference_capacity(const BodyGeometry& geom, const Vec3& load_dir,
                                  CapacityFormula formula) {
  Rng rng(0x6d30ULL);
  std::vector<double> caps;
  caps.reserve(512);
  for (int n = 0; n < 512; ++n) {
    Vec4 q;
    for (int i = 0; i < 4; ++i)
      q[i] = rng.uniform(joint_limits::lower[i], joint_limits::upper[i]);
    caps.push_back(force_capacity_along(
        position_jacobian({q, Side::Right}, geom), load_dir, formula));
  }
  std::nth_element(caps.begin(), caps.begin() + caps.size() / 2, caps.end());
  return caps[caps.size() / 2];
}

double manip_deviation(const Vec8& q, const PostureProblem& prob) {
  return CostCore(prob).deviation(q);
}

CostEval posture_cost(const Vec8& q, const PostureProblem& prob) {
  const CostCore core(prob);
  CostEval out;
  out.value = core.smooth_value(q);
  out.exact_value = core.exact_value(q);
  out.gradient = central_gradient([&](const Vec8& x) { return core.smooth_value(x); }, q);
  const double s = std::max(arm_score(q.head<4>(), prob.tables),
                            arm_score(q.tail<4>(), prob.tables));
  const double m = core.deviation(q);
  out.ergonomic_term = prob.alpha * s * s;
  out.manipulability_term = prob.beta * m * m;
  out.deviation_term = prob.gamma * (q - prob.q_init).squaredNorm();
  return out;
}

PostureSolution optimize_posture(const PostureProblem& prob_in) {
  if (!prob_in.valid()) throw ConfigError("invalid posture problem");
  if (!inside8(prob_in.q_init)) throw InfeasibleStart("q_init violates joint limits");

  PostureProblem prob = prob_in;
  prob.m0 = effective_m0(prob_in);
  prob.shoulder_left = prob_in.shoulder(Side::Left);
  prob.shoulder_right = prob_in.shoulder(Side::Right);
  const CostCore core(prob);

  const double d_init = wrist_distance(prob.q_init, prob);
  const auto violation = [&](const Vec8& q) {
    return std::abs(wrist_distance(q, prob) - d_init) - prob.eps;
  };

  // Multi-start seeds: q_init, fixed-seed Gaussian perturbations around it,
  // then uniform samples over the whole box so distant basins are reachable.
  std::vector<Vec8> starts;
  starts.push_back(prob.q_init);
  Rng rng(prob.opts.seed);
  for (int s = 1; s < prob.opts.multistarts; ++s) {
    Vec8 q = prob.q_init;
    for (int i = 0; i < 8; ++i) q[i] += prob.opts.perturb_sigma * rng.normal();
    starts.push_back(clamp8(q));
  }
  for (int s = 0; s < prob.opts.global_starts; ++s) {
    Vec8 q;
    for (int i = 0; i < 8; ++i)
      q[i] = rng.uniform(joint_limits::lower[static_cast<std::size_t>(i % 4)],
                         joint_limits::upper[static_cast<std::size_t>(i % 4)]);
    starts.push_back(q);
  }

  struct Candidate {
    Vec8 q;
    double exact_cost;
    int start;
  };
  std::vector<Candidate> feasible;

  // Coarse-lattice scan: feasible lattice points enter the candidate pool
  // directly and the best of them seed additional descent starts.
  if (prob.opts.lattice_levels > 1 && prob.opts.lattice_starts > 0) {
    const int L = prob.opts.lattice_levels;
    std::vector<Candidate> lattice;
    std::array<int, 8> idx{};
    while (true) {
      Vec8 q;
      for (int i = 0; i < 8; ++i) {
        const auto j = static_cast<std::size_t>(i % 4);
        q[i] = joint_limits::lower[j] +
               (joint_limits::upper[j] - joint_limits::lower[j]) * idx[static_cast<std::size_t>(i)] / (L - 1);
      }
      if (violation(q) <= 0.0)
        lattice.push_back({q, core.exact_value(q), static_cast<int>(starts.size())});
      int i = 0;
      for (; i < 8; ++i) {
        if (++idx[static_cast<std::size_t>(i)] < L) break;
        idx[static_cast<std::size_t>(i)] = 0;
      }
      if (i == 8) break;
    }
    std::sort(lattice.begin(), lattice.end(),
              [](const Candidate& a, const Candidate& b) { return a.exact_cost < b.exact_cost; });
    const int keep = std::min<int>(prob.opts.lattice_starts, static_cast<int>(lattice.size()));
    for (int k = 0; k < keep; ++k) {
      Candidate c = lattice[static_cast<std::size_t>(k)];
      c.start = static_cast<int>(starts.size());
      starts.push_back(c.q);
      feasible.push_back(c);
    }
  }

  for (int s = 0; s < static_cast<int>(starts.size()); ++s) {
    Vec8 q = starts[s];
    double lambda = 0.0;
    double mu = prob.opts.al_mu0;
    for (int round = 0; round < prob.opts.al_rounds; ++round) {
      const auto augmented = [&](const Vec8& x) {
        const double g = violation(x);
        const double t = std::max(0.0, g + lambda / mu);
        return core.smooth_value(x) + 0.5 * mu * t * t;
      };
      q = projected_descent(augmented, q, prob.opts.inner_iterations,
                            prob.opts.gradient_tolerance);
      const double g = violation(q);
      lambda = std::max(0.0, lambda + mu * g);
      if (g <= 1e-12 && round >= 1) break;
      mu *= prob.opts.al_mu_growth;
    }

    // Feasibility repair: pull the wrist distance back inside the band with
    // a 1D secant search along the distance gradient.
    if (violation(q) > 0.0) {
      const double target =
          d_init + (wrist_distance(q, prob) > d_init ? 1.0 : -1.0) *
                       (prob.eps - 1e-10);
      Vec8 dir = central_gradient(
          [&](const Vec8& x) { return wrist_distance(x, prob); }, q);
      const double dn = dir.norm();
      if (dn > 1e-12) {
        dir /= dn;
        double t0 = 0.0, t1 = (target - wrist_distance(q, prob)) / dn;
        for (int it = 0; it < 60; ++it) {
          const Vec8 q1 = clamp8(q + t1 * dir);
          const double h1 = wrist_distance(q1, prob) - target;
          if (std::abs(h1) < 1e-11) {
            q = q1;
            break;
          }
          const Vec8 q0 = clamp8(q + t0 * dir);
          const double h0 = wrist_distance(q0, prob) - target;
          if (std::abs(h1 - h0) < 1e-15) break;
          const double t2 = t1 - h1 * (t1 - t0) / (h1 - h0);
          t0 = t1;
          t1 = t2;
        }
        if (violation(q) > 0.0) q = clamp8(q + t1 * dir);
      }
    }

    if (violation(q) <= 1e-12)
      feasible.push_back({q, core.exact_value(q), s});
  }

  const double cost_init = core.exact_value(prob.q_init);
  Candidate best{prob.q_init, cost_init, 0};
  bool improved = false;
  for (const Candidate& c : feasible) {
    if (c.exact_cost < best.exact_cost - 1e-12) {
      best = c;
      improved = true;
    }
  }

  PostureSolution sol;
  sol.q_opt = improved ? best.q : prob.q_init;
  sol.improved = improved;
  sol.winning_start = improved ? best.start : 0;
  sol.cost_init = cost_init * core.wsum;
  sol.cost_opt = core.exact_value(sol.q_opt) * core.wsum;
  const CostEval ce = posture_cost(sol.q_opt, prob);
  sol.ergonomic_term = ce.ergonomic_term;
  sol.manipulability_term = ce.manipulability_term;
  sol.deviation_term = ce.deviation_term;
  sol.score_init = std::max(arm_score(prob.q_init.head<4>(), prob.tables),
                            arm_score(prob.q_init.tail<4>(), prob.tables));
  sol.score_opt = std::max(arm_score(sol.q_opt.head<4>(), prob.tables),
                           arm_score(sol.q_opt.tail<4>(), prob.tables));
  const WristPair wi = wrists(prob.q_init, prob);
  const WristPair wo = wrists(sol.q_opt, prob);
  sol.wrist_left_init = wi.left;
  sol.wrist_right_init = wi.right;
  sol.wrist_left_opt = wo.left;
  sol.wrist_right_opt = wo.right;
  sol.constraint_residual =
      std::abs((wo.left - wo.right).norm() - (wi.left - wi.right).norm());
  return sol;
}

}  // namespace cocarry
