#include "cocarry/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

double primal_violation(const VecX& az, const VecX& l, const VecX& u) {
  return std::max(0.0, std::max((l - az).maxCoeff(), (az - u).maxCoeff()));
}

struct PolishOutcome {
  bool ok = false;
  VecX z, y;
  double kkt = 0.0;
};

double kkt_residual(const MatX& P, const VecX& q, const MatX& A, const VecX& l,
                    const VecX& u, const VecX& z, const VecX& y) {
  double dual = (P * z + q + A.transpose() * y).lpNorm<Eigen::Infinity>();
  double prim = 0.0, comp = 0.0;
  if (A.rows() > 0) {
    const VecX az = A * z;
    prim = primal_violation(az, l, u);
    for (int i = 0; i < A.rows(); ++i) {
      if (y[i] > 0.0)
        comp = std::max(comp, y[i] * std::abs(u[i] - az[i]));
      else if (y[i] < 0.0)
        comp = std::max(comp, -y[i] * std::abs(az[i] - l[i]));
    }
  }
  return std::max({dual, prim, comp});
}

// Equality-constrained solve on the guessed active set via a Schur
// complement against the cached P + delta I factorization, with one round of
// iterative refinement. The regularized KKT system is
//   [P + dI   A_act^T] [z]   [-q]
//   [A_act     -dI   ] [y] = [ b]
PolishOutcome polish(const Eigen::LLT<MatX>& pfac, const MatX& P, const VecX& q,
                     const MatX& A, const VecX& l, const VecX& u,
                     const VecX& z_admm, const VecX& y_admm, double eps) {
  const int n = static_cast<int>(P.rows());
  const int m = static_cast<int>(A.rows());
  const double act_tol = 1e-7;
  const double delta = 1e-10;

  std::vector<int> act;
  std::vector<bool> at_upper;
  {
    const VecX az = m > 0 ? VecX(A * z_admm) : VecX();
    for (int i = 0; i < m; ++i) {
      const bool up = y_admm[i] > act_tol || az[i] > u[i] - act_tol;
      const bool lo = y_admm[i] < -act_tol || az[i] < l[i] + act_tol;
      if (up || lo) {
        act.push_back(i);
        at_upper.push_back(up && !lo ? true : y_admm[i] >= 0.0);
      }
    }
  }

  // The initial guess may misclassify weakly-active or nearly-active
  // constraints, so refine it: drop constraints whose multiplier lands on the
  // wrong side and add constraints the trial solution violates, until the
  // active set is self-consistent.
  for (int round = 0; round < 2 * m + 2; ++round) {
    const int na = static_cast<int>(act.size());

    MatX At(n, na);  // A_act^T
    VecX b(na);
    for (int a = 0; a < na; ++a) {
      At.col(a) = A.row(act[a]).transpose();
      b[a] = at_upper[a] ? u[act[a]] : l[act[a]];
    }
    const MatX Y = pfac.solve(At);
    Eigen::LLT<MatX> schur;
    if (na > 0) {
      schur.compute(MatX(At.transpose() * Y) + delta * MatX::Identity(na, na));
      if (schur.info() != Eigen::Success) return {};
    }

    const auto kkt_solve = [&](const VecX& r1, const VecX& r2, VecX& dz, VecX& dy) {
      const VecX z0 = pfac.solve(r1);
      if (na > 0) {
        dy = schur.solve(At.transpose() * z0 - r2);
        dz = z0 - Y * dy;
      } else {
        dy.resize(0);
        dz = z0;
      }
    };

    VecX z, ya;
    kkt_solve(-q, b, z, ya);
    // Iterative refinement against the *unregularized* KKT operator; the
    // regularized factorization is only the preconditioner, so the iterates
    // converge to the exact active-set solution and the delta terms do not
    // leave a residual floor.
    for (int pass = 0; pass < 6; ++pass) {
      const VecX r1 = -q - (P * z + (na > 0 ? VecX(At * ya) : VecX::Zero(n)));
      const VecX r2 = na > 0 ? VecX(b - At.transpose() * z) : VecX();
      if (r1.lpNorm<Eigen::Infinity>() < 1e-14 &&
          (na == 0 || r2.lpNorm<Eigen::Infinity>() < 1e-14))
        break;
      VecX dz, dy;
      kkt_solve(r1, r2, dz, dy);
      z += dz;
      if (na > 0) ya += dy;
    }

    // Dual signs must match the side each constraint is active on; drop the
    // offenders so they can go inactive (or re-enter on the other side).
    bool changed = false;
    std::vector<int> next_act;
    std::vector<bool> next_upper;
    for (int a = 0; a < na; ++a) {
      if ((at_upper[a] && ya[a] < -eps) || (!at_upper[a] && ya[a] > eps)) {
        changed = true;
        continue;
      }
      next_act.push_back(act[a]);
      next_upper.push_back(at_upper[a]);
    }
    // Add any constraint the trial point violates.
    const VecX az = m > 0 ? VecX(A * z) : VecX();
    std::vector<bool> in_set(m, false);
    for (int a : next_act) in_set[a] = true;
    for (int i = 0; i < m; ++i) {
      if (in_set[i]) continue;
      if (az[i] > u[i] + eps) {
        next_act.push_back(i);
        next_upper.push_back(true);
        changed = true;
      } else if (az[i] < l[i] - eps) {
        next_act.push_back(i);
        next_upper.push_back(false);
        changed = true;
      }
    }

    if (!changed) {
      PolishOutcome out;
      out.z = z;
      out.y = VecX::Zero(m);
      for (int a = 0; a < na; ++a) out.y[act[a]] = ya[a];
      out.kkt = kkt_residual(P, q, A, l, u, out.z, out.y);
      out.ok = out.kkt <= eps;
      return out;
    }
    act = std::move(next_act);
    at_upper = std::move(next_upper);
  }
  return {};
}

}  // namespace

QpSolver::QpSolver(MatX P, MatX A, QpSettings settings)
    : settings_(settings), P_(std::move(P)), A_(std::move(A)) {
  n_ = static_cast<int>(P_.rows());
  m_ = static_cast<int>(A_.rows());
  if (P_.cols() != n_ || (m_ > 0 && A_.cols() != n_))
    throw DimensionMismatch("QP matrix dimensions are inconsistent");
  MatX reduced = P_ + settings_.sigma * MatX::Identity(n_, n_);
  if (m_ > 0) reduced += settings_.rho * A_.transpose() * A_;
  kkt_.compute(reduced);
  if (kkt_.info() != Eigen::Success)
    throw DimensionMismatch("QP cost matrix is not positive semidefinite");
  polish_.compute(P_ + 1e-10 * MatX::Identity(n_, n_));
  reset_warm_start();
}

void QpSolver::reset_warm_start() {
  z_ = VecX::Zero(n_);
  slack_ = VecX::Zero(m_);
  y_ = VecX::Zero(m_);
  warm_ = false;
}

QpSolution QpSolver::solve(const VecX& q, const VecX& lower, const VecX& upper) {
  if (q.size() != n_ || lower.size() != m_ || upper.size() != m_)
    throw DimensionMismatch("QP vector dimensions are inconsistent");

  const double rho = settings_.rho;
  const double alpha = settings_.alpha;

  if (!warm_ && m_ > 0)
    slack_ = (A_ * z_).cwiseMax(lower).cwiseMin(upper);
  warm_ = true;

  QpSolution out;
  out.status = QpStatus::MaxIterations;

  // Polish is attempted as soon as ADMM reaches eps_admm; each failed
  // attempt tightens the trigger so the iterate is more accurate next time.
  double polish_level = settings_.eps_admm;
  int last_it = settings_.max_iterations;

  for (int it = 1; it <= settings_.max_iterations; ++it) {
    VecX rhs = settings_.sigma * z_ - q;
    if (m_ > 0) rhs += A_.transpose() * (rho * slack_ - y_);
    const VecX x_tilde = kkt_.solve(rhs);
    const VecX z_next = alpha * x_tilde + (1.0 - alpha) * z_;

    VecX dy;
    if (m_ > 0) {
      const VecX zeta_tilde = A_ * x_tilde;
      const VecX w = alpha * zeta_tilde + (1.0 - alpha) * slack_;
      const VecX slack_next = (w + y_ / rho).cwiseMax(lower).cwiseMin(upper);
      dy = rho * (w - slack_next);
      y_ += dy;
      slack_ = slack_next;
    }
    z_ = z_next;

    if (it % settings_.check_interval != 0 && it != settings_.max_iterations)
      continue;

    double r_prim = 0.0;
    if (m_ > 0) r_prim = (A_ * z_ - slack_).lpNorm<Eigen::Infinity>();
    const double r_dual =
        (P_ * z_ + q + (m_ > 0 ? VecX(A_.transpose() * y_) : VecX::Zero(n_)))
            .lpNorm<Eigen::Infinity>();

    if (m_ > 0 && dy.size() > 0) {
      // Primal infeasibility certificate in the dual update direction.
      const double dy_norm = dy.lpNorm<Eigen::Infinity>();
      if (dy_norm > settings_.eps_infeasibility) {
        const double atdy = (A_.transpose() * dy).lpNorm<Eigen::Infinity>();
        double support = 0.0;
        for (int i = 0; i < m_; ++i)
          support += upper[i] * std::max(dy[i], 0.0) + lower[i] * std::min(dy[i], 0.0);
        if (atdy <= 1e-8 * dy_norm && support < -1e-8 * dy_norm) {
          out.status = QpStatus::Infeasible;
          int worst = 0;
          dy.cwiseAbs().maxCoeff(&worst);
          out.violated_constraint = worst;
          out.z = z_;
          out.y = y_;
          out.iterations = it;
          reset_warm_start();
          return out;
        }
      }
    }

    const double r_admm = std::max(r_prim, r_dual);
    if (r_admm <= polish_level) {
      const PolishOutcome p =
          polish(polish_, P_, q, A_, lower, upper, z_, y_, settings_.eps);
      if (p.ok) {
        out.z = p.z;
        out.y = p.y;
        out.status = QpStatus::Solved;
        out.kkt_residual = p.kkt;
        out.iterations = it;
        out.objective = 0.5 * out.z.dot(P_ * out.z) + q.dot(out.z);
        // Warm-start the next solve from the un-polished iterate.
        return out;
      }
      polish_level = std::max(0.1 * r_admm, settings_.eps);
      if (r_admm <= settings_.eps) {
        last_it = it;
        break;
      }
    }
  }

  out.z = z_;
  out.y = y_;
  out.kkt_residual = kkt_residual(P_, q, A_, lower, upper, z_, y_);
  out.iterations = last_it;
  out.objective = 0.5 * z_.dot(P_ * z_) + q.dot(z_);
  if (out.kkt_residual <= settings_.eps) out.status = QpStatus::Solved;
  return out;
}

QpSolution solve_qp(const Qp& qp, const QpSettings& settings) {
  QpSolver solver(qp.P, qp.A, settings);
  return solver.solve(qp.q, qp.lower, qp.upper);
}

}  // namespace cocarry
