#pragma once

#include <Eigen/Cholesky>

#include "cocarry/types.hpp"

namespace cocarry {

/// Convex QP: minimize 0.5 z^T P z + q^T z subject to l <= A z <= u.
struct Qp {
  MatX P;
  VecX q;
  MatX A;
  VecX lower;
  VecX upper;
};

enum class QpStatus { Solved, MaxIterations, Infeasible };

struct QpSolution {
  VecX z;
  VecX y;  // constraint multipliers
  QpStatus status = QpStatus::Solved;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  int violated_constraint = -1;  // most implicated row when Infeasible
};

struct QpSettings {
  double rho = 1.0;
  double sigma = 1e-6;
  double alpha = 1.6;  // over-relaxation
  int max_iterations = 20000;
  int check_interval = 25;
  double eps = 1e-9;             // target KKT residual
  double eps_admm = 1e-5;        // ADMM residual that triggers a polish try
  double eps_infeasibility = 1e-12;
};

/// Operator-splitting solver with an active-set polish step. The constraint
/// structure (P, A) is factorized once; repeated solves with new linear
/// terms and bounds reuse the factorization and warm-start from the last
/// solution, which is what the receding-horizon controller needs.
class QpSolver {
 public:
  QpSolver(MatX P, MatX A, QpSettings settings = {});

  QpSolution solve(const VecX& q, const VecX& lower, const VecX& upper);
  void reset_warm_start();

  int num_variables() const { return n_; }
  int num_constraints() const { return m_; }

 private:
  QpSettings settings_;
  MatX P_, A_;
  int n_, m_;
  Eigen::LLT<MatX> kkt_;     // P + sigma I + rho A^T A
  Eigen::LLT<MatX> polish_;  // P + delta I, shared by every polish attempt
  VecX z_, slack_, y_;
  bool warm_ = false;
};

/// One-shot convenience wrapper.
QpSolution solve_qp(const Qp& qp, const QpSettings& settings = {});

}  // namespace cocarry
