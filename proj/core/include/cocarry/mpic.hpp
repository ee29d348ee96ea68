#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cocarry/qp.hpp"
#include "cocarry/trajectory.hpp"
#include "cocarry/types.hpp"

namespace cocarry {

/// Discrete interaction model X_{k+1} = A X_k + B u_k.
struct InteractionModel {
  MatX A;
  MatX B;
  double dt = 0.01;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  bool consistent() const;

  /// Two Cartesian arms rendered as virtual mass-damper point masses.
  /// State ordering: [p_left(3), v_left(3), p_right(3), v_right(3)];
  /// inputs are the per-arm Cartesian forces [f_left(3), f_right(3)].
  /// Exact zero-order-hold discretization.
  static InteractionModel bimanual_cartesian(double virtual_mass,
                                             double virtual_damping, double dt);
};

struct MpcGains {
  MatX K_I;      // impedance gain, input_dim x state_dim
  MatX C;        // coordination selector, c x state_dim
  MatX D_u;      // input-space adjoint of C, input_dim x c
  MatX K_C;      // collaborative gain, c x c
  MatX K_F;      // force feedback gain, input_dim x input_dim
  MatX Q_I, Q_C, Q_F, Q_u;  // weights, input_dim x input_dim; Q_u PD
  int horizon = 20;
  VecX u_max;    // per-input limits, > 0
  VecX x_max;    // per-state limits, > 0
  // The force feedback term defaults to +F_e - K_F F_tilde; this flag
  // negates it for experimentation.
  bool flip_force_feedback = false;

  /// Defaults sized for a ~5 kg object: 400 N/m stiffness, 40 Ns/m damping,
  /// K_C = 200 N/m on the relative position, K_F = 0.5.
  static MpcGains bimanual_defaults(const InteractionModel& model);
};

struct MpcStep {
  VecX state;                  // X_k
  std::vector<VecX> reference; // X_ref over k .. k+N (N+1 entries)
  VecX external_force;         // F_e,k
  VecX reference_force;        // F_ref
};

/// Stacked-horizon QP with decision vector [u; w; v; s], each of length
/// input_dim * N; the state trajectory is eliminated by forward substitution.
struct MpcQp {
  Qp qp;
  int input_dim = 0;
  int horizon = 0;
  double objective_constant = 0.0;  // completes the tracking cost value
};

MpcQp build_qp(const MpcStep& step, const InteractionModel& model,
               const MpcGains& gains);

struct ControlDecision {
  VecX u, w, v, s;  // first-step decomposition
  QpStatus status = QpStatus::Solved;
  bool fallback = false;  // saturated impedance-only law was used
  double kkt_residual = 0.0;
  double objective = 0.0;
};

/// Receding-horizon controller. Holds the condensed matrices and the QP
/// factorization; per-step solves only refresh the linear term and bounds.
class MpcController {
 public:
  MpcController(InteractionModel model, MpcGains gains, QpSettings settings = {});
  ~MpcController();
  MpcController(MpcController&&) noexcept;
  MpcController& operator=(MpcController&&) noexcept;

  ControlDecision step(const MpcStep& step);

  const InteractionModel& model() const;
  const MpcGains& gains() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ControlDecision control_step(const MpcStep& step, const InteractionModel& model,
                             const MpcGains& gains);

// ---- Simulation plant ----

struct PlantConfig {
  double virtual_mass = 5.0;     // kg rendered per arm
  double virtual_damping = 0.0;  // Ns/m
  // Optional rigid object coupled to both end effectors by stiff springs,
  // producing realistic coupled external forces.
  bool object_coupling = false;
  double object_mass = 5.0;
  double spring_stiffness = 10e3;  // N/m
  double spring_damping = 50.0;    // Ns/m
  Vec3 gravity = Vec3::Zero();
  Vec3 grasp_offset_left = Vec3(0.0, 0.25, 0.0);   // object center -> grasp
  Vec3 grasp_offset_right = Vec3(0.0, -0.25, 0.0);
  int substeps = 10;
};

struct Disturbance {
  double t_on = 0.0;
  double t_off = 0.0;
  Side arm = Side::Left;
  Vec3 force = Vec3::Zero();
};

/// Declarative disturbance script, CSV: t_on,t_off,arm,fx,fy,fz.
std::vector<Disturbance> parse_disturbance_script(const std::string& path);

struct SimRow {
  double t;
  VecX state;       // plant state, model ordering
  VecX reference;   // tracked reference state
  VecX u, w, v, s;  // controller decomposition
  VecX external_force;
  double constraint_margin;  // min over states of x_max - |X|
  bool fallback;
};

struct SimulationResult {
  std::vector<SimRow> rows;
  int fallback_steps = 0;
  double max_state_violation = 0.0;  // over non-fallback steps
  double terminal_error = 0.0;       // position tracking error at the end
  bool diverged = false;
};

struct SimulateOptions {
  double settle_time = 2.0;  // seconds appended after the trajectory ends
  VecX reference_force;      // empty means zero
  QpSettings qp;
};

/// Closed-loop rollout of the bimanual controller against the virtual plant.
/// Trajectories must be sampled at the model rate (1/dt).
SimulationResult simulate(const InteractionModel& model, const MpcGains& gains,
                          const PlantConfig& plant,
                          const std::vector<TrajectorySample>& left,
                          const std::vector<TrajectorySample>& right,
                          const std::vector<Disturbance>& disturbances,
                          const SimulateOptions& options = {});

/// CSV log: t, per-arm p/v, u/w/v/s, F_e, constraint margin, fallback flag.
void write_simulation_csv(const std::string& path, const SimulationResult& result);

}  // namespace cocarry
