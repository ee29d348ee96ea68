#include "cocarry/mpic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

// Exact ZOH discretization of one axis of m v' = u - d v.
void axis_discretization(double mass, double damping, double dt, double& a_pv,
                         double& a_vv, double& b_p, double& b_v) {
  if (damping > 0.0) {
    const double a = damping / mass;
    const double e = std::exp(-a * dt);
    a_pv = (1.0 - e) / a;
    a_vv = e;
    b_p = (dt - (1.0 - e) / a) / damping;
    b_v = (1.0 - e) / damping;
  } else {
    a_pv = dt;
    a_vv = 1.0;
    b_p = 0.5 * dt * dt / mass;
    b_v = dt / mass;
  }
}

}  // namespace

bool InteractionModel::consistent() const {
  return A.rows() == A.cols() && B.rows() == A.rows() && dt > 0.0 &&
         B.cols() > 0;
}

InteractionModel InteractionModel::bimanual_cartesian(double virtual_mass,
                                                      double virtual_damping,
                                                      double dt) {
  double a_pv, a_vv, b_p, b_v;
  axis_discretization(virtual_mass, virtual_damping, dt, a_pv, a_vv, b_p, b_v);

  InteractionModel m;
  m.dt = dt;
  m.A = MatX::Zero(12, 12);
  m.B = MatX::Zero(12, 6);
  for (int arm = 0; arm < 2; ++arm) {
    const int p0 = arm * 6, v0 = arm * 6 + 3, u0 = arm * 3;
    for (int i = 0; i < 3; ++i) {
      m.A(p0 + i, p0 + i) = 1.0;
      m.A(p0 + i, v0 + i) = a_pv;
      m.A(v0 + i, v0 + i) = a_vv;
      m.B(p0 + i, u0 + i) = b_p;
      m.B(v0 + i, u0 + i) = b_v;
    }
  }
  return m;
}

MpcGains MpcGains::bimanual_defaults(const InteractionModel& model) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  MpcGains g;
  g.K_I = MatX::Zero(m, n);
  for (int arm = 0; arm < 2; ++arm)
    for (int i = 0; i < 3; ++i) {
      g.K_I(arm * 3 + i, arm * 6 + i) = 400.0;      // stiffness
      g.K_I(arm * 3 + i, arm * 6 + 3 + i) = 40.0;   // damping
    }
  g.C = MatX::Zero(3, n);
  g.C.block(0, 0, 3, 3) = Mat3::Identity();
  g.C.block(0, 6, 3, 3) = -Mat3::Identity();
  g.D_u = MatX::Zero(m, 3);
  g.D_u.block(0, 0, 3, 3) = Mat3::Identity();
  g.D_u.block(3, 0, 3, 3) = -Mat3::Identity();
  g.K_C = 200.0 * Mat3::Identity();
  g.K_F = 0.5 * MatX::Identity(m, m);
  g.Q_I = MatX::Identity(m, m);
  g.Q_C = MatX::Identity(m, m);
  g.Q_F = 0.1 * MatX::Identity(m, m);
  g.Q_u = 0.01 * MatX::Identity(m, m);
  g.horizon = 20;
  g.u_max = VecX::Constant(m, 150.0);
  g.x_max = VecX::Zero(n);
  for (int arm = 0; arm < 2; ++arm) {
    g.x_max.segment(arm * 6, 3).setConstant(3.0);      // position, m
    g.x_max.segment(arm * 6 + 3, 3).setConstant(2.0);  // velocity, m/s
  }
  return g;
}

namespace {

void check_dimensions(const InteractionModel& model, const MpcGains& gains) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (!model.consistent()) throw DimensionMismatch("inconsistent interaction model");
  if (gains.K_I.rows() != m || gains.K_I.cols() != n)
    throw DimensionMismatch("K_I must be input_dim x state_dim");
  if (gains.C.cols() != n) throw DimensionMismatch("C must have state_dim columns");
  if (gains.D_u.rows() != m || gains.D_u.cols() != gains.C.rows())
    throw DimensionMismatch("D_u must be input_dim x rows(C)");
  if (gains.K_C.rows() != gains.C.rows() || gains.K_C.cols() != gains.C.rows())
    throw DimensionMismatch("K_C must be square on rows(C)");
  for (const MatX* q : {&gains.K_F, &gains.Q_I, &gains.Q_C, &gains.Q_F, &gains.Q_u})
    if (q->rows() != m || q->cols() != m)
      throw DimensionMismatch("force/weight matrices must be input_dim square");
  if (gains.horizon < 1) throw DimensionMismatch("horizon must be >= 1");
  if (gains.u_max.size() != m || gains.x_max.size() != n)
    throw DimensionMismatch("limit vectors must match input/state dims");
}

// Condensed horizon data; everything here is independent of the current
// state and reference, so one instance serves the whole simulation.
struct Condensed {
  int n, m, N, zdim;
  std::vector<MatX> phi;      // X_k = phi[k] X0 + mmap[k] u_stack
  std::vector<MatX> mmap;
  MatX G_c;                   // D_u K_C C
  MatX H;
  MatX A_ineq;
  std::vector<MatX> e_imp, e_col;  // per-k rows of the first two cost terms

  Condensed(const InteractionModel& model, const MpcGains& gains) {
    check_dimensions(model, gains);
    n = model.state_dim();
    m = model.input_dim();
    N = gains.horizon;
    zdim = 4 * m * N;
    G_c = gains.D_u * gains.K_C * gains.C;

    phi.resize(N + 1);
    mmap.resize(N + 1);
    phi[0] = MatX::Identity(n, n);
    mmap[0] = MatX::Zero(n, m * N);
    for (int k = 1; k <= N; ++k) {
      phi[k] = model.A * phi[k - 1];
      mmap[k] = model.A * mmap[k - 1];
      mmap[k].block(0, (k - 1) * m, n, m) += model.B;
    }

    H = MatX::Zero(zdim, zdim);
    e_imp.resize(N);
    e_col.resize(N);
    for (int k = 0; k < N; ++k) {
      MatX e1 = MatX::Zero(m, zdim);
      e1.block(0, 0, m, m * N) = gains.K_I * mmap[k];
      e1.block(0, m * N + k * m, m, m) = MatX::Identity(m, m);
      MatX e2 = MatX::Zero(m, zdim);
      e2.block(0, 0, m, m * N) = G_c * mmap[k];
      e2.block(0, 2 * m * N + k * m, m, m) = MatX::Identity(m, m);
      MatX e3 = MatX::Zero(m, zdim);
      e3.block(0, 3 * m * N + k * m, m, m) = MatX::Identity(m, m);
      MatX e4 = MatX::Zero(m, zdim);
      e4.block(0, k * m, m, m) = MatX::Identity(m, m);
      e4.block(0, m * N + k * m, m, m) = -MatX::Identity(m, m);
      e4.block(0, 2 * m * N + k * m, m, m) = -MatX::Identity(m, m);
      e4.block(0, 3 * m * N + k * m, m, m) = -MatX::Identity(m, m);

      H += 2.0 * e1.transpose() * gains.Q_I * e1;
      H += 2.0 * e2.transpose() * gains.Q_C * e2;
      H += 2.0 * e3.transpose() * gains.Q_F * e3;
      H += 2.0 * e4.transpose() * gains.Q_u * e4;
      e_imp[k] = std::move(e1);
      e_col[k] = std::move(e2);
    }

    // Input box rows followed by state rows for k = 1..N.
    A_ineq = MatX::Zero(m * N + n * N, zdim);
    A_ineq.block(0, 0, m * N, m * N) = MatX::Identity(m * N, m * N);
    for (int k = 1; k <= N; ++k)
      A_ineq.block(m * N + (k - 1) * n, 0, n, m * N) = mmap[k];
  }

  void linear_terms(const MpcStep& step, const MpcGains& gains, VecX& g,
                    VecX& lower, VecX& upper, double& constant) const {
    if (step.state.size() != n)
      throw DimensionMismatch("state vector does not match the model");
    if (static_cast<int>(step.reference.size()) < N + 1)
      throw DimensionMismatch("reference window must hold horizon + 1 states");
    if (step.external_force.size() != m || step.reference_force.size() != m)
      throw DimensionMismatch("force vectors must match input_dim");

    VecX f3 = step.external_force -
              gains.K_F * (step.external_force - step.reference_force);
    if (gains.flip_force_feedback) f3 = -f3;

    g = VecX::Zero(zdim);
    constant = 0.0;
    for (int k = 0; k < N; ++k) {
      const VecX err = phi[k] * step.state - step.reference[k];
      const VecX f1 = gains.K_I * err;
      const VecX f2 = G_c * err;
      g += 2.0 * (e_imp[k].transpose() * (gains.Q_I * f1) +
                  e_col[k].transpose() * (gains.Q_C * f2));
      VecX e3g = VecX::Zero(zdim);
      e3g.segment(3 * m * N + k * m, m) = 2.0 * (gains.Q_F * f3);
      g += e3g;
      constant += f1.dot(gains.Q_I * f1) + f2.dot(gains.Q_C * f2) +
                  f3.dot(gains.Q_F * f3);
    }

    lower.resize(m * N + n * N);
    upper.resize(m * N + n * N);
    for (int k = 0; k < N; ++k) {
      lower.segment(k * m, m) = -gains.u_max;
      upper.segment(k * m, m) = gains.u_max;
    }
    for (int k = 1; k <= N; ++k) {
      const VecX offset = phi[k] * step.state;
      lower.segment(m * N + (k - 1) * n, n) = -gains.x_max - offset;
      upper.segment(m * N + (k - 1) * n, n) = gains.x_max - offset;
    }
  }
};

}  // namespace

MpcQp build_qp(const MpcStep& step, const InteractionModel& model,
               const MpcGains& gains) {
  const Condensed c(model, gains);
  MpcQp out;
  out.input_dim = c.m;
  out.horizon = c.N;
  out.qp.P = c.H;
  out.qp.A = c.A_ineq;
  c.linear_terms(step, gains, out.qp.q, out.qp.lower, out.qp.upper,
                 out.objective_constant);
  return out;
}

struct MpcController::Impl {
  InteractionModel model;
  MpcGains gains;
  Condensed condensed;
  QpSolver solver;

  Impl(InteractionModel mdl, MpcGains gns, QpSettings settings)
      : model(std::move(mdl)),
        gains(std::move(gns)),
        condensed(model, gains),
        solver(condensed.H, condensed.A_ineq, settings) {}
};

MpcController::MpcController(InteractionModel model, MpcGains gains,
                             QpSettings settings)
    : impl_(std::make_unique<Impl>(std::move(model), std::move(gains), settings)) {}

MpcController::~MpcController() = default;
MpcController::MpcController(MpcController&&) noexcept = default;
MpcController& MpcController::operator=(MpcController&&) noexcept = default;

const InteractionModel& MpcController::model() const { return impl_->model; }
const MpcGains& MpcController::gains() const { return impl_->gains; }

ControlDecision MpcController::step(const MpcStep& step) {
  const Condensed& c = impl_->condensed;
  VecX g, lower, upper;
  double constant = 0.0;
  c.linear_terms(step, impl_->gains, g, lower, upper, constant);
  QpSolution sol = impl_->solver.solve(g, lower, upper);

  ControlDecision out;
  out.status = sol.status;
  if (sol.status == QpStatus::Infeasible) {
    // Saturated impedance-only law keeps the plant controlled while the
    // constraint set is empty.
    const VecX err = step.state - step.reference.front();
    VecX u = -impl_->gains.K_I * err;
    for (int i = 0; i < c.m; ++i)
      u[i] = std::clamp(u[i], -impl_->gains.u_max[i], impl_->gains.u_max[i]);
    out.u = u;
    out.w = u;
    out.v = VecX::Zero(c.m);
    out.s = VecX::Zero(c.m);
    out.fallback = true;
    impl_->solver.reset_warm_start();
    return out;
  }
  out.u = sol.z.segment(0, c.m);
  // The input box is a hard actuator limit; solver tolerance must not leak
  // past it into the applied command.
  for (int i = 0; i < c.m; ++i)
    out.u[i] = std::clamp(out.u[i], -impl_->gains.u_max[i], impl_->gains.u_max[i]);
  out.w = sol.z.segment(c.m * c.N, c.m);
  out.v = sol.z.segment(2 * c.m * c.N, c.m);
  out.s = sol.z.segment(3 * c.m * c.N, c.m);
  out.kkt_residual = sol.kkt_residual;
  out.objective = sol.objective + constant;
  return out;
}

ControlDecision control_step(const MpcStep& step, const InteractionModel& model,
                             const MpcGains& gains) {
  MpcController controller(model, gains);
  return controller.step(step);
}

std::vector<Disturbance> parse_disturbance_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open disturbance script " + path);
  std::vector<Disturbance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> fields;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (lineno == 1 && !fields.empty() && fields[0].find("t_on") != std::string::npos)
      continue;  // header
    if (fields.size() != 6) throw ParseError("expected t_on,t_off,arm,fx,fy,fz", lineno);
    try {
      Disturbance d;
      d.t_on = std::stod(fields[0]);
      d.t_off = std::stod(fields[1]);
      std::string arm = fields[2];
      arm.erase(std::remove_if(arm.begin(), arm.end(), ::isspace), arm.end());
      if (arm == "left" || arm == "0")
        d.arm = Side::Left;
      else if (arm == "right" || arm == "1")
        d.arm = Side::Right;
      else
        throw ParseError("arm must be left|right|0|1", lineno);
      d.force = Vec3(std::stod(fields[3]), std::stod(fields[4]), std::stod(fields[5]));
      out.push_back(d);
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed number in disturbance script", lineno);
    }
  }
  return out;
}

namespace {

VecX reference_state(const std::vector<TrajectorySample>& left,
                     const std::vector<TrajectorySample>& right, int k) {
  const auto& l = left[std::min<std::size_t>(k, left.size() - 1)];
  const auto& r = right[std::min<std::size_t>(k, right.size() - 1)];
  VecX x(12);
  x.segment<3>(0) = l.pose.position;
  x.segment<3>(3) = static_cast<std::size_t>(k) < left.size() ? Vec3(l.velocity.head<3>())
                                                              : Vec3(Vec3::Zero());
  x.segment<3>(6) = r.pose.position;
  x.segment<3>(9) = static_cast<std::size_t>(k) < right.size() ? Vec3(r.velocity.head<3>())
                                                               : Vec3(Vec3::Zero());
  return x;
}

}  // namespace

SimulationResult simulate(const InteractionModel& model, const MpcGains& gains,
                          const PlantConfig& plant,
                          const std::vector<TrajectorySample>& left,
                          const std::vector<TrajectorySample>& right,
                          const std::vector<Disturbance>& disturbances,
                          const SimulateOptions& options) {
  if (model.state_dim() != 12 || model.input_dim() != 6)
    throw DimensionMismatch("simulate expects the bimanual 12-state model");
  if (left.empty() || right.empty())
    throw DimensionMismatch("simulate needs non-empty trajectories");

  MpcController controller(model, gains, options.qp);
  const double dt = model.dt;
  const int traj_steps =
      static_cast<int>(std::max(left.size(), right.size())) - 1;
  const int total_steps =
      traj_steps + static_cast<int>(std::ceil(options.settle_time / dt));

  VecX f_ref = options.reference_force.size() == 6 ? options.reference_force
                                                   : VecX::Zero(6);

  // Plant state.
  Vec3 p_l = left.front().pose.position, v_l = Vec3::Zero();
  Vec3 p_r = right.front().pose.position, v_r = Vec3::Zero();
  Vec3 p_o = 0.5 * ((p_l - plant.grasp_offset_left) + (p_r - plant.grasp_offset_right));
  Vec3 v_o = Vec3::Zero();

  const auto disturbance_force = [&](double t, Side arm) {
    Vec3 f = Vec3::Zero();
    for (const auto& d : disturbances)
      if (d.arm == arm && t >= d.t_on && t < d.t_off) f += d.force;
    return f;
  };
  const auto spring_force = [&](const Vec3& grasp, const Vec3& offset,
                                const Vec3& v_arm) {
    if (!plant.object_coupling) return Vec3(Vec3::Zero());
    return Vec3(plant.spring_stiffness * ((p_o + offset) - grasp) +
                plant.spring_damping * (v_o - v_arm));
  };

  SimulationResult result;
  result.rows.reserve(total_steps + 1);

  for (int k = 0; k <= total_steps; ++k) {
    const double t = k * dt;
    const Vec3 fe_l = spring_force(p_l, plant.grasp_offset_left, v_l) +
                      disturbance_force(t, Side::Left);
    const Vec3 fe_r = spring_force(p_r, plant.grasp_offset_right, v_r) +
                      disturbance_force(t, Side::Right);

    VecX state(12);
    state << p_l, v_l, p_r, v_r;
    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > 1e6) {
      result.diverged = true;
      break;
    }

    MpcStep step;
    step.state = state;
    step.reference.reserve(gains.horizon + 1);
    for (int j = 0; j <= gains.horizon; ++j)
      step.reference.push_back(reference_state(left, right, k + j));
    step.external_force = VecX(6);
    step.external_force << fe_l, fe_r;
    step.reference_force = f_ref;

    const ControlDecision dec = controller.step(step);

    SimRow row;
    row.t = t;
    row.state = state;
    row.reference = step.reference.front();
    row.u = dec.u;
    row.w = dec.w;
    row.v = dec.v;
    row.s = dec.s;
    row.external_force = step.external_force;
    row.constraint_margin = (gains.x_max - state.cwiseAbs()).minCoeff();
    row.fallback = dec.fallback;
    if (dec.fallback)
      ++result.fallback_steps;
    else
      result.max_state_violation =
          std::max(result.max_state_violation, -row.constraint_margin);
    result.rows.push_back(std::move(row));
    if (k == total_steps) break;

    // Integrate the plant with the first input held over dt.
    const Vec3 u_l = dec.u.segment<3>(0);
    const Vec3 u_r = dec.u.segment<3>(3);
    const double h = dt / plant.substeps;
    for (int s = 0; s < plant.substeps; ++s) {
      const double ts = t + s * h;
      const Vec3 fl = spring_force(p_l, plant.grasp_offset_left, v_l) +
                      disturbance_force(ts, Side::Left);
      const Vec3 fr = spring_force(p_r, plant.grasp_offset_right, v_r) +
                      disturbance_force(ts, Side::Right);
      // Semi-implicit Euler; object first so spring forces stay paired.
      if (plant.object_coupling) {
        const Vec3 f_o = -spring_force(p_l, plant.grasp_offset_left, v_l) -
                         spring_force(p_r, plant.grasp_offset_right, v_r) +
                         plant.object_mass * plant.gravity;
        v_o += h * f_o / plant.object_mass;
        p_o += h * v_o;
      }
      v_l += h * (u_l + fl - plant.virtual_damping * v_l) / plant.virtual_mass;
      p_l += h * v_l;
      v_r += h * (u_r + fr - plant.virtual_damping * v_r) / plant.virtual_mass;
      p_r += h * v_r;
    }
  }

  if (!result.rows.empty()) {
    const SimRow& last = result.rows.back();
    const VecX err = last.state - last.reference;
    result.terminal_error = std::sqrt(err.segment<3>(0).squaredNorm() +
                                      err.segment<3>(6).squaredNorm());
  }
  return result;
}

void write_simulation_csv(const std::string& path, const SimulationResult& result) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot open " + path + " for writing");
  std::fprintf(f, "t");
  const char* arms[2] = {"l", "r"};
  for (int a = 0; a < 2; ++a)
    std::fprintf(f, ",p%s_x,p%s_y,p%s_z,v%s_x,v%s_y,v%s_z", arms[a], arms[a],
                 arms[a], arms[a], arms[a], arms[a]);
  for (const char* name : {"u", "w", "v", "s", "fe"})
    for (int a = 0; a < 2; ++a)
      std::fprintf(f, ",%s%s_x,%s%s_y,%s%s_z", name, arms[a], name, arms[a],
                   name, arms[a]);
  std::fprintf(f, ",margin,fallback\n");
  for (const auto& row : result.rows) {
    std::fprintf(f, "%.12g", row.t);
    for (int i = 0; i < 12; ++i) std::fprintf(f, ",%.12g", row.state[i]);
    for (const VecX* v : {&row.u, &row.w, &row.v, &row.s, &row.external_force})
      for (int i = 0; i < 6; ++i) std::fprintf(f, ",%.12g", (*v)[i]);
    std::fprintf(f, ",%.12g,%d\n", row.constraint_margin, row.fallback ? 1 : 0);
  }
  std::fclose(f);
}

}  // namespace cocarry
