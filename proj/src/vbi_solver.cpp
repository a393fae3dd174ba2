#include "vino/vbi_solver.hpp"

#include "vino/errors.hpp"

#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>

namespace vino {

namespace {

using Ldlt = Eigen::SimplicialLDLT<SparseMatrix>;

void factor_or_throw(Ldlt& solver, const SparseMatrix& a, const char* what) {
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::kSingularEffectiveMatrix, what);
}

/// One axle's contribution at the current instant.
struct Axle {
  ShapeEntries l;                  // bridge interpolation vector (empty when off the bridge)
  Eigen::Vector2d e;               // (1, lever arm): couples into (z_v, theta_v)
  double k = 0.0;
  double c = 0.0;
  double position = 0.0;
  double road = 0.0;
  double road_rate = 0.0;          // dr/dt = x_dot r'(x)
  double static_load = 0.0;

  // u^T x with u = [l; -e]
  double project(const Eigen::VectorXd& x, int nb) const {
    return l.dot(x.head(nb)) - e.dot(x.tail<2>());
  }
  void scatter(double s, Eigen::VectorXd& y, int nb) const {
    for (int j = 0; j < l.count; ++j) y[l.index[j]] += s * l.value[j];
    y.segment<2>(nb) -= s * e;
  }
};

/// Constant operators shared by every step of one run.
struct BridgeOperators {
  const AssembledBridge* bridge = nullptr;
  Eigen::Vector2d vehicle_mass;
  Ldlt effective;  // M_b + gamma dt C_b + beta dt^2 K_b
  Ldlt mass;
  int nb = 0;
};

/// Augmented bridge+vehicle system at one instant. Its matrices are
/// blockdiag(X_b, 0) + sum_i x_i u_i u_i^T for X in {C, K}, where x_i is the
/// axle damping or stiffness, and M = blockdiag(M_b, M_v).
class CoupledSystem {
 public:
  CoupledSystem(const BridgeOperators& ops, const std::array<Axle, 2>& axles, const NewmarkParams& p)
      : ops_(ops), axles_(axles) {
    const int nb = ops_.nb;
    z_.resize(nb + 2, 2);
    for (int i = 0; i < 2; ++i) {
      weight_[i] = p.stiffness_coefficient() * axles_[i].k + p.damping_coefficient() * axles_[i].c;
      Eigen::VectorXd u = Eigen::VectorXd::Zero(nb + 2);
      axles_[i].scatter(1.0, u, nb);
      z_.col(i) = apply_base_inverse(u);
    }
    Eigen::Matrix2d s = Eigen::Matrix2d::Identity();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s(i, j) += weight_[i] * axles_[i].project(z_.col(j), nb);
    capacitance_ = s.partialPivLu();
    if (!(std::abs(s.determinant()) > 0.0))
      throw Error(ErrorCode::kSingularEffectiveMatrix, "axle capacitance matrix is singular");
  }

  Eigen::VectorXd damping_times(const Eigen::VectorXd& x) const { return apply(x, true); }
  Eigen::VectorXd stiffness_times(const Eigen::VectorXd& x) const { return apply(x, false); }

  Eigen::VectorXd solve_effective(const Eigen::VectorXd& b) const {
    const Eigen::VectorXd y = apply_base_inverse(b);
    Eigen::Vector2d w_uty;
    for (int i = 0; i < 2; ++i) w_uty[i] = weight_[i] * axles_[i].project(y, ops_.nb);
    return y - z_ * capacitance_.solve(w_uty);
  }

 private:
  Eigen::VectorXd apply(const Eigen::VectorXd& x, bool damping) const {
    const int nb = ops_.nb;
    Eigen::VectorXd y(nb + 2);
    const SparseMatrix& base = damping ? ops_.bridge->C : ops_.bridge->K;
    y.head(nb) = base * x.head(nb);
    y.tail<2>().setZero();
    for (const Axle& a : axles_) a.scatter((damping ? a.c : a.k) * a.project(x, nb), y, nb);
    return y;
  }

  Eigen::VectorXd apply_base_inverse(const Eigen::VectorXd& b) const {
    Eigen::VectorXd y(b.size());
    y.head(ops_.nb) = ops_.effective.solve(b.head(ops_.nb));
    y.tail<2>() = b.tail<2>().cwiseQuotient(ops_.vehicle_mass);
    return y;
  }

  const BridgeOperators& ops_;
  std::array<Axle, 2> axles_;
  std::array<double, 2> weight_{};
  Eigen::Matrix<double, Eigen::Dynamic, 2> z_;
  Eigen::PartialPivLU<Eigen::Matrix2d> capacitance_;
};

class BridgeOnlySystem {
 public:
  explicit BridgeOnlySystem(const BridgeOperators& ops) : ops_(ops) {}
  Eigen::VectorXd damping_times(const Eigen::VectorXd& x) const { return ops_.bridge->C * x; }
  Eigen::VectorXd stiffness_times(const Eigen::VectorXd& x) const { return ops_.bridge->K * x; }
  Eigen::VectorXd solve_effective(const Eigen::VectorXd& b) const { return ops_.effective.solve(b); }

 private:
  const BridgeOperators& ops_;
};

struct Kinematics {
  double front;     // m
  double velocity;  // dx/dt of every axle
};

Kinematics axle_kinematics(const SolverConfig& cfg, double length, double speed, double t) {
  const double travelled = cfg.entry_offset + speed * t;
  if (cfg.direction == TravelDirection::kLeftToRight) return {travelled, speed};
  return {length - travelled, -speed};
}

std::array<Axle, 2> make_axles(const BeamProperties& beam, const HalfCar& car, const RoadProfile& road,
                               const SolverConfig& cfg, double t) {
  const auto [front, xdot] = axle_kinematics(cfg, beam.length, car.speed, t);
  const double trailing = cfg.direction == TravelDirection::kLeftToRight ? -1.0 : 1.0;
  const auto arms = car.lever_arms();
  const auto loads = car.static_axle_loads(cfg.gravity);
  std::array<Axle, 2> axles;
  const double positions[2] = {front, front + trailing * car.axle_spacing()};
  const double ks[2] = {car.k1, car.k2};
  const double cs[2] = {car.c1, car.c2};
  for (int i = 0; i < 2; ++i) {
    Axle& a = axles[i];
    a.position = positions[i];
    a.l = shape_entries(beam, a.position);
    a.e = {1.0, arms[i]};
    a.k = ks[i];
    a.c = cs[i];
    a.static_load = loads[i];
    // Off the span the vehicle rides an extended flat road.
    if (a.position >= 0.0 && a.position <= beam.length) {
      const RoadSample rs = road.evaluate(a.position);
      a.road = rs.r;
      a.road_rate = xdot * rs.slope;
    }
  }
  return axles;
}

// f_b = sum l_i (P_i - k_i r_i - c_i r_i_dot), f_v = sum e_i (k_i r_i + c_i r_i_dot)
Eigen::VectorXd coupled_force(const std::array<Axle, 2>& axles, int nb) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nb + 2);
  for (const Axle& a : axles) {
    const double road_force = a.k * a.road + a.c * a.road_rate;
    for (int j = 0; j < a.l.count; ++j) f[a.l.index[j]] += a.l.value[j] * (a.static_load - road_force);
    f.tail<2>() += road_force * a.e;
  }
  return f;
}

// R_i = P_i + k_i Delta_i + c_i Delta_i_dot, Delta_i = z_v + s_i theta_v - l_i^T Z_b - r_i
double contact_force(const Axle& a, const KinematicState& s, int nb) {
  const double rel = a.e.dot(s.u.tail<2>()) - a.l.dot(s.u.head(nb)) - a.road;
  const double rel_rate = a.e.dot(s.v.tail<2>()) - a.l.dot(s.v.head(nb)) - a.road_rate;
  return a.static_load + a.k * rel + a.c * rel_rate;
}

SimulationResult allocate(const BeamProperties& beam, const SolverConfig& cfg, int dofs) {
  const Eigen::Index rows = (cfg.n_steps - 1) / cfg.record_stride + 1;
  SimulationResult r;
  r.beam = beam;
  r.time.resize(rows);
  r.bridge_disp.resize(rows, dofs);
  r.bridge_vel.resize(rows, dofs);
  r.bridge_acc.resize(rows, dofs);
  r.vehicle_state = Eigen::MatrixXd::Zero(rows, 6);
  r.contact_forces = Eigen::MatrixXd::Zero(rows, 2);
  r.axle_positions = Eigen::MatrixXd::Zero(rows, 2);
  return r;
}

void record_bridge(SimulationResult& r, Eigen::Index row, double t, const KinematicState& s, int nb) {
  r.time[row] = t;
  r.bridge_disp.row(row) = s.u.head(nb).transpose();
  r.bridge_vel.row(row) = s.v.head(nb).transpose();
  r.bridge_acc.row(row) = s.a.head(nb).transpose();
}

void check_finite(const KinematicState& s, int step) {
  if (!s.u.allFinite() || !s.v.allFinite())
    throw Error(ErrorCode::kNonFiniteState, "state diverged at step " + std::to_string(step));
}

void init_operators(BridgeOperators& ops, const AssembledBridge& bridge, const NewmarkParams& p) {
  ops.bridge = &bridge;
  ops.nb = bridge.n_free_dofs();
  const SparseMatrix eff = bridge.M + p.damping_coefficient() * bridge.C + p.stiffness_coefficient() * bridge.K;
  factor_or_throw(ops.effective, eff, "bridge effective matrix is singular");
  factor_or_throw(ops.mass, bridge.M, "bridge mass matrix is singular");
}

}  // namespace

void SolverConfig::validate() const {
  newmark().validate();
  if (n_steps < 1) throw Error(ErrorCode::kInvalidArgument, "n_steps must be >= 1");
  if (record_stride < 1) throw Error(ErrorCode::kInvalidArgument, "record_stride must be >= 1");
}

std::string to_string(SensorQuantity q) {
  switch (q) {
    case SensorQuantity::kDisplacement: return "displacement";
    case SensorQuantity::kVelocity: return "velocity";
    case SensorQuantity::kAcceleration: return "acceleration";
    case SensorQuantity::kRotation: return "rotation";
  }
  return "displacement";
}

SensorQuantity sensor_quantity_from_string(const std::string& name) {
  if (name == "displacement") return SensorQuantity::kDisplacement;
  if (name == "velocity") return SensorQuantity::kVelocity;
  if (name == "acceleration") return SensorQuantity::kAcceleration;
  if (name == "rotation") return SensorQuantity::kRotation;
  throw Error(ErrorCode::kConfig, "unknown sensor quantity '" + name + "'");
}

SensorLayout SensorLayout::standard(double length, SensorQuantity q) {
  return {{0.25 * length, 0.5 * length, 0.75 * length}, q};
}

SimulationResult simulate(const AssembledBridge& bridge, const HalfCar& car, const RoadProfile& road,
                          const SolverConfig& cfg) {
  cfg.validate();
  car.validate();
  if (!(car.sprung_mass > 0) || !(car.pitch_inertia > 0))
    throw Error(ErrorCode::kSingularEffectiveMatrix, "vehicle mass and pitch inertia must be positive");
  const NewmarkParams p = cfg.newmark();
  BridgeOperators ops;
  init_operators(ops, bridge, p);
  ops.vehicle_mass = {car.sprung_mass, car.pitch_inertia};
  const int nb = ops.nb;
  const BeamProperties& beam = bridge.props;

  SimulationResult out = allocate(beam, cfg, nb);
  KinematicState s = KinematicState::zero(nb + 2);

  const auto record = [&](Eigen::Index row, double t, const std::array<Axle, 2>& axles) {
    record_bridge(out, row, t, s, nb);
    out.vehicle_state.row(row) << s.u[nb], s.u[nb + 1], s.v[nb], s.v[nb + 1], s.a[nb], s.a[nb + 1];
    for (int i = 0; i < 2; ++i) {
      out.contact_forces(row, i) = contact_force(axles[i], s, nb);
      out.axle_positions(row, i) = axles[i].position;
    }
  };

  // t = 0: zero displacement and velocity, so M a0 = f0.
  std::array<Axle, 2> axles = make_axles(beam, car, road, cfg, 0.0);
  const Eigen::VectorXd f0 = coupled_force(axles, nb);
  s.a.head(nb) = ops.mass.solve(f0.head(nb));
  s.a.tail<2>() = f0.tail<2>().cwiseQuotient(ops.vehicle_mass);
  record(0, 0.0, axles);

  for (int step = 1; step < cfg.n_steps; ++step) {
    const double t = step * cfg.dt;
    axles = make_axles(beam, car, road, cfg, t);
    const CoupledSystem system(ops, axles, p);
    newmark_advance(system, p, coupled_force(axles, nb), s);
    check_finite(s, step);
    if (step % cfg.record_stride == 0) record(step / cfg.record_stride, t, axles);
  }
  return out;
}

SimulationResult free_vibration(const AssembledBridge& bridge, int mode, double amplitude,
                                const SolverConfig& cfg) {
  cfg.validate();
  if (mode < 0) throw Error(ErrorCode::kInvalidArgument, "mode index must be >= 0");
  const NewmarkParams p = cfg.newmark();
  BridgeOperators ops;
  init_operators(ops, bridge, p);
  const int nb = ops.nb;
  const ModalResult modal = modal_analysis(bridge, mode + 1);

  SimulationResult out = allocate(bridge.props, cfg, nb);
  KinematicState s = KinematicState::zero(nb);
  s.u = amplitude * modal.modes.col(mode);
  s.a = ops.mass.solve(-(bridge.K * s.u));
  record_bridge(out, 0, 0.0, s, nb);
  const BridgeOnlySystem system(ops);
  const Eigen::VectorXd no_force = Eigen::VectorXd::Zero(nb);
  for (int step = 1; step < cfg.n_steps; ++step) {
    newmark_advance(system, p, no_force, s);
    check_finite(s, step);
    if (step % cfg.record_stride == 0) record_bridge(out, step / cfg.record_stride, step * cfg.dt, s, nb);
  }
  return out;
}

Eigen::MatrixXd extract_sensors(const SimulationResult& result, const SensorLayout& layout) {
  const Eigen::MatrixXd* field = &result.bridge_disp;
  int derivative = 0;
  switch (layout.quantity) {
    case SensorQuantity::kDisplacement: break;
    case SensorQuantity::kVelocity: field = &result.bridge_vel; break;
    case SensorQuantity::kAcceleration: field = &result.bridge_acc; break;
    case SensorQuantity::kRotation: derivative = 1; break;
  }
  Eigen::MatrixXd out(result.steps(), static_cast<Eigen::Index>(layout.positions.size()));
  for (std::size_t c = 0; c < layout.positions.size(); ++c) {
    const double x = layout.positions[c];
    if (!(x >= 0.0 && x <= result.beam.length))
      throw Error(ErrorCode::kOutOfSpan, "sensor position " + std::to_string(x) + " m is outside the span");
    const ShapeEntries l = shape_entries(result.beam, x, derivative);
    for (Eigen::Index r = 0; r < result.steps(); ++r) {
      double v = 0.0;
      for (int j = 0; j < l.count; ++j) v += l.value[j] * (*field)(r, l.index[j]);
      out(r, static_cast<Eigen::Index>(c)) = v;
    }
  }
  return out;
}

}  // namespace vino
