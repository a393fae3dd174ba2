#pragma once

#include "vino/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <concepts>

namespace vino {

struct NewmarkParams {
  double dt = 0.005;
  double gamma = 0.5;
  double beta = 0.25;

  void validate() const {
    if (!(dt > 0)) throw Error(ErrorCode::kInvalidArgument, "time step must be positive");
    if (!(gamma >= 0.5 && 2.0 * beta >= gamma))
      throw Error(ErrorCode::kInvalidArgument, "Newmark constants outside 2 beta >= gamma >= 1/2");
  }
  /// Coefficients of C and K in the effective matrix M + c_C C + c_K K.
  double damping_coefficient() const { return gamma * dt; }
  double stiffness_coefficient() const { return beta * dt * dt; }
};

struct KinematicState {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd a;

  static KinematicState zero(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

/// A second-order linear system evaluated at t + dt. It must provide
///   Eigen::VectorXd damping_times(const Eigen::VectorXd&) const;
///   Eigen::VectorXd stiffness_times(const Eigen::VectorXd&) const;
///   Eigen::VectorXd solve_effective(const Eigen::VectorXd&) const;
/// where solve_effective inverts M + gamma dt C + beta dt^2 K.
template <class System>
concept SecondOrderSystem = requires(const System& s, const Eigen::VectorXd& x) {
  { s.damping_times(x) } -> std::convertible_to<Eigen::VectorXd>;
  { s.stiffness_times(x) } -> std::convertible_to<Eigen::VectorXd>;
  { s.solve_effective(x) } -> std::convertible_to<Eigen::VectorXd>;
};

/// One acceleration-form Newmark step from t to t + dt.
template <SecondOrderSystem System>
void newmark_advance(const System& next, const NewmarkParams& p, const Eigen::VectorXd& force_next,
                     KinematicState& s) {
  const double dt = p.dt;
  const Eigen::VectorXd v_pred = s.v + dt * (1.0 - p.gamma) * s.a;
  const Eigen::VectorXd u_pred = s.u + dt * s.v + dt * dt * (0.5 - p.beta) * s.a;
  const Eigen::VectorXd rhs = force_next - next.damping_times(v_pred) - next.stiffness_times(u_pred);
  const Eigen::VectorXd a_next = next.solve_effective(rhs);
  if (!a_next.allFinite()) throw Error(ErrorCode::kNonFiniteState, "non-finite acceleration in Newmark step");
  s.v = v_pred + dt * p.gamma * a_next;
  s.u = u_pred + dt * dt * p.beta * a_next;
  s.a = a_next;
}

/// Constant-coefficient dense system; used for small models and single-DOF checks.
class DenseSystem {
 public:
  DenseSystem(Eigen::MatrixXd m, Eigen::MatrixXd c, Eigen::MatrixXd k, const NewmarkParams& p)
      : m_(std::move(m)), c_(std::move(c)), k_(std::move(k)),
        effective_(m_ + p.damping_coefficient() * c_ + p.stiffness_coefficient() * k_),
        mass_(m_) {
    if (effective_.info() != Eigen::Success || !(effective_.vectorD().array().abs() > 0).all())
      throw Error(ErrorCode::kSingularEffectiveMatrix, "effective matrix is singular");
  }

  Eigen::VectorXd damping_times(const Eigen::VectorXd& x) const { return c_ * x; }
  Eigen::VectorXd stiffness_times(const Eigen::VectorXd& x) const { return k_ * x; }
  Eigen::VectorXd solve_effective(const Eigen::VectorXd& b) const { return effective_.solve(b); }
  /// Consistent initial acceleration M a0 = f0 - C v0 - K u0.
  Eigen::VectorXd initial_acceleration(const Eigen::VectorXd& f, const KinematicState& s) const {
    return mass_.solve(f - c_ * s.v - k_ * s.u);
  }

  const Eigen::MatrixXd& mass() const { return m_; }
  const Eigen::MatrixXd& stiffness() const { return k_; }

 private:
  Eigen::MatrixXd m_, c_, k_;
  Eigen::LDLT<Eigen::MatrixXd> effective_;
  Eigen::LDLT<Eigen::MatrixXd> mass_;
};

}  // namespace vino
