#pragma once

#include "vino/beam_model.hpp"
#include "vino/newmark.hpp"
#include "vino/road_profile.hpp"
#include "vino/vehicle_model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace vino {

enum class TravelDirection { kLeftToRight, kRightToLeft };

struct SolverConfig {
  double dt = 0.005;  // s
  int n_steps = 844;  // recorded instants, t = 0 .. (n_steps - 1) dt
  double newmark_gamma = 0.5;
  double newmark_beta = 0.25;
  double entry_offset = 0.0;  // m, front-axle distance travelled at t = 0
  TravelDirection direction = TravelDirection::kLeftToRight;
  int record_stride = 1;  // keep every k-th instant
  double gravity = kGravity;

  void validate() const;
  NewmarkParams newmark() const { return {dt, newmark_gamma, newmark_beta}; }
};

/// Columns of SimulationResult::vehicle_state.
enum VehicleColumn { kBounce = 0, kPitch, kBounceVel, kPitchVel, kBounceAcc, kPitchAcc };

struct SimulationResult {
  BeamProperties beam;
  Eigen::VectorXd time;          // s
  Eigen::MatrixXd bridge_disp;   // recorded step x free DOF, m / rad
  Eigen::MatrixXd bridge_vel;
  Eigen::MatrixXd bridge_acc;
  Eigen::MatrixXd vehicle_state;   // step x 6, see VehicleColumn
  Eigen::MatrixXd contact_forces;  // step x 2, N (axle 1, axle 2)
  Eigen::MatrixXd axle_positions;  // step x 2, m

  Eigen::Index steps() const { return time.size(); }
};

enum class SensorQuantity { kDisplacement, kVelocity, kAcceleration, kRotation };

std::string to_string(SensorQuantity q);
SensorQuantity sensor_quantity_from_string(const std::string& name);

struct SensorLayout {
  std::vector<double> positions;  // m
  SensorQuantity quantity = SensorQuantity::kDisplacement;

  /// Quarter, mid and three-quarter span.
  static SensorLayout standard(double length, SensorQuantity q = SensorQuantity::kDisplacement);
};

/// Coupled vehicle-bridge time integration. The augmented system over
/// (bridge DOFs, z_v, theta_v) is re-formed at every step from the axle
/// interpolation vectors; its effective matrix is the constant bridge part plus
/// a rank-two axle update, inverted by the Sherman-Morrison-Woodbury identity.
SimulationResult simulate(const AssembledBridge& bridge, const HalfCar& car, const RoadProfile& road,
                          const SolverConfig& cfg);

/// Homogeneous bridge response released from amplitude x (mass-normalised mode).
SimulationResult free_vibration(const AssembledBridge& bridge, int mode, double amplitude,
                                const SolverConfig& cfg);

/// Sensor channels (step x sensor) by shape-function interpolation.
Eigen::MatrixXd extract_sensors(const SimulationResult& result, const SensorLayout& layout);

}  // namespace vino
