#pragma once

#include <Eigen/Dense>

#include <array>

namespace vino {

inline constexpr double kGravity = 9.81;

/// Two-DOF half-car (bounce z_v, pitch theta_v). Axle 1 leads, d1 ahead of the
/// centre of mass; axle 2 trails at d2 behind it.
struct HalfCar {
  double sprung_mass = 15.38;  // kg
  double pitch_inertia = 15.38 * 0.15 * 0.15;  // kg m^2, two point masses at the axles
  double d1 = 0.15;  // m
  double d2 = 0.15;  // m
  double k1 = 1666.0;  // N/m
  double k2 = 1666.0;  // N/m
  double c1 = 45.28;  // N s/m
  double c2 = 45.28;  // N s/m
  double speed = 1.35;  // m/s

  void validate() const;
  double axle_spacing() const { return d1 + d2; }
  /// Static shares (d2/d) m g and (d1/d) m g carried by axle 1 and axle 2.
  std::array<double, 2> static_axle_loads(double g = kGravity) const;
  /// Lever arm of each axle in the pitch equation (+d1 front, -d2 rear).
  std::array<double, 2> lever_arms() const { return {d1, -d2}; }
};

/// Speed presets: the 0.55 m/s laboratory run and the 1.35 m/s tabulated speed.
inline constexpr double kLabSpeed = 0.55;
inline constexpr double kTableSpeed = 1.35;

/// zeta_v times the critical damping 2 sqrt(m_a k_a) with m_a = m_v / 2.
double suspension_damping(double sprung_mass, double axle_stiffness, double zeta);

/// gamma = v / (2 f1 L).
double speed_parameter(double speed, double f1, double length);

struct VehicleMatrices {
  Eigen::Matrix2d M;
  Eigen::Matrix2d C;
  Eigen::Matrix2d K;
};

VehicleMatrices vehicle_matrices(const HalfCar& car);

}  // namespace vino
