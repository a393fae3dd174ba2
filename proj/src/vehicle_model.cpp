#include "vino/vehicle_model.hpp"

#include "vino/errors.hpp"

#include <cmath>

namespace vino {

void HalfCar::validate() const {
  if (sprung_mass < 0 || pitch_inertia < 0 || k1 < 0 || k2 < 0 || c1 < 0 || c2 < 0)
    throw Error(ErrorCode::kInvalidArgument, "vehicle masses, stiffnesses and dampings must be >= 0");
  if (d1 < 0 || d2 < 0 || !(axle_spacing() > 0))
    throw Error(ErrorCode::kInvalidArgument, "axle offsets must be >= 0 with positive spacing");
  if (!(speed > 0)) throw Error(ErrorCode::kInvalidArgument, "vehicle speed must be positive");
}

std::array<double, 2> HalfCar::static_axle_loads(double g) const {
  const double d = axle_spacing();
  const double w = sprung_mass * g;
  return {d2 / d * w, d1 / d * w};
}

double suspension_damping(double sprung_mass, double axle_stiffness, double zeta) {
  if (!(sprung_mass > 0) || !(axle_stiffness > 0) || zeta < 0)
    throw Error(ErrorCode::kNegativeInput, "require m_v > 0, k_a > 0, zeta >= 0");
  const double axle_mass = 0.5 * sprung_mass;
  return zeta * 2.0 * std::sqrt(axle_mass * axle_stiffness);
}

double speed_parameter(double speed, double f1, double length) {
  if (!(f1 > 0) || !(length > 0))
    throw Error(ErrorCode::kNonPositiveDenominator, "f1 and L must be positive");
  return speed / (2.0 * f1 * length);
}

VehicleMatrices vehicle_matrices(const HalfCar& car) {
  const auto [s1, s2] = car.lever_arms();
  const auto coupling = [&](double a1, double a2) {
    Eigen::Matrix2d m;
    m << a1 + a2, a1 * s1 + a2 * s2, a1 * s1 + a2 * s2, a1 * s1 * s1 + a2 * s2 * s2;
    return m;
  };
  VehicleMatrices v;
  v.M << car.sprung_mass, 0.0, 0.0, car.pitch_inertia;
  v.C = coupling(car.c1, car.c2);
  v.K = coupling(car.k1, car.k2);
  return v;
}

}  // namespace vino
