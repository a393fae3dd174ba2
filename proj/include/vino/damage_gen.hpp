#pragma once

#include "vino/beam_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace vino {

/// Stationary squared-exponential Gaussian random field, clamped to [0, delta_max].
struct GrfConfig {
  double length_scale = 0.8;  // m
  double std_dev = 0.08;
  double mean = 0.08;
  double delta_max = kDefaultDeltaMax;
  std::uint64_t seed = 0;

  void validate() const;
};

/// splitmix64 finaliser applied to root + (index + 1) * golden gamma.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// Covariance factor for one grid, reusable across draws.
class GrfSampler {
 public:
  GrfSampler(const GrfConfig& cfg, std::vector<double> grid);

  /// Unclamped draw mean + L xi, xi ~ N(0, I) from mt19937_64(seed).
  Eigen::VectorXd draw_raw(std::uint64_t seed) const;
  DamageField draw(std::uint64_t seed) const;

  const std::vector<double>& grid() const { return grid_; }
  const GrfConfig& config() const { return cfg_; }

 private:
  GrfConfig cfg_;
  std::vector<double> grid_;
  Eigen::MatrixXd factor_;  // lower Cholesky factor of Sigma + 1e-10 I
};

DamageField sample_damage_field(const GrfConfig& cfg, const std::vector<double>& grid);

/// peak exp(-(x - center)^2 / (2 width^2)).
DamageField bump_damage(double center, double width, double peak, const std::vector<double>& grid,
                        double delta_max = kDefaultDeltaMax);

/// Pointwise sum clamped to [0, delta_max]; both fields must share a grid.
DamageField clamped_sum(const DamageField& a, const DamageField& b, double delta_max = kDefaultDeltaMax);

}  // namespace vino
