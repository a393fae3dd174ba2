#include "vino/damage_gen.hpp"

#include "vino/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace vino {

void GrfConfig::validate() const {
  if (!(length_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "GRF length_scale must be positive");
  if (!(std_dev >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "GRF std_dev must be non-negative");
  if (!(delta_max > 0.0 && delta_max < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "GRF delta_max must lie in (0, 1)");
  if (!(mean >= 0.0 && mean < delta_max))
    throw Error(ErrorCode::kInvalidArgument, "GRF mean must lie in [0, delta_max)");
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw Error(ErrorCode::kInvalidArgument, "grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::kInvalidArgument, "grid must be strictly increasing");
}

}  // namespace

GrfSampler::GrfSampler(const GrfConfig& cfg, std::vector<double> grid) : cfg_(cfg), grid_(std::move(grid)) {
  cfg_.validate();
  check_grid(grid_);
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (cfg_.std_dev == 0.0) return;
  Eigen::MatrixXd sigma(n, n);
  const double var = cfg_.std_dev * cfg_.std_dev;
  const double inv = 1.0 / (2.0 * cfg_.length_scale * cfg_.length_scale);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = grid_[i] - grid_[j];
      sigma(i, j) = var * std::exp(-d * d * inv);
    }
  sigma.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::kCholeskyFailure, "GRF covariance is not positive definite after jitter");
  factor_ = llt.matrixL();
}

Eigen::VectorXd GrfSampler::draw_raw(std::uint64_t seed) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, cfg_.mean);
  if (cfg_.std_dev == 0.0) return y;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi[i] = normal(rng);
  y.noalias() += factor_.triangularView<Eigen::Lower>() * xi;
  return y;
}

DamageField GrfSampler::draw(std::uint64_t seed) const {
  const Eigen::VectorXd y = draw_raw(seed);
  DamageField d;
  d.grid = grid_;
  d.values.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) d.values[i] = std::clamp(y[static_cast<Eigen::Index>(i)], 0.0, cfg_.delta_max);
  return d;
}

DamageField sample_damage_field(const GrfConfig& cfg, const std::vector<double>& grid) {
  return GrfSampler(cfg, grid).draw(cfg.seed);
}

DamageField bump_damage(double center, double width, double peak, const std::vector<double>& grid,
                        double delta_max) {
  if (!(peak >= 0.0 && peak <= delta_max))
    throw Error(ErrorCode::kPeakOutOfRange, "bump peak " + std::to_string(peak) + " outside [0, delta_max]");
  if (!(width > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bump width must be positive");
  check_grid(grid);
  DamageField d;
  d.grid = grid;
  d.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = (grid[i] - center) / width;
    d.values[i] = peak * std::exp(-0.5 * s * s);
  }
  return d;
}

DamageField clamped_sum(const DamageField& a, const DamageField& b, double delta_max) {
  if (a.grid != b.grid) throw Error(ErrorCode::kShapeMismatch, "damage fields live on different grids");
  DamageField d = a;
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = std::clamp(a.values[i] + b.values[i], 0.0, delta_max);
  return d;
}

}  // namespace vino
