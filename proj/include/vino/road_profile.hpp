#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace vino {

/// Reference spatial frequency of the roughness PSD, cycles/m.
inline constexpr double kReferenceSpatialFrequency = 0.1;
inline constexpr double kClassA = 0.001e-6;  // m^3
inline constexpr double kClassB = 8e-6;      // m^3

struct RoadClassSpec {
  double g_d_n0 = kClassA;  // m^3
  double exponent = 2.0;
  double n_min = 0.05;    // cycles/m
  double n_max = 10.0;    // cycles/m
  double delta_n = 0.01;  // cycles/m
  std::uint64_t seed = 0;

  void validate() const;
};

/// PSD G_d(n) = G_d(n0) (n / n0)^-w.
double psd_value(const RoadClassSpec& spec, double n);

struct RoadComponent {
  double amplitude;  // m
  double frequency;  // cycles/m
  double phase;      // rad
};

struct RoadSample {
  double r;      // m
  double slope;  // dr/dx
};

/// Road irregularity, either a sum of cosines or a sampled (x, r) table.
class RoadProfile {
 public:
  RoadProfile() = default;  // flat road

  static RoadProfile flat() { return {}; }
  static RoadProfile spectral(std::vector<RoadComponent> components);
  static RoadProfile sampled(std::vector<double> x, std::vector<double> r);

  RoadSample evaluate(double x) const;
  /// Elevations at x0 + i dx, i < count. Spectral profiles use a phasor recurrence.
  std::vector<double> sample(double x0, double dx, std::size_t count) const;

  bool is_sampled() const { return !x_.empty(); }
  const std::vector<RoadComponent>& components() const { return components_; }
  const std::vector<double>& sample_x() const { return x_; }
  const std::vector<double>& sample_r() const { return r_; }

 private:
  std::vector<RoadComponent> components_;
  std::vector<double> x_;
  std::vector<double> r_;
  double fd_step_ = 0.0;
};

/// Random-phase synthesis with n_i = n_min + (i + 1/2) dn and d_i = sqrt(2 G_d(n_i) dn).
RoadProfile generate_profile(const RoadClassSpec& spec);

/// Two-column text file, header line "# road-profile v1".
RoadProfile load_profile(const std::filesystem::path& path);
void save_profile(const std::filesystem::path& path, const std::vector<double>& x,
                  const std::vector<double>& r);

/// Sampled stand-in for the unpublished laboratory profile: a seeded class-A
/// realisation tabulated every 5 mm over [-1, 7] m.
RoadProfile stand_in_lab_profile();

}  // namespace vino
