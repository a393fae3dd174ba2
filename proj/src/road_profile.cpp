#include "vino/road_profile.hpp"

#include "vino/errors.hpp"

#include <algorithm>
#include <complex>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace vino {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr const char* kProfileHeader = "# road-profile v1";
}  // namespace

void RoadClassSpec::validate() const {
  if (g_d_n0 < 0) throw Error(ErrorCode::kInvalidArgument, "G_d(n0) must be >= 0");
  if (!(n_min > 0) || !(n_min < n_max)) throw Error(ErrorCode::kInvalidArgument, "require 0 < n_min < n_max");
  if (!(delta_n > 0)) throw Error(ErrorCode::kInvalidArgument, "delta_n must be positive");
}

double psd_value(const RoadClassSpec& spec, double n) {
  if (!(n > 0)) throw Error(ErrorCode::kNonPositiveFrequency, "spatial frequency must be positive");
  if (n == kReferenceSpatialFrequency) return spec.g_d_n0;
  return spec.g_d_n0 * std::pow(n / kReferenceSpatialFrequency, -spec.exponent);
}

RoadProfile RoadProfile::spectral(std::vector<RoadComponent> components) {
  for (const auto& c : components)
    if (!std::isfinite(c.amplitude) || !(c.frequency > 0))
      throw Error(ErrorCode::kInvalidArgument, "road components need finite amplitude and positive frequency");
  RoadProfile p;
  p.components_ = std::move(components);
  return p;
}

RoadProfile RoadProfile::sampled(std::vector<double> x, std::vector<double> r) {
  if (x.size() != r.size() || x.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "sampled profile needs matching x and r with >= 2 points");
  double min_dx = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw Error(ErrorCode::kInvalidArgument, "profile x must be strictly increasing");
    min_dx = std::min(min_dx, x[i] - x[i - 1]);
  }
  RoadProfile p;
  p.x_ = std::move(x);
  p.r_ = std::move(r);
  p.fd_step_ = 0.05 * min_dx;
  return p;
}

RoadSample RoadProfile::evaluate(double x) const {
  if (is_sampled()) {
    const auto interp = [&](double s) {
      if (s <= x_.front()) return r_.front();
      if (s >= x_.back()) return r_.back();
      const auto i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), s) - x_.begin()) - 1;
      const double t = (s - x_[i]) / (x_[i + 1] - x_[i]);
      return r_[i] + t * (r_[i + 1] - r_[i]);
    };
    const double h = fd_step_;
    return {interp(x), (interp(x + h) - interp(x - h)) / (2.0 * h)};
  }
  RoadSample s{0.0, 0.0};
  for (const auto& c : components_) {
    const double arg = kTwoPi * c.frequency * x + c.phase;
    s.r += c.amplitude * std::cos(arg);
    s.slope -= c.amplitude * kTwoPi * c.frequency * std::sin(arg);
  }
  return s;
}

std::vector<double> RoadProfile::sample(double x0, double dx, std::size_t count) const {
  std::vector<double> out(count, 0.0);
  if (is_sampled()) {
    for (std::size_t i = 0; i < count; ++i) out[i] = evaluate(x0 + static_cast<double>(i) * dx).r;
    return out;
  }
  for (const auto& c : components_) {
    std::complex<double> z = std::polar(c.amplitude, kTwoPi * c.frequency * x0 + c.phase);
    const std::complex<double> step = std::polar(1.0, kTwoPi * c.frequency * dx);
    for (std::size_t i = 0; i < count; ++i) {
      // re-anchor periodically so the recurrence error stays at a few ulps
      if (i % 4096 == 0 && i > 0)
        z = std::polar(c.amplitude, kTwoPi * c.frequency * (x0 + static_cast<double>(i) * dx) + c.phase);
      out[i] += z.real();
      z *= step;
    }
  }
  return out;
}

RoadProfile generate_profile(const RoadClassSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::vector<RoadComponent> comps;
  const double slack = 1e-9 * spec.delta_n;
  for (int i = 0;; ++i) {
    const double n = spec.n_min + (i + 0.5) * spec.delta_n;
    if (n > spec.n_max + slack) break;
    comps.push_back({std::sqrt(2.0 * psd_value(spec, n) * spec.delta_n), n, phase(rng)});
  }
  if (comps.empty()) throw Error(ErrorCode::kEmptyBand, "no spatial frequency falls inside [n_min, n_max]");
  if (spec.g_d_n0 == 0.0) return RoadProfile::flat();
  return RoadProfile::spectral(std::move(comps));
}

RoadProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open road profile " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind(kProfileHeader, 0) != 0)
    throw Error(ErrorCode::kIo, "road profile " + path.string() + " lacks header '" + kProfileHeader + "'");
  std::vector<double> x, r;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double a = 0, b = 0;
    if (!(ls >> a >> b)) throw Error(ErrorCode::kIo, "malformed road profile line: " + line);
    x.push_back(a);
    r.push_back(b);
  }
  return RoadProfile::sampled(std::move(x), std::move(r));
}

void save_profile(const std::filesystem::path& path, const std::vector<double>& x,
                  const std::vector<double>& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write road profile " + path.string());
  out << kProfileHeader << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << ' ' << r[i] << '\n';
}

RoadProfile stand_in_lab_profile() {
  RoadClassSpec spec;
  spec.seed = 20230401;
  const RoadProfile smooth = generate_profile(spec);
  std::vector<double> x, r;
  for (int i = 0; i <= 1600; ++i) {
    x.push_back(-1.0 + 0.005 * i);
    r.push_back(smooth.evaluate(x.back()).r);
  }
  return RoadProfile::sampled(std::move(x), std::move(r));
}

}  // namespace vino
