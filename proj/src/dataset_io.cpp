#include "vino/dataset_io.hpp"

#include "vino/errors.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace vino {

static_assert(std::endian::native == std::endian::little, "sample files assume a little-endian host");

namespace fs = std::filesystem;
using nlohmann::json;

RoadProfile make_road(const RoadConfig& cfg, std::uint64_t seed) {
  switch (cfg.source) {
    case RoadSource::kFlat: return RoadProfile::flat();
    case RoadSource::kLab: return stand_in_lab_profile();
    case RoadSource::kFile: return load_profile(cfg.file);
    case RoadSource::kSpectral: break;
  }
  RoadClassSpec spec = cfg.spectrum;
  spec.seed = seed;
  return generate_profile(spec);
}

std::vector<Channel> default_channels(double length) {
  std::vector<Channel> out;
  const char* names[] = {"disp_quarter", "disp_mid", "disp_three_quarter"};
  const SensorLayout layout = SensorLayout::standard(length);
  for (std::size_t i = 0; i < 3; ++i)
    out.push_back({names[i], ChannelSource::kBridge, SensorQuantity::kDisplacement, layout.positions[i]});
  out.push_back({"vehicle_bounce_acc", ChannelSource::kVehicle, SensorQuantity::kAcceleration, 0.0});
  return out;
}

std::vector<Channel> full_field_channels(const BeamProperties& beam) {
  std::vector<Channel> out;
  const std::vector<double> x = uniform_grid(beam.length, beam.n_nodes());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.push_back({"disp_node_" + std::to_string(i), ChannelSource::kBridge, SensorQuantity::kDisplacement, x[i]});
  return out;
}

Eigen::MatrixXd record_channels(const SimulationResult& result, const std::vector<Channel>& channels) {
  Eigen::MatrixXd out(result.steps(), static_cast<Eigen::Index>(channels.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const Channel& ch = channels[c];
    const auto col = static_cast<Eigen::Index>(c);
    if (ch.source == ChannelSource::kVehicle) {
      int which = kBounce;
      if (ch.quantity == SensorQuantity::kVelocity) which = kBounceVel;
      if (ch.quantity == SensorQuantity::kAcceleration) which = kBounceAcc;
      if (ch.quantity == SensorQuantity::kRotation) which = kPitch;
      out.col(col) = result.vehicle_state.col(which);
    } else {
      out.col(col) = extract_sensors(result, {{ch.position}, ch.quantity}).col(0);
    }
  }
  return out;
}

void round_to_storage(SampleRecord& record) {
  for (double& v : record.damage.values) v = static_cast<double>(static_cast<float>(v));
  record.responses = record.responses.cast<float>().cast<double>();
}

SampleRecord simulate_record(const PhysicsConfig& physics, const DamageField& damage, const RoadProfile& road,
                             const std::vector<Channel>& channels, std::uint64_t seed,
                             const std::string& scenario) {
  const AssembledBridge bridge =
      assemble_bridge(physics.bridge, damage, physics.damping.coefficients(), physics.delta_max);
  const SimulationResult result = simulate(bridge, physics.vehicle, road, physics.solver);
  SampleRecord r;
  r.damage = damage;
  r.responses = record_channels(result, channels);
  r.seed = seed;
  r.scenario = scenario;
  r.dt = physics.solver.dt * physics.solver.record_stride;
  r.n_steps = static_cast<int>(result.steps());
  r.speed = physics.vehicle.speed;
  round_to_storage(r);
  return r;
}

void DatasetConfig::validate() const {
  if (n_samples < 2) throw Error(ErrorCode::kInvalidArgument, "dataset needs at least two samples");
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  if (!(noise_std >= 0)) throw Error(ErrorCode::kInvalidArgument, "noise_std must be >= 0");
  if (!(damping_scale > 0) || !(modulus_scale > 0))
    throw Error(ErrorCode::kInvalidArgument, "perturbation scales must be positive");
  if (pseudo_count < 1) throw Error(ErrorCode::kInvalidArgument, "pseudo_count must be >= 1");
}

ChannelStats make_stats(const Eigen::Ref<const Eigen::VectorXd>& values, const std::string& label) {
  ChannelStats s;
  if (values.size() == 0) return s;
  s.mean = values.mean();
  const double var = (values.array() - s.mean).square().sum() / static_cast<double>(values.size());
  s.std = std::sqrt(var);
  if (!(s.std > 0.0)) {
    std::cerr << "warning: ZeroStd in channel '" << label << "', using std = 1\n";
    s.std = 1.0;
  }
  return s;
}

std::vector<const SampleRecord*> Dataset::split(bool train) const {
  std::vector<const SampleRecord*> out;
  for (int i : train ? manifest.train : manifest.test) out.push_back(&records[static_cast<std::size_t>(i)]);
  return out;
}

void assign_split(DatasetManifest& manifest, int n) {
  const int n_train = 5 * n / 6;
  manifest.train.clear();
  manifest.test.clear();
  for (int i = 0; i < n; ++i) (i < n_train ? manifest.train : manifest.test).push_back(i);
}

void compute_stats(DatasetManifest& manifest, const std::vector<SampleRecord>& records) {
  const auto& idx = manifest.train.empty() ? manifest.test : manifest.train;
  if (idx.empty() || records.empty()) return;
  const Eigen::Index steps = records[static_cast<std::size_t>(idx[0])].responses.rows();
  const Eigen::Index channels = records[static_cast<std::size_t>(idx[0])].responses.cols();
  const auto points = static_cast<Eigen::Index>(records[static_cast<std::size_t>(idx[0])].damage.values.size());
  Eigen::VectorXd damage(points * static_cast<Eigen::Index>(idx.size()));
  Eigen::MatrixXd resp(steps * static_cast<Eigen::Index>(idx.size()), channels);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const SampleRecord& r = records[static_cast<std::size_t>(idx[k])];
    if (r.responses.rows() != steps || r.responses.cols() != channels)
      throw Error(ErrorCode::kShapeMismatch, "records disagree in response shape");
    const auto off = static_cast<Eigen::Index>(k);
    damage.segment(off * points, points) = Eigen::Map<const Eigen::VectorXd>(r.damage.values.data(), points);
    resp.middleRows(off * steps, steps) = r.responses;
  }
  manifest.damage_stats = make_stats(damage, "damage");
  manifest.channel_stats.clear();
  for (Eigen::Index c = 0; c < channels; ++c) {
    const std::string label = c < static_cast<Eigen::Index>(manifest.channels.size())
                                  ? manifest.channels[static_cast<std::size_t>(c)].name
                                  : std::to_string(c);
    manifest.channel_stats.push_back(make_stats(resp.col(c), label));
  }
}

// ---------------------------------------------------------------------------
// binary tensors

namespace {

constexpr char kTensorMagic[5] = {'V', 'I', 'N', 'O', '1'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw Error(ErrorCode::kIo, "truncated tensor header");
  return v;
}

}  // namespace

void write_tensor(std::ostream& out, const RawTensor& t) {
  std::size_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.data.size()) throw Error(ErrorCode::kShapeMismatch, "tensor dims do not match payload");
  out.write(kTensorMagic, 5);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  out.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 4));
}

RawTensor read_tensor(std::istream& in) {
  char magic[5] = {};
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kTensorMagic, 5) != 0) throw Error(ErrorCode::kIo, "bad tensor magic");
  RawTensor t;
  const std::uint32_t rank = get_u32(in);
  if (rank > 8) throw Error(ErrorCode::kIo, "implausible tensor rank");
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.dims.push_back(get_u32(in));
    count *= t.dims.back();
  }
  t.data.resize(count);
  in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(count * 4));
  if (!in) throw Error(ErrorCode::kIo, "truncated tensor payload");
  return t;
}

void save_sample(const fs::path& path, const SampleRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  RawTensor damage;
  damage.dims = {static_cast<std::uint32_t>(record.damage.values.size())};
  damage.data.assign(record.damage.values.begin(), record.damage.values.end());
  write_tensor(out, damage);
  RawTensor resp;
  resp.dims = {static_cast<std::uint32_t>(record.responses.rows()), static_cast<std::uint32_t>(record.responses.cols())};
  resp.data.resize(static_cast<std::size_t>(record.responses.size()));
  Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      resp.data.data(), record.responses.rows(), record.responses.cols()) = record.responses.cast<float>();
  write_tensor(out, resp);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

SampleRecord load_sample(const fs::path& path, const DatasetManifest& manifest, int index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const RawTensor damage = read_tensor(in);
  const RawTensor resp = read_tensor(in);
  if (damage.dims.size() != 1 || resp.dims.size() != 2)
    throw Error(ErrorCode::kIo, "unexpected tensor ranks in " + path.string());
  if (static_cast<int>(damage.dims[0]) != manifest.damage_points)
    throw Error(ErrorCode::kIo, "damage length disagrees with manifest in " + path.string());
  SampleRecord r;
  r.damage.grid = uniform_grid(manifest.length, manifest.damage_points);
  r.damage.values.assign(damage.data.begin(), damage.data.end());
  r.responses = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    resp.data.data(), resp.dims[0], resp.dims[1])
                    .cast<double>();
  const auto i = static_cast<std::size_t>(index);
  r.seed = i < manifest.seeds.size() ? manifest.seeds[i] : 0;
  r.scenario = i < manifest.scenarios.size() ? manifest.scenarios[i] : "grf";
  r.dt = manifest.dt;
  r.n_steps = static_cast<int>(r.responses.rows());
  if (manifest.config.contains("vehicle") && manifest.config["vehicle"].contains("speed"))
    r.speed = manifest.config["vehicle"]["speed"].get<double>();
  return r;
}

// ---------------------------------------------------------------------------
// manifest

namespace {

json channel_json(const Channel& c) {
  return {{"name", c.name},
          {"source", c.source == ChannelSource::kBridge ? "bridge" : "vehicle"},
          {"quantity", to_string(c.quantity)},
          {"position", c.position}};
}

Channel channel_from_json(const json& j) {
  Channel c;
  c.name = j.at("name").get<std::string>();
  const auto src = j.at("source").get<std::string>();
  if (src != "bridge" && src != "vehicle") throw Error(ErrorCode::kIo, "unknown channel source " + src);
  c.source = src == "bridge" ? ChannelSource::kBridge : ChannelSource::kVehicle;
  c.quantity = sensor_quantity_from_string(j.at("quantity").get<std::string>());
  c.position = j.at("position").get<double>();
  return c;
}

json stats_json(const ChannelStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }
ChannelStats stats_from_json(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

json manifest_json(const DatasetManifest& m) {
  json j;
  j["format"] = "vino-dataset";
  j["version"] = m.version;
  j["kind"] = m.kind;
  j["n_samples"] = m.n_samples();
  j["root_seed"] = m.root_seed;
  j["damage_grid"] = {{"length", m.length}, {"points", m.damage_points}};
  j["time_grid"] = {{"dt", m.dt}, {"n_steps", m.n_steps}};
  j["channels"] = json::array();
  for (const auto& c : m.channels) j["channels"].push_back(channel_json(c));
  j["stats"]["damage"] = stats_json(m.damage_stats);
  j["stats"]["channels"] = json::array();
  for (const auto& s : m.channel_stats) j["stats"]["channels"].push_back(stats_json(s));
  j["split"] = {{"train", m.train}, {"test", m.test}};
  j["samples"] = json::array();
  for (std::size_t i = 0; i < m.files.size(); ++i)
    j["samples"].push_back({{"index", i}, {"file", m.files[i]}, {"seed", m.seeds[i]}, {"scenario", m.scenarios[i]}});
  j["config"] = m.config.is_null() ? json::object() : m.config;
  return j;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCode::kIo, "no manifest.json in " + dir.string());
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "vino-dataset") throw Error(ErrorCode::kIo, "not a vino dataset");
    m.version = j.at("version").get<int>();
    m.kind = j.at("kind").get<std::string>();
    m.root_seed = j.at("root_seed").get<std::uint64_t>();
    m.length = j.at("damage_grid").at("length").get<double>();
    m.damage_points = j.at("damage_grid").at("points").get<int>();
    m.dt = j.at("time_grid").at("dt").get<double>();
    m.n_steps = j.at("time_grid").at("n_steps").get<int>();
    for (const auto& c : j.at("channels")) m.channels.push_back(channel_from_json(c));
    m.damage_stats = stats_from_json(j.at("stats").at("damage"));
    for (const auto& s : j.at("stats").at("channels")) m.channel_stats.push_back(stats_from_json(s));
    m.train = j.at("split").at("train").get<std::vector<int>>();
    m.test = j.at("split").at("test").get<std::vector<int>>();
    for (const auto& s : j.at("samples")) {
      m.files.push_back(s.at("file").get<std::string>());
      m.seeds.push_back(s.at("seed").get<std::uint64_t>());
      m.scenarios.push_back(s.at("scenario").get<std::string>());
    }
    m.config = j.value("config", json::object());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_dataset(const fs::path& dir, DatasetManifest manifest, const std::vector<SampleRecord>& records) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  const int n = static_cast<int>(records.size());
  manifest.files.clear();
  manifest.seeds.clear();
  manifest.scenarios.clear();
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05d.vino", i);
    manifest.files.push_back(name);
    manifest.seeds.push_back(records[static_cast<std::size_t>(i)].seed);
    manifest.scenarios.push_back(records[static_cast<std::size_t>(i)].scenario);
    save_sample(dir / name, records[static_cast<std::size_t>(i)]);
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest in " + dir.string());
  out << manifest_json(manifest).dump(2) << '\n';
}

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.manifest = load_manifest(dir);
  for (int i = 0; i < d.manifest.n_samples(); ++i)
    d.records.push_back(load_sample(dir / d.manifest.files[static_cast<std::size_t>(i)], d.manifest, i));
  return d;
}

namespace {

/// Parallel map over [0, n) with per-index results; the lowest failing index wins.
template <class F>
std::vector<SampleRecord> parallel_records(int n, int jobs, F&& make) {
  std::vector<SampleRecord> out(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_index = n;
  std::exception_ptr failure;
  const auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = make(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const int threads = std::max(1, std::min(jobs, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.code(), "sample " + std::to_string(failed_index) + ": " + e.what());
    }
  }
  return out;
}

DatasetManifest base_manifest(const PhysicsConfig& physics, const std::vector<Channel>& channels,
                              std::uint64_t root_seed, int damage_points) {
  DatasetManifest m;
  m.root_seed = root_seed;
  m.length = physics.bridge.length;
  m.damage_points = damage_points;
  m.dt = physics.solver.dt * physics.solver.record_stride;
  m.n_steps = (physics.solver.n_steps - 1) / physics.solver.record_stride + 1;
  m.channels = channels;
  return m;
}

}  // namespace

Dataset generate_dataset(const PhysicsConfig& physics, const GrfConfig& grf, const DatasetConfig& cfg,
                         const fs::path& dir, const json& config_echo) {
  cfg.validate();
  physics.bridge.validate();
  const std::vector<double> grid = uniform_grid(physics.bridge.length, physics.bridge.n_nodes());
  GrfConfig g = grf;
  g.delta_max = physics.delta_max;
  const GrfSampler sampler(g, grid);
  const std::vector<Channel> channels = cfg.full_field ? full_field_channels(physics.bridge)
                                                       : default_channels(physics.bridge.length);
  const RoadProfile fixed_road = make_road(physics.road, physics.road.spectrum.seed);

  Dataset d;
  d.records = parallel_records(cfg.n_samples, cfg.jobs, [&](int i) {
    const std::uint64_t seed = derive_seed(cfg.root_seed, static_cast<std::uint64_t>(i));
    const DamageField damage = sampler.draw(seed);
    if (cfg.reroll_road)
      return simulate_record(physics, damage, make_road(physics.road, derive_seed(seed, 1)), channels, seed);
    return simulate_record(physics, damage, fixed_road, channels, seed);
  });
  d.manifest = base_manifest(physics, channels, cfg.root_seed, static_cast<int>(grid.size()));
  d.manifest.config = config_echo;
  assign_split(d.manifest, cfg.n_samples);
  compute_stats(d.manifest, d.records);
  write_dataset(dir, d.manifest, d.records);
  d.manifest = load_manifest(dir);
  return d;
}

Eigen::MatrixXd normalize(const Eigen::MatrixXd& x, const std::vector<ChannelStats>& stats) {
  if (static_cast<std::size_t>(x.cols()) != stats.size())
    throw Error(ErrorCode::kShapeMismatch, "channel count differs from stats");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const ChannelStats& s = stats[static_cast<std::size_t>(c)];
    out.col(c) = (x.col(c).array() - s.mean) / s.std;
  }
  return out;
}

Eigen::MatrixXd denormalize(const Eigen::MatrixXd& x, const std::vector<ChannelStats>& stats) {
  if (static_cast<std::size_t>(x.cols()) != stats.size())
    throw Error(ErrorCode::kShapeMismatch, "channel count differs from stats");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const ChannelStats& s = stats[static_cast<std::size_t>(c)];
    out.col(c) = x.col(c).array() * s.std + s.mean;
  }
  return out;
}

Eigen::VectorXd resample_to_grid(const Eigen::Ref<const Eigen::VectorXd>& series, int target_len) {
  const Eigen::Index n = series.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "resampling needs at least two source points");
  if (target_len < 1) throw Error(ErrorCode::kInvalidArgument, "target length must be positive");
  Eigen::VectorXd out(target_len);
  if (target_len == 1) {
    out[0] = series[0];
    return out;
  }
  const double scale = static_cast<double>(n - 1) / (target_len - 1);
  for (int i = 0; i < target_len; ++i) {
    const double s = i * scale;
    auto j = static_cast<Eigen::Index>(std::floor(s));
    if (j >= n - 1) j = n - 2;
    const double t = s - static_cast<double>(j);
    out[i] = t == 0.0 ? series[j] : series[j] + t * (series[j + 1] - series[j]);
  }
  return out;
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kInt: return "INT";
    case Scenario::kDmg1: return "DMG1";
    case Scenario::kDmg2: return "DMG2";
    case Scenario::kDmg3: return "DMG3";
  }
  return "INT";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "INT") return Scenario::kInt;
  if (name == "DMG1") return Scenario::kDmg1;
  if (name == "DMG2") return Scenario::kDmg2;
  if (name == "DMG3") return Scenario::kDmg3;
  throw Error(ErrorCode::kConfig, "unknown scenario '" + name + "' (INT, DMG1, DMG2, DMG3)");
}

DamageField scenario_damage(Scenario s, const BeamProperties& beam) {
  const std::vector<double> grid = uniform_grid(beam.length, beam.n_nodes());
  const double peak = 0.2;
  const double width = 0.2;
  switch (s) {
    case Scenario::kInt: return DamageField{grid, std::vector<double>(grid.size(), 0.0)};
    case Scenario::kDmg1: return bump_damage(0.75 * beam.length, width, peak, grid);
    case Scenario::kDmg2: return bump_damage(0.25 * beam.length, width, peak, grid);
    case Scenario::kDmg3:
      return clamped_sum(bump_damage(0.75 * beam.length, width, peak, grid),
                         bump_damage(0.25 * beam.length, width, peak, grid));
  }
  return {};
}

std::vector<SampleRecord> generate_pseudo_experimental(const PhysicsConfig& physics, Scenario scenario,
                                                       const Perturbation& perturbation, double noise_std,
                                                       std::uint64_t seed, int count,
                                                       const std::vector<Channel>& channels) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  PhysicsConfig perturbed = physics;
  perturbed.damping.zeta1 *= perturbation.damping_scale;
  perturbed.damping.zeta2 *= perturbation.damping_scale;
  perturbed.bridge.youngs_modulus *= perturbation.modulus_scale;
  const DamageField damage = scenario_damage(scenario, physics.bridge);
  const RoadProfile base_road = make_road(physics.road, physics.road.spectrum.seed);
  std::vector<SampleRecord> out;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    const RoadProfile road = perturbation.reroll_road ? make_road(physics.road, derive_seed(s, 1)) : base_road;
    SampleRecord r = simulate_record(perturbed, damage, road, channels, s, to_string(scenario));
    if (noise_std > 0.0) {
      std::mt19937_64 rng(derive_seed(s, 2));
      std::normal_distribution<double> normal;
      for (Eigen::Index c = 0; c < r.responses.cols(); ++c) {
        const double rms = std::sqrt(r.responses.col(c).squaredNorm() / static_cast<double>(r.responses.rows()));
        for (Eigen::Index k = 0; k < r.responses.rows(); ++k) r.responses(k, c) += noise_std * rms * normal(rng);
      }
      round_to_storage(r);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Dataset generate_pseudo_dataset(const PhysicsConfig& physics, const DatasetConfig& cfg, Scenario scenario,
                                int count, const fs::path& dir, const json& config_echo) {
  cfg.validate();
  const std::vector<Channel> channels = cfg.full_field ? full_field_channels(physics.bridge)
                                                       : default_channels(physics.bridge.length);
  const std::uint64_t seed = derive_seed(cfg.root_seed, (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(scenario));
  const Perturbation pert{cfg.damping_scale, cfg.modulus_scale, true};
  Dataset d;
  d.records = generate_pseudo_experimental(physics, scenario, pert, cfg.noise_std, seed, count, channels);
  d.manifest = base_manifest(physics, channels, cfg.root_seed, physics.bridge.n_nodes());
  d.manifest.kind = "pseudo-experimental";
  d.manifest.config = config_echo;
  for (int i = 0; i < count; ++i) d.manifest.train.push_back(i);
  compute_stats(d.manifest, d.records);
  write_dataset(dir, d.manifest, d.records);
  d.manifest = load_manifest(dir);
  return d;
}

void export_csv(const Dataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const SampleRecord& r = dataset.records[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "sample_%05zu", i);
    std::ofstream resp(dir / (std::string(stem) + "_responses.csv"));
    std::ofstream dmg(dir / (std::string(stem) + "_damage.csv"));
    if (!resp || !dmg) throw Error(ErrorCode::kIo, "cannot write CSV in " + dir.string());
    resp << std::setprecision(9) << "time";
    for (const auto& c : dataset.manifest.channels) resp << ',' << c.name;
    resp << '\n';
    for (Eigen::Index k = 0; k < r.responses.rows(); ++k) {
      resp << static_cast<double>(k) * dataset.manifest.dt;
      for (Eigen::Index c = 0; c < r.responses.cols(); ++c) resp << ',' << r.responses(k, c);
      resp << '\n';
    }
    dmg << std::setprecision(9) << "x,delta\n";
    for (std::size_t k = 0; k < r.damage.values.size(); ++k) dmg << r.damage.grid[k] << ',' << r.damage.values[k] << '\n';
  }
}

}  // namespace vino
