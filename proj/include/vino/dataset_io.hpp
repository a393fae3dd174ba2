#pragma once

#include "vino/beam_model.hpp"
#include "vino/damage_gen.hpp"
#include "vino/road_profile.hpp"
#include "vino/vbi_solver.hpp"
#include "vino/vehicle_model.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vino {

/// Damping ratios prescribed at two frequencies, turned into Rayleigh coefficients.
struct DampingSpec {
  double f1 = 3.64;   // Hz
  double f2 = 14.56;  // Hz
  double zeta1 = 0.007;
  double zeta2 = 0.007;

  RayleighParams coefficients() const { return rayleigh_coefficients(f1, f2, zeta1, zeta2); }
};

enum class RoadSource { kSpectral, kFlat, kLab, kFile };

struct RoadConfig {
  RoadClassSpec spectrum;
  RoadSource source = RoadSource::kSpectral;
  std::filesystem::path file;  // kFile only
};

/// Road for one run; spectral sources are re-seeded with `seed`.
RoadProfile make_road(const RoadConfig& cfg, std::uint64_t seed);

/// Everything a single traverse needs.
struct PhysicsConfig {
  BeamProperties bridge;
  DampingSpec damping;
  HalfCar vehicle;
  RoadConfig road;
  SolverConfig solver;
  double delta_max = kDefaultDeltaMax;
};

enum class ChannelSource { kBridge, kVehicle };

/// One recorded response channel. Vehicle channels read the bounce DOF and
/// ignore `position`.
struct Channel {
  std::string name;
  ChannelSource source = ChannelSource::kBridge;
  SensorQuantity quantity = SensorQuantity::kDisplacement;
  double position = 0.0;  // m
};

/// Displacement at L/4, L/2, 3L/4 plus vehicle bounce acceleration.
std::vector<Channel> default_channels(double length);
/// Displacement at every bridge node.
std::vector<Channel> full_field_channels(const BeamProperties& beam);

Eigen::MatrixXd record_channels(const SimulationResult& result, const std::vector<Channel>& channels);

struct SampleRecord {
  DamageField damage;
  Eigen::MatrixXd responses;  // step x channel
  std::uint64_t seed = 0;
  std::string scenario = "grf";
  double dt = 0.0;
  int n_steps = 0;
  double speed = 0.0;
};

/// Rounds damage and responses to float32 so that a record equals its on-disk image.
void round_to_storage(SampleRecord& record);

SampleRecord simulate_record(const PhysicsConfig& physics, const DamageField& damage, const RoadProfile& road,
                             const std::vector<Channel>& channels, std::uint64_t seed,
                             const std::string& scenario = "grf");

struct DatasetConfig {
  int n_samples = 240;
  bool full_field = false;
  bool reroll_road = false;  // new road realisation per sample
  int jobs = 1;
  std::uint64_t root_seed = 20240501;
  // pseudo-experimental generator
  double noise_std = 0.01;        // relative to each channel's RMS
  double damping_scale = 1.5;
  double modulus_scale = 0.97;
  int pseudo_count = 20;

  void validate() const;
};

struct ChannelStats {
  double mean = 0.0;
  double std = 1.0;
};

/// Scalar statistics; a zero spread falls back to std = 1 with a warning on stderr.
ChannelStats make_stats(const Eigen::Ref<const Eigen::VectorXd>& values, const std::string& label);

struct DatasetManifest {
  int version = 1;
  std::string kind = "grf";  // "grf" or "pseudo-experimental"
  std::uint64_t root_seed = 0;
  double length = 0.0;
  int damage_points = 0;
  double dt = 0.0;
  int n_steps = 0;
  std::vector<Channel> channels;
  ChannelStats damage_stats;
  std::vector<ChannelStats> channel_stats;
  std::vector<int> train;
  std::vector<int> test;
  std::vector<std::string> files;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> scenarios;
  nlohmann::json config;

  int n_samples() const { return static_cast<int>(files.size()); }
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<SampleRecord> records;

  std::vector<const SampleRecord*> split(bool train) const;
};

/// Train indices are the first floor(5 n / 6) samples, test the rest.
void assign_split(DatasetManifest& manifest, int n);
/// Per-channel and damage statistics over the training split.
void compute_stats(DatasetManifest& manifest, const std::vector<SampleRecord>& records);

/// Runs n independent damage-draw -> simulate pipelines (seed_i = derive_seed(root, i))
/// across cfg.jobs threads, writes one sample file each and the manifest last.
Dataset generate_dataset(const PhysicsConfig& physics, const GrfConfig& grf, const DatasetConfig& cfg,
                         const std::filesystem::path& dir, const nlohmann::json& config_echo = {});

/// Writes sample files and manifest for records already in memory.
void write_dataset(const std::filesystem::path& dir, DatasetManifest manifest, const std::vector<SampleRecord>& records);
DatasetManifest load_manifest(const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// Tensor record: "VINO1", u32 rank, u32 dims[rank], float32 payload, little endian, row major.
struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};
void write_tensor(std::ostream& out, const RawTensor& t);
RawTensor read_tensor(std::istream& in);

void save_sample(const std::filesystem::path& path, const SampleRecord& record);
/// Reads damage values and responses; grid and metadata come from the manifest.
SampleRecord load_sample(const std::filesystem::path& path, const DatasetManifest& manifest, int index);

/// Per-channel (x - mean) / std over the columns of a step x channel matrix.
Eigen::MatrixXd normalize(const Eigen::MatrixXd& x, const std::vector<ChannelStats>& stats);
Eigen::MatrixXd denormalize(const Eigen::MatrixXd& x, const std::vector<ChannelStats>& stats);

/// Linear interpolation onto target_len evenly spaced points spanning the same range.
Eigen::VectorXd resample_to_grid(const Eigen::Ref<const Eigen::VectorXd>& series, int target_len);

enum class Scenario { kInt, kDmg1, kDmg2, kDmg3 };
std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// INT: zero; DMG1 bump at 3L/4, DMG2 at L/4 (peak 0.2, width 0.2 m); DMG3 their clamped sum.
DamageField scenario_damage(Scenario s, const BeamProperties& beam);

struct Perturbation {
  double damping_scale = 1.5;
  double modulus_scale = 0.97;
  bool reroll_road = true;

  static Perturbation none() { return {1.0, 1.0, false}; }
};

/// Perturbed-physics stand-in for laboratory runs with additive Gaussian noise
/// of noise_std times each channel's RMS.
std::vector<SampleRecord> generate_pseudo_experimental(const PhysicsConfig& physics, Scenario scenario,
                                                       const Perturbation& perturbation, double noise_std,
                                                       std::uint64_t seed, int count,
                                                       const std::vector<Channel>& channels);

/// Writes `count` pseudo-experimental records of one scenario as a dataset of
/// kind "pseudo-experimental" with every record in the train split. The
/// scenario seed is derive_seed(cfg.root_seed, 2^32 + scenario index).
Dataset generate_pseudo_dataset(const PhysicsConfig& physics, const DatasetConfig& cfg, Scenario scenario,
                                int count, const std::filesystem::path& dir, const nlohmann::json& config_echo = {});

/// Human-readable mirror: one responses CSV and one damage CSV per sample.
void export_csv(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace vino
