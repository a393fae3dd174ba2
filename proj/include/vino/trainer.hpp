#pragma once

#include "vino/dataset_io.hpp"
#include "vino/neural_core.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace vino {

enum class Direction { kForward, kInverse };
std::string to_string(Direction d);
Direction direction_from_string(const std::string& name);

enum class LossKind { kRelativeL2, kMse };
std::string to_string(LossKind k);
LossKind loss_from_string(const std::string& name);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 20;
  int epochs = 500;
  int lr_step_epochs = 100;  // learning rate halves every lr_step_epochs
  double lr_decay = 0.5;
  double weight_decay = 1e-4;
  std::uint64_t seed = 7;
  LossKind loss = LossKind::kRelativeL2;
  // Gaussian input noise drawn afresh per batch, std relative to each
  // sample's channel RMS (the pseudo-experimental noise model)
  double input_noise = 0.0;

  void validate(int n_train) const;
  double lr_at(int epoch) const;
};

/// Parameter groups to train; every other group is frozen.
struct FreezeSpec {
  std::set<std::string> trainable = {"proj1", "proj2"};
};

/// Mean over the batch of ||pred - target|| / ||target|| per sample; `grad`
/// receives d loss / d pred when given.
double relative_l2_loss(const Tensor<double>& pred, const Tensor<double>& target, Tensor<double>* grad = nullptr);
/// Mean over the batch of the per-sample mean squared error.
double mse_loss(const Tensor<double>& pred, const Tensor<double>& target, Tensor<double>* grad = nullptr);

template <class S>
struct AdamState {
  std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>> m;
  std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>> v;
  int step = 0;
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam step with decoupled weight decay (theta *= 1 - lr wd
/// first). Parameters whose group is in `frozen` are left untouched.
template <class S>
void adam_step(std::vector<ParamRef<S>>& params, const std::vector<ParamRef<S>>& grads, AdamState<S>& state,
               double lr, double weight_decay, const std::set<std::string>& frozen = {},
               const AdamHyper& hyper = {});

/// Pointwise mean per (channel, grid point) and one spread per channel,
/// fitted on training tensors only.
struct FieldNormalizer {
  Eigen::MatrixXd mean;   // channels x grid
  Eigen::VectorXd scale;  // channels

  static FieldNormalizer fit(const Tensor<double>& data);
  Tensor<double> normalize(const Tensor<double>& x) const;
  Tensor<double> denormalize(const Tensor<double>& x) const;
  nlohmann::json to_json() const;
  static FieldNormalizer from_json(const nlohmann::json& j);
};

/// How dataset records become operator pairs on the model grid.
struct ProblemSpec {
  Direction direction = Direction::kInverse;
  int grid = 256;
  std::vector<std::string> sensors = {"disp_quarter", "disp_mid", "disp_three_quarter"};  // inverse inputs
  std::string target_sensor = "disp_mid";                                               // forward output
  double length = 5.4;

  nlohmann::json to_json() const;
  static ProblemSpec from_json(const nlohmann::json& j);
};

struct PairSet {
  Tensor<double> inputs;   // physical units
  Tensor<double> targets;  // physical units
  std::vector<std::string> scenarios;

  int size() const { return inputs.batch; }
};

/// Resamples sensor channels and damage fields to spec.grid. Channel names are
/// looked up in `channels` (the dataset manifest order).
PairSet make_pairs(const std::vector<const SampleRecord*>& records, const std::vector<Channel>& channels,
                   const ProblemSpec& spec);
PairSet make_pairs(const Dataset& dataset, bool train, const ProblemSpec& spec);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double lr = 0.0;
};

/// Everything needed to run a trained operator on physical inputs.
template <class S>
struct OperatorModel {
  FnoModel<S> net;
  FieldNormalizer input_norm;
  FieldNormalizer output_norm;
  ProblemSpec spec;
};

template <class S>
struct TrainResult {
  OperatorModel<S> best;    // lowest test loss (train loss when no test set)
  OperatorModel<S> last;
  std::vector<EpochRecord> history;
  double best_loss = 0.0;
  int best_epoch = -1;
};

/// Fits normalisers on `train_set` unless `fixed_norms` is set, then minimises
/// cfg.loss on physical outputs with Adam. epochs = 0 returns the model unchanged.
template <class S>
TrainResult<S> train(const FnoModel<S>& model, const PairSet& train_set, const PairSet& test_set,
                     const TrainConfig& cfg, const ProblemSpec& spec,
                     const OperatorModel<S>* fixed_norms = nullptr);

/// Trains only freeze.trainable on healthy records, keeping the pre-trained normalisers.
template <class S>
TrainResult<S> fine_tune(const OperatorModel<S>& pretrained, const PairSet& healthy, const TrainConfig& cfg,
                         const FreezeSpec& freeze = {});

/// Physical-unit predictions.
template <class S>
Tensor<double> predict(const OperatorModel<S>& model, const Tensor<double>& inputs, int batch = 32);

/// Loss of cfg kind over a pair set, physical units.
template <class S>
double dataset_loss(const OperatorModel<S>& model, const PairSet& pairs, LossKind kind);

struct SampleMetrics {
  std::string scenario;
  double max_abs_error = 0.0;
  double relative_l2 = 0.0;
  double mean_abs_error = 0.0;
  double peak_location_error = 0.0;   // m, inverse only
  double peak_magnitude_error = 0.0;  // inverse only
  double predicted_peak_position = 0.0;
  double true_peak_position = 0.0;
};

struct MetricsReport {
  Direction direction = Direction::kInverse;
  std::string sensor;  // forward target sensor
  std::vector<SampleMetrics> samples;
  // aggregates over samples
  double max_abs_error = 0.0;
  double mean_relative_l2 = 0.0;
  double mean_abs_error = 0.0;
  double mean_peak_location_error = 0.0;
  double mean_peak_magnitude_error = 0.0;
  std::map<std::string, MetricsReport> by_scenario;

  nlohmann::json to_json() const;
};

/// Compares physical predictions with targets; grid spacing from spec.length.
MetricsReport evaluate_predictions(const Tensor<double>& predictions, const PairSet& pairs, const ProblemSpec& spec);
template <class S>
MetricsReport evaluate(const OperatorModel<S>& model, const PairSet& pairs);

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

/// Checkpoint with the problem spec and normalisers in its JSON block.
template <class S>
void save_operator(const std::filesystem::path& path, const OperatorModel<S>& model, const nlohmann::json& extra = {});
OperatorModel<float> load_operator(const std::filesystem::path& path);

nlohmann::json to_json(const TrainConfig& cfg);

}  // namespace vino
