#include "vino/trainer.hpp"

#include "vino/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>

namespace vino {

using nlohmann::json;

std::string to_string(Direction d) { return d == Direction::kForward ? "forward" : "inverse"; }

Direction direction_from_string(const std::string& name) {
  if (name == "forward") return Direction::kForward;
  if (name == "inverse") return Direction::kInverse;
  throw Error(ErrorCode::kConfig, "unknown direction '" + name + "' (forward, inverse)");
}

std::string to_string(LossKind k) { return k == LossKind::kRelativeL2 ? "relative_l2" : "mse"; }

LossKind loss_from_string(const std::string& name) {
  if (name == "relative_l2") return LossKind::kRelativeL2;
  if (name == "mse") return LossKind::kMse;
  throw Error(ErrorCode::kConfig, "unknown loss '" + name + "' (relative_l2, mse)");
}

void TrainConfig::validate(int n_train) const {
  if (!(learning_rate > 0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  if (epochs < 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  if (lr_step_epochs < 1 || !(lr_decay > 0)) throw Error(ErrorCode::kInvalidArgument, "invalid lr schedule");
  if (!(weight_decay >= 0)) throw Error(ErrorCode::kInvalidArgument, "weight_decay must be >= 0");
  if (!(input_noise >= 0)) throw Error(ErrorCode::kInvalidArgument, "input_noise must be >= 0");
  if (n_train >= 0 && batch_size > n_train)
    throw Error(ErrorCode::kInvalidArgument, "batch_size " + std::to_string(batch_size) + " exceeds the " +
                                                 std::to_string(n_train) + " training samples");
}

double TrainConfig::lr_at(int epoch) const { return learning_rate * std::pow(lr_decay, epoch / lr_step_epochs); }

json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate}, {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},               {"lr_step_epochs", cfg.lr_step_epochs},
          {"lr_decay", cfg.lr_decay},           {"weight_decay", cfg.weight_decay},
          {"seed", cfg.seed},                   {"loss", to_string(cfg.loss)}};
}

// ---------------------------------------------------------------------------
// losses

namespace {

void check_pair(const Tensor<double>& pred, const Tensor<double>& target) {
  if (pred.batch != target.batch || pred.channels != target.channels || pred.grid != target.grid)
    throw Error(ErrorCode::kShapeMismatch, "prediction and target shapes differ");
  if (pred.batch < 1) throw Error(ErrorCode::kShapeMismatch, "empty batch");
}

Tensor<double> like(const Tensor<double>& t) { return Tensor<double>(t.batch, t.channels, t.grid); }

}  // namespace

double relative_l2_loss(const Tensor<double>& pred, const Tensor<double>& target, Tensor<double>* grad) {
  check_pair(pred, target);
  if (grad) *grad = like(pred);
  double total = 0.0;
  for (int b = 0; b < pred.batch; ++b) {
    const double tn = target.sample(b).norm();
    if (!(tn > 0.0)) throw Error(ErrorCode::kZeroTargetNorm, "target " + std::to_string(b) + " has zero norm");
    const Eigen::MatrixXd diff = pred.sample(b) - target.sample(b);
    const double dn = diff.norm();
    total += dn / tn;
    if (grad && dn > 0.0) grad->sample(b) = diff / (dn * tn * pred.batch);
  }
  return total / pred.batch;
}

double mse_loss(const Tensor<double>& pred, const Tensor<double>& target, Tensor<double>* grad) {
  check_pair(pred, target);
  const double per = static_cast<double>(pred.channels) * pred.grid;
  const Eigen::MatrixXd diff = pred.data - target.data;
  if (grad) {
    *grad = like(pred);
    grad->data = diff * (2.0 / (per * pred.batch));
  }
  return diff.squaredNorm() / (per * pred.batch);
}

namespace {

double loss_of(LossKind kind, const Tensor<double>& pred, const Tensor<double>& target, Tensor<double>* grad) {
  return kind == LossKind::kRelativeL2 ? relative_l2_loss(pred, target, grad) : mse_loss(pred, target, grad);
}

}  // namespace

template <class S>
void adam_step(std::vector<ParamRef<S>>& params, const std::vector<ParamRef<S>>& grads, AdamState<S>& state,
               double lr, double weight_decay, const std::set<std::string>& frozen, const AdamHyper& hyper) {
  if (params.size() != grads.size()) throw Error(ErrorCode::kShapeMismatch, "parameter and gradient lists differ");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(p.values.size()));
      state.v.push_back(Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(p.values.size()));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(hyper.beta1, state.step);
  const double c2 = 1.0 - std::pow(hyper.beta2, state.step);
  const S b1 = static_cast<S>(hyper.beta1);
  const S b2 = static_cast<S>(hyper.beta2);
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (frozen.count(params[t].group)) continue;
    auto& m = state.m[t];
    auto& v = state.v[t];
    const auto& g = grads[t].values;
    m = b1 * m + (S(1) - b1) * g;
    v = b2 * v + (S(1) - b2) * g.cwiseProduct(g);
    if (weight_decay != 0.0) params[t].values *= static_cast<S>(1.0 - lr * weight_decay);
    const auto m_hat = m.array() / static_cast<S>(c1);
    const auto v_hat = v.array() / static_cast<S>(c2);
    params[t].values.array() -= static_cast<S>(lr) * m_hat / (v_hat.sqrt() + static_cast<S>(hyper.eps));
  }
}

// ---------------------------------------------------------------------------
// normalisation and pairs

FieldNormalizer FieldNormalizer::fit(const Tensor<double>& data) {
  if (data.batch < 1) throw Error(ErrorCode::kShapeMismatch, "cannot fit a normaliser on an empty set");
  FieldNormalizer f;
  f.mean = Eigen::MatrixXd::Zero(data.channels, data.grid);
  for (int b = 0; b < data.batch; ++b) f.mean += data.sample(b);
  f.mean /= data.batch;
  f.scale.resize(data.channels);
  for (int c = 0; c < data.channels; ++c) {
    double sq = 0.0;
    for (int b = 0; b < data.batch; ++b) sq += (data.sample(b).row(c) - f.mean.row(c)).squaredNorm();
    f.scale[c] = std::sqrt(sq / (static_cast<double>(data.batch) * data.grid));
    if (!(f.scale[c] > 0.0)) {
      std::cerr << "warning: ZeroStd in normaliser channel " << c << ", using 1\n";
      f.scale[c] = 1.0;
    }
  }
  return f;
}

Tensor<double> FieldNormalizer::normalize(const Tensor<double>& x) const {
  if (x.channels != mean.rows() || x.grid != mean.cols())
    throw Error(ErrorCode::kShapeMismatch, "normaliser fitted on a different shape");
  Tensor<double> y = x;
  for (int b = 0; b < x.batch; ++b) {
    y.sample(b) -= mean;
    y.sample(b) = scale.cwiseInverse().asDiagonal() * y.sample(b);
  }
  return y;
}

Tensor<double> FieldNormalizer::denormalize(const Tensor<double>& x) const {
  if (x.channels != mean.rows() || x.grid != mean.cols())
    throw Error(ErrorCode::kShapeMismatch, "normaliser fitted on a different shape");
  Tensor<double> y = x;
  for (int b = 0; b < x.batch; ++b) y.sample(b) = scale.asDiagonal() * x.sample(b) + mean;
  return y;
}

json FieldNormalizer::to_json() const {
  json rows = json::array();
  for (Eigen::Index c = 0; c < mean.rows(); ++c) {
    std::vector<double> r(static_cast<std::size_t>(mean.cols()));
    for (Eigen::Index i = 0; i < mean.cols(); ++i) r[static_cast<std::size_t>(i)] = mean(c, i);
    rows.push_back(r);
  }
  return {{"mean", rows}, {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())}};
}

FieldNormalizer FieldNormalizer::from_json(const json& j) {
  FieldNormalizer f;
  const auto rows = j.at("mean").get<std::vector<std::vector<double>>>();
  const auto sc = j.at("scale").get<std::vector<double>>();
  if (rows.empty() || rows.size() != sc.size()) throw Error(ErrorCode::kIo, "malformed normaliser");
  f.mean.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (rows[c].size() != rows[0].size()) throw Error(ErrorCode::kIo, "ragged normaliser");
    for (std::size_t i = 0; i < rows[c].size(); ++i)
      f.mean(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = rows[c][i];
  }
  f.scale = Eigen::Map<const Eigen::VectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
  return f;
}

json ProblemSpec::to_json() const {
  return {{"direction", to_string(direction)}, {"grid", grid},     {"sensors", sensors},
          {"target_sensor", target_sensor},     {"length", length}};
}

ProblemSpec ProblemSpec::from_json(const json& j) {
  ProblemSpec p;
  p.direction = direction_from_string(j.at("direction").get<std::string>());
  p.grid = j.at("grid").get<int>();
  p.sensors = j.at("sensors").get<std::vector<std::string>>();
  p.target_sensor = j.at("target_sensor").get<std::string>();
  p.length = j.at("length").get<double>();
  return p;
}

namespace {

Eigen::Index channel_index(const std::vector<Channel>& channels, const std::string& name) {
  for (std::size_t c = 0; c < channels.size(); ++c)
    if (channels[c].name == name) return static_cast<Eigen::Index>(c);
  throw Error(ErrorCode::kConfig, "dataset has no channel named '" + name + "'");
}

template <class S>
Tensor<S> gather(const Tensor<S>& all, const std::vector<int>& idx) {
  Tensor<S> t;
  t.batch = static_cast<int>(idx.size());
  t.channels = all.channels;
  t.grid = all.grid;
  t.data.resize(all.channels, static_cast<Eigen::Index>(t.batch) * all.grid);
  for (std::size_t k = 0; k < idx.size(); ++k) t.sample(static_cast<int>(k)) = all.sample(idx[k]);
  return t;
}

}  // namespace

PairSet make_pairs(const std::vector<const SampleRecord*>& records, const std::vector<Channel>& channels,
                   const ProblemSpec& spec) {
  const int n = static_cast<int>(records.size());
  const int g = spec.grid;
  if (g < 2) throw Error(ErrorCode::kInvalidArgument, "model grid must have at least two points");
  PairSet p;
  const auto damage_row = [&](const SampleRecord& r) {
    return resample_to_grid(Eigen::Map<const Eigen::VectorXd>(r.damage.values.data(),
                                                              static_cast<Eigen::Index>(r.damage.values.size())),
                            g);
  };
  if (spec.direction == Direction::kInverse) {
    std::vector<Eigen::Index> cols;
    for (const auto& s : spec.sensors) cols.push_back(channel_index(channels, s));
    p.inputs = Tensor<double>(n, static_cast<int>(cols.size()), g);
    p.targets = Tensor<double>(n, 1, g);
    for (int b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < cols.size(); ++c)
        p.inputs.sample(b).row(static_cast<Eigen::Index>(c)) = resample_to_grid(records[b]->responses.col(cols[c]), g).transpose();
      p.targets.sample(b).row(0) = damage_row(*records[b]).transpose();
    }
  } else {
    const Eigen::Index col = channel_index(channels, spec.target_sensor);
    p.inputs = Tensor<double>(n, 1, g);
    p.targets = Tensor<double>(n, 1, g);
    for (int b = 0; b < n; ++b) {
      p.inputs.sample(b).row(0) = damage_row(*records[b]).transpose();
      p.targets.sample(b).row(0) = resample_to_grid(records[b]->responses.col(col), g).transpose();
    }
  }
  for (const auto* r : records) p.scenarios.push_back(r->scenario);
  return p;
}

PairSet make_pairs(const Dataset& dataset, bool train, const ProblemSpec& spec) {
  return make_pairs(dataset.split(train), dataset.manifest.channels, spec);
}

// ---------------------------------------------------------------------------
// training

template <class S>
Tensor<double> predict(const OperatorModel<S>& model, const Tensor<double>& inputs, int batch) {
  const Tensor<double> xn = model.input_norm.normalize(inputs);
  Tensor<double> out(inputs.batch, model.net.config.out_channels, inputs.grid);
  for (int start = 0; start < inputs.batch; start += batch) {
    std::vector<int> idx;
    for (int b = start; b < std::min(inputs.batch, start + batch); ++b) idx.push_back(b);
    const Tensor<double> y = fno_forward(model.net, gather(xn, idx).template cast<S>()).template cast<double>();
    const Tensor<double> yp = model.output_norm.denormalize(y);
    for (std::size_t k = 0; k < idx.size(); ++k) out.sample(idx[k]) = yp.sample(static_cast<int>(k));
  }
  return out;
}

template <class S>
double dataset_loss(const OperatorModel<S>& model, const PairSet& pairs, LossKind kind) {
  return loss_of(kind, predict(model, pairs.inputs), pairs.targets, nullptr);
}

namespace {

template <class S>
TrainResult<S> run_training(OperatorModel<S> op, const PairSet& train_set, const PairSet& test_set,
                            const TrainConfig& cfg) {
  const int n = train_set.size();
  cfg.validate(n);
  TrainResult<S> result;
  const bool has_test = test_set.size() > 0;
  const Tensor<S> xn = op.input_norm.normalize(train_set.inputs).template cast<S>();
  result.best = op;
  result.best_loss = std::numeric_limits<double>::infinity();
  if (cfg.epochs == 0) {
    result.last = op;
    return result;
  }
  std::mt19937_64 rng(cfg.seed);
  std::mt19937_64 noise_rng(derive_seed(cfg.seed, 1));
  std::normal_distribution<double> normal;
  // noise std per (sample, channel) in normalised units
  Eigen::MatrixXd noise_std;
  if (cfg.input_noise > 0) {
    const Tensor<double>& x = train_set.inputs;
    noise_std.resize(x.channels, n);
    for (int b = 0; b < n; ++b)
      for (int ch = 0; ch < x.channels; ++ch)
        noise_std(ch, b) = cfg.input_noise * std::sqrt(x.sample(b).row(ch).squaredNorm() / x.grid) /
                           op.input_norm.scale[ch];
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  AdamState<S> adam;
  FnoModel<S> grads = FnoModel<S>::zeros(op.net.config);
  FnoCache<S> cache;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const std::vector<int> idx(order.begin() + start, order.begin() + std::min(n, start + cfg.batch_size));
      Tensor<S> xb = gather(xn, idx);
      if (cfg.input_noise > 0)
        for (std::size_t b = 0; b < idx.size(); ++b)
          for (int ch = 0; ch < xb.channels; ++ch)
            for (int i = 0; i < xb.grid; ++i)
              xb(static_cast<int>(b), ch, i) += static_cast<S>(noise_std(ch, idx[b]) * normal(noise_rng));
      const Tensor<double> target = gather(train_set.targets, idx);
      const Tensor<double> pred = op.output_norm.denormalize(fno_forward(op.net, xb, &cache).template cast<double>());
      Tensor<double> g;
      const double loss = loss_of(cfg.loss, pred, target, &g);
      if (!std::isfinite(loss))
        throw Error(ErrorCode::kNaNLoss, "loss became non-finite at epoch " + std::to_string(epoch) +
                                             ", batch starting at " + std::to_string(start) + " (lr " +
                                             std::to_string(lr) + ")");
      loss_sum += loss * static_cast<double>(idx.size());
      for (int b = 0; b < g.batch; ++b) g.sample(b) = op.output_norm.scale.asDiagonal() * g.sample(b);
      for (auto& p : grads.parameters()) p.values.setZero();
      fno_backward(op.net, cache, g.template cast<S>(), grads);
      auto params = op.net.parameters();
      adam_step(params, grads.parameters(), adam, lr, cfg.weight_decay, op.net.frozen);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / n;
    rec.test_loss = has_test ? dataset_loss(op, test_set, cfg.loss) : rec.train_loss;
    result.history.push_back(rec);
    if (rec.test_loss < result.best_loss) {
      result.best_loss = rec.test_loss;
      result.best_epoch = epoch;
      result.best = op;
    }
  }
  result.last = std::move(op);
  return result;
}

}  // namespace

template <class S>
TrainResult<S> train(const FnoModel<S>& model, const PairSet& train_set, const PairSet& test_set,
                     const TrainConfig& cfg, const ProblemSpec& spec, const OperatorModel<S>* fixed_norms) {
  cfg.validate(train_set.size());
  OperatorModel<S> op;
  op.net = model;
  op.spec = spec;
  if (fixed_norms) {
    op.input_norm = fixed_norms->input_norm;
    op.output_norm = fixed_norms->output_norm;
  } else {
    op.input_norm = FieldNormalizer::fit(train_set.inputs);
    op.output_norm = FieldNormalizer::fit(train_set.targets);
  }
  return run_training(std::move(op), train_set, test_set, cfg);
}

template <class S>
TrainResult<S> fine_tune(const OperatorModel<S>& pretrained, const PairSet& healthy, const TrainConfig& cfg,
                         const FreezeSpec& freeze) {
  OperatorModel<S> op = pretrained;
  const auto groups = op.net.group_names();
  for (const auto& g : freeze.trainable)
    if (std::find(groups.begin(), groups.end(), g) == groups.end())
      throw Error(ErrorCode::kConfig, "unknown parameter group '" + g + "'");
  op.net.frozen.clear();
  for (const auto& g : groups)
    if (!freeze.trainable.count(g)) op.net.frozen.insert(g);
  if (op.net.frozen.size() == groups.size())
    throw Error(ErrorCode::kEmptyTrainable, "fine-tuning needs at least one trainable parameter group");
  TrainResult<S> r = run_training(std::move(op), healthy, PairSet{}, cfg);
  if (cfg.epochs == 0) r.best.net.frozen = r.last.net.frozen;
  return r;
}

// ---------------------------------------------------------------------------
// metrics

namespace {

void aggregate(MetricsReport& r) {
  r.max_abs_error = 0.0;
  double rel = 0.0, mae = 0.0, loc = 0.0, mag = 0.0;
  int rel_count = 0;
  for (const auto& s : r.samples) {
    r.max_abs_error = std::max(r.max_abs_error, s.max_abs_error);
    if (std::isfinite(s.relative_l2)) {
      rel += s.relative_l2;
      ++rel_count;
    }
    mae += s.mean_abs_error;
    loc += s.peak_location_error;
    mag += s.peak_magnitude_error;
  }
  const double n = std::max<std::size_t>(1, r.samples.size());
  r.mean_relative_l2 = rel_count ? rel / rel_count : std::numeric_limits<double>::quiet_NaN();
  r.mean_abs_error = mae / n;
  r.mean_peak_location_error = loc / n;
  r.mean_peak_magnitude_error = mag / n;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json aggregate_json(const MetricsReport& r) {
  json j{{"n_samples", r.samples.size()},
         {"max_abs_error", r.max_abs_error},
         {"mean_relative_l2", number_or_null(r.mean_relative_l2)},
         {"mean_abs_error", r.mean_abs_error}};
  if (r.direction == Direction::kInverse) {
    j["mean_peak_location_error_m"] = r.mean_peak_location_error;
    j["mean_peak_magnitude_error"] = r.mean_peak_magnitude_error;
  }
  return j;
}

}  // namespace

json MetricsReport::to_json() const {
  json j;
  j["direction"] = vino::to_string(direction);
  if (direction == Direction::kForward) j["sensor"] = sensor;
  j["aggregate"] = aggregate_json(*this);
  j["samples"] = json::array();
  for (const auto& s : samples) {
    json e{{"scenario", s.scenario},
           {"max_abs_error", s.max_abs_error},
           {"relative_l2", number_or_null(s.relative_l2)},
           {"mean_abs_error", s.mean_abs_error}};
    if (direction == Direction::kInverse) {
      e["peak_location_error_m"] = s.peak_location_error;
      e["peak_magnitude_error"] = s.peak_magnitude_error;
      e["predicted_peak_position_m"] = s.predicted_peak_position;
      e["true_peak_position_m"] = s.true_peak_position;
    }
    j["samples"].push_back(e);
  }
  j["by_scenario"] = json::object();
  for (const auto& [name, sub] : by_scenario) j["by_scenario"][name] = aggregate_json(sub);
  return j;
}

MetricsReport evaluate_predictions(const Tensor<double>& predictions, const PairSet& pairs, const ProblemSpec& spec) {
  check_pair(predictions, pairs.targets);
  MetricsReport r;
  r.direction = spec.direction;
  r.sensor = spec.target_sensor;
  const double dx = spec.length / (predictions.grid - 1);
  for (int b = 0; b < predictions.batch; ++b) {
    SampleMetrics m;
    m.scenario = b < static_cast<int>(pairs.scenarios.size()) ? pairs.scenarios[static_cast<std::size_t>(b)] : "";
    const Eigen::MatrixXd diff = predictions.sample(b) - pairs.targets.sample(b);
    m.max_abs_error = diff.cwiseAbs().maxCoeff();
    const double tn = pairs.targets.sample(b).norm();
    m.relative_l2 = tn > 0.0 ? diff.norm() / tn : std::numeric_limits<double>::quiet_NaN();
    m.mean_abs_error = diff.cwiseAbs().mean();
    if (spec.direction == Direction::kInverse) {
      Eigen::Index ip = 0, it = 0;
      const double pp = predictions.sample(b).row(0).maxCoeff(&ip);
      const double tp = pairs.targets.sample(b).row(0).maxCoeff(&it);
      m.predicted_peak_position = static_cast<double>(ip) * dx;
      m.true_peak_position = static_cast<double>(it) * dx;
      m.peak_location_error = std::abs(m.predicted_peak_position - m.true_peak_position);
      m.peak_magnitude_error = std::abs(pp - tp);
    }
    r.samples.push_back(m);
  }
  aggregate(r);
  for (const auto& s : r.samples) {
    if (s.scenario.empty()) continue;
    auto& sub = r.by_scenario[s.scenario];
    sub.direction = r.direction;
    sub.sensor = r.sensor;
    sub.samples.push_back(s);
  }
  for (auto& [name, sub] : r.by_scenario) aggregate(sub);
  return r;
}

template <class S>
MetricsReport evaluate(const OperatorModel<S>& model, const PairSet& pairs) {
  return evaluate_predictions(predict(model, pairs.inputs), pairs, model.spec);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "epoch,train_loss,test_loss,lr\n" << std::setprecision(10);
  for (const auto& h : history) out << h.epoch << ',' << h.train_loss << ',' << h.test_loss << ',' << h.lr << '\n';
}

template <class S>
void save_operator(const std::filesystem::path& path, const OperatorModel<S>& model, const json& extra) {
  json j;
  j["problem"] = model.spec.to_json();
  j["input_norm"] = model.input_norm.to_json();
  j["output_norm"] = model.output_norm.to_json();
  j["run"] = extra.is_null() ? json::object() : extra;
  save_checkpoint(path, model.net, j);
}

OperatorModel<float> load_operator(const std::filesystem::path& path) {
  Checkpoint ck = load_checkpoint(path);
  OperatorModel<float> m;
  m.net = std::move(ck.model);
  try {
    m.spec = ProblemSpec::from_json(ck.extra.at("problem"));
    m.input_norm = FieldNormalizer::from_json(ck.extra.at("input_norm"));
    m.output_norm = FieldNormalizer::from_json(ck.extra.at("output_norm"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("checkpoint lacks operator metadata: ") + e.what());
  }
  return m;
}

#define VINO_INSTANTIATE(S)                                                                                      \
  template void adam_step<S>(std::vector<ParamRef<S>>&, const std::vector<ParamRef<S>>&, AdamState<S>&, double, \
                             double, const std::set<std::string>&, const AdamHyper&);                             \
  template TrainResult<S> train<S>(const FnoModel<S>&, const PairSet&, const PairSet&, const TrainConfig&,       \
                                   const ProblemSpec&, const OperatorModel<S>*);                                 \
  template TrainResult<S> fine_tune<S>(const OperatorModel<S>&, const PairSet&, const TrainConfig&,              \
                                       const FreezeSpec&);                                                       \
  template Tensor<double> predict<S>(const OperatorModel<S>&, const Tensor<double>&, int);                       \
  template double dataset_loss<S>(const OperatorModel<S>&, const PairSet&, LossKind);                            \
  template MetricsReport evaluate<S>(const OperatorModel<S>&, const PairSet&);                                   \
  template void save_operator<S>(const std::filesystem::path&, const OperatorModel<S>&, const json&);

VINO_INSTANTIATE(float)
VINO_INSTANTIATE(double)

}  // namespace vino
