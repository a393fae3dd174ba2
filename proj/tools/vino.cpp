// vino: command-line front end for simulation, dataset generation, operator
// training, fine-tuning, inference, evaluation and benchmarking.

#include "svg.hpp"

#include "vino/config.hpp"
#include "vino/errors.hpp"
#include "vino/trainer.hpp"
#include "vino/vbi_solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vino;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kConfigExit = 2, kSolverExit = 3, kIoExit = 4, kTrainingExit = 5 };

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::kIo: return kIoExit;
    case ErrorCode::kNonConvergence:
    case ErrorCode::kSingularEffectiveMatrix:
    case ErrorCode::kNonFiniteState:
    case ErrorCode::kOutOfSpan:
    case ErrorCode::kCholeskyFailure:
    case ErrorCode::kInvalidDamage: return kSolverExit;
    case ErrorCode::kNaNLoss:
    case ErrorCode::kZeroTargetNorm:
    case ErrorCode::kEmptyTrainable:
    case ErrorCode::kMissingForwardState:
    case ErrorCode::kShapeMismatch: return kTrainingExit;
    default: return kConfigExit;
  }
}

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> argv;
};

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kConfig, "cannot open config " + path);
    json j;
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kConfig, path + ": " + e.what());
    }
    // a run.json record carries its resolved configuration
    if (j.is_object() && j.contains("command") && j.contains("config")) j = j.at("config");
    cfg = run_config_from_json(j);
  }
  apply_seed_override(cfg);
  return cfg;
}

fs::path prepare_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + out);
  return fs::path(out);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_run(const fs::path& out, const std::string& command, const Common& common, const RunConfig& cfg,
               const json& extra = json::object()) {
  json j;
  j["tool"] = "vino";
  j["version"] = kVersion;
  j["command"] = command;
  j["argv"] = common.argv;
  j["config"] = to_json(cfg);
  j["seeds"] = {{"root_seed", cfg.dataset.root_seed},
                {"init_seed", cfg.init_seed},
                {"train_seed", cfg.train.seed},
                {"finetune_seed", cfg.finetune.seed},
                {"road_seed", cfg.physics.road.spectrum.seed}};
  j["formats"] = {{"dataset", "VINO1"}, {"checkpoint", "VINOCKPT1"}};
  j["details"] = extra;
  write_json(out / "run.json", j);
}

json config_echo(const RunConfig& cfg) {
  json j = to_json(cfg);
  j["dataset"].erase("jobs");  // worker count never changes the data
  return j;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_columns(const fs::path& path, const std::vector<std::string>& header,
                   const std::vector<Eigen::VectorXd>& cols) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const Eigen::Index rows = cols.empty() ? 0 : cols[0].size();
  char buf[32];
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", cols[c][r]);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

OperatorModel<float> require_checkpoint(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::kIo, "no checkpoint given (use --checkpoint FILE)");
  if (!fs::exists(path)) throw Error(ErrorCode::kIo, "checkpoint not found: " + path);
  return load_operator(path);
}

Dataset require_dataset(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorCode::kIo, "no dataset given (use --data DIR)");
  return load_dataset(dir);
}

std::vector<const SampleRecord*> all_records(const Dataset& d) {
  std::vector<const SampleRecord*> out;
  for (const auto& r : d.records) out.push_back(&r);
  return out;
}

// ---------------------------------------------------------------------------
// simulate

DamageField read_damage_csv(const std::string& path, const std::vector<double>& grid, double delta_max) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read damage file " + path);
  DamageField src;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream s(line);
    double x = 0.0, d = 0.0;
    if (!(s >> x >> d)) {
      if (src.grid.empty()) continue;  // header
      throw Error(ErrorCode::kConfig, "malformed damage row in " + path + ": " + line);
    }
    src.grid.push_back(x);
    src.values.push_back(d);
  }
  if (src.grid.size() < 2) throw Error(ErrorCode::kConfig, "damage file " + path + " needs at least two rows");
  try {
    src.validate(delta_max);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  DamageField out;
  out.grid = grid;
  for (double x : grid) out.values.push_back(src.at(x));
  return out;
}

DamageField damage_from_spec(const std::string& spec, const RunConfig& cfg, std::string& label) {
  const BeamProperties& beam = cfg.physics.bridge;
  const auto grid = uniform_grid(beam.length, beam.n_nodes());
  label = spec;
  if (spec == "none") return DamageField::zero(beam.length, beam.n_nodes());
  if (spec == "INT" || spec == "DMG1" || spec == "DMG2" || spec == "DMG3")
    return scenario_damage(scenario_from_string(spec), beam);
  if (spec.rfind("grf:", 0) == 0) {
    GrfConfig g = cfg.grf_for_sample();
    try {
      g.seed = std::stoull(spec.substr(4));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "'--damage': bad GRF seed in " + spec);
    }
    label = "grf";
    return sample_damage_field(g, grid);
  }
  label = "file";
  return read_damage_csv(spec, grid, cfg.physics.delta_max);
}

int cmd_simulate(const Common& common, const std::string& damage_spec) {
  const RunConfig cfg = load_config(common.config);
  const fs::path out = prepare_out(common.out);
  std::string label;
  const DamageField damage = damage_from_spec(damage_spec, cfg, label);
  const PhysicsConfig& phys = cfg.physics;
  const AssembledBridge bridge =
      assemble_bridge(phys.bridge, damage, phys.damping.coefficients(), phys.delta_max);
  const RoadProfile road = make_road(phys.road, phys.road.spectrum.seed);
  const SimulationResult r = simulate(bridge, phys.vehicle, road, phys.solver);
  const auto channels = default_channels(phys.bridge.length);
  const Eigen::MatrixXd resp = record_channels(r, channels);

  std::vector<std::string> header{"time"};
  std::vector<Eigen::VectorXd> cols{r.time};
  json peaks = json::object();
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const Eigen::VectorXd col = resp.col(static_cast<Eigen::Index>(c));
    header.push_back(channels[c].name);
    cols.push_back(col);
    peaks[channels[c].name] = col.cwiseAbs().maxCoeff();
    const bool acc = channels[c].quantity == SensorQuantity::kAcceleration;
    plot::write((out / (channels[c].name + ".svg")).string(),
                {channels[c].name + " (damage: " + label + ")", "time [s]",
                 acc ? "acceleration [m/s^2]" : "displacement [mm]",
                 {{channels[c].name, r.time, acc ? col : Eigen::VectorXd(col * 1e3)}}});
  }
  write_columns(out / "responses.csv", header, cols);
  write_columns(out / "contact_forces.csv", {"time", "axle1", "axle2"},
                {r.time, r.contact_forces.col(0), r.contact_forces.col(1)});
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(damage.grid.data(), static_cast<Eigen::Index>(damage.grid.size()));
  const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(damage.values.data(), static_cast<Eigen::Index>(damage.values.size()));
  write_columns(out / "damage.csv", {"x", "delta"}, {x, d});
  plot::write((out / "damage.svg").string(), {"damage field (" + label + ")", "x [m]", "delta", {{"delta", x, d}}});

  const double mid = peaks.value("disp_mid", 0.0);
  const json summary = {{"damage", label}, {"peak_abs", peaks}, {"mid_span_peak_displacement_m", mid}};
  write_json(out / "summary.json", summary);
  write_run(out, "simulate", common, cfg, summary);
  std::cout << "mid-span peak displacement " << fmt("%.4f", mid * 1e3) << " mm; wrote " << out.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// gen-dataset

int cmd_gen_dataset(const Common& common, int jobs, bool full_field, int n, const std::string& pseudo, int count,
                    bool csv) {
  RunConfig cfg = load_config(common.config);
  if (jobs > 0) cfg.dataset.jobs = jobs;
  if (full_field) cfg.dataset.full_field = true;
  if (n > 0) cfg.dataset.n_samples = n;
  if (count > 0) cfg.dataset.pseudo_count = count;
  try {
    cfg.dataset.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  const fs::path out = prepare_out(common.out);
  Dataset d;
  if (pseudo.empty()) {
    d = generate_dataset(cfg.physics, cfg.grf_for_sample(), cfg.dataset, out, config_echo(cfg));
  } else {
    Scenario s;
    try {
      s = scenario_from_string(pseudo);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("'--pseudo-exp': ") + e.what());
    }
    d = generate_pseudo_dataset(cfg.physics, cfg.dataset, s, cfg.dataset.pseudo_count, out, config_echo(cfg));
  }
  if (csv) export_csv(d, out / "csv");
  const json details = {{"kind", d.manifest.kind},
                        {"n_samples", d.manifest.n_samples()},
                        {"train", d.manifest.train.size()},
                        {"test", d.manifest.test.size()}};
  write_run(out, "gen-dataset", common, cfg, details);
  std::cout << "wrote " << d.manifest.n_samples() << " " << d.manifest.kind << " samples (split "
            << d.manifest.train.size() << "/" << d.manifest.test.size() << ") to " << out.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// train / finetune

json result_summary(const std::vector<EpochRecord>& history, double best_loss, int best_epoch) {
  json j = {{"epochs", history.size()}, {"best_epoch", best_epoch}, {"best_loss", best_loss}};
  if (!history.empty()) {
    j["final_train_loss"] = history.back().train_loss;
    j["final_test_loss"] = history.back().test_loss;
  }
  return j;
}

int cmd_train(const Common& common, const std::string& data, const std::string& direction, const std::string& sensor,
              int epochs) {
  RunConfig cfg = load_config(common.config);
  if (epochs >= 0) cfg.train.epochs = epochs;
  Direction dir = cfg.problem.direction;
  if (!direction.empty()) {
    try {
      dir = direction_from_string(direction);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("'--direction': ") + e.what());
    }
  }
  ProblemSpec spec = cfg.problem_for(dir);
  if (!sensor.empty()) spec.target_sensor = sensor;
  cfg.problem = spec;
  const Dataset ds = require_dataset(data);
  const fs::path out = prepare_out(common.out);
  const PairSet train_set = make_pairs(ds, true, spec);
  const PairSet test_set = make_pairs(ds, false, spec);
  const auto r = train(init_parameters<float>(cfg.fno_for(spec), cfg.init_seed), train_set, test_set, cfg.train, spec);

  const json summary = result_summary(r.history, r.best_loss, r.best_epoch);
  const json extra = {{"command", "train"}, {"train", to_json(cfg.train)}, {"dataset_root_seed", ds.manifest.root_seed},
                      {"summary", summary}};
  save_operator(out / "model.ckpt", r.best, extra);
  save_operator(out / "last.ckpt", r.last, extra);
  write_history_csv(out / "history.csv", r.history);
  json details = {{"direction", to_string(dir)}, {"summary", summary}};
  if (test_set.size() > 0) {
    const MetricsReport m = evaluate(r.best, test_set);
    write_json(out / "metrics.json", m.to_json());
    details["test_metrics"] = m.to_json()["aggregate"];
  }
  write_run(out, "train", common, cfg, details);
  std::cout << to_string(dir) << " model: best loss " << fmt("%.5g", r.best_loss) << " at epoch " << r.best_epoch
            << "; wrote " << (out / "model.ckpt").string() << '\n';
  return kOk;
}

int cmd_finetune(const Common& common, const std::string& checkpoint, const std::string& data, int epochs,
                 const std::string& trainable) {
  RunConfig cfg = load_config(common.config);
  if (epochs >= 0) cfg.finetune.epochs = epochs;
  if (!trainable.empty()) {
    cfg.freeze.trainable.clear();
    std::stringstream s(trainable);
    for (std::string g; std::getline(s, g, ',');)
      if (!g.empty()) cfg.freeze.trainable.insert(g);
  }
  const OperatorModel<float> pre = require_checkpoint(checkpoint);
  const Dataset ds = require_dataset(data);
  const fs::path out = prepare_out(common.out);
  const PairSet healthy = make_pairs(all_records(ds), ds.manifest.channels, pre.spec);
  const double before = dataset_loss(pre, healthy, cfg.finetune.loss);
  const auto r = fine_tune(pre, healthy, cfg.finetune, cfg.freeze);
  const double after = dataset_loss(r.best, healthy, cfg.finetune.loss);
  const json summary = {{"loss_before", before}, {"loss_after", after},
                        {"trainable", std::vector<std::string>(cfg.freeze.trainable.begin(), cfg.freeze.trainable.end())},
                        {"training", result_summary(r.history, r.best_loss, r.best_epoch)}};
  save_operator(out / "finetuned.ckpt", r.best, {{"command", "finetune"}, {"train", to_json(cfg.finetune)}, {"summary", summary}});
  write_history_csv(out / "history.csv", r.history);
  write_json(out / "finetune.json", summary);
  write_run(out, "finetune", common, cfg, summary);
  std::cout << "healthy-set loss " << fmt("%.4g", before) << " -> " << fmt("%.4g", after) << "; wrote "
            << (out / "finetuned.ckpt").string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// infer / evaluate

int cmd_infer(const Common& common, const std::string& checkpoint, const std::string& data,
              const std::vector<int>& samples) {
  const RunConfig cfg = load_config(common.config);
  const OperatorModel<float> model = require_checkpoint(checkpoint);
  const Dataset ds = require_dataset(data);
  const fs::path out = prepare_out(common.out);
  std::vector<int> idx = samples;
  if (idx.empty())
    for (int i = 0; i < ds.manifest.n_samples(); ++i) idx.push_back(i);
  std::vector<const SampleRecord*> recs;
  for (int i : idx) {
    if (i < 0 || i >= ds.manifest.n_samples()) throw Error(ErrorCode::kConfig, "'--samples': index out of range");
    recs.push_back(&ds.records[static_cast<std::size_t>(i)]);
  }
  const ProblemSpec& spec = model.spec;
  const PairSet pairs = make_pairs(recs, ds.manifest.channels, spec);
  const Tensor<double> pred = predict(model, pairs.inputs);
  const MetricsReport m = evaluate_predictions(pred, pairs, spec);

  const bool inverse = spec.direction == Direction::kInverse;
  const double span = inverse ? spec.length : (ds.manifest.n_steps - 1) * ds.manifest.dt;
  const Eigen::VectorXd axis = Eigen::VectorXd::LinSpaced(spec.grid, 0.0, span);
  json listing = json::array();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int b = static_cast<int>(k);
    const Eigen::VectorXd p = pred.sample(b).row(0).transpose();
    const Eigen::VectorXd t = pairs.targets.sample(b).row(0).transpose();
    char stem[32];
    std::snprintf(stem, sizeof stem, "prediction_%05d", idx[k]);
    const std::string what = inverse ? "delta" : spec.target_sensor;
    write_columns(out / (std::string(stem) + ".csv"), {inverse ? "x" : "time", "predicted", "true"}, {axis, p, t});
    plot::write((out / (std::string(stem) + ".svg")).string(),
                {std::string(inverse ? "damage field" : spec.target_sensor) + ", sample " + std::to_string(idx[k]) +
                     " (" + recs[k]->scenario + ")",
                 inverse ? "x [m]" : "time [s]", what,
                 {{"predicted", axis, p, "#d62728", false}, {"true", axis, t, "#1f77b4", true}}});
    const SampleMetrics& s = m.samples[k];
    json e = {{"index", idx[k]}, {"scenario", recs[k]->scenario}, {"file", std::string(stem) + ".csv"},
              {"max_abs_error", s.max_abs_error}, {"relative_l2", s.relative_l2}};
    if (inverse) {
      e["predicted_peak_position_m"] = s.predicted_peak_position;
      e["true_peak_position_m"] = s.true_peak_position;
      e["predicted_peak_value"] = p.maxCoeff();
    }
    listing.push_back(e);
  }
  write_json(out / "predictions.json", listing);
  write_run(out, "infer", common, cfg, {{"checkpoint", checkpoint}, {"data", data}, {"count", idx.size()}});
  std::cout << "wrote " << idx.size() << " predictions to " << out.string() << '\n';
  return kOk;
}

int cmd_evaluate(const Common& common, const std::string& checkpoint, const std::string& data, const std::string& split) {
  const RunConfig cfg = load_config(common.config);
  const OperatorModel<float> model = require_checkpoint(checkpoint);
  const Dataset ds = require_dataset(data);
  const fs::path out = prepare_out(common.out);
  std::vector<const SampleRecord*> recs;
  std::string used = split;
  if (split == "train" || split == "test") recs = ds.split(split == "train");
  if (split == "all" || recs.empty()) {
    recs = all_records(ds);
    used = "all";
  }
  const PairSet pairs = make_pairs(recs, ds.manifest.channels, model.spec);
  const MetricsReport m = evaluate(model, pairs);
  json j = m.to_json();
  j["split"] = used;
  write_json(out / "metrics.json", j);
  write_run(out, "evaluate", common, cfg, {{"checkpoint", checkpoint}, {"data", data}, {"split", used}});
  std::cout << to_string(model.spec.direction) << " on " << pairs.size() << " " << used << " samples: mean rel L2 "
            << fmt("%.4f", m.mean_relative_l2) << ", mean abs error " << fmt("%.4g", m.mean_abs_error)
            << ", max abs error " << fmt("%.4g", m.max_abs_error) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double fe_seconds(const PhysicsConfig& phys, const std::vector<DamageField>& fields, const RoadProfile& road) {
  const auto channels = default_channels(phys.bridge.length);
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& d : fields) simulate_record(phys, d, road, channels, 0);
  return seconds_since(t0) / static_cast<double>(fields.size());
}

int cmd_bench(const Common& common, const std::string& checkpoint, const std::vector<int>& batches, int repeats,
              int fe_samples) {
  const RunConfig cfg = load_config(common.config);
  const OperatorModel<float> model = require_checkpoint(checkpoint);
  if (model.spec.direction != Direction::kForward)
    throw Error(ErrorCode::kConfig, "bench needs a forward checkpoint (damage field -> response)");
  if (repeats < 1 || fe_samples < 1) throw Error(ErrorCode::kConfig, "'--repeats' and '--fe-samples' must be >= 1");
  const fs::path out = prepare_out(common.out);
  const PhysicsConfig& phys = cfg.physics;
  const auto grid = uniform_grid(phys.bridge.length, phys.bridge.n_nodes());
  const GrfSampler sampler(cfg.grf_for_sample(), grid);
  std::vector<DamageField> fields;
  for (int i = 0; i < fe_samples; ++i) fields.push_back(sampler.draw(derive_seed(cfg.dataset.root_seed, i)));
  const RoadProfile road = make_road(phys.road, phys.road.spectrum.seed);

  const double fe = fe_seconds(phys, fields, road);
  // same traverse at half the time step
  PhysicsConfig longer = phys;
  longer.solver.n_steps = 2 * phys.solver.n_steps - 1;
  longer.solver.dt = phys.solver.dt / 2;
  const double fe_long = fe_seconds(longer, fields, road);

  int max_batch = 1;
  for (int b : batches) {
    if (b < 1) throw Error(ErrorCode::kConfig, "'--batches' entries must be >= 1");
    max_batch = std::max(max_batch, b);
  }
  Tensor<double> inputs(max_batch, 1, model.spec.grid);
  for (int b = 0; b < max_batch; ++b) {
    const DamageField d = sampler.draw(derive_seed(cfg.dataset.root_seed + 1, b));
    const Eigen::Map<const Eigen::VectorXd> v(d.values.data(), static_cast<Eigen::Index>(d.values.size()));
    inputs.sample(b).row(0) = resample_to_grid(v, model.spec.grid).transpose();
  }
  json rows = json::array();
  for (int b : batches) {
    Tensor<double> x(b, 1, model.spec.grid);
    for (int i = 0; i < b; ++i) x.sample(i) = inputs.sample(i);
    predict(model, x, b);  // warm-up
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) predict(model, x, b);
    const double per_sample = seconds_since(t0) / (static_cast<double>(repeats) * b);
    rows.push_back({{"batch", b}, {"seconds_per_sample", per_sample}, {"speedup", fe / per_sample}});
  }
  const json report = {{"fe_seconds_per_sample", fe},
                       {"fe_seconds_per_sample_half_dt", fe_long},
                       {"fe_step_scaling", fe_long / fe},
                       {"n_elements", phys.bridge.n_elements},
                       {"n_steps", phys.solver.n_steps},
                       {"grid", model.spec.grid},
                       {"fe_samples", fe_samples},
                       {"repeats", repeats},
                       {"inference", rows},
                       {"note", "wall-clock timings on this machine; magnitudes are hardware dependent"}};
  write_json(out / "bench.json", report);
  write_run(out, "bench", common, cfg, {{"checkpoint", checkpoint}});
  std::cout << "FE " << fmt("%.2f", fe * 1e3) << " ms/sample (half dt: " << fmt("%.2f", fe_long / fe) << "x)\n";
  for (const auto& r : rows)
    std::cout << "FNO batch " << r["batch"].get<int>() << ": " << fmt("%.3f", r["seconds_per_sample"].get<double>() * 1e3)
              << " ms/sample, speedup " << fmt("%.1f", r["speedup"].get<double>()) << "x\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// replay

std::vector<std::string> replay_args(const std::string& run_json, const std::string& out) {
  std::ifstream in(run_json);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + run_json);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, run_json + ": " + e.what());
  }
  if (!j.contains("argv") || !j.contains("config")) throw Error(ErrorCode::kConfig, run_json + " is not a run record");
  std::vector<std::string> args;
  const auto old = j.at("argv").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < old.size(); ++i) {
    const std::string& a = old[i];
    const bool cfg_flag = a == "--config" || a == "-c", out_flag = a == "--out" || a == "-o";
    if ((cfg_flag || (out_flag && !out.empty())) && i + 1 < old.size()) {
      ++i;
      continue;
    }
    if (a.rfind("--config=", 0) == 0 || (!out.empty() && a.rfind("--out=", 0) == 0)) continue;
    args.push_back(a);
  }
  args.push_back("--config");
  args.push_back(run_json);
  if (!out.empty()) {
    args.push_back("--out");
    args.push_back(out);
  }
  return args;
}

int run(std::vector<std::string> args);

int dispatch(CLI::App& app, const std::vector<std::string>& args) {
  Common common;
  common.argv = args;
  std::function<int()> action;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config, "Run configuration (JSON); defaults when omitted");
    sub->add_option("-o,--out", common.out, "Output directory")->required();
  };

  std::string damage = "none";
  auto* sim = app.add_subcommand("simulate", "Run one vehicle-bridge simulation and write CSV and SVG output");
  add_common(sim);
  sim->add_option("--damage", damage, "none | INT | DMG1 | DMG2 | DMG3 | grf:SEED | CSV file (x,delta)");
  sim->callback([&] { action = [&] { return cmd_simulate(common, damage); }; });

  int jobs = 0, n = 0, count = 0;
  bool full_field = false, csv = false;
  std::string pseudo;
  auto* gen = app.add_subcommand("gen-dataset", "Generate a GRF or pseudo-experimental dataset");
  add_common(gen);
  gen->add_option("--jobs", jobs, "Worker threads (output does not depend on it)");
  gen->add_flag("--full-field", full_field, "Record displacement at every node instead of the default sensors");
  gen->add_option("--n", n, "Number of samples (overrides dataset.n_samples)");
  gen->add_option("--pseudo-exp", pseudo, "Pseudo-experimental scenario: INT | DMG1 | DMG2 | DMG3");
  gen->add_option("--count", count, "Pseudo-experimental record count (overrides dataset.pseudo_count)");
  gen->add_flag("--csv", csv, "Also export a CSV mirror under OUT/csv");
  gen->callback([&] { action = [&] { return cmd_gen_dataset(common, jobs, full_field, n, pseudo, count, csv); }; });

  std::string data, direction, sensor, checkpoint, trainable, split = "test";
  int epochs = -1;
  auto* tr = app.add_subcommand("train", "Train a forward or inverse operator on a dataset");
  add_common(tr);
  tr->add_option("--data", data, "Dataset directory")->required();
  tr->add_option("--direction", direction, "forward | inverse (default from config)");
  tr->add_option("--sensor", sensor, "Forward target sensor (default from config)");
  tr->add_option("--epochs", epochs, "Override train.epochs");
  tr->callback([&] { action = [&] { return cmd_train(common, data, direction, sensor, epochs); }; });

  auto* ft = app.add_subcommand("finetune", "Retrain the projection layers on healthy records");
  add_common(ft);
  ft->add_option("--checkpoint", checkpoint, "Pre-trained operator checkpoint");
  ft->add_option("--data", data, "Dataset of healthy (INT) records");
  ft->add_option("--epochs", epochs, "Override finetune.epochs");
  ft->add_option("--trainable", trainable, "Comma-separated trainable groups (default from config)");
  ft->callback([&] { action = [&] { return cmd_finetune(common, checkpoint, data, epochs, trainable); }; });

  std::vector<int> samples;
  auto* inf = app.add_subcommand("infer", "Predict with a checkpoint and write CSV plus overlay SVG per sample");
  add_common(inf);
  inf->add_option("--checkpoint", checkpoint, "Operator checkpoint");
  inf->add_option("--data", data, "Dataset directory");
  inf->add_option("--samples", samples, "Sample indices (default: all)")->delimiter(',');
  inf->callback([&] { action = [&] { return cmd_infer(common, checkpoint, data, samples); }; });

  auto* ev = app.add_subcommand("evaluate", "Compute error metrics of a checkpoint on a dataset split");
  add_common(ev);
  ev->add_option("--checkpoint", checkpoint, "Operator checkpoint");
  ev->add_option("--data", data, "Dataset directory");
  ev->add_option("--split", split, "test | train | all (an empty test split falls back to all)")
      ->check(CLI::IsMember({"test", "train", "all"}));
  ev->callback([&] { action = [&] { return cmd_evaluate(common, checkpoint, data, split); }; });

  std::vector<int> batches{1, 16, 64};
  int repeats = 5, fe_samples = 3;
  auto* be = app.add_subcommand("bench", "Time FE simulation against batched operator inference");
  add_common(be);
  be->add_option("--checkpoint", checkpoint, "Forward operator checkpoint");
  be->add_option("--batches", batches, "Inference batch sizes")->delimiter(',');
  be->add_option("--repeats", repeats, "Timed inference repetitions per batch size");
  be->add_option("--fe-samples", fe_samples, "FE simulations per timing");
  be->callback([&] { action = [&] { return cmd_bench(common, checkpoint, batches, repeats, fe_samples); }; });

  std::string record, replay_out;
  auto* rp = app.add_subcommand("replay", "Re-run a command from its run.json record");
  rp->add_option("run_json", record, "run.json written by an earlier command")->required();
  rp->add_option("-o,--out", replay_out, "Output directory (default: the recorded one)");
  rp->callback([&] { action = [&] { return run(replay_args(record, replay_out)); }; });

  app.require_subcommand(1);
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigExit;
  }
  return action();
}

int run(std::vector<std::string> args) {
  CLI::App app{"vino: vehicle-bridge simulation and neural-operator damage identification"};
  app.set_version_flag("--version", kVersion);
  try {
    return dispatch(app, args);
  } catch (const Error& e) {
    std::cerr << "vino: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "vino: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
