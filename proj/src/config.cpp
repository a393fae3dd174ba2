#include "vino/config.hpp"

#include "vino/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <type_traits>

namespace vino {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kConfig, "'" + key + "': " + what);
}

// Reads a JSON object into typed fields and writes the resolved values back,
// so one binding serves both parsing and dumping.
class Section {
 public:
  Section(const json* src, json& dst, std::string path) : src_(src), dst_(dst), path_(std::move(path)) {
    if (src_ && !src_->is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
    dst_ = json::object();
  }

  template <class T>
  void field(const std::string& key, T& value) {
    if (const json* v = take(key)) read(key, *v, value);
    dst_[key] = value;
  }

  template <class E, class ToS, class FromS>
  void choice(const std::string& key, E& value, ToS to_s, FromS from_s) {
    if (const json* v = take(key)) {
      if (!v->is_string()) config_error(qualified(key), "expected a string");
      try {
        value = from_s(v->get<std::string>());
      } catch (const Error& e) {
        config_error(qualified(key), e.what());
      }
    }
    dst_[key] = to_s(value);
  }

  Section sub(const std::string& key) {
    const json* v = take(key);
    return Section(v, dst_[key], qualified(key));
  }

  void finish() const {
    if (!src_) return;
    for (const auto& [k, v] : src_->items())
      if (!seen_.count(k)) config_error(qualified(k), "unknown key");
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* take(const std::string& key) {
    seen_.insert(key);
    if (!src_) return nullptr;
    const auto it = src_->find(key);
    return it == src_->end() ? nullptr : &*it;
  }

  template <class T>
  void read(const std::string& key, const json& v, T& out) const {
    const std::string q = qualified(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) config_error(q, "expected true or false");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) config_error(q, "expected a non-negative integer");
      out = v.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) config_error(q, "expected an integer");
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) config_error(q, "expected a number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) config_error(q, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.is_array()) config_error(q, "expected an array of strings");
      out.clear();
      for (const auto& e : v) {
        if (!e.is_string()) config_error(q, "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported config field type");
    }
  }

  const json* src_;
  json& dst_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string to_string(RoadSource s) {
  switch (s) {
    case RoadSource::kSpectral: return "spectral";
    case RoadSource::kFlat: return "flat";
    case RoadSource::kLab: return "lab";
    case RoadSource::kFile: return "file";
  }
  return "spectral";
}

RoadSource road_source_from_string(const std::string& s) {
  if (s == "spectral") return RoadSource::kSpectral;
  if (s == "flat") return RoadSource::kFlat;
  if (s == "lab") return RoadSource::kLab;
  if (s == "file") return RoadSource::kFile;
  throw Error(ErrorCode::kConfig, "unknown road source " + s + " (spectral, flat, lab, file)");
}

std::string to_string(TravelDirection d) {
  return d == TravelDirection::kLeftToRight ? "left_to_right" : "right_to_left";
}

TravelDirection travel_from_string(const std::string& s) {
  if (s == "left_to_right") return TravelDirection::kLeftToRight;
  if (s == "right_to_left") return TravelDirection::kRightToLeft;
  throw Error(ErrorCode::kConfig, "unknown direction " + s + " (left_to_right, right_to_left)");
}

void bind_train(Section& s, TrainConfig& t) {
  s.field("learning_rate", t.learning_rate);
  s.field("batch_size", t.batch_size);
  s.field("epochs", t.epochs);
  s.field("lr_step_epochs", t.lr_step_epochs);
  s.field("lr_decay", t.lr_decay);
  s.field("weight_decay", t.weight_decay);
  s.field("input_noise", t.input_noise);
  s.field("seed", t.seed);
  s.choice("loss", t.loss, [](LossKind k) { return to_string(k); }, loss_from_string);
}

json bind(const json* src, RunConfig& c) {
  json out;
  Section root(src, out, "");
  {
    Section b = root.sub("bridge");
    b.field("length", c.physics.bridge.length);
    b.field("mass_per_length", c.physics.bridge.mass_per_length);
    b.field("youngs_modulus", c.physics.bridge.youngs_modulus);
    b.field("moment_of_inertia", c.physics.bridge.moment_of_inertia);
    b.field("n_elements", c.physics.bridge.n_elements);
    b.field("delta_max", c.physics.delta_max);
    Section d = b.sub("damping");
    d.field("f1", c.physics.damping.f1);
    d.field("f2", c.physics.damping.f2);
    d.field("zeta1", c.physics.damping.zeta1);
    d.field("zeta2", c.physics.damping.zeta2);
    d.finish();
    b.finish();
  }
  {
    Section v = root.sub("vehicle");
    HalfCar& h = c.physics.vehicle;
    v.field("sprung_mass", h.sprung_mass);
    v.field("pitch_inertia", h.pitch_inertia);
    v.field("d1", h.d1);
    v.field("d2", h.d2);
    v.field("k1", h.k1);
    v.field("k2", h.k2);
    v.field("c1", h.c1);
    v.field("c2", h.c2);
    v.field("speed", h.speed);
    v.finish();
  }
  {
    Section r = root.sub("road");
    RoadConfig& rc = c.physics.road;
    r.choice("source", rc.source, [](RoadSource s) { return to_string(s); }, road_source_from_string);
    std::string file = rc.file.string();
    r.field("file", file);
    rc.file = file;
    r.field("g_d_n0", rc.spectrum.g_d_n0);
    r.field("exponent", rc.spectrum.exponent);
    r.field("n_min", rc.spectrum.n_min);
    r.field("n_max", rc.spectrum.n_max);
    r.field("delta_n", rc.spectrum.delta_n);
    r.field("seed", rc.spectrum.seed);
    r.finish();
  }
  {
    Section s = root.sub("solver");
    SolverConfig& sc = c.physics.solver;
    s.field("dt", sc.dt);
    s.field("n_steps", sc.n_steps);
    s.field("newmark_gamma", sc.newmark_gamma);
    s.field("newmark_beta", sc.newmark_beta);
    s.field("entry_offset", sc.entry_offset);
    s.choice("direction", sc.direction, [](TravelDirection d) { return to_string(d); }, travel_from_string);
    s.field("record_stride", sc.record_stride);
    s.field("gravity", sc.gravity);
    s.finish();
  }
  {
    Section g = root.sub("grf");
    g.field("length_scale", c.grf.length_scale);
    g.field("std_dev", c.grf.std_dev);
    g.field("mean", c.grf.mean);
    g.finish();
  }
  {
    Section d = root.sub("dataset");
    DatasetConfig& dc = c.dataset;
    d.field("n_samples", dc.n_samples);
    d.field("full_field", dc.full_field);
    d.field("reroll_road", dc.reroll_road);
    d.field("jobs", dc.jobs);
    d.field("root_seed", dc.root_seed);
    d.field("noise_std", dc.noise_std);
    d.field("damping_scale", dc.damping_scale);
    d.field("modulus_scale", dc.modulus_scale);
    d.field("pseudo_count", dc.pseudo_count);
    d.finish();
  }
  {
    Section f = root.sub("fno");
    f.field("width", c.fno.width);
    f.field("modes", c.fno.modes);
    f.field("depth", c.fno.depth);
    f.field("padding", c.fno.padding);
    f.choice("activation", c.fno.activation, [](Activation a) { return to_string(a); }, activation_from_string);
    f.field("grid", c.grid);
    f.field("init_seed", c.init_seed);
    f.finish();
  }
  {
    Section t = root.sub("train");
    bind_train(t, c.train);
    t.choice("direction", c.problem.direction, [](Direction d) { return to_string(d); }, direction_from_string);
    t.field("sensors", c.problem.sensors);
    t.field("target_sensor", c.problem.target_sensor);
    t.finish();
  }
  {
    Section t = root.sub("finetune");
    bind_train(t, c.finetune);
    std::vector<std::string> groups(c.freeze.trainable.begin(), c.freeze.trainable.end());
    t.field("trainable", groups);
    c.freeze.trainable = {groups.begin(), groups.end()};
    t.finish();
  }
  root.finish();
  return out;
}

void validate(RunConfig& c) {
  c.grf.delta_max = c.physics.delta_max;
  c.problem.grid = c.grid;
  c.problem.length = c.physics.bridge.length;
  try {
    c.physics.bridge.validate();
    c.physics.vehicle.validate();
    c.physics.solver.validate();
    c.physics.road.spectrum.validate();
    c.physics.damping.coefficients();
    c.grf.validate();
    c.dataset.validate();
    c.fno.validate();
    if (c.grid < 2) throw Error(ErrorCode::kInvalidArgument, "fno.grid must be at least 2");
    if (c.problem.sensors.empty()) throw Error(ErrorCode::kInvalidArgument, "train.sensors is empty");
    c.train.validate(-1);
    c.finetune.validate(-1);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, e.what());
  }
}

}  // namespace

// trained operators see the same relative noise as pseudo-experimental records
TrainConfig RunConfig::default_train() {
  TrainConfig t;
  t.input_noise = 0.01;
  return t;
}

TrainConfig RunConfig::default_finetune() {
  TrainConfig t;
  t.learning_rate = 5e-4;
  t.batch_size = 10;
  t.epochs = 200;
  t.weight_decay = 0.0;
  t.loss = LossKind::kMse;
  return t;
}

ProblemSpec RunConfig::problem_for(Direction d) const {
  ProblemSpec p = problem;
  p.direction = d;
  p.grid = grid;
  p.length = physics.bridge.length;
  return p;
}

FnoConfig RunConfig::fno_for(const ProblemSpec& spec) const {
  FnoConfig f = fno;
  const int n_sensors = static_cast<int>(spec.sensors.size());
  f.in_channels = spec.direction == Direction::kInverse ? n_sensors : 1;
  f.out_channels = 1;
  return f;
}

GrfConfig RunConfig::grf_for_sample() const {
  GrfConfig g = grf;
  g.delta_max = physics.delta_max;
  return g;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  bind(&j, c);
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

json to_json(const RunConfig& cfg) {
  RunConfig copy = cfg;
  return bind(nullptr, copy);
}

void apply_seed_override(RunConfig& cfg) {
  const char* env = std::getenv("VINO_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') throw Error(ErrorCode::kConfig, std::string("'VINO_SEED': not an unsigned integer: ") + env);
  cfg.dataset.root_seed = v;
}

}  // namespace vino
