// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
//   acceptance [--work DIR] [--only 1,2,...] [--reuse]

#include "vino/config.hpp"
#include "vino/errors.hpp"
#include "vino/trainer.hpp"
#include "vino/vbi_solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>

#ifndef VINO_CLI_PATH
#define VINO_CLI_PATH "vino"
#endif

using namespace vino;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Context {
  fs::path work;
  bool reuse = false;
  RunConfig cfg;
  std::optional<Dataset> grf;
  std::optional<OperatorModel<float>> inverse;
  fs::path forward_ckpt;

  const Dataset& dataset() {
    if (grf) return *grf;
    const fs::path dir = work / "grf";
    if (reuse && fs::exists(dir / "manifest.json")) {
      grf = load_dataset(dir);
    } else {
      fs::remove_all(dir);
      grf = generate_dataset(cfg.physics, cfg.grf_for_sample(), cfg.dataset, dir, to_json(cfg));
    }
    return *grf;
  }
};

// Peaks of a sampled signal refined by a parabola through three samples; a
// release from rest at maximum displacement counts as the first peak.
std::vector<double> peak_values(const Eigen::VectorXd& y) {
  std::vector<double> out;
  if (y.size() > 1 && y[0] > y[1] && y[0] > 0) out.push_back(y[0]);
  for (Eigen::Index i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 0) {
      const double a = 0.5 * (y[i - 1] - 2 * y[i] + y[i + 1]);
      const double b = 0.5 * (y[i + 1] - y[i - 1]);
      const double s = a != 0 ? -b / (2 * a) : 0.0;
      out.push_back(y[i] + b * s + a * s * s);
    }
  }
  return out;
}

Outcome physics_oracles(Context& ctx) {
  const BeamProperties p = ctx.cfg.physics.bridge;
  const RayleighParams ray = ctx.cfg.physics.damping.coefficients();
  const AssembledBridge b = assemble_bridge(p, DamageField::zero(p.length, 2), ray);
  const double ei = p.flexural_rigidity();
  const double f_exact = kPi / (2 * p.length * p.length) * std::sqrt(ei / p.mass_per_length);
  const double f1 = natural_frequencies(b, 1)[0];
  const double f_err = std::abs(f1 - f_exact) / f_exact;

  const double load = ctx.cfg.physics.vehicle.sprung_mass * ctx.cfg.physics.solver.gravity;
  const Eigen::VectorXd u = static_deflection(b, {{p.length / 2, load}});
  const double mid = shape_entries(p, p.length / 2).dot(u);
  const double w_exact = load * std::pow(p.length, 3) / (48 * ei);
  const double w_err = std::abs(std::abs(mid) - w_exact) / w_exact;

  const auto r3 = [](double v) { return std::stod(fmt("%.3g", v)); };
  const bool ray_ok = r3(ray.alpha_dM) == 0.256 && r3(ray.beta_dK) == 1.22e-4;

  // contact forces of a vehicle at rest on the flat deck carry its weight
  SolverConfig rest = ctx.cfg.physics.solver;
  rest.entry_offset = 0.37 * p.length;
  rest.n_steps = 1;
  const SimulationResult r = simulate(b, ctx.cfg.physics.vehicle, RoadProfile::flat(), rest);
  const double sum_err = std::abs(r.contact_forces(0, 0) + r.contact_forces(0, 1) - load) / load;

  Outcome o;
  o.pass = f_err < 2e-3 && w_err < 5e-3 && ray_ok && sum_err < 1e-10;
  o.detail = "f1 err " + fmt("%.2e", f_err) + ", static err " + fmt("%.2e", w_err) + ", rayleigh (" +
             fmt("%.4g", ray.alpha_dM) + ", " + fmt("%.4g", ray.beta_dK) + "), contact sum rel err " + fmt("%.1e", sum_err);
  return o;
}

Outcome integrator(Context& ctx) {
  // single DOF against the closed-form damped free response
  const double m = 2.0, k = m * std::pow(2 * kPi * 1.5, 2), zeta = 0.03;
  const double wn = std::sqrt(k / m), c = 2 * zeta * m * wn, period = 2 * kPi / wn;
  const NewmarkParams np{period / 200, 0.5, 0.25};
  const DenseSystem sys(Eigen::MatrixXd::Constant(1, 1, m), Eigen::MatrixXd::Constant(1, 1, c),
                        Eigen::MatrixXd::Constant(1, 1, k), np);
  KinematicState s = KinematicState::zero(1);
  s.u[0] = 0.01;
  s.a = sys.initial_acceleration(Eigen::VectorXd::Zero(1), s);
  const int steps = 10 * 200 + 2;
  Eigen::VectorXd num(steps), ref(steps);
  const double wd = wn * std::sqrt(1 - zeta * zeta);
  for (int i = 0; i < steps; ++i) {
    if (i > 0) newmark_advance(sys, np, Eigen::VectorXd::Zero(1), s);
    num[i] = s.u[0];
    const double t = i * np.dt;
    ref[i] = 0.01 * std::exp(-zeta * wn * t) * (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t));
  }
  const auto pn = peak_values(num), pr = peak_values(ref);
  double amp_err = 1.0;
  if (pn.size() >= 10 && pr.size() >= 10) {
    amp_err = 0.0;
    for (int i = 0; i < 10; ++i) amp_err = std::max(amp_err, std::abs(pn[i] - pr[i]) / pr[i]);
  }

  // undamped free vibration of the beam
  BeamProperties p = ctx.cfg.physics.bridge;
  p.n_elements = 64;
  const AssembledBridge plain = assemble_bridge(p, DamageField::zero(p.length, 2), {});
  const double f1 = natural_frequencies(plain, 1)[0];
  SolverConfig sc;
  sc.dt = 1.0 / f1 / 200;
  sc.n_steps = 10 * 200 + 1;
  const SimulationResult fv = free_vibration(plain, 0, 0.05, sc);
  const Eigen::MatrixXd mm(plain.M), kk(plain.K);
  const auto energy = [&](Eigen::Index i) {
    const Eigen::VectorXd uu = fv.bridge_disp.row(i).transpose();
    const Eigen::VectorXd vv = fv.bridge_vel.row(i).transpose();
    return 0.5 * vv.dot(mm * vv) + 0.5 * uu.dot(kk * uu);
  };
  double drift = 0.0;
  for (Eigen::Index i = 0; i < fv.steps(); ++i) drift = std::max(drift, std::abs(energy(i) - energy(0)) / energy(0));

  // mirror symmetry under a symmetric damage field
  DamageField d = DamageField::zero(p.length, 201);
  for (std::size_t i = 0; i < d.grid.size(); ++i)
    d.values[i] = 0.25 * std::exp(-std::pow(d.grid[i] - p.length / 2, 2) / (2 * 0.16));
  const AssembledBridge b = assemble_bridge(p, d, ctx.cfg.physics.damping.coefficients());
  SolverConfig cfg = ctx.cfg.physics.solver;
  const SimulationResult lr = simulate(b, ctx.cfg.physics.vehicle, RoadProfile::flat(), cfg);
  cfg.direction = TravelDirection::kRightToLeft;
  const SimulationResult rl = simulate(b, ctx.cfg.physics.vehicle, RoadProfile::flat(), cfg);
  const SensorLayout layout = SensorLayout::standard(p.length);
  const Eigen::MatrixXd a = extract_sensors(lr, layout), e = extract_sensors(rl, layout);
  const double scale = a.cwiseAbs().maxCoeff();
  double mirror = (a.col(1) - e.col(1)).cwiseAbs().maxCoeff();
  mirror = std::max(mirror, (a.col(0) - e.col(2)).cwiseAbs().maxCoeff());
  mirror = std::max(mirror, (a.col(2) - e.col(0)).cwiseAbs().maxCoeff()) / scale;

  Outcome o;
  o.pass = amp_err < 0.01 && drift < 1e-3 && mirror <= 1e-9;
  o.detail = "SDOF amplitude err " + fmt("%.2e", amp_err) + ", energy drift " + fmt("%.2e", drift) +
             ", mirror err " + fmt("%.1e", mirror);
  return o;
}

Outcome gradients(Context&) {
  FnoConfig cfg;
  cfg.in_channels = 2;
  cfg.out_channels = 2;
  cfg.width = 5;
  cfg.modes = 4;
  cfg.depth = 2;
  cfg.padding = 5;
  FnoModel<double> model = init_parameters<double>(cfg, 3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto& blk : model.blocks) {
    for (Eigen::Index i = 0; i < blk.re.size(); ++i) blk.re.data()[i] = 0.3 * g(rng);
    for (Eigen::Index i = 0; i < blk.im.size(); ++i) blk.im.data()[i] = 0.3 * g(rng);
  }
  Tensor<double> x(3, 2, 12), w(3, 2, 12);
  for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < w.data.size(); ++i) w.data.data()[i] = g(rng);
  const auto loss = [&](const FnoModel<double>& m, const Tensor<double>& in) {
    return fno_forward(m, in).data.cwiseProduct(w.data).sum();
  };
  FnoCache<double> cache;
  fno_forward(model, x, &cache);
  FnoModel<double> grads = FnoModel<double>::zeros(cfg);
  fno_backward(model, cache, w, grads);
  auto params = model.parameters();
  const auto gp = grads.parameters();
  const double h = 1e-5;
  double worst = 0.0;
  std::string worst_name;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Eigen::VectorXd fd(params[t].values.size());
    for (Eigen::Index i = 0; i < fd.size(); ++i) {
      const double keep = params[t].values[i];
      params[t].values[i] = keep + h;
      const double up = loss(model, x);
      params[t].values[i] = keep - h;
      const double down = loss(model, x);
      params[t].values[i] = keep;
      fd[i] = (up - down) / (2 * h);
    }
    const double err = (gp[t].values - fd).norm() / std::max(fd.norm(), 1e-12);
    if (err > worst) {
      worst = err;
      worst_name = params[t].name;
    }
  }

  double adjoint = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 10 + 7 * trial;
    auto blk = SpectralBlockParams<double>::zeros(3, 2, std::min(6, n / 2 + 1));
    for (Eigen::Index i = 0; i < blk.re.size(); ++i) blk.re.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < blk.im.size(); ++i) blk.im.data()[i] = g(rng);
    Tensor<double> a(2, 3, n), b(2, 2, n);
    for (Eigen::Index i = 0; i < a.data.size(); ++i) a.data.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < b.data.size(); ++i) b.data.data()[i] = g(rng);
    const double lhs = spectral_linear(a, blk).data.cwiseProduct(b.data).sum();
    const double rhs = a.data.cwiseProduct(spectral_linear_adjoint(b, blk).data).sum();
    adjoint = std::max(adjoint, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  Outcome o;
  o.pass = worst < 1e-4 && adjoint < 1e-10;
  o.detail = std::to_string(params.size()) + " tensors, worst FD rel err " + fmt("%.2e", worst) + " (" + worst_name +
             "), adjoint err " + fmt("%.1e", adjoint);
  return o;
}

Outcome forward_reproduction(Context& ctx) {
  const Dataset& ds = ctx.dataset();
  const ProblemSpec spec = ctx.cfg.problem_for(Direction::kForward);
  const PairSet train_set = make_pairs(ds, true, spec);
  const PairSet test_set = make_pairs(ds, false, spec);
  const auto r = train(init_parameters<float>(ctx.cfg.fno_for(spec), ctx.cfg.init_seed), train_set, test_set,
                       ctx.cfg.train, spec);
  ctx.forward_ckpt = ctx.work / "forward.ckpt";
  save_operator(ctx.forward_ckpt, r.best);
  const MetricsReport m = evaluate(r.best, test_set);
  Outcome o;
  o.pass = ds.manifest.train.size() == 200 && ds.manifest.test.size() == 40 && m.mean_relative_l2 <= 0.10;
  o.detail = "split " + std::to_string(ds.manifest.train.size()) + "/" + std::to_string(ds.manifest.test.size()) +
             ", test rel L2 " + fmt("%.4f", m.mean_relative_l2) + " (best epoch " + std::to_string(r.best_epoch) +
             "), peak abs error " + fmt("%.1f", m.max_abs_error * 1e6) + " um (reported, not gated)";
  return o;
}

double argmax_position(const Tensor<double>& t, int b, double length) {
  Eigen::Index i = 0;
  t.sample(b).row(0).maxCoeff(&i);
  return static_cast<double>(i) * length / (t.grid - 1);
}

Outcome inverse_reproduction(Context& ctx) {
  const Dataset& ds = ctx.dataset();
  const ProblemSpec spec = ctx.cfg.problem_for(Direction::kInverse);
  const PairSet train_set = make_pairs(ds, true, spec);
  const PairSet test_set = make_pairs(ds, false, spec);
  const auto r = train(init_parameters<float>(ctx.cfg.fno_for(spec), ctx.cfg.init_seed), train_set, test_set,
                       ctx.cfg.train, spec);
  ctx.inverse = r.best;
  save_operator(ctx.work / "inverse.ckpt", r.best);
  const MetricsReport m = evaluate(r.best, test_set);

  // held-out single bumps, simulated on the dataset's road
  const PhysicsConfig& phys = ctx.cfg.physics;
  const double length = phys.bridge.length;
  const auto grid = uniform_grid(length, phys.bridge.n_nodes());
  const RoadProfile road = make_road(phys.road, phys.road.spectrum.seed);
  const auto channels = ds.manifest.channels;
  std::mt19937_64 rng(0xB0B);
  std::uniform_real_distribution<double> where(0.2 * length, 0.8 * length);
  std::vector<SampleRecord> bumps;
  std::vector<double> centers;
  for (int i = 0; i < 20; ++i) {
    centers.push_back(where(rng));
    bumps.push_back(simulate_record(phys, bump_damage(centers.back(), 0.2, 0.2, grid, phys.delta_max), road, channels,
                                    static_cast<std::uint64_t>(i), "bump"));
  }
  std::vector<const SampleRecord*> ptrs;
  for (const auto& b : bumps) ptrs.push_back(&b);
  const PairSet bump_pairs = make_pairs(ptrs, channels, spec);
  const Tensor<double> pred = predict(r.best, bump_pairs.inputs);
  int hits = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double e = std::abs(argmax_position(pred, i, length) - centers[static_cast<std::size_t>(i)]);
    worst = std::max(worst, e);
    if (e <= 0.05 * length) ++hits;
  }
  Outcome o;
  o.pass = m.mean_abs_error <= 0.05 && hits >= 18;
  o.detail = "GRF test MAE " + fmt("%.4f", m.mean_abs_error) + ", bump argmax within 0.27 m: " +
             std::to_string(hits) + "/20 (worst " + fmt("%.2f", worst) + " m)";
  return o;
}

Outcome fine_tuning(Context& ctx) {
  if (!ctx.inverse) {
    if (ctx.reuse && fs::exists(ctx.work / "inverse.ckpt")) {
      ctx.inverse = load_operator(ctx.work / "inverse.ckpt");
    } else {
      const Outcome pre = inverse_reproduction(ctx);
      (void)pre;
    }
  }
  const OperatorModel<float>& pre = *ctx.inverse;
  const PhysicsConfig& phys = ctx.cfg.physics;
  const double length = phys.bridge.length;
  const ProblemSpec spec = pre.spec;

  const Dataset healthy_ds = generate_pseudo_dataset(phys, ctx.cfg.dataset, Scenario::kInt, 20, ctx.work / "int");
  const PairSet healthy = make_pairs(healthy_ds, true, spec);
  const double before = dataset_loss(pre, healthy, ctx.cfg.finetune.loss);
  const auto tuned = fine_tune(pre, healthy, ctx.cfg.finetune, ctx.cfg.freeze);
  const double after = dataset_loss(tuned.best, healthy, ctx.cfg.finetune.loss);

  auto a = pre.net;
  auto b = tuned.best.net;
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  bool frozen_identical = true;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!ctx.cfg.freeze.trainable.count(pa[i].group) &&
        std::memcmp(pa[i].values.data(), pb[i].values.data(), sizeof(float) * static_cast<std::size_t>(pa[i].values.size())) != 0)
      frozen_identical = false;

  bool peaks_ok = true;
  std::string peak_detail;
  for (const auto& [scenario, center] : {std::pair{Scenario::kDmg1, 0.75 * length}, std::pair{Scenario::kDmg2, 0.25 * length}}) {
    const Dataset d = generate_pseudo_dataset(phys, ctx.cfg.dataset, scenario, 5, ctx.work / to_string(scenario));
    const PairSet p = make_pairs(d, true, spec);
    const Tensor<double> y = predict(tuned.best, p.inputs);
    double worst = 0.0;
    for (int i = 0; i < y.batch; ++i) worst = std::max(worst, std::abs(argmax_position(y, i, length) - center));
    peaks_ok = peaks_ok && worst <= 0.1 * length;
    peak_detail += ", " + to_string(scenario) + " worst peak offset " + fmt("%.2f", worst) + " m";
  }

  DatasetConfig held = ctx.cfg.dataset;
  held.root_seed += 1;
  const Dataset int_ds = generate_pseudo_dataset(phys, held, Scenario::kInt, 5, ctx.work / "int_heldout");
  const Tensor<double> int_pred = predict(tuned.best, make_pairs(int_ds, true, spec).inputs);
  const double int_max = int_pred.data.maxCoeff();

  Outcome o;
  o.pass = frozen_identical && after <= 0.5 * before && peaks_ok && int_max < 0.05;
  o.detail = std::string("frozen groups ") + (frozen_identical ? "bit-identical" : "CHANGED") + ", healthy loss " +
             fmt("%.3e", before) + " -> " + fmt("%.3e", after) + peak_detail + ", held-out INT max " +
             fmt("%.4f", int_max);
  return o;
}

int run_cli(const std::string& args, const fs::path& cwd = {}) {
  std::string cmd;
  if (!cwd.empty()) cmd = "cd '" + cwd.string() + "' && ";
  cmd += std::string("'") + VINO_CLI_PATH + "' " + args + " > cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome speed_report(Context& ctx) {
  if (ctx.forward_ckpt.empty()) {
    if (ctx.reuse && fs::exists(ctx.work / "forward.ckpt"))
      ctx.forward_ckpt = ctx.work / "forward.ckpt";
    else
      forward_reproduction(ctx);
  }
  const fs::path out = ctx.work / "bench";
  fs::remove_all(out);
  const int code = run_cli("bench --checkpoint '" + ctx.forward_ckpt.string() + "' --out '" + out.string() +
                               "' --batches 1,16,64 --repeats 3",
                           ctx.work);
  if (code != 0) return {false, "bench exited with " + std::to_string(code)};
  std::ifstream in(out / "bench.json");
  const auto j = nlohmann::json::parse(in);
  bool pass = true;
  std::string detail = "FE " + fmt("%.1f", j.at("fe_seconds_per_sample").get<double>() * 1e3) + " ms/sample";
  for (const auto& e : j.at("inference")) {
    const int batch = e.at("batch").get<int>();
    const double ratio = e.at("speedup").get<double>();
    detail += ", batch " + std::to_string(batch) + ": " + fmt("%.2f", e.at("seconds_per_sample").get<double>() * 1e3) +
              " ms/sample, ratio " + fmt("%.1f", ratio);
    if (batch >= 16 && !(ratio > 1.0)) pass = false;
  }
  return {pass, detail};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(Context& ctx) {
  nlohmann::json cfg = {{"bridge", {{"n_elements", 64}}},
                        {"solver", {{"n_steps", 300}, {"dt", 0.01}}},
                        {"dataset", {{"n_samples", 24}, {"root_seed", 4242}}},
                        {"fno", {{"width", 8}, {"modes", 8}, {"depth", 2}, {"grid", 64}}},
                        {"train", {{"epochs", 6}, {"batch_size", 5}}}};
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"run_a", "run_b"}) {
    const fs::path dir = ctx.work / "determinism" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << cfg.dump(2);
    for (const std::string& step :
         {std::string("gen-dataset --config config.json --out out/data --jobs 2"),
          std::string("train --config config.json --data out/data --direction inverse --out out/train"),
          std::string("evaluate --config config.json --data out/data --checkpoint out/train/model.ckpt --out out/eval")}) {
      const int code = run_cli(step, dir);
      if (code != 0) return {false, std::string(name) + ": '" + step + "' exited with " + std::to_string(code)};
    }
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir / "out"))
      if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
    runs.push_back(std::move(files));
  }
  std::vector<std::string> differing;
  for (const auto& [k, v] : runs[0]) {
    const auto it = runs[1].find(k);
    if (it == runs[1].end() || it->second != v) differing.push_back(k);
  }
  if (runs[0].size() != runs[1].size()) differing.push_back("<file set>");
  Outcome o;
  o.pass = differing.empty() && !runs[0].empty();
  o.detail = std::to_string(runs[0].size()) + " files compared";
  if (!differing.empty()) o.detail += ", differing: " + differing.front();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.work = fs::temp_directory_path() / "vino_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      ctx.work = argv[++i];
    } else if (a == "--reuse") {
      ctx.reuse = true;
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      for (std::string tok; std::getline(s, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--work DIR] [--only 1,2,...] [--reuse]\n";
      return 64;
    }
  }
  fs::create_directories(ctx.work);
  ctx.work = fs::absolute(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria = {
      {"physics oracle suite", physics_oracles},
      {"integrator suite", integrator},
      {"gradient suite", gradients},
      {"forward desk-scale reproduction", forward_reproduction},
      {"inverse desk-scale reproduction", inverse_reproduction},
      {"fine-tuning contract", fine_tuning},
      {"speed report", speed_report},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "CRITERION " << id << " " << (o.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << ": "
              << o.detail << " [" << fmt("%.1f", secs) << " s]" << std::endl;
    if (!o.pass) ++failed;
  }
  return failed;
}
