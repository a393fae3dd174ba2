#include <doctest.h>

#include "vino/errors.hpp"
#include "vino/neural_core.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace vino;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::complex<double>> direct_dft(const std::vector<double>& x) {
  const auto n = static_cast<int>(x.size());
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k)
    for (int j = 0; j < n; ++j) out[k] += x[j] * std::polar(1.0, -2 * kPi * j * k / n);
  return out;
}

Tensor<double> random_tensor(int b, int c, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Tensor<double> t(b, c, n);
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = g(rng);
  return t;
}

SpectralBlockParams<double> random_block(int in, int out, int modes, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  auto p = SpectralBlockParams<double>::zeros(in, out, modes);
  for (Eigen::Index i = 0; i < p.re.size(); ++i) p.re.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < p.im.size(); ++i) p.im.data()[i] = g(rng);
  return p;
}

SpectralBlockParams<double> identity_block(int channels, int modes) {
  auto p = SpectralBlockParams<double>::zeros(channels, channels, modes);
  for (int k = 0; k < modes; ++k)
    for (int c = 0; c < channels; ++c) p.re(c, c + channels * k) = 1.0;
  return p;
}

// low-pass through the library FFT: keep modes below m, zero the rest
Tensor<double> fft_lowpass(const Tensor<double>& x, int m) {
  Tensor<double> y(x.batch, x.channels, x.grid);
  for (int b = 0; b < x.batch; ++b)
    for (int c = 0; c < x.channels; ++c) {
      std::vector<double> row(x.grid);
      for (int i = 0; i < x.grid; ++i) row[i] = x(b, c, i);
      auto spec = fft_r2c(row);
      for (std::size_t k = m; k < spec.size(); ++k) spec[k] = 0.0;
      const auto back = ifft_c2r(spec, x.grid);
      for (int i = 0; i < x.grid; ++i) y(b, c, i) = back[i];
    }
  return y;
}

double inner(const Tensor<double>& a, const Tensor<double>& b) { return a.data.cwiseProduct(b.data).sum(); }

}  // namespace

TEST_CASE("real FFT") {
  std::vector<double> impulse(16, 0.0);
  impulse[0] = 1.0;
  for (const auto& v : fft_r2c(impulse)) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-15);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int n : {2, 7, 64, 100}) {
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    const auto spec = fft_r2c(x);
    REQUIRE(spec.size() == static_cast<std::size_t>(n / 2 + 1));
    const auto ref = direct_dft(x);
    for (std::size_t k = 0; k < spec.size(); ++k) CHECK(std::abs(spec[k] - ref[k]) < 1e-11);
    const auto back = ifft_c2r(spec, n);
    for (int i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);

    double energy = 0.0;
    for (double v : x) energy += v * v;
    double spectral = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
      const double w = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
      spectral += w * std::norm(ref[k]);
    }
    CHECK(std::abs(spectral / n - energy) <= 1e-10 * energy);
  }
  CHECK_THROWS_AS(fft_r2c(std::vector<double>{1.0}), Error);
}

TEST_CASE("identity multipliers give the ideal low-pass") {
  std::mt19937_64 rng(2);
  const Tensor<double> x = random_tensor(3, 2, 40, rng);
  const auto p = identity_block(2, 6);
  const Tensor<double> y = spectral_block_forward(x, p, Activation::kIdentity);
  const Tensor<double> ref = fft_lowpass(x, 6);
  CHECK((y.data - ref.data).cwiseAbs().maxCoeff() < 1e-12);

  SUBCASE("Nyquist retained") {
    const auto full = identity_block(2, 21);
    CHECK((spectral_block_forward(x, full, Activation::kIdentity).data - x.data).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("idempotent projection") {
    const Tensor<double> once = spectral_linear(x, p);
    const Tensor<double> twice = spectral_linear(once, p);
    CHECK((once.data - twice.data).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("zero block gives activation(0)") {
  std::mt19937_64 rng(3);
  const Tensor<double> x = random_tensor(2, 3, 16, rng);
  const auto p = SpectralBlockParams<double>::zeros(3, 4, 5);
  const Tensor<double> y = spectral_block_forward(x, p);
  CHECK(y.channels == 4);
  CHECK(y.data.isZero(0.0));
  CHECK_THROWS_AS(spectral_block_forward(random_tensor(1, 2, 16, rng), p), Error);
  CHECK_THROWS_AS(spectral_block_forward(random_tensor(1, 3, 6, rng), p), Error);  // 5 modes > 6/2 + 1
}

TEST_CASE("spectral path is discretisation invariant for band-limited input") {
  std::mt19937_64 rng(4);
  auto p = random_block(2, 3, 8, rng);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < p.pointwise.weight.size(); ++i) p.pointwise.weight.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < p.pointwise.bias.size(); ++i) p.pointwise.bias[i] = g(rng);
  // a few random harmonics below the retained band
  std::vector<std::array<double, 4>> harmonics;  // channel, k, amplitude, phase
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < 6; ++k) harmonics.push_back({double(c), double(k), g(rng), g(rng)});
  const auto sampled = [&](int n) {
    Tensor<double> t(1, 2, n);
    for (const auto& h : harmonics)
      for (int i = 0; i < n; ++i) t(0, int(h[0]), i) += h[2] * std::cos(2 * kPi * h[1] * i / n + h[3]);
    return t;
  };
  const Tensor<double> coarse = spectral_block_forward(sampled(64), p);
  const Tensor<double> fine = spectral_block_forward(sampled(128), p);
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 64; ++i)
      worst = std::max(worst, std::abs(coarse(0, c, i) - fine(0, c, 2 * i)) / (std::abs(fine(0, c, 2 * i)) + 1e-3));
  CHECK(worst < 1e-6);
}

TEST_CASE("adjoint identity of the spectral path") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 10 + 7 * trial;
    const auto p = random_block(3, 2, std::min(6, n / 2 + 1), rng);
    const Tensor<double> x = random_tensor(2, 3, n, rng);
    const Tensor<double> y = random_tensor(2, 2, n, rng);
    const double lhs = inner(spectral_linear(x, p), y);
    const double rhs = inner(x, spectral_linear_adjoint(y, p));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("initialisation") {
  FnoConfig cfg;
  const auto a = init_parameters<double>(cfg, 11);
  const auto b = init_parameters<double>(cfg, 11);
  auto ac = a;
  auto bc = b;
  const auto pa = ac.parameters();
  const auto pb = bc.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].values == pb[i].values);

  // hand count: lift (1 + 1) * w + w; per block 2 * w * w * m + w * w + w; proj1 w * w + w; proj2 w + 1
  const int w = 32, m = 16;
  const Eigen::Index expected = (2 * w + w) + 4 * (2 * w * w * m + w * w + w) + (w * w + w) + (w * 1 + 1);
  CHECK(a.parameter_count() == expected);
  CHECK(expected == 136481);

  const double bound = std::sqrt(1.0 / w);
  CHECK(a.proj1.weight.cwiseAbs().maxCoeff() <= bound);
  CHECK(a.blocks[0].re.minCoeff() >= 0.0);
  CHECK(a.blocks[0].re.maxCoeff() <= 1.0 / (w * w));
  CHECK(a.group_names() == std::vector<std::string>{"lift", "block0", "block1", "block2", "block3", "proj1", "proj2"});

  std::mt19937_64 rng(6);
  const Tensor<double> x = random_tensor(4, 1, 128, rng);
  const Tensor<double> y = fno_forward(a, x);
  CHECK(y.data.allFinite());
  const double mean = y.data.mean();
  CHECK((y.data.array() - mean).square().mean() > 0.0);

  const auto f = init_parameters<float>(cfg, 11);
  CHECK(f.blocks[2].im.cast<double>().isApprox(a.blocks[2].im.cast<float>().cast<double>(), 0.0));
}

TEST_CASE("forward shape, zero model and determinism") {
  FnoConfig cfg;
  cfg.in_channels = 3;
  cfg.out_channels = 2;
  cfg.width = 8;
  cfg.modes = 4;
  cfg.depth = 2;
  std::mt19937_64 rng(7);
  const Tensor<double> x = random_tensor(5, 3, 20, rng);
  const auto m = init_parameters<double>(cfg, 1);
  const Tensor<double> y = fno_forward(m, x);
  CHECK(y.batch == 5);
  CHECK(y.channels == 2);
  CHECK(y.grid == 20);
  CHECK(fno_forward(m, x).data == y.data);

  auto z = FnoModel<double>::zeros(cfg);
  z.proj2.bias << 0.25, -1.5;
  const Tensor<double> yz = fno_forward(z, x);
  for (int b = 0; b < 5; ++b)
    for (int i = 0; i < 20; ++i) {
      CHECK(yz(b, 0, i) == 0.25);
      CHECK(yz(b, 1, i) == -1.5);
    }
  CHECK_THROWS_AS(fno_forward(m, random_tensor(1, 2, 20, rng)), Error);
}

namespace {

struct GradCase {
  FnoConfig cfg;
  FnoModel<double> model;
  Tensor<double> x;
  Tensor<double> w;  // loss = <forward(x), w>
};

GradCase make_case(std::uint64_t seed, int padding = 0) {
  GradCase c;
  c.cfg.in_channels = 2;
  c.cfg.out_channels = 2;
  c.cfg.width = 5;
  c.cfg.modes = 4;
  c.cfg.depth = 2;
  c.cfg.padding = padding;
  c.model = init_parameters<double>(c.cfg, seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  // larger spectral weights so every path carries signal
  for (auto& b : c.model.blocks) {
    for (Eigen::Index i = 0; i < b.re.size(); ++i) b.re.data()[i] = 0.3 * g(rng);
    for (Eigen::Index i = 0; i < b.im.size(); ++i) b.im.data()[i] = 0.3 * g(rng);
  }
  c.x = random_tensor(3, 2, 12, rng);
  c.w = random_tensor(3, 2, 12, rng);
  return c;
}

double loss(const FnoModel<double>& m, const Tensor<double>& x, const Tensor<double>& w) {
  return inner(fno_forward(m, x), w);
}

}  // namespace

TEST_CASE("backward matches central finite differences for every parameter group") {
  for (const auto& [seed, padding] : {std::pair{1u, 0}, std::pair{2u, 0}, std::pair{3u, 5}}) {
    GradCase c = make_case(seed, padding);
    CAPTURE(padding);
    FnoCache<double> cache;
    fno_forward(c.model, c.x, &cache);
    FnoModel<double> grads = FnoModel<double>::zeros(c.cfg);
    const Tensor<double> gx = fno_backward(c.model, cache, c.w, grads);

    auto params = c.model.parameters();
    const auto gparams = grads.parameters();
    const double h = 1e-5;
    for (std::size_t t = 0; t < params.size(); ++t) {
      Eigen::VectorXd fd(params[t].values.size());
      for (Eigen::Index i = 0; i < fd.size(); ++i) {
        const double keep = params[t].values[i];
        params[t].values[i] = keep + h;
        const double up = loss(c.model, c.x, c.w);
        params[t].values[i] = keep - h;
        const double down = loss(c.model, c.x, c.w);
        params[t].values[i] = keep;
        fd[i] = (up - down) / (2 * h);
      }
      const double err = (gparams[t].values - fd).norm() / std::max(fd.norm(), 1e-12);
      INFO(params[t].name);
      CHECK(err < 1e-4);
    }

    Tensor<double> xp = c.x;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < xp.data.size(); ++i) {
      const double keep = xp.data.data()[i];
      xp.data.data()[i] = keep + h;
      const double up = loss(c.model, xp, c.w);
      xp.data.data()[i] = keep - h;
      const double down = loss(c.model, xp, c.w);
      xp.data.data()[i] = keep;
      worst = std::max(worst, std::abs((up - down) / (2 * h) - gx.data.data()[i]));
    }
    CHECK(worst / gx.data.cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("padding only acts through the spectral path") {
  GradCase c = make_case(4);
  GradCase padded = c;
  padded.model.config.padding = 7;
  CHECK((fno_forward(padded.model, c.x).data - fno_forward(c.model, c.x).data).norm() > 1e-3);
  for (auto* m : {&c.model, &padded.model})
    for (auto& b : m->blocks) {
      b.re.setZero();
      b.im.setZero();
    }
  CHECK((fno_forward(padded.model, c.x).data - fno_forward(c.model, c.x).data).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("backward: zero upstream and batch linearity") {
  GradCase c = make_case(3);
  FnoCache<double> cache;
  fno_forward(c.model, c.x, &cache);
  FnoModel<double> zero_grads = FnoModel<double>::zeros(c.cfg);
  const Tensor<double> zero_up(3, 2, 12);
  const Tensor<double> gx0 = fno_backward(c.model, cache, zero_up, zero_grads);
  CHECK(gx0.data.isZero(0.0));
  for (auto& p : zero_grads.parameters()) CHECK(p.values.isZero(0.0));

  FnoModel<double> batch_grads = FnoModel<double>::zeros(c.cfg);
  fno_backward(c.model, cache, c.w, batch_grads);
  FnoModel<double> summed = FnoModel<double>::zeros(c.cfg);
  for (int b = 0; b < 3; ++b) {
    Tensor<double> xb(1, 2, 12), wb(1, 2, 12);
    xb.data = c.x.sample(b);
    wb.data = c.w.sample(b);
    FnoCache<double> cb;
    fno_forward(c.model, xb, &cb);
    fno_backward(c.model, cb, wb, summed);
  }
  const auto a = batch_grads.parameters();
  const auto s = summed.parameters();
  for (std::size_t t = 0; t < a.size(); ++t) CHECK((a[t].values - s[t].values).cwiseAbs().maxCoeff() <= 1e-10);

  FnoCache<double> empty;
  CHECK_THROWS_AS(fno_backward(c.model, empty, c.w, summed), Error);
  try {
    fno_backward(c.model, empty, c.w, summed);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingForwardState);
  }
}

TEST_CASE("single-precision forward tracks double precision") {
  GradCase c = make_case(4);
  const FnoModel<float> mf = c.model.cast<float>();
  const Tensor<float> yf = fno_forward(mf, c.x.cast<float>());
  const Tensor<double> yd = fno_forward(c.model, c.x);
  CHECK((yf.data.cast<double>() - yd.data).cwiseAbs().maxCoeff() < 1e-4 * yd.data.cwiseAbs().maxCoeff());
}

TEST_CASE("checkpoint round trip") {
  const auto path = std::filesystem::temp_directory_path() / "vino_ckpt_test.bin";
  FnoConfig cfg;
  cfg.width = 6;
  cfg.modes = 3;
  cfg.depth = 2;
  cfg.padding = 2;
  auto m = init_parameters<double>(cfg, 9);
  m.frozen = {"lift", "block0"};
  save_checkpoint(path, m, {{"note", "hello"}});
  const Checkpoint ck = load_checkpoint(path);
  CHECK(ck.extra["note"] == "hello");
  CHECK(ck.model.frozen == m.frozen);
  CHECK(ck.model.config.width == 6);
  CHECK(ck.model.config.padding == 2);
  auto loaded = ck.model;
  auto expected = m.cast<float>();
  const auto pl = loaded.parameters();
  const auto pe = expected.parameters();
  REQUIRE(pl.size() == pe.size());
  for (std::size_t t = 0; t < pl.size(); ++t) CHECK(pl[t].values == pe[t].values);

  // saving the loaded model reproduces the file byte for byte
  const auto again = std::filesystem::temp_directory_path() / "vino_ckpt_test2.bin";
  save_checkpoint(again, ck.model, ck.extra);
  std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  CHECK(s1.substr(0, 9) == "VINOCKPT1");

  std::ofstream(path, std::ios::binary) << "NOTACKPT";
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  std::filesystem::remove(path);
  std::filesystem::remove(again);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
}
