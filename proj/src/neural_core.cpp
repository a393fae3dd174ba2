#include "vino/neural_core.hpp"

#include "vino/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

namespace vino {

using nlohmann::json;

template <class S>
std::vector<std::complex<S>> fft_r2c(const std::vector<S>& x) {
  if (x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "fft_r2c needs at least two points");
  Eigen::FFT<S> fft;
  fft.SetFlag(Eigen::FFT<S>::HalfSpectrum);
  std::vector<std::complex<S>> out;
  fft.fwd(out, x);
  out.resize(x.size() / 2 + 1);
  return out;
}

template <class S>
std::vector<S> ifft_c2r(const std::vector<std::complex<S>>& spectrum, int n) {
  if (n < 2 || spectrum.size() != static_cast<std::size_t>(n / 2 + 1))
    throw Error(ErrorCode::kShapeMismatch, "half spectrum length must be n/2 + 1");
  Eigen::FFT<S> fft;
  fft.SetFlag(Eigen::FFT<S>::HalfSpectrum);
  std::vector<S> out;
  fft.inv(out, spectrum, n);
  return out;
}

template <class S>
S activate(Activation a, S x) {
  if (a == Activation::kIdentity) return x;
  return x * S(0.5) * std::erfc(-x / std::numbers::sqrt2_v<S>);
}

template <class S>
S activate_derivative(Activation a, S x) {
  if (a == Activation::kIdentity) return S(1);
  const S cdf = S(0.5) * std::erfc(-x / std::numbers::sqrt2_v<S>);
  const S pdf = std::exp(S(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<S> / std::numbers::sqrt2_v<S>;
  return cdf + x * pdf;
}

void FnoConfig::validate() const {
  if (in_channels < 1 || out_channels < 1 || width < 1 || modes < 1 || depth < 0)
    throw Error(ErrorCode::kInvalidArgument, "FNO channel counts, width and modes must be positive");
  if (padding < 0) throw Error(ErrorCode::kInvalidArgument, "FNO padding must be >= 0");
}

std::string to_string(Activation a) { return a == Activation::kGelu ? "gelu" : "identity"; }

Activation activation_from_string(const std::string& name) {
  if (name == "gelu") return Activation::kGelu;
  if (name == "identity") return Activation::kIdentity;
  throw Error(ErrorCode::kConfig, "unknown activation '" + name + "'");
}

json to_json(const FnoConfig& cfg) {
  return {{"in_channels", cfg.in_channels}, {"out_channels", cfg.out_channels}, {"width", cfg.width},
          {"modes", cfg.modes},             {"depth", cfg.depth},               {"padding", cfg.padding},
          {"activation", to_string(cfg.activation)}};
}

FnoConfig fno_config_from_json(const json& j) {
  FnoConfig c;
  c.in_channels = j.at("in_channels").get<int>();
  c.out_channels = j.at("out_channels").get<int>();
  c.width = j.at("width").get<int>();
  c.modes = j.at("modes").get<int>();
  c.depth = j.at("depth").get<int>();
  c.padding = j.value("padding", 0);
  c.activation = activation_from_string(j.at("activation").get<std::string>());
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// parameters

template <class S>
SpectralBlockParams<S> SpectralBlockParams<S>::zeros(int in, int out, int modes) {
  SpectralBlockParams p;
  p.in = in;
  p.out = out;
  p.modes = modes;
  p.re.setZero(in, static_cast<Eigen::Index>(out) * modes);
  p.im.setZero(in, static_cast<Eigen::Index>(out) * modes);
  p.pointwise.weight.setZero(out, in);
  p.pointwise.bias.setZero(out);
  return p;
}

namespace {

template <class S>
Linear<S> zero_linear(int in, int out) {
  Linear<S> l;
  l.weight.setZero(out, in);
  l.bias.setZero(out);
  return l;
}

template <class Derived>
auto as_vector(Eigen::PlainObjectBase<Derived>& m) {
  using S = typename Derived::Scalar;
  return Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(m.data(), m.size());
}

}  // namespace

template <class S>
FnoModel<S> FnoModel<S>::zeros(const FnoConfig& cfg) {
  cfg.validate();
  FnoModel m;
  m.config = cfg;
  m.lift = zero_linear<S>(cfg.in_channels + 1, cfg.width);
  for (int l = 0; l < cfg.depth; ++l) m.blocks.push_back(SpectralBlockParams<S>::zeros(cfg.width, cfg.width, cfg.modes));
  m.proj1 = zero_linear<S>(cfg.width, cfg.width);
  m.proj2 = zero_linear<S>(cfg.width, cfg.out_channels);
  return m;
}

template <class S>
std::vector<std::string> FnoModel<S>::group_names() const {
  std::vector<std::string> g{"lift"};
  for (std::size_t l = 0; l < blocks.size(); ++l) g.push_back("block" + std::to_string(l));
  g.push_back("proj1");
  g.push_back("proj2");
  return g;
}

template <class S>
std::vector<ParamRef<S>> FnoModel<S>::parameters() {
  std::vector<ParamRef<S>> out;
  const auto linear = [&](const std::string& group, Linear<S>& l) {
    const int o = static_cast<int>(l.weight.rows());
    const int i = static_cast<int>(l.weight.cols());
    out.push_back({group, group + ".weight", {o, i}, as_vector(l.weight)});
    out.push_back({group, group + ".bias", {o}, as_vector(l.bias)});
  };
  linear("lift", lift);
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const std::string g = "block" + std::to_string(l);
    SpectralBlockParams<S>& b = blocks[l];
    out.push_back({g, g + ".spectral_re", {b.modes, b.out, b.in}, as_vector(b.re)});
    out.push_back({g, g + ".spectral_im", {b.modes, b.out, b.in}, as_vector(b.im)});
    const int o = b.out;
    const int i = b.in;
    out.push_back({g, g + ".weight", {o, i}, as_vector(b.pointwise.weight)});
    out.push_back({g, g + ".bias", {o}, as_vector(b.pointwise.bias)});
  }
  linear("proj1", proj1);
  linear("proj2", proj2);
  return out;
}

template <class S>
Eigen::Index FnoModel<S>::parameter_count() const {
  Eigen::Index n = 0;
  for (auto& p : const_cast<FnoModel*>(this)->parameters()) n += p.values.size();
  return n;
}

template <class S>
template <class T>
FnoModel<T> FnoModel<S>::cast() const {
  FnoModel<T> m;
  m.config = config;
  m.frozen = frozen;
  const auto lin = [](const Linear<S>& l) {
    Linear<T> r;
    r.weight = l.weight.template cast<T>();
    r.bias = l.bias.template cast<T>();
    return r;
  };
  m.lift = lin(lift);
  for (const auto& b : blocks) {
    SpectralBlockParams<T> c;
    c.in = b.in;
    c.out = b.out;
    c.modes = b.modes;
    c.re = b.re.template cast<T>();
    c.im = b.im.template cast<T>();
    c.pointwise = lin(b.pointwise);
    m.blocks.push_back(std::move(c));
  }
  m.proj1 = lin(proj1);
  m.proj2 = lin(proj2);
  return m;
}

template <class S>
FnoModel<S> init_parameters(const FnoConfig& cfg, std::uint64_t seed) {
  FnoModel<double> m = FnoModel<double>::zeros(cfg);
  std::mt19937_64 rng(seed);
  const auto linear = [&](Linear<double>& l) {
    const double a = std::sqrt(1.0 / static_cast<double>(l.weight.cols()));
    std::uniform_real_distribution<double> u(-a, a);
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = u(rng);
  };
  linear(m.lift);
  for (auto& b : m.blocks) {
    const double scale = 1.0 / (static_cast<double>(b.in) * b.out);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < b.re.size(); ++i) b.re.data()[i] = scale * u(rng);
    for (Eigen::Index i = 0; i < b.im.size(); ++i) b.im.data()[i] = scale * u(rng);
    linear(b.pointwise);
  }
  linear(m.proj1);
  linear(m.proj2);
  if constexpr (std::is_same_v<S, double>)
    return m;
  else
    return m.template cast<S>();
}

// ---------------------------------------------------------------------------
// spectral path

template <class S>
SpectralBasis<S>::SpectralBasis(int n_points, int n_modes) : n(n_points), modes(n_modes) {
  if (n < 2) throw Error(ErrorCode::kShapeMismatch, "grid needs at least two points");
  if (modes > n / 2 + 1)
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(modes) + " modes exceed the " + std::to_string(n / 2 + 1) + " of a " +
                    std::to_string(n) + "-point grid");
  forward.resize(n, 2 * modes);
  inverse.resize(2 * modes, n);
  for (int k = 0; k < modes; ++k) {
    const double weight = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
    for (int j = 0; j < n; ++j) {
      // reduce j k mod n first so the angle stays exact for long grids
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(j) * k) % n) / n;
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      forward(j, k) = static_cast<S>(c);
      forward(j, modes + k) = static_cast<S>(-s);
      inverse(k, j) = static_cast<S>(weight * c / n);
      inverse(modes + k, j) = static_cast<S>(-weight * s / n);
    }
  }
}

namespace {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// channels x BN -> channels x 2M B
template <class S>
Mat<S> to_spectrum(const Mat<S>& h, int batch, const SpectralBasis<S>& basis) {
  const Eigen::Index m2 = 2 * basis.modes;
  Mat<S> z(h.rows(), m2 * batch);
  for (int b = 0; b < batch; ++b)
    z.middleCols(b * m2, m2).noalias() = h.middleCols(static_cast<Eigen::Index>(b) * basis.n, basis.n) * basis.forward;
  return z;
}

// channels x 2M B -> channels x BN
template <class S>
Mat<S> from_spectrum(const Mat<S>& y, int batch, const SpectralBasis<S>& basis) {
  const Eigen::Index m2 = 2 * basis.modes;
  Mat<S> h(y.rows(), static_cast<Eigen::Index>(batch) * basis.n);
  for (int b = 0; b < batch; ++b)
    h.middleCols(static_cast<Eigen::Index>(b) * basis.n, basis.n).noalias() = y.middleCols(b * m2, m2) * basis.inverse;
  return h;
}

// adjoint of from_spectrum: channels x BN -> channels x 2M B
template <class S>
Mat<S> from_spectrum_adjoint(const Mat<S>& g, int batch, const SpectralBasis<S>& basis) {
  const Eigen::Index m2 = 2 * basis.modes;
  Mat<S> y(g.rows(), m2 * batch);
  for (int b = 0; b < batch; ++b)
    y.middleCols(b * m2, m2).noalias() =
        g.middleCols(static_cast<Eigen::Index>(b) * basis.n, basis.n) * basis.inverse.transpose();
  return y;
}

// adjoint of to_spectrum, accumulated into h
template <class S>
void to_spectrum_adjoint(const Mat<S>& dz, int batch, const SpectralBasis<S>& basis, Mat<S>& h) {
  const Eigen::Index m2 = 2 * basis.modes;
  for (int b = 0; b < batch; ++b)
    h.middleCols(static_cast<Eigen::Index>(b) * basis.n, basis.n).noalias() +=
        dz.middleCols(b * m2, m2) * basis.forward.transpose();
}

template <class S>
using Strided = Eigen::Map<Mat<S>, 0, Eigen::OuterStride<>>;
template <class S>
using ConstStrided = Eigen::Map<const Mat<S>, 0, Eigen::OuterStride<>>;

// The real and imaginary rows of mode k across the batch, as rows x batch views.
template <class S>
ConstStrided<S> mode_view(const Mat<S>& z, int k, int modes, int batch) {
  return ConstStrided<S>(z.data() + static_cast<Eigen::Index>(k) * z.rows(), z.rows(), batch,
                         Eigen::OuterStride<>(2 * modes * z.rows()));
}
template <class S>
Strided<S> mode_view(Mat<S>& z, int k, int modes, int batch) {
  return Strided<S>(z.data() + static_cast<Eigen::Index>(k) * z.rows(), z.rows(), batch,
                    Eigen::OuterStride<>(2 * modes * z.rows()));
}

template <class S>
Mat<S> mix(const Mat<S>& z, const SpectralBlockParams<S>& p, int batch) {
  Mat<S> y(p.out, z.cols());
  const int m = p.modes;
  for (int k = 0; k < m; ++k) {
    const auto wr = p.re.middleCols(static_cast<Eigen::Index>(k) * p.out, p.out);
    const auto wi = p.im.middleCols(static_cast<Eigen::Index>(k) * p.out, p.out);
    const auto zr = mode_view(z, k, m, batch);
    const auto zi = mode_view(z, m + k, m, batch);
    auto yr = mode_view(y, k, m, batch);
    auto yi = mode_view(y, m + k, m, batch);
    yr.noalias() = wr.transpose() * zr;
    yr.noalias() -= wi.transpose() * zi;
    yi.noalias() = wr.transpose() * zi;
    yi.noalias() += wi.transpose() * zr;
  }
  return y;
}

// Gradients of mix: accumulates d re / d im, returns d z.
template <class S>
Mat<S> mix_backward(const Mat<S>& z, const Mat<S>& dy, const SpectralBlockParams<S>& p, int batch,
                    SpectralBlockParams<S>* grads) {
  Mat<S> dz(p.in, z.cols());
  const int m = p.modes;
  for (int k = 0; k < m; ++k) {
    const auto wr = p.re.middleCols(static_cast<Eigen::Index>(k) * p.out, p.out);
    const auto wi = p.im.middleCols(static_cast<Eigen::Index>(k) * p.out, p.out);
    const auto zr = mode_view(z, k, m, batch);
    const auto zi = mode_view(z, m + k, m, batch);
    const auto gr = mode_view(dy, k, m, batch);
    const auto gi = mode_view(dy, m + k, m, batch);
    if (grads) {
      auto dwr = grads->re.middleCols(static_cast<Eigen::Index>(k) * p.out, p.out);
      auto dwi = grads->im.middleCols(static_cast<Eigen::Index>(k) * p.out, p.out);
      dwr.noalias() += zr * gr.transpose();
      dwr.noalias() += zi * gi.transpose();
      dwi.noalias() -= zi * gr.transpose();
      dwi.noalias() += zr * gi.transpose();
    }
    auto dzr = mode_view(dz, k, m, batch);
    auto dzi = mode_view(dz, m + k, m, batch);
    dzr.noalias() = wr * gr;
    dzr.noalias() += wi * gi;
    dzi.noalias() = wr * gi;
    dzi.noalias() -= wi * gr;
  }
  return dz;
}

template <class S>
void check_block(const Tensor<S>& x, const SpectralBlockParams<S>& p) {
  if (x.channels != p.in)
    throw Error(ErrorCode::kShapeMismatch, "block expects " + std::to_string(p.in) + " channels, got " +
                                               std::to_string(x.channels));
}

template <class S>
void activate_in_place(Activation a, Mat<S>& pre, Mat<S>* slope) {
  if (slope) slope->resize(pre.rows(), pre.cols());
  for (Eigen::Index i = 0; i < pre.size(); ++i) {
    const S x = pre.data()[i];
    if (slope) slope->data()[i] = activate_derivative(a, x);
    pre.data()[i] = activate(a, x);
  }
}

// per-sample zero extension from n to n + p columns, and its adjoint
template <class S>
Mat<S> pad_samples(const Mat<S>& h, int batch, int n, int p) {
  if (p == 0) return h;
  Mat<S> out = Mat<S>::Zero(h.rows(), static_cast<Eigen::Index>(batch) * (n + p));
  for (int b = 0; b < batch; ++b)
    out.middleCols(static_cast<Eigen::Index>(b) * (n + p), n) = h.middleCols(static_cast<Eigen::Index>(b) * n, n);
  return out;
}

template <class S>
Mat<S> crop_samples(const Mat<S>& h, int batch, int n, int p) {
  if (p == 0) return h;
  Mat<S> out(h.rows(), static_cast<Eigen::Index>(batch) * n);
  for (int b = 0; b < batch; ++b)
    out.middleCols(static_cast<Eigen::Index>(b) * n, n) = h.middleCols(static_cast<Eigen::Index>(b) * (n + p), n);
  return out;
}

template <class S>
void check_finite(const Mat<S>& m, const char* where) {
#ifndef NDEBUG
  if (!m.allFinite()) throw Error(ErrorCode::kNonFiniteState, std::string("non-finite values after ") + where);
#else
  (void)m;
  (void)where;
#endif
}

}  // namespace

template <class S>
Tensor<S> spectral_linear(const Tensor<S>& x, const SpectralBlockParams<S>& p) {
  check_block(x, p);
  const SpectralBasis<S> basis(x.grid, p.modes);
  Tensor<S> y;
  y.batch = x.batch;
  y.channels = p.out;
  y.grid = x.grid;
  y.data = from_spectrum(mix(to_spectrum(x.data, x.batch, basis), p, x.batch), x.batch, basis);
  return y;
}

template <class S>
Tensor<S> spectral_linear_adjoint(const Tensor<S>& y, const SpectralBlockParams<S>& p) {
  if (y.channels != p.out) throw Error(ErrorCode::kShapeMismatch, "adjoint input has the wrong channel count");
  const SpectralBasis<S> basis(y.grid, p.modes);
  const Mat<S> dy = from_spectrum_adjoint(y.data, y.batch, basis);
  const Mat<S> z = Mat<S>::Zero(p.in, dy.cols());
  const Mat<S> dz = mix_backward<S>(z, dy, p, y.batch, nullptr);
  Tensor<S> x(y.batch, p.in, y.grid);
  to_spectrum_adjoint(dz, y.batch, basis, x.data);
  return x;
}

template <class S>
Tensor<S> spectral_block_forward(const Tensor<S>& x, const SpectralBlockParams<S>& p, Activation a) {
  Tensor<S> y = spectral_linear(x, p);
  y.data.noalias() += p.pointwise.weight * x.data;
  y.data.colwise() += p.pointwise.bias;
  activate_in_place<S>(a, y.data, nullptr);
  return y;
}

template <class S>
Tensor<S> fno_forward(const FnoModel<S>& model, const Tensor<S>& x, FnoCache<S>* cache) {
  const FnoConfig& cfg = model.config;
  if (x.channels != cfg.in_channels)
    throw Error(ErrorCode::kShapeMismatch, "model expects " + std::to_string(cfg.in_channels) +
                                               " input channels, got " + std::to_string(x.channels));
  if (x.batch < 1 || x.grid < 2) throw Error(ErrorCode::kShapeMismatch, "empty input tensor");
  const int batch = x.batch;
  const int n = x.grid;
  FnoCache<S> local;
  FnoCache<S>& c = cache ? *cache : local;
  const bool keep = cache != nullptr;
  c = FnoCache<S>{};
  c.batch = batch;
  c.grid = n;
  c.basis = SpectralBasis<S>(n + cfg.padding, cfg.modes);

  Mat<S> input(cfg.in_channels + 1, x.data.cols());
  input.topRows(cfg.in_channels) = x.data;
  for (int b = 0; b < batch; ++b)
    for (int i = 0; i < n; ++i) input(cfg.in_channels, static_cast<Eigen::Index>(b) * n + i) = S(i) / S(n - 1);

  Mat<S> lifted = model.lift.weight * input;
  lifted.colwise() += model.lift.bias;
  Mat<S> h = pad_samples(lifted, batch, n, cfg.padding);
  if (keep) c.input = std::move(input);

  for (const auto& block : model.blocks) {
    Mat<S> z = to_spectrum(h, batch, c.basis);
    Mat<S> pre = from_spectrum(mix(z, block, batch), batch, c.basis);
    pre.noalias() += block.pointwise.weight * h;
    pre.colwise() += block.pointwise.bias;
    Mat<S> slope;
    activate_in_place<S>(cfg.activation, pre, keep ? &slope : nullptr);
    check_finite(pre, "spectral block");
    if (keep) {
      c.hidden.push_back(std::move(h));
      c.spectra.push_back(std::move(z));
      c.slope.push_back(std::move(slope));
    }
    h = std::move(pre);
  }
  h = crop_samples(h, batch, n, cfg.padding);

  Mat<S> q = model.proj1.weight * h;
  q.colwise() += model.proj1.bias;
  Mat<S> q_slope;
  activate_in_place<S>(cfg.activation, q, keep ? &q_slope : nullptr);
  Tensor<S> out;
  out.batch = batch;
  out.channels = cfg.out_channels;
  out.grid = n;
  out.data = model.proj2.weight * q;
  out.data.colwise() += model.proj2.bias;
  check_finite(out.data, "projection");
  if (keep) {
    c.hidden.push_back(std::move(h));
    c.proj_hidden = std::move(q);
    c.proj_slope = std::move(q_slope);
  }
  return out;
}

template <class S>
Tensor<S> fno_backward(const FnoModel<S>& model, const FnoCache<S>& cache, const Tensor<S>& upstream,
                       FnoModel<S>& grads) {
  const FnoConfig& cfg = model.config;
  const std::size_t depth = model.blocks.size();
  if (cache.empty() || cache.hidden.size() != depth + 1 || cache.input.size() == 0)
    throw Error(ErrorCode::kMissingForwardState, "backward called without a retained forward pass");
  if (upstream.batch != cache.batch || upstream.grid != cache.grid || upstream.channels != cfg.out_channels)
    throw Error(ErrorCode::kShapeMismatch, "upstream gradient does not match the cached forward pass");
  if (grads.blocks.size() != depth) grads = FnoModel<S>::zeros(cfg);
  const int batch = cache.batch;

  const Mat<S>& g_out = upstream.data;
  grads.proj2.weight.noalias() += g_out * cache.proj_hidden.transpose();
  grads.proj2.bias += g_out.rowwise().sum();
  Mat<S> g = (model.proj2.weight.transpose() * g_out).cwiseProduct(cache.proj_slope);
  grads.proj1.weight.noalias() += g * cache.hidden[depth].transpose();
  grads.proj1.bias += g.rowwise().sum();
  Mat<S> gh = pad_samples<S>(model.proj1.weight.transpose() * g, batch, cache.grid, cfg.padding);

  for (std::size_t l = depth; l-- > 0;) {
    const SpectralBlockParams<S>& block = model.blocks[l];
    SpectralBlockParams<S>& gb = grads.blocks[l];
    const Mat<S> gpre = gh.cwiseProduct(cache.slope[l]);
    gb.pointwise.weight.noalias() += gpre * cache.hidden[l].transpose();
    gb.pointwise.bias += gpre.rowwise().sum();
    gh.noalias() = block.pointwise.weight.transpose() * gpre;
    const Mat<S> gy = from_spectrum_adjoint(gpre, batch, cache.basis);
    const Mat<S> gz = mix_backward(cache.spectra[l], gy, block, batch, &gb);
    to_spectrum_adjoint(gz, batch, cache.basis, gh);
  }

  gh = crop_samples(gh, batch, cache.grid, cfg.padding);
  grads.lift.weight.noalias() += gh * cache.input.transpose();
  grads.lift.bias += gh.rowwise().sum();
  Tensor<S> gx;
  gx.batch = batch;
  gx.channels = cfg.in_channels;
  gx.grid = cache.grid;
  gx.data = (model.lift.weight.transpose() * gh).topRows(cfg.in_channels);
  return gx;
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

constexpr char kCheckpointMagic[9] = {'V', 'I', 'N', 'O', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw Error(ErrorCode::kIo, "truncated checkpoint");
  return v;
}

}  // namespace

template <class S>
void save_checkpoint(const std::filesystem::path& path, const FnoModel<S>& model, const json& extra) {
  FnoModel<S> copy = model;
  json header;
  header["fno"] = to_json(model.config);
  header["frozen"] = std::vector<std::string>(model.frozen.begin(), model.frozen.end());
  header["extra"] = extra.is_null() ? json::object() : extra;
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 9);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto params = copy.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(out, static_cast<std::uint32_t>(p.dims.size()));
    for (int d : p.dims) put_u32(out, static_cast<std::uint32_t>(d));
    const Eigen::VectorXf v = p.values.template cast<float>();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  char magic[9] = {};
  in.read(magic, 9);
  if (!in || std::memcmp(magic, kCheckpointMagic, 9) != 0)
    throw Error(ErrorCode::kIo, path.string() + " is not a VINOCKPT1 checkpoint");
  std::string text(get_u32(in), '\0');
  in.read(text.data(), static_cast<std::streamsize>(text.size()));
  if (!in) throw Error(ErrorCode::kIo, "truncated checkpoint header");
  Checkpoint ck;
  try {
    const json header = json::parse(text);
    ck.model = FnoModel<float>::zeros(fno_config_from_json(header.at("fno")));
    for (const auto& g : header.at("frozen")) ck.model.frozen.insert(g.get<std::string>());
    ck.extra = header.at("extra");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed checkpoint header: ") + e.what());
  }
  auto params = ck.model.parameters();
  if (get_u32(in) != params.size()) throw Error(ErrorCode::kIo, "checkpoint tensor count disagrees with its config");
  for (auto& p : params) {
    std::string name(get_u32(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    if (name != p.name) throw Error(ErrorCode::kIo, "expected tensor " + p.name + ", found " + name);
    const std::uint32_t rank = get_u32(in);
    if (rank != p.dims.size()) throw Error(ErrorCode::kIo, "rank mismatch for " + name);
    for (int d : p.dims)
      if (get_u32(in) != static_cast<std::uint32_t>(d)) throw Error(ErrorCode::kIo, "dims mismatch for " + name);
    in.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(p.values.size() * 4));
    if (!in) throw Error(ErrorCode::kIo, "truncated payload for " + name);
  }
  return ck;
}

#define VINO_INSTANTIATE(S)                                                                                   \
  template std::vector<std::complex<S>> fft_r2c<S>(const std::vector<S>&);                                    \
  template std::vector<S> ifft_c2r<S>(const std::vector<std::complex<S>>&, int);                              \
  template S activate<S>(Activation, S);                                                                      \
  template S activate_derivative<S>(Activation, S);                                                           \
  template struct SpectralBlockParams<S>;                                                                     \
  template struct FnoModel<S>;                                                                                \
  template struct SpectralBasis<S>;                                                                           \
  template FnoModel<S> init_parameters<S>(const FnoConfig&, std::uint64_t);                                   \
  template Tensor<S> spectral_linear<S>(const Tensor<S>&, const SpectralBlockParams<S>&);                     \
  template Tensor<S> spectral_linear_adjoint<S>(const Tensor<S>&, const SpectralBlockParams<S>&);             \
  template Tensor<S> spectral_block_forward<S>(const Tensor<S>&, const SpectralBlockParams<S>&, Activation);  \
  template Tensor<S> fno_forward<S>(const FnoModel<S>&, const Tensor<S>&, FnoCache<S>*);                      \
  template Tensor<S> fno_backward<S>(const FnoModel<S>&, const FnoCache<S>&, const Tensor<S>&, FnoModel<S>&); \
  template void save_checkpoint<S>(const std::filesystem::path&, const FnoModel<S>&, const json&);

VINO_INSTANTIATE(float)
VINO_INSTANTIATE(double)

template FnoModel<double> FnoModel<float>::cast<double>() const;
template FnoModel<float> FnoModel<double>::cast<float>() const;

}  // namespace vino
