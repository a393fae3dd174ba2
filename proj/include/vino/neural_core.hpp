#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace vino {

/// Real-input DFT, half spectrum of length N/2 + 1.
template <class S>
std::vector<std::complex<S>> fft_r2c(const std::vector<S>& x);
/// Inverse of fft_r2c (includes the 1/N factor); n is the real length.
template <class S>
std::vector<S> ifft_c2r(const std::vector<std::complex<S>>& spectrum, int n);

/// Batch of 1-D fields. Stored channel-major as a channels x (batch * grid)
/// matrix, column b * grid + i holding every channel of sample b at point i,
/// so pointwise layers are a single matrix product.
template <class S>
struct Tensor {
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  int batch = 0;
  int channels = 0;
  int grid = 0;
  Matrix data;

  Tensor() = default;
  Tensor(int b, int c, int n) : batch(b), channels(c), grid(n), data(Matrix::Zero(c, static_cast<Eigen::Index>(b) * n)) {}

  S& operator()(int b, int c, int i) { return data(c, static_cast<Eigen::Index>(b) * grid + i); }
  S operator()(int b, int c, int i) const { return data(c, static_cast<Eigen::Index>(b) * grid + i); }
  auto sample(int b) { return data.middleCols(static_cast<Eigen::Index>(b) * grid, grid); }
  auto sample(int b) const { return data.middleCols(static_cast<Eigen::Index>(b) * grid, grid); }

  template <class T>
  Tensor<T> cast() const {
    Tensor<T> t;
    t.batch = batch;
    t.channels = channels;
    t.grid = grid;
    t.data = data.template cast<T>();
    return t;
  }
};

enum class Activation { kGelu, kIdentity };

template <class S>
S activate(Activation a, S x);
template <class S>
S activate_derivative(Activation a, S x);

struct FnoConfig {
  int in_channels = 1;
  int out_channels = 1;
  int width = 32;
  int modes = 16;
  int depth = 4;
  int padding = 0;  // zero points appended to each sample inside the blocks
  Activation activation = Activation::kGelu;

  void validate() const;
};

template <class S>
struct Linear {
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weight;  // out x in
  Eigen::Matrix<S, Eigen::Dynamic, 1> bias;                                   // out
};

/// Spectral multipliers R = re + i im, stored in x (out * modes) with the input
/// channel fastest: entry (i, o + out * k) couples input i to output o at mode k.
template <class S>
struct SpectralBlockParams {
  int in = 0;
  int out = 0;
  int modes = 0;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> re;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> im;
  Linear<S> pointwise;

  static SpectralBlockParams zeros(int in, int out, int modes);
};

/// Named view of one parameter tensor.
template <class S>
struct ParamRef {
  std::string group;
  std::string name;
  std::vector<int> dims;  // declared (checkpoint) shape
  Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> values;
};

template <class S>
struct FnoModel {
  FnoConfig config;
  Linear<S> lift;                               // (in + 1) -> width
  std::vector<SpectralBlockParams<S>> blocks;  // depth
  Linear<S> proj1;                              // width -> width, activated
  Linear<S> proj2;                              // width -> out
  std::set<std::string> frozen;                 // parameter groups excluded from training

  static FnoModel zeros(const FnoConfig& cfg);

  /// lift, block0 .. block{depth-1}, proj1, proj2.
  std::vector<std::string> group_names() const;
  std::vector<ParamRef<S>> parameters();
  Eigen::Index parameter_count() const;

  template <class T>
  FnoModel<T> cast() const;
};

template <class S>
FnoModel<S> init_parameters(const FnoConfig& cfg, std::uint64_t seed);

/// Forward-transform basis for N points and M retained modes.
/// forward (N x 2M) = [cos | -sin]; inverse (2M x N) rebuilds the real field
/// from the retained half spectrum with the 1/N and conjugate-symmetry weights.
template <class S>
struct SpectralBasis {
  int n = 0;
  int modes = 0;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> forward;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> inverse;

  SpectralBasis() = default;
  SpectralBasis(int n, int modes);
};

/// Truncated spectral convolution F^-1(R . F x) without the pointwise path or activation.
template <class S>
Tensor<S> spectral_linear(const Tensor<S>& x, const SpectralBlockParams<S>& p);
/// Exact adjoint of spectral_linear with respect to the input.
template <class S>
Tensor<S> spectral_linear_adjoint(const Tensor<S>& y, const SpectralBlockParams<S>& p);

/// activation(spectral_linear(x) + W x + b).
template <class S>
Tensor<S> spectral_block_forward(const Tensor<S>& x, const SpectralBlockParams<S>& p,
                                 Activation a = Activation::kGelu);

/// Intermediates kept by a forward pass for the reverse sweep.
template <class S>
struct FnoCache {
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  int batch = 0;
  int grid = 0;  // unpadded
  SpectralBasis<S> basis;
  Matrix input;                 // (in + 1) x BN, grid channel last
  std::vector<Matrix> hidden;   // hidden[l]: padded input of block l, hidden[depth]: cropped input of proj1
  std::vector<Matrix> spectra;  // forward transform of hidden[l], in x 2M B
  std::vector<Matrix> slope;    // activation derivative at each block's pre-activation
  Matrix proj_hidden;           // activated proj1 output
  Matrix proj_slope;

  bool empty() const { return hidden.empty(); }
};

/// Output dims (batch, out_channels, grid). The normalised coordinate
/// x / L in [0, 1] is appended to the input channels.
template <class S>
Tensor<S> fno_forward(const FnoModel<S>& model, const Tensor<S>& x, FnoCache<S>* cache = nullptr);

/// Accumulates parameter gradients into `grads` (same shapes as the model) and
/// returns the gradient with respect to the input channels.
template <class S>
Tensor<S> fno_backward(const FnoModel<S>& model, const FnoCache<S>& cache, const Tensor<S>& upstream,
                       FnoModel<S>& grads);

/// "VINOCKPT1", u32 config length, JSON config, u32 tensor count, then per tensor
/// u32 name length, name, u32 rank, u32 dims, little-endian float32 row-major payload.
template <class S>
void save_checkpoint(const std::filesystem::path& path, const FnoModel<S>& model, const nlohmann::json& extra = {});

struct Checkpoint {
  FnoModel<float> model;
  nlohmann::json extra;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const FnoConfig& cfg);
FnoConfig fno_config_from_json(const nlohmann::json& j);
std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

}  // namespace vino
