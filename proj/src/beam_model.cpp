#include "vino/beam_model.hpp"

#include "vino/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace vino {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

// Full (unconstrained) DOF numbering: 2*node for translation, 2*node+1 for rotation.
std::array<int, 4> element_full_dofs(int e) { return {2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3}; }

std::array<int, 4> element_free_dofs(const DofMap& map, int e) {
  return {map.translation[e], map.rotation[e], map.translation[e + 1], map.rotation[e + 1]};
}

SparseMatrix from_triplets(int n, const std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Locate x on the uniform mesh: element index and local coordinate in [0, 1].
std::pair<int, double> locate(const BeamProperties& props, double x) {
  const double le = props.element_length();
  int e = static_cast<int>(std::floor(x / le));
  e = std::clamp(e, 0, props.n_elements - 1);
  return {e, (x - e * le) / le};
}

std::array<double, 4> hermite(double xi, double le, int derivative) {
  const double xi2 = xi * xi;
  const double xi3 = xi2 * xi;
  if (derivative == 0) {
    return {1.0 - 3.0 * xi2 + 2.0 * xi3, le * (xi - 2.0 * xi2 + xi3), 3.0 * xi2 - 2.0 * xi3,
            le * (-xi2 + xi3)};
  }
  // d/dx = (1/le) d/dxi
  return {(-6.0 * xi + 6.0 * xi2) / le, 1.0 - 4.0 * xi + 3.0 * xi2, (6.0 * xi - 6.0 * xi2) / le,
          -2.0 * xi + 3.0 * xi2};
}

}  // namespace

void BeamProperties::validate() const {
  require(length > 0 && mass_per_length > 0 && youngs_modulus > 0 && moment_of_inertia > 0,
          ErrorCode::kInvalidArgument, "beam length, mass, modulus and inertia must be positive");
  require(n_elements >= 2, ErrorCode::kInvalidArgument, "beam needs at least two elements");
}

std::vector<double> uniform_grid(double length, int n_points) {
  std::vector<double> g(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) g[i] = length * i / (n_points - 1);
  return g;
}

DamageField DamageField::zero(double length, int n_points) { return uniform(length, n_points, 0.0); }

DamageField DamageField::uniform(double length, int n_points, double value) {
  DamageField d;
  d.grid = uniform_grid(length, n_points);
  d.values.assign(d.grid.size(), value);
  return d;
}

double DamageField::at(double x) const {
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const auto i = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double t = (x - grid[i]) / (grid[i + 1] - grid[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

void DamageField::validate(double delta_max) const {
  require(grid.size() == values.size() && grid.size() >= 2, ErrorCode::kInvalidDamage,
          "damage grid and values must have equal length >= 2");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], ErrorCode::kInvalidDamage, "damage grid must be strictly increasing");
  for (double v : values) {
    if (!(v >= 0.0 && v <= delta_max)) {
      std::ostringstream os;
      os << "damage value " << v << " outside [0, " << delta_max << "]";
      throw Error(ErrorCode::kInvalidDamage, os.str());
    }
  }
}

double RayleighParams::damping_ratio(double f) const {
  return alpha_dM / (4.0 * kPi * f) + kPi * beta_dK * f;
}

RayleighParams rayleigh_coefficients(double f1, double f2, double zeta1, double zeta2) {
  if (!(f1 > 0.0) || !(f1 < f2))
    throw Error(ErrorCode::kDegenerateFrequencies, "require 0 < f1 < f2");
  RayleighParams r{f1, f2, zeta1, zeta2, 0.0, 0.0};
  const double denom = f2 * f2 - f1 * f1;
  r.alpha_dM = 4.0 * kPi * f1 * f2 * (zeta1 * f2 - zeta2 * f1) / denom;
  r.beta_dK = (zeta2 * f2 - zeta1 * f1) / (kPi * denom);
  return r;
}

DofMap make_dof_map(const BeamProperties& props) {
  const int nn = props.n_nodes();
  DofMap map;
  map.translation.assign(nn, -1);
  map.rotation.assign(nn, -1);
  int next = 0;
  for (int i = 0; i < nn; ++i) {
    if (i != 0 && i != nn - 1) map.translation[i] = next++;
    map.rotation[i] = next++;
  }
  return map;
}

std::array<double, 16> element_stiffness(double ei, double le) {
  const double k = ei / (le * le * le);
  const double l = le;
  const double l2 = le * le;
  // clang-format off
  return {12 * k,     6 * l * k,  -12 * k,     6 * l * k,
          6 * l * k,  4 * l2 * k, -6 * l * k,  2 * l2 * k,
          -12 * k,    -6 * l * k, 12 * k,      -6 * l * k,
          6 * l * k,  2 * l2 * k, -6 * l * k,  4 * l2 * k};
  // clang-format on
}

std::array<double, 16> element_mass(double m, double le) {
  const double c = m * le / 420.0;
  const double l = le;
  const double l2 = le * le;
  // clang-format off
  return {156 * c,     22 * l * c,  54 * c,      -13 * l * c,
          22 * l * c,  4 * l2 * c,  13 * l * c,  -3 * l2 * c,
          54 * c,      13 * l * c,  156 * c,     -22 * l * c,
          -13 * l * c, -3 * l2 * c, -22 * l * c, 4 * l2 * c};
  // clang-format on
}

AssembledBridge assemble_bridge(const BeamProperties& props, const DamageField& damage,
                                const RayleighParams& rayleigh, double delta_max) {
  props.validate();
  damage.validate(delta_max);
  const double tol = 1e-9 * props.length;
  if (std::abs(damage.grid.front()) > tol || std::abs(damage.grid.back() - props.length) > tol)
    throw Error(ErrorCode::kInvalidDamage, "damage grid must span [0, L]");

  AssembledBridge b;
  b.props = props;
  b.rayleigh = rayleigh;
  b.dofs = make_dof_map(props);
  const int n = props.n_free_dofs();
  const double le = props.element_length();

  std::vector<Eigen::Triplet<double>> tm, tk;
  tm.reserve(16 * props.n_elements);
  tk.reserve(16 * props.n_elements);
  b.element_lengths.assign(props.n_elements, le);
  b.element_damage.resize(props.n_elements);
  const auto me = element_mass(props.mass_per_length, le);
  for (int e = 0; e < props.n_elements; ++e) {
    const double delta = damage.at((e + 0.5) * le);
    b.element_damage[e] = delta;
    const auto ke = element_stiffness((1.0 - delta) * props.flexural_rigidity(), le);
    const auto dofs = element_free_dofs(b.dofs, e);
    for (int i = 0; i < 4; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < 4; ++j) {
        if (dofs[j] < 0) continue;
        tm.emplace_back(dofs[i], dofs[j], me[4 * i + j]);
        tk.emplace_back(dofs[i], dofs[j], ke[4 * i + j]);
      }
    }
  }
  b.M = from_triplets(n, tm);
  b.K = from_triplets(n, tk);
  b.C = rayleigh.alpha_dM * b.M + rayleigh.beta_dK * b.K;
  return b;
}

ModalResult modal_analysis(const AssembledBridge& bridge, int k, double tolerance) {
  const int n = bridge.n_free_dofs();
  if (k < 0 || k > n) throw Error(ErrorCode::kInvalidArgument, "mode count exceeds free DOF count");
  ModalResult out;
  out.frequencies.resize(k);
  out.modes.resize(n, k);
  if (k == 0) return out;

  const auto finish = [&](const Eigen::VectorXd& lambda, const Eigen::MatrixXd& vecs) {
    for (int i = 0; i < k; ++i) {
      out.frequencies[i] = std::sqrt(std::max(lambda[i], 0.0)) / (2.0 * kPi);
      out.modes.col(i) = vecs.col(i);
    }
    return out;
  };

  const int p = std::min(n, std::max(2 * k, k + 8));
  if (p == n) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(bridge.K),
                                                                Eigen::MatrixXd(bridge.M));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::kNonConvergence, "dense eigen-solver failed");
    return finish(es.eigenvalues(), es.eigenvectors());
  }

  // Shift-invert (shift 0: K is positive definite once supports are applied).
  Eigen::SimplicialLDLT<SparseMatrix> kinv(bridge.K);
  if (kinv.info() != Eigen::Success) throw Error(ErrorCode::kNonConvergence, "stiffness factorisation failed");

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index j = 0; j < x.size(); ++j) x.data()[j] = u(rng);

  Eigen::VectorXd previous = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::MatrixXd mx = bridge.M * x;
    const Eigen::MatrixXd y = kinv.solve(mx);
    // Ritz problem posed for mu = 1/lambda so the wanted (largest mu) pairs are
    // the well-conditioned end of the reduced spectrum; K y = M x gives y^T K y = y^T M x.
    const Eigen::MatrixXd kr = y.transpose() * mx;
    const Eigen::MatrixXd mr = y.transpose() * (bridge.M * y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (mr + mr.transpose()),
                                                                0.5 * (kr + kr.transpose()));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::kNonConvergence, "Ritz problem failed");
    const Eigen::VectorXd lambda_all = es.eigenvalues().reverse().cwiseInverse();
    const Eigen::MatrixXd q = es.eigenvectors().rowwise().reverse();
    x = y * q;
    // normalise columns to unit modal mass
    for (int j = 0; j < p; ++j) x.col(j) /= std::sqrt(x.col(j).dot(bridge.M * x.col(j)));
    const Eigen::VectorXd lambda = lambda_all.head(k);
    const double change = ((lambda - previous).cwiseAbs().array() / lambda.array().abs()).maxCoeff();
    previous = lambda;
    if (change < tolerance) return finish(lambda_all, x);
  }
  throw Error(ErrorCode::kNonConvergence, "subspace iteration did not reach tolerance");
}

std::vector<double> natural_frequencies(const AssembledBridge& bridge, int k) {
  const ModalResult r = modal_analysis(bridge, k);
  return {r.frequencies.data(), r.frequencies.data() + r.frequencies.size()};
}

ShapeEntries shape_entries(const BeamProperties& props, double x, int derivative) {
  ShapeEntries s;
  if (x < 0.0 || x > props.length) return s;
  const auto [e, xi] = locate(props, x);
  const auto h = hermite(xi, props.element_length(), derivative);
  const int nn = props.n_nodes();
  // Free-DOF numbering matches make_dof_map without building it.
  const auto trans = [&](int node) { return (node == 0 || node == nn - 1) ? -1 : 2 * node - 1; };
  const auto rot = [&](int node) { return node == 0 ? 0 : (node == nn - 1 ? 2 * node - 1 : 2 * node); };
  const std::array<int, 4> dofs{trans(e), rot(e), trans(e + 1), rot(e + 1)};
  for (int j = 0; j < 4; ++j) {
    if (dofs[j] < 0 || h[j] == 0.0) continue;
    s.index[s.count] = dofs[j];
    s.value[s.count] = h[j];
    ++s.count;
  }
  return s;
}

Eigen::VectorXd shape_vector(const AssembledBridge& bridge, double x) {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(bridge.n_free_dofs());
  const ShapeEntries s = shape_entries(bridge.props, x);
  for (int j = 0; j < s.count; ++j) l[s.index[j]] = s.value[j];
  return l;
}

Eigen::VectorXd static_deflection(const AssembledBridge& bridge,
                                  const std::vector<std::array<double, 2>>& loads) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(bridge.n_free_dofs());
  for (const auto& [x, p] : loads) {
    const ShapeEntries s = shape_entries(bridge.props, x);
    for (int j = 0; j < s.count; ++j) f[s.index[j]] += p * s.value[j];
  }
  Eigen::SimplicialLDLT<SparseMatrix> solver(bridge.K);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::kSingularEffectiveMatrix, "stiffness matrix is singular");
  return solver.solve(f);
}

std::array<double, 2> support_reactions(const AssembledBridge& bridge,
                                        const Eigen::VectorXd& displacement,
                                        const std::vector<std::array<double, 2>>& loads) {
  const BeamProperties& props = bridge.props;
  const int nn = props.n_nodes();
  Eigen::VectorXd full = Eigen::VectorXd::Zero(2 * nn);
  for (int i = 0; i < nn; ++i) {
    if (bridge.dofs.translation[i] >= 0) full[2 * i] = displacement[bridge.dofs.translation[i]];
    full[2 * i + 1] = displacement[bridge.dofs.rotation[i]];
  }
  Eigen::VectorXd internal = Eigen::VectorXd::Zero(2 * nn);
  for (int e = 0; e < props.n_elements; ++e) {
    const auto ke = element_stiffness((1.0 - bridge.element_damage[e]) * props.flexural_rigidity(),
                                      bridge.element_lengths[e]);
    const auto d = element_full_dofs(e);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) internal[d[i]] += ke[4 * i + j] * full[d[j]];
  }
  Eigen::VectorXd external = Eigen::VectorXd::Zero(2 * nn);
  for (const auto& [x, p] : loads) {
    if (x < 0.0 || x > props.length) continue;
    const auto [e, xi] = locate(props, x);
    const auto h = hermite(xi, props.element_length(), 0);
    const auto d = element_full_dofs(e);
    for (int j = 0; j < 4; ++j) external[d[j]] += p * h[j];
  }
  // Load carried by each support = applied nodal share - internal resisting force.
  const int right = 2 * (nn - 1);
  return {external[0] - internal[0], external[right] - internal[right]};
}

}  // namespace vino
