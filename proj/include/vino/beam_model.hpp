#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <vector>

namespace vino {

using SparseMatrix = Eigen::SparseMatrix<double>;

inline constexpr double kDefaultDeltaMax = 0.5;

/// Simply supported Euler-Bernoulli beam. Defaults reproduce the laboratory
/// bridge (5.4 m steel I-section loaded about its weak axis).
struct BeamProperties {
  double length = 5.4;               // m
  double mass_per_length = 53.47;    // kg/m
  double youngs_modulus = 2.1e11;    // N/m^2
  double moment_of_inertia = 5.49e-7;  // m^4
  int n_elements = 512;

  void validate() const;
  int n_nodes() const { return n_elements + 1; }
  int n_free_dofs() const { return 2 * n_nodes() - 2; }
  double element_length() const { return length / n_elements; }
  double flexural_rigidity() const { return youngs_modulus * moment_of_inertia; }
};

/// Fractional flexural-stiffness loss sampled on a strictly increasing grid.
struct DamageField {
  std::vector<double> grid;    // m
  std::vector<double> values;  // dimensionless, [0, delta_max]

  static DamageField zero(double length, int n_points);
  static DamageField uniform(double length, int n_points, double value);

  /// Linear interpolation, clamped to the end values outside the grid.
  double at(double x) const;
  /// Throws InvalidDamage unless the field satisfies its invariants.
  void validate(double delta_max = kDefaultDeltaMax) const;
};

/// Evenly spaced node coordinates 0, L/n, ..., L.
std::vector<double> uniform_grid(double length, int n_points);

struct RayleighParams {
  double f1 = 0.0;
  double f2 = 0.0;
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double alpha_dM = 0.0;  // 1/s
  double beta_dK = 0.0;   // s

  /// Modal damping ratio produced by these coefficients at frequency f.
  double damping_ratio(double f) const;
};

/// Mass and stiffness proportional coefficients matching zeta1 at f1 and zeta2 at f2.
RayleighParams rayleigh_coefficients(double f1, double f2, double zeta1, double zeta2);

/// Free-DOF indices for node translations/rotations; -1 marks a fixed DOF.
struct DofMap {
  std::vector<int> translation;
  std::vector<int> rotation;
};

DofMap make_dof_map(const BeamProperties& props);

struct AssembledBridge {
  BeamProperties props;
  RayleighParams rayleigh;
  DofMap dofs;
  SparseMatrix M;
  SparseMatrix C;
  SparseMatrix K;
  std::vector<double> element_lengths;
  std::vector<double> element_damage;

  int n_free_dofs() const { return static_cast<int>(M.rows()); }
};

/// Consistent-mass Euler-Bernoulli assembly with element stiffness scaled by
/// (1 - delta) at the element midpoint, pin-roller supports and Rayleigh damping.
AssembledBridge assemble_bridge(const BeamProperties& props, const DamageField& damage,
                                const RayleighParams& rayleigh,
                                double delta_max = kDefaultDeltaMax);

std::array<double, 16> element_stiffness(double ei, double le);
std::array<double, 16> element_mass(double m, double le);

struct ModalResult {
  Eigen::VectorXd frequencies;  // Hz, ascending
  Eigen::MatrixXd modes;        // columns mass-normalised over free DOFs
};

/// k lowest modes of (K, M) by shift-invert subspace iteration.
ModalResult modal_analysis(const AssembledBridge& bridge, int k, double tolerance = 1e-10);
std::vector<double> natural_frequencies(const AssembledBridge& bridge, int k);

/// Non-zero entries of an interpolation vector: at most the four DOFs of one element.
struct ShapeEntries {
  std::array<int, 4> index{};
  std::array<double, 4> value{};
  int count = 0;

  double dot(const Eigen::Ref<const Eigen::VectorXd>& field) const {
    double s = 0.0;
    for (int j = 0; j < count; ++j) s += value[j] * field[index[j]];
    return s;
  }
};

/// Hermite cubic interpolation of the vertical displacement at x (derivative
/// order 1 gives the section rotation). Empty when x lies outside [0, L].
ShapeEntries shape_entries(const BeamProperties& props, double x, int derivative = 0);
Eigen::VectorXd shape_vector(const AssembledBridge& bridge, double x);

/// Static displacement over the free DOFs for point loads (position, force).
Eigen::VectorXd static_deflection(const AssembledBridge& bridge,
                                  const std::vector<std::array<double, 2>>& loads);

/// Vertical reactions at the left and right supports for a static free-DOF
/// displacement state under the given point loads, recovered from the
/// unconstrained element equilibrium.
std::array<double, 2> support_reactions(const AssembledBridge& bridge,
                                        const Eigen::VectorXd& displacement,
                                        const std::vector<std::array<double, 2>>& loads);

}  // namespace vino
