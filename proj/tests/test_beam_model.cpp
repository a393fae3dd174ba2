#include <doctest.h>

#include "vino/beam_model.hpp"
#include "vino/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace vino;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form n-th frequency of a simply supported Euler-Bernoulli beam.
double analytic_frequency(const BeamProperties& p, int n) {
  return n * n * kPi / (2.0 * p.length * p.length) * std::sqrt(p.flexural_rigidity() / p.mass_per_length);
}

RayleighParams no_damping() { return rayleigh_coefficients(1.0, 2.0, 0.0, 0.0); }

DamageField random_field(std::mt19937_64& rng, double length, int points, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  DamageField d = DamageField::zero(length, points);
  for (double& v : d.values) v = u(rng);
  return d;
}

double rel_asym(const SparseMatrix& m) {
  const Eigen::MatrixXd d(m);
  return (d - d.transpose()).norm() / d.norm();
}

}  // namespace

TEST_CASE("rayleigh coefficients reproduce the tabulated laboratory values") {
  const RayleighParams r = rayleigh_coefficients(3.64, 14.56, 0.007, 0.007);
  CHECK(r.alpha_dM == doctest::Approx(0.2562).epsilon(5e-4));
  CHECK(r.beta_dK == doctest::Approx(1.22e-4).epsilon(5e-3));
  // closed form, written out independently
  const double a = 4 * kPi * 3.64 * 14.56 * (0.007 * 14.56 - 0.007 * 3.64) / (14.56 * 14.56 - 3.64 * 3.64);
  const double b = (0.007 * 14.56 - 0.007 * 3.64) / (kPi * (14.56 * 14.56 - 3.64 * 3.64));
  CHECK(std::abs(r.alpha_dM - a) <= 1e-12 * a);
  CHECK(std::abs(r.beta_dK - b) <= 1e-12 * b);
  CHECK(r.damping_ratio(3.64) == doctest::Approx(0.007).epsilon(1e-12));
  CHECK(r.damping_ratio(14.56) == doctest::Approx(0.007).epsilon(1e-12));
}

TEST_CASE("rayleigh coefficients edge cases") {
  const RayleighParams z = rayleigh_coefficients(1.0, 2.0, 0.0, 0.0);
  CHECK(z.alpha_dM == 0.0);
  CHECK(z.beta_dK == 0.0);
  try {
    rayleigh_coefficients(2.0, 2.0, 0.007, 0.007);
    FAIL("expected DegenerateFrequencies");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateFrequencies);
  }
  CHECK_THROWS_AS(rayleigh_coefficients(0.0, 2.0, 0.01, 0.01), Error);
  CHECK_THROWS_AS(rayleigh_coefficients(3.0, 2.0, 0.01, 0.01), Error);
}

TEST_CASE("zero damage reproduces the undamaged assembly bit for bit") {
  BeamProperties p;
  p.n_elements = 16;
  const auto ray = rayleigh_coefficients(3.64, 14.56, 0.007, 0.007);
  const AssembledBridge healthy = assemble_bridge(p, DamageField::zero(p.length, 2), ray);
  const AssembledBridge fine = assemble_bridge(p, DamageField::zero(p.length, 101), ray);
  CHECK((Eigen::MatrixXd(healthy.K).array() == Eigen::MatrixXd(fine.K).array()).all());

  const AssembledBridge half = assemble_bridge(p, DamageField::uniform(p.length, 7, 0.5), ray);
  CHECK((Eigen::MatrixXd(half.K).array() == 0.5 * Eigen::MatrixXd(healthy.K).array()).all());
  CHECK((Eigen::MatrixXd(half.M).array() == Eigen::MatrixXd(healthy.M).array()).all());

  const Eigen::MatrixXd c = healthy.C;
  const Eigen::MatrixXd expected = ray.alpha_dM * Eigen::MatrixXd(healthy.M) + ray.beta_dK * Eigen::MatrixXd(healthy.K);
  CHECK((c - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("invalid damage is rejected") {
  BeamProperties p;
  p.n_elements = 8;
  DamageField d = DamageField::zero(p.length, 5);
  d.values[2] = 0.6;
  try {
    assemble_bridge(p, d, no_damping());
    FAIL("expected InvalidDamage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidDamage);
  }
  d.values[2] = -0.01;
  CHECK_THROWS_AS(assemble_bridge(p, d, no_damping()), Error);
  DamageField short_grid = DamageField::zero(p.length - 1.0, 5);
  CHECK_THROWS_AS(assemble_bridge(p, short_grid, no_damping()), Error);
}

TEST_CASE("free DOF count and matrix structure") {
  BeamProperties p;
  p.n_elements = 32;
  const AssembledBridge b = assemble_bridge(p, DamageField::zero(p.length, 2), no_damping());
  CHECK(b.n_free_dofs() == 2 * 33 - 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> km(Eigen::MatrixXd(b.K));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mm(Eigen::MatrixXd(b.M));
  CHECK(km.eigenvalues().minCoeff() > 0.0);
  CHECK(mm.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("symmetry holds for random damage fields") {
  std::mt19937_64 rng(7);
  BeamProperties p;
  p.n_elements = 24;
  for (int trial = 0; trial < 20; ++trial) {
    const AssembledBridge b = assemble_bridge(p, random_field(rng, p.length, 13, 0.5),
                                              rayleigh_coefficients(3.0, 12.0, 0.01, 0.02));
    CHECK(rel_asym(b.M) < 1e-12);
    CHECK(rel_asym(b.K) < 1e-12);
  }
}

TEST_CASE("first frequency matches the simply supported closed form") {
  BeamProperties p;  // 512 elements by default
  const AssembledBridge b = assemble_bridge(p, DamageField::zero(p.length, 2), no_damping());
  const double exact = analytic_frequency(p, 1);
  CHECK(exact == doctest::Approx(2.502).epsilon(1e-3));
  const auto f = natural_frequencies(b, 2);
  REQUIRE(f.size() == 2);
  CHECK(std::abs(f[0] - exact) / exact < 0.002);
  CHECK(f[1] / f[0] == doctest::Approx(4.0).epsilon(0.005));
  CHECK(f[1] == doctest::Approx(10.01).epsilon(0.002));
}

TEST_CASE("natural frequency edge cases and global scaling") {
  BeamProperties p;
  p.n_elements = 64;
  const AssembledBridge healthy = assemble_bridge(p, DamageField::zero(p.length, 2), no_damping());
  CHECK(natural_frequencies(healthy, 0).empty());
  const AssembledBridge damaged = assemble_bridge(p, DamageField::uniform(p.length, 2, 0.19), no_damping());
  const auto f0 = natural_frequencies(healthy, 4);
  const auto f1 = natural_frequencies(damaged, 4);
  for (int i = 0; i < 4; ++i) CHECK(f1[i] / f0[i] == doctest::Approx(0.9).epsilon(1e-9));
  CHECK_THROWS_AS(natural_frequencies(healthy, healthy.n_free_dofs() + 1), Error);
}

TEST_CASE("modal analysis agrees with the dense generalized eigen-solver") {
  BeamProperties p;
  p.n_elements = 40;
  std::mt19937_64 rng(3);
  const AssembledBridge b = assemble_bridge(p, random_field(rng, p.length, 9, 0.3), no_damping());
  const ModalResult m = modal_analysis(b, 5);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(b.K), Eigen::MatrixXd(b.M));
  for (int i = 0; i < 5; ++i) {
    const double ref = std::sqrt(es.eigenvalues()[i]) / (2 * kPi);
    CHECK(m.frequencies[i] == doctest::Approx(ref).epsilon(1e-9));
  }
  const Eigen::MatrixXd gram = m.modes.transpose() * (b.M * m.modes);
  CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-8);
}

TEST_CASE("adding damage never raises a natural frequency") {
  std::mt19937_64 rng(11);
  BeamProperties p;
  p.n_elements = 32;
  std::uniform_real_distribution<double> extra(0.0, 0.2);
  for (int trial = 0; trial < 10; ++trial) {
    DamageField lo = random_field(rng, p.length, 17, 0.3);
    DamageField hi = lo;
    for (double& v : hi.values) v += extra(rng);
    const auto fl = natural_frequencies(assemble_bridge(p, lo, no_damping()), 5);
    const auto fh = natural_frequencies(assemble_bridge(p, hi, no_damping()), 5);
    for (int i = 0; i < 5; ++i) CHECK(fh[i] <= fl[i] * (1 + 1e-12));
  }
}

TEST_CASE("first frequency converges monotonically with mesh refinement") {
  double previous_error = std::numeric_limits<double>::infinity();
  double error8 = 0.0;
  for (int n : {8, 32, 128, 512}) {
    BeamProperties p;
    p.n_elements = n;
    const double f = natural_frequencies(assemble_bridge(p, DamageField::zero(p.length, 2), no_damping()), 1)[0];
    const double err = std::abs(f - analytic_frequency(p, 1));
    // at 512 elements the discretisation error sits below the roundoff floor of the
    // stiffness assembly (relative ~1e-7), so monotonicity is checked to that floor
    CHECK(err <= previous_error + 1e-6 * f);
    if (n == 8) error8 = err;
    if (n == 512) CHECK(err < error8);
    previous_error = err;
  }
}

TEST_CASE("shape vector interpolation") {
  BeamProperties p;
  p.n_elements = 8;
  const AssembledBridge b = assemble_bridge(p, DamageField::zero(p.length, 2), no_damping());
  const double le = p.element_length();

  SUBCASE("interior node") {
    const Eigen::VectorXd l = shape_vector(b, 3 * le);
    const int t = b.dofs.translation[3];
    CHECK(l[t] == 1.0);
    CHECK(l.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("element midpoint") {
    const Eigen::VectorXd l = shape_vector(b, 2.5 * le);
    CHECK(l[b.dofs.translation[2]] == doctest::Approx(0.5));
    CHECK(l[b.dofs.rotation[2]] == doctest::Approx(le / 8));
    CHECK(l[b.dofs.translation[3]] == doctest::Approx(0.5));
    CHECK(l[b.dofs.rotation[3]] == doctest::Approx(-le / 8));
  }
  SUBCASE("off the bridge") {
    CHECK(shape_vector(b, -0.1).isZero(0.0));
    CHECK(shape_vector(b, p.length + 0.1).isZero(0.0));
  }
  SUBCASE("free numbering matches the DOF map at the supports") {
    const ShapeEntries s = shape_entries(p, p.length - 0.25 * le);
    bool has_last_rotation = false;
    for (int j = 0; j < s.count; ++j) has_last_rotation |= s.index[j] == b.dofs.rotation[p.n_elements];
    CHECK(has_last_rotation);
  }
}

TEST_CASE("static point load: closed-form deflection and reaction partition") {
  BeamProperties p;
  const AssembledBridge b = assemble_bridge(p, DamageField::zero(p.length, 2), no_damping());
  const double load = 150.9;
  const Eigen::VectorXd u = static_deflection(b, {{p.length / 2, load}});
  const double mid = shape_vector(b, p.length / 2).dot(u);
  const double exact = load * std::pow(p.length, 3) / (48 * p.flexural_rigidity());
  CHECK(exact == doctest::Approx(4.29e-3).epsilon(0.01));
  CHECK(std::abs(mid - exact) / exact < 0.005);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.0, p.length);
  BeamProperties coarse = p;
  coarse.n_elements = 20;
  const AssembledBridge c = assemble_bridge(coarse, DamageField::uniform(p.length, 2, 0.2), no_damping());
  for (int trial = 0; trial < 25; ++trial) {
    const double x = trial == 0 ? 0.0 : (trial == 1 ? p.length : pos(rng));
    const Eigen::VectorXd uu = static_deflection(c, {{x, 1.0}});
    const auto r = support_reactions(c, uu, {{x, 1.0}});
    CHECK(std::abs(r[0] + r[1] - 1.0) < 1e-9);
    CHECK(r[1] == doctest::Approx(x / p.length).epsilon(1e-9));
  }
}
