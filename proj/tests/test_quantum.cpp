#include "oracles.hpp"
#include "qmcl/log.hpp"
#include "qmcl/quantum.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace qmcl;

namespace {

// W-orthonormal basis of R^n whose first column is the constant function.
SpectralBasis constant_led_basis(int num_times, int num_cells, std::mt19937_64& rng) {
  const int n = num_times * num_cells;
  std::normal_distribution<double> g;
  Mat a(n, n);
  a.col(0).setOnes();
  for (Eigen::Index i = n; i < a.size(); ++i) a.data()[i] = g(rng);
  Mat q = Eigen::HouseholderQR<Mat>(a).householderQ() * Mat::Identity(n, n);
  if (q(0, 0) < 0) q.col(0) *= -1;
  SpectralBasis b;
  b.weights = Vec::Constant(n, 1.0 / n);
  b.phi = std::sqrt(double(n)) * q;
  b.eigvals = Vec::Ones(n);
  b.blocks.push_back({0, n, 0, n, num_times, num_cells});
  return b;
}

Vec coefficients_of(const Vec& function, const SpectralBasis& b) {
  return b.phi.transpose() * b.weights.cwiseProduct(function);
}

}  // namespace

TEST_CASE("projected multiplication operators") {
  std::mt19937_64 rng(30);
  const auto b = oracle::complete_basis(4, 5, rng);
  const Mat c = project_multiplication(Vec::Constant(20, 2.5), b);
  CHECK((c - 2.5 * Mat::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);

  std::uniform_real_distribution<double> u(0, 3);
  Vec v(20);
  for (int i = 0; i < 20; ++i) v[i] = u(rng);
  const Mat a = project_multiplication(v, b);
  CHECK(a == a.transpose());
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().minCoeff() >= -1e-9);
  CHECK(a.trace() == doctest::Approx(b.weights.dot(v) * 20).epsilon(1e-10));
  // Complete basis: similar to diag(values).
  Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues();
  Vec sorted = v;
  std::sort(sorted.data(), sorted.data() + 20);
  CHECK((ev - sorted).cwiseAbs().maxCoeff() < 1e-10);

  const auto obs = build_observables(Vec::Zero(20), Vec::Constant(20, -1.0), b);
  CHECK(obs.h.matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK((obs.q.matrix + Mat::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(project_multiplication(Vec::Zero(3), b), DomainError);
}

TEST_CASE("transfer operator") {
  std::mt19937_64 rng(31);
  SUBCASE("constant function loses the first times") {
    const auto b0 = constant_led_basis(6, 3, rng);
    const auto b1 = constant_led_basis(6, 3, rng);
    const std::vector<SpectralBasis> parts{b0, b1};
    const auto b = assemble_multi_trajectory(parts);
    const auto p = build_transfer(b);
    Vec one = Vec::Zero(b.size());
    one[0] = one[18] = 1 / std::sqrt(2.0);
    CHECK(Vec(b.phi * one).isApprox(Vec::Ones(36), 1e-12));
    CHECK(one.dot(p.matrix * one) == doctest::Approx(1.0 - 2.0 / 12).epsilon(1e-12));
    CHECK(p.operator_norm <= 1.0 + 1e-9);
  }
  SUBCASE("single time maps everything to zero") {
    const auto b = oracle::complete_basis(1, 4, rng);
    CHECK(build_transfer(b).matrix.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("complete basis shifts sample values") {
    const auto b = oracle::complete_basis(5, 3, rng);
    std::normal_distribution<double> g;
    Vec f(15);
    for (int i = 0; i < 15; ++i) f[i] = g(rng);
    const Vec moved = b.phi * (build_transfer(b).matrix * coefficients_of(f, b));
    for (int n = 0; n < 5; ++n) {
      for (int m = 0; m < 3; ++m) {
        const double expect = n == 0 ? 0.0 : f[(n - 1) * 3 + m];
        CHECK(std::abs(moved[n * 3 + m] - expect) < 1e-10);
      }
    }
  }
}

TEST_CASE("density initialization and evolution") {
  std::mt19937_64 rng(32);
  const auto b = constant_led_basis(4, 3, rng);
  const auto rho = init_density_uniform(b, 7);
  CHECK(rho.num_cells() == 7);
  CHECK(std::abs(rho.rho(0, 3) - 1.0) < 1e-12);
  CHECK(rho.rho.col(3).tail(11).cwiseAbs().maxCoeff() < 1e-12);
  for (int m = 0; m < 7; ++m) CHECK(std::abs(rho.rho.col(m).norm() - 1.0) < 1e-12);

  std::normal_distribution<double> g;
  DensityField field{Mat(12, 3)};
  for (Eigen::Index i = 0; i < field.rho.size(); ++i) field.rho.data()[i] = g(rng);
  field.rho.colwise().normalize();
  const auto same = evolve_density(field, TransferMatrix{Mat::Identity(12, 12), 1});
  CHECK((same.rho - field.rho).cwiseAbs().maxCoeff() < 1e-15);
  const auto twice = evolve_density(field, TransferMatrix{2 * Mat::Identity(12, 12), 2});
  CHECK((twice.rho - field.rho).cwiseAbs().maxCoeff() < 1e-15);

  // A density concentrated at (n, m) advances to (n + 1, m).
  const auto c = oracle::complete_basis(4, 3, rng);
  Vec spike = Vec::Zero(12);
  spike[1 * 3 + 2] = 1;
  DensityField d{coefficients_of(spike, c).normalized()};
  const auto next = evolve_density(d, build_transfer(c));
  Vec fn = c.phi * next.rho.col(0);
  fn /= fn.cwiseAbs().maxCoeff();
  Vec expect = Vec::Zero(12);
  expect[2 * 3 + 2] = 1;
  CHECK((fn - expect).cwiseAbs().maxCoeff() < 1e-10);

  try {
    evolve_density(field, TransferMatrix{Mat::Zero(12, 12), 0});
    FAIL("expected DegenerateDensity");
  } catch (const DegenerateDensity& e) {
    CHECK(e.cell() == 0);
  }
}

TEST_CASE("conditioning features") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  SweState s(8);
  for (int m = 0; m < 8; ++m) {
    s.h[m] = u(rng);
    s.q[m] = u(rng);
  }
  ConditioningKernel k;
  k.stencil_width = 5;
  k.epsilon = 0.3;
  k.stencils = stencil_embed(s, 5);
  const Vec f = feature_vector(s, 3, k);
  CHECK(f[3] == 1.0);
  CHECK(f.maxCoeff() == 1.0);
  CHECK(feature_vector(s.shifted(1), 4, k) == f);

  k.bandwidth = variable_scales(k.stencils, 0.3, 5);
  const Vec fv = feature_vector(s, 3, k);
  CHECK(fv[3] == 1.0);
  CHECK(feature_vector(s.shifted(1), 4, k) == fv);
  const Mat all = feature_vectors(s, k);
  CHECK(all.col(6) == feature_vector(s, 6, k));
}

TEST_CASE("conditioning densities") {
  std::mt19937_64 rng(34);
  const auto b = oracle::complete_basis(5, 2, rng);
  std::normal_distribution<double> g;
  DensityField field{Mat(10, 3)};
  for (Eigen::Index i = 0; i < field.rho.size(); ++i) field.rho.data()[i] = g(rng);
  field.rho.colwise().normalize();

  const auto ones = condition_density(field, Mat::Ones(10, 3), b);
  CHECK((ones.rho - field.rho).cwiseAbs().maxCoeff() < 1e-12);
  const auto scaled = condition_density(field, Mat::Constant(10, 3, 0.2), b);
  CHECK((scaled.rho - field.rho).cwiseAbs().maxCoeff() < 1e-12);

  // Indicator features: classical restriction and renormalization of the
  // wavefunction psi = Phi rho.
  Mat ind = Mat::Zero(10, 3);
  ind(2, 0) = ind(7, 0) = ind(8, 0) = 1;
  ind(0, 1) = 1;
  ind.col(2).setOnes();
  ind(5, 2) = 0;
  const auto post = condition_density(field, ind, b);
  for (int m = 0; m < 3; ++m) {
    Vec psi = b.phi * field.rho.col(m);
    for (int s = 0; s < 10; ++s) psi[s] *= ind(s, m);
    psi /= std::sqrt(b.weights.dot(psi.cwiseAbs2()));
    const Vec got = b.phi * post.rho.col(m);
    CHECK((got - psi).cwiseAbs().maxCoeff() < 1e-8);
  }

  // Effect matrix agrees with the matrix-free path.
  Vec f(10);
  for (int s = 0; s < 10; ++s) f[s] = std::abs(g(rng));
  const Vec direct = (effect_matrix(f, b) * field.rho.col(1)).normalized();
  const auto mf = condition_density(DensityField{field.rho.col(1)}, f, b);
  CHECK((mf.rho.col(0) - direct).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<std::string> seen;
  auto previous = set_warning_sink([&](const std::string& m) { seen.push_back(m); });
  std::vector<int> skipped;
  Mat none = Mat::Ones(10, 3);
  none.col(1).setZero();
  const auto kept = condition_density(field, none, b, &skipped);
  set_warning_sink(previous);
  CHECK(skipped == std::vector<int>{1});
  CHECK(seen.size() == 1);
  CHECK(kept.rho.col(1) == field.rho.col(1));
  CHECK_THROWS_AS(condition_density(field, -Mat::Ones(10, 3), b), DomainError);
}

TEST_CASE("surrogate flux") {
  std::mt19937_64 rng(35);
  const auto b = oracle::complete_basis(3, 4, rng);
  std::normal_distribution<double> g;
  DensityField field{Mat(12, 4)};
  for (Eigen::Index i = 0; i < field.rho.size(); ++i) field.rho.data()[i] = g(rng);
  field.rho.colwise().normalize();

  Observables c{{0.7 * Mat::Identity(12, 12), "h"}, {-2 * Mat::Identity(12, 12), "q"}};
  const auto fc = surrogate_flux(field, c);
  CHECK((fc.g_h.array() - 0.7).abs().maxCoeff() < 1e-14);
  CHECK((fc.g_q.array() + 2).abs().maxCoeff() < 1e-14);

  Vec vh(12), vq(12);
  for (int s = 0; s < 12; ++s) {
    vh[s] = std::abs(g(rng));
    vq[s] = g(rng);
  }
  const auto obs = build_observables(vh, vq, b);
  CHECK(surrogate_flux(field, obs).g_h.minCoeff() >= -1e-9);

  // Density concentrated on sample s returns the training flux at s.
  for (int s : {0, 5, 11}) {
    Vec spike = Vec::Zero(12);
    spike[s] = 1;
    DensityField d{coefficients_of(spike, b).normalized()};
    const auto f = surrogate_flux(d, obs);
    CHECK(std::abs(f.g_h[0] - vh[s]) < 1e-8);
    CHECK(std::abs(f.g_q[0] - vq[s]) < 1e-8);
  }
}
