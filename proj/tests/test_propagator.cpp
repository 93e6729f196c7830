#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smanakov/observables.hpp"
#include "smanakov/propagator.hpp"

using namespace smanakov;

namespace {

Vec3 random_chi(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng), n(rng)};
}

FieldState gaussian_bump(const Grid& g, double width = 1.0) {
  FieldState X(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    const double e = std::exp(-x * x / (2.0 * width * width));
    X[j] = {cplx(e, 0.0), cplx(0.0, 0.5 * e)};
  }
  return X;
}

} // namespace

TEST(Cayley, ScalarFactor) {
  EXPECT_EQ(cayley_factor(0.0), cplx(1.0, 0.0));
  EXPECT_NEAR(std::abs(cayley_factor(2.0) - cplx(0.0, -1.0)), 0.0, 1e-15);
  for (double lam : {-50.0, -1.0, 0.3, 7.0, 1e6}) EXPECT_NEAR(std::abs(cayley_factor(lam)), 1.0, 1e-15);
}

TEST(Assemble, PlusDiagonalWithoutNoise) {
  const Grid g = make_grid(2.0, 0.5, Boundary::Dirichlet);
  const double h = 0.1;
  const StepOperator U = assemble(g, h, 0.0, {0, 0, 0}, Backend::FiniteDifference);
  const auto plus = detail::shifted(U.fd().generator, 0.5);
  for (const auto& d : plus.diag) {
    EXPECT_LT(max_abs(d - Block2::scalar(cplx(1.0, h / (0.5 * 0.5)))), 1e-15);
  }
}

TEST(Assemble, BackendBoundaryMismatch) {
  const Grid dir = make_grid(2.0, 0.5, Boundary::Dirichlet);
  const Grid per = make_grid(2.0, 0.5, Boundary::Periodic);
  EXPECT_THROW(assemble(dir, 0.1, 1.0, {1, 0, 0}, Backend::Spectral), BackendBoundaryMismatch);
  EXPECT_THROW(assemble(per, 0.1, 1.0, {1, 0, 0}, Backend::FiniteDifference), BackendBoundaryMismatch);
  EXPECT_THROW(assemble(dir, 0.0, 1.0, {1, 0, 0}, Backend::FiniteDifference), ConfigError);
  EXPECT_THROW(assemble(dir, 0.1, -1.0, {1, 0, 0}, Backend::FiniteDifference), ConfigError);
}

TEST(Assemble, GeneratorIsAntiHermitian) {
  std::mt19937_64 rng(11);
  const Grid g = make_grid(2.0, 0.5, Boundary::Dirichlet);
  for (int trial = 0; trial < 20; ++trial) {
    const StepOperator U = assemble(g, 0.05, 1.3, random_chi(rng), Backend::FiniteDifference);
    const auto D = oracle::expand(U.fd().generator);
    for (std::size_t i = 0; i < D.n; ++i) {
      for (std::size_t j = 0; j < D.n; ++j) {
        EXPECT_LT(std::abs(D(i, j) + std::conj(D(j, i))), 1e-13);
      }
    }
  }
}

TEST(SpectralSymbol, EigenvaluesMatchCharacteristicPolynomial) {
  Block2 symbol, cayley, plus_inv;
  detail::spectral_multipliers(1.0, 1.0, {1.0, 0.0, 0.0}, 1.0, symbol, cayley, plus_inv);
  const auto ev = oracle::hermitian_eigenvalues(symbol);
  EXPECT_NEAR(ev[0], 0.0, 1e-14);
  EXPECT_NEAR(ev[1], 2.0, 1e-14);
  // Eigenvector (1,1)/sqrt2 belongs to lambda = 2, so the Cayley factor there is -i.
  const Spinor v{1.0, 1.0};
  const Spinor w = cayley * v;
  EXPECT_NEAR(std::abs(w.first - cplx(0.0, -1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(w.second - cplx(0.0, -1.0)), 0.0, 1e-14);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 chi = random_chi(rng);
    const double xi = u(rng), h = 0.01 + std::abs(u(rng)) / 10, gamma = std::abs(u(rng));
    detail::spectral_multipliers(h, gamma, chi, xi, symbol, cayley, plus_inv);
    const auto e = oracle::hermitian_eigenvalues(symbol);
    const double c = h * xi * xi, s = std::abs(xi) * std::sqrt(gamma * h) * norm3(chi);
    EXPECT_NEAR(e[0], c - s, 1e-12 * (1 + c + s));
    EXPECT_NEAR(e[1], c + s, 1e-12 * (1 + c + s));
    // Cayley factor agrees with (1 + iS/2)^{-1}(1 - iS/2) formed directly.
    const Block2 direct = invert2(Block2::identity() + (0.5 * I_unit) * symbol) *
                          (Block2::identity() - (0.5 * I_unit) * symbol);
    EXPECT_LT(max_abs(direct - cayley), 1e-12);
    EXPECT_LT(max_abs(cayley.adjoint() * cayley - Block2::identity()), 1e-13);
  }
}

TEST(SpectralSymbol, ConstantModeIsIdentity) {
  const Grid g = make_grid(4.0, 0.5, Boundary::Periodic);
  const StepOperator U = assemble(g, 0.1, 1.0, {0.3, -2.0, 1.0}, Backend::Spectral);
  FieldState X(g);
  for (auto& v : X) v = {cplx(1.0, 2.0), cplx(-0.5, 0.0)};
  const FieldState Y = apply_cayley(U, X);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_LT(std::abs(Y[j].first - X[j].first), 1e-14);
    EXPECT_LT(std::abs(Y[j].second - X[j].second), 1e-14);
  }
}

class Unitarity : public ::testing::TestWithParam<Backend> {};

TEST_P(Unitarity, RandomTuples) {
  const Backend backend = GetParam();
  const Grid g = make_grid(5.0, 0.25, boundary_for(backend));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uh(1e-4, 1e-1), ug(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const StepOperator U = assemble(g, uh(rng), ug(rng), random_chi(rng), backend);
    const FieldState X = oracle::random_field(g, rng);
    EXPECT_NEAR(l2_norm(apply_cayley(U, X)) / l2_norm(X), 1.0, 1e-12);
  }
}

TEST_P(Unitarity, CayleyEqualsSolvePlusOfMinus) {
  const Backend backend = GetParam();
  const Grid g = make_grid(3.0, 0.25, boundary_for(backend));
  std::mt19937_64 rng(14);
  const StepOperator U = assemble(g, 0.02, 1.0, random_chi(rng), backend);
  const FieldState X = oracle::random_field(g, rng);
  const FieldState a = apply_cayley(U, X);
  const FieldState b = solve_plus(U, apply_minus(U, X));
  EXPECT_LT(l2_norm(a - b), 1e-12 * l2_norm(X));
  // (Id - H/2) X = X - H X / 2.
  FieldState c(X);
  c.add_scaled(-0.5, apply_generator(U, X));
  EXPECT_LT(l2_norm(apply_minus(U, X) - c), 1e-12 * l2_norm(X));
}

INSTANTIATE_TEST_SUITE_P(Backends, Unitarity,
                         ::testing::Values(Backend::FiniteDifference, Backend::Spectral),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Propagator, ComposeAppliesInOrder) {
  const Grid g = make_grid(3.0, 0.25, Boundary::Dirichlet);
  std::mt19937_64 rng(15);
  std::vector<StepOperator> ops;
  for (int i = 0; i < 4; ++i) ops.push_back(assemble(g, 0.01, 1.0, random_chi(rng), Backend::FiniteDifference));
  const FieldState X = oracle::random_field(g, rng);
  FieldState Y(X);
  for (const auto& op : ops) Y = apply_cayley(op, Y);
  EXPECT_EQ(compose_apply(ops, X), Y);
  EXPECT_EQ(compose_apply(std::span<const StepOperator>(ops.data(), 0), X), X);
  EXPECT_NEAR(l2_norm(Y), l2_norm(X), 1e-12 * l2_norm(X));
}

TEST(Propagator, ComponentsDecoupleWithoutNoise) {
  const Grid g = make_grid(3.0, 0.25, Boundary::Dirichlet);
  std::mt19937_64 rng(16);
  FieldState X = oracle::random_field(g, rng);
  for (auto& v : X) v.second = 0.0;
  for (Vec3 chi : {Vec3{1, 2, 3}, Vec3{-1, 0, 0}}) {
    const FieldState Y = apply_cayley(assemble(g, 0.05, 0.0, chi, Backend::FiniteDifference), X);
    for (const auto& v : Y) EXPECT_EQ(v.second, cplx(0.0));
  }
}

TEST(Propagator, NoNoiseReducesToScalarCrankNicolson) {
  const Grid g = make_grid(2.0, 0.25, Boundary::Dirichlet);
  const std::size_t m = g.size();
  const double h = 0.03, r = h / (g.dx() * g.dx());
  std::mt19937_64 rng(17);
  const FieldState X = oracle::random_field(g, rng);
  const FieldState Y = apply_cayley(assemble(g, h, 0.0, {0.4, 1, 2}, Backend::FiniteDifference), X);
  // (I - i h/2 D2) u+ = (I + i h/2 D2) u for each component separately.
  oracle::Dense L(m);
  for (std::size_t i = 0; i < m; ++i) {
    L(i, i) = cplx(1.0, r);
    if (i + 1 < m) L(i, i + 1) = L(i + 1, i) = cplx(0.0, -r / 2);
  }
  for (int comp = 0; comp < 2; ++comp) {
    std::vector<cplx> u(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) u[i] = comp == 0 ? X[i].first : X[i].second;
    for (std::size_t i = 0; i < m; ++i) {
      cplx lap = -2.0 * u[i];
      if (i > 0) lap += u[i - 1];
      if (i + 1 < m) lap += u[i + 1];
      rhs[i] = u[i] + cplx(0.0, r / 2) * lap;
    }
    const auto expect = oracle::lu_solve(L, rhs);
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_LT(std::abs((comp == 0 ? Y[i].first : Y[i].second) - expect[i]), 1e-13);
    }
  }
}

TEST(Propagator, BackendsAgreeToSecondOrderInSpace) {
  // Same noise increments on both backends; node i of the Dirichlet grid is
  // node i + 1 of the periodic grid.
  const double a = 16.0, h = 0.01;
  std::mt19937_64 rng(18);
  std::vector<Vec3> chis;
  for (int n = 0; n < 20; ++n) chis.push_back(random_chi(rng));
  std::vector<double> errs;
  const std::vector<double> dxs{0.4, 0.2, 0.1, 0.05};
  for (double dx : dxs) {
    const Grid gd = make_grid(a, dx, Boundary::Dirichlet);
    const Grid gp = make_grid(a, dx, Boundary::Periodic);
    FieldState Xd = gaussian_bump(gd, 1.5), Xp = gaussian_bump(gp, 1.5);
    for (const auto& chi : chis) {
      Xd = apply_cayley(assemble(gd, h, 1.0, chi, Backend::FiniteDifference), Xd);
      Xp = apply_cayley(assemble(gp, h, 1.0, chi, Backend::Spectral), Xp);
    }
    double e = 0.0;
    for (std::size_t j = 0; j < gd.size(); ++j) e += (Xd[j] - Xp[j + 1]).density();
    errs.push_back(std::sqrt(e * dx));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double order = std::log2(errs[i - 1] / errs[i]);
    EXPECT_GT(order, 1.7) << "dx=" << dxs[i];
    EXPECT_LT(order, 2.3) << "dx=" << dxs[i];
  }
}
