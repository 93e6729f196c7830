#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>

#include "oracles.hpp"
#include "smanakov/block_tridiag.hpp"

using namespace smanakov;

namespace {

FieldState random_rhs(std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<Spinor> v(m);
  for (auto& s : v) s = {cplx(n(rng), n(rng)), cplx(n(rng), n(rng))};
  return FieldState(std::move(v));
}

} // namespace

TEST(Invert2, Examples) {
  EXPECT_EQ(invert2(Block2::identity()), Block2::identity());
  const Block2 b{2.0, 1.0, 1.0, 1.0};
  EXPECT_LT(max_abs(invert2(b) - Block2{1.0, -1.0, -1.0, 2.0}), 1e-15);
  EXPECT_THROW(invert2(Block2{1.0, 2.0, 2.0, 4.0}), SingularPivot);
  EXPECT_THROW(invert2(Block2::zero()), SingularPivot);
}

TEST(Matvec, IdentityAndDenseOracle) {
  std::mt19937_64 rng(1);
  const FieldState X = random_rhs(5, rng);
  EXPECT_EQ(matvec(BlockTridiagonalMatrix::identity(5), X), X);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 8;
    const auto A = oracle::random_well_conditioned(m, rng);
    const FieldState Y = random_rhs(m, rng);
    const auto expect = oracle::multiply(oracle::expand(A), oracle::flatten(Y));
    EXPECT_LT(oracle::rel_diff(oracle::flatten(matvec(A, Y)), expect), 1e-14);
  }
}

TEST(Solve, IdentityReturnsRhs) {
  std::mt19937_64 rng(2);
  const FieldState B = random_rhs(4, rng);
  EXPECT_EQ(solve(BlockTridiagonalMatrix::identity(4), B), B);
}

TEST(Solve, SmallSystemsMatchDenseLu) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng() % 8;
    const auto A = oracle::random_well_conditioned(m, rng);
    const FieldState B = random_rhs(m, rng);
    const FieldState X = solve(A, B);
    const auto dense = oracle::lu_solve(oracle::expand(A), oracle::flatten(B));
    EXPECT_LT(oracle::rel_diff(oracle::flatten(X), dense), 1e-12);
    EXPECT_LT(oracle::rel_diff(oracle::flatten(matvec(A, X)), oracle::flatten(B)), 1e-12);
  }
}

TEST(Solve, FactorizationIsReusableAndLinear) {
  std::mt19937_64 rng(4);
  const auto A = oracle::random_well_conditioned(64, rng);
  const BlockThomasFactorization F(A);
  const FieldState B1 = random_rhs(64, rng);
  const FieldState B2 = random_rhs(64, rng);
  const cplx a(0.3, -1.2), b(2.0, 0.5);
  FieldState combo(B1);
  combo *= a;
  combo.add_scaled(b, B2);
  FieldState expect = F.solve(B1);
  expect *= a;
  expect.add_scaled(b, F.solve(B2));
  EXPECT_LT(oracle::rel_diff(oracle::flatten(F.solve(combo)), oracle::flatten(expect)), 1e-13);
  EXPECT_EQ(F.solve(B1), solve(A, B1));
}

TEST(Solve, SingularPivotAndDimensionErrors) {
  BlockTridiagonalMatrix A = BlockTridiagonalMatrix::identity(3);
  A.diag[1] = Block2::zero();
  std::mt19937_64 rng(5);
  EXPECT_THROW(solve(A, random_rhs(3, rng)), SingularPivot);
  EXPECT_THROW(solve(BlockTridiagonalMatrix::identity(3), random_rhs(4, rng)), DimensionMismatch);
  BlockTridiagonalMatrix bad(3);
  bad.sub.pop_back();
  EXPECT_THROW(bad.validate(), DimensionMismatch);
}

TEST(Solve, CostIsLinearInSize) {
  std::mt19937_64 rng(6);
  auto time_solve = [&](std::size_t m, int reps) -> double {
    // Factor and solve into preallocated storage, so only the algorithm is timed
    // (fresh large buffers would add page-fault cost that is not O(m) work).
    const auto A = oracle::random_well_conditioned(m, rng);
    const FieldState B = random_rhs(m, rng);
    BlockThomasFactorization F(A);
    FieldState X(B);
    std::vector<double> samples;
    for (int batch = 0; batch < 15; ++batch) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < reps; ++r) {
        F.factor(A);
        std::copy(B.begin(), B.end(), X.begin());
        F.solve_in_place(X);
      }
      samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    if (!X.all_finite()) ADD_FAILURE() << "non-finite solve";
    return *std::min_element(samples.begin(), samples.end());
  };
  time_solve(1000, 50);  // warm-up
  const double small = time_solve(1000, 200);
  const double large = time_solve(10000, 20);
  // Same total work: the ratio of per-solve times is large/small * 10.
  const double ratio = large / small * 10.0;
  EXPECT_GT(ratio, 8.0);
  EXPECT_LT(ratio, 12.0);
}
