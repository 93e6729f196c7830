#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "smanakov/integrators.hpp"
#include "smanakov/noise.hpp"

using namespace smanakov;

namespace {

const Grid& small_grid() {
  static const Grid g = make_grid(10.0, 0.25, Boundary::Dirichlet);
  return g;
}

StepOperator op_for(const BrownianPath& p, std::size_t n, double gamma = 1.0,
                    Backend b = Backend::FiniteDifference, const Grid& g = small_grid()) {
  return assemble(g, p.step_size(), gamma, scaled_chi(p, n), b);
}

SchemeConfig config(SchemeId s, double gamma = 1.0) {
  SchemeConfig c;
  c.scheme = s;
  c.gamma = gamma;
  return c;
}

double log2_slope(const std::vector<double>& hs, const std::vector<double>& es) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    mx += std::log2(hs[i]);
    my += std::log2(es[i]);
  }
  mx /= hs.size();
  my /= hs.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    sxy += (std::log2(hs[i]) - mx) * (std::log2(es[i]) - my);
    sxx += (std::log2(hs[i]) - mx) * (std::log2(hs[i]) - mx);
  }
  return sxy / sxx;
}

} // namespace

TEST(Schemes, ParseAndPrint) {
  for (SchemeId s : all_schemes) EXPECT_EQ(parse_scheme(to_string(s)), s);
  EXPECT_EQ(to_string(SchemeId::ModEXP), "modexp");
  EXPECT_THROW(parse_scheme("rk4"), ConfigError);
}

TEST(Schemes, ZeroFieldStaysZero) {
  const auto p = sample_path({1, 0}, 3, 0.01);
  for (SchemeId s : all_schemes) {
    const auto r = run_trajectory(FieldState(small_grid()), p, config(s));
    for (const auto& X : r.trajectory.states) EXPECT_EQ(l2_norm(X), 0.0) << to_string(s);
  }
}

TEST(Schemes, WithoutNonlinearityAllAgreeWithCayleyFlow) {
  const auto p = sample_path({2, 0}, 20, 0.01);
  const FieldState X0 = soliton_initial_condition(small_grid());
  FieldState expect(X0);
  for (std::size_t n = 0; n < p.steps(); ++n) expect = apply_cayley(op_for(p, n), expect);
  for (SchemeId s : all_schemes) {
    SchemeConfig c = config(s);
    c.nonlinearity = Nonlinearity::truncated(0.0);
    const FieldState got = run_trajectory(X0, p, c).trajectory.states.back();
    EXPECT_LT(l2_norm(got - expect), 1e-13) << to_string(s);
  }
}

TEST(Schemes, FreeFlightWithoutNoisePreservesNorm) {
  const auto p = sample_path({3, 0}, 50, 0.02);
  const FieldState X0 = soliton_initial_condition(small_grid());
  SchemeConfig c = config(SchemeId::SEXP, 0.0);
  c.nonlinearity = Nonlinearity::off();
  for (const auto& X : run_trajectory(X0, p, c).trajectory.states) {
    EXPECT_NEAR(l2_norm(X), l2_norm(X0), 1e-12 * l2_norm(X0));
  }
}

TEST(Nonlinearity, Variants) {
  std::mt19937_64 rng(4);
  const FieldState X = oracle::random_field(small_grid(), rng, 0.1);
  EXPECT_EQ(Nonlinearity::cubic().apply(X), cubic_nonlinearity(X));
  EXPECT_TRUE(Nonlinearity::truncated(0.0).is_off());
  EXPECT_THROW(Nonlinearity::truncated(-1.0), InvalidRadius);
  const double h1sq = h1_norm_squared(X);
  EXPECT_EQ(Nonlinearity::truncated(h1sq).strength(X), 1.0);
  EXPECT_EQ(Nonlinearity::truncated(h1sq / 2.0).strength(X), 0.0);
  EXPECT_DOUBLE_EQ(Nonlinearity::truncated(h1sq / 1.5).strength(X), 0.5);
}

class Conserving : public ::testing::TestWithParam<SchemeId> {};

TEST_P(Conserving, SquaredNormPerStep) {
  const SchemeId s = GetParam();
  const auto p = sample_path({5, 1}, 40, 0.006);
  const FieldState X0 = soliton_initial_condition(small_grid());
  const auto r = run_trajectory(X0, p, config(s));
  const double tol = (s == SchemeId::LT || s == SchemeId::Relax) ? 1e-12 : 1e-10;
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    const double prev = l2_norm(r.trajectory.states[i - 1]);
    EXPECT_NEAR(l2_norm(r.trajectory.states[i]) / prev, 1.0, tol) << "step " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Schemes, Conserving,
                         ::testing::Values(SchemeId::ModEXP, SchemeId::CN, SchemeId::LT,
                                           SchemeId::Relax),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Sexp, DriftIsMeasurable) {
  const auto p = sample_path({6, 0}, 100, 0.006);
  const FieldState X0 = soliton_initial_condition(small_grid());
  const FieldState X = run_trajectory(X0, p, config(SchemeId::SEXP)).trajectory.states.back();
  EXPECT_GT(std::abs(l2_norm(X) / l2_norm(X0) - 1.0), 1e-6);
}

TEST(Sexp, StepDoublingGapIsFirstOrderInRms) {
  // Non-commuting noise makes the one-step vs two-half-step gap O(h) in mean square.
  const Grid g = make_grid(20.0, 0.4, Boundary::Dirichlet);
  const FieldState X0 = soliton_initial_condition(g);
  std::vector<double> hs, gaps;
  for (int k = 7; k <= 10; ++k) {
    const double h = std::ldexp(1.0, -k);
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto fine = sample_path({77, s}, 2, h / 2);
      const auto coarse = coarsen(fine, 2);
      TrajectoryState S = TrajectoryState::start(X0, SchemeId::SEXP);
      const FieldState one = step_sexp(S, op_for(coarse, 0, 1.0, Backend::FiniteDifference, g), h);
      advance(S, op_for(fine, 0, 1.0, Backend::FiniteDifference, g), h / 2, Nonlinearity::cubic());
      advance(S, op_for(fine, 1, 1.0, Backend::FiniteDifference, g), h / 2, Nonlinearity::cubic());
      acc += l2_norm_squared(one - S.current);
    }
    hs.push_back(h);
    gaps.push_back(std::sqrt(acc / 50));
  }
  const double order = log2_slope(hs, gaps);
  EXPECT_GT(order, 0.9);
  EXPECT_LT(order, 1.1);
}

TEST(Cn, DeterministicGlobalOrderAtLeastTwo) {
  const Grid g = make_grid(10.0, 0.25, Boundary::Dirichlet);
  const FieldState X0 = soliton_initial_condition(g);
  const double T = 0.25;
  auto run = [&](std::size_t N) {
    const BrownianPath p(T / N, std::vector<Vec3>(N, Vec3{0, 0, 0}));
    return run_trajectory(X0, p, config(SchemeId::CN, 0.0)).trajectory.states.back();
  };
  const FieldState ref = run(1024);
  std::vector<double> hs, es;
  for (std::size_t N : {8u, 16u, 32u, 64u}) {
    hs.push_back(T / N);
    es.push_back(l2_norm(run(N) - ref));
  }
  EXPECT_GE(log2_slope(hs, es), 1.9);
}

TEST(ModExp, FixedPointContracts) {
  const auto p = sample_path({8, 0}, 1, 0.01);
  const FieldState X0 = soliton_initial_condition(small_grid());
  double max_rho = 0.0;
  for (const auto& v : X0) max_rho = std::max(max_rho, v.density());
  ASSERT_LT(0.01 * 3.0 * max_rho, 1.0);
  FixedPointTrace trace;
  const TrajectoryState S = TrajectoryState::start(X0, SchemeId::ModEXP);
  step_modexp(S, op_for(p, 0), 0.01, Nonlinearity::cubic(), &trace);
  ASSERT_GE(trace.residuals.size(), 3u);
  for (std::size_t i = 1; i + 1 < trace.residuals.size(); ++i) {
    EXPECT_LT(trace.residuals[i] / trace.residuals[i - 1], 1.0);
  }
}

TEST(ModExp, NoConvergenceSurfacesWithStepIndex) {
  const auto p = sample_path({9, 0}, 3, 0.01);
  SchemeConfig c = config(SchemeId::ModEXP);
  c.fp.max_iter = 1;
  c.fp.tol = 1e-300;
  try {
    run_trajectory(soliton_initial_condition(small_grid()), p, c);
    FAIL() << "expected StepFailure";
  } catch (const StepFailure& e) {
    EXPECT_EQ(e.step(), 0u);
    EXPECT_EQ(e.kind(), "NoConvergence");
    EXPECT_EQ(e.category(), ErrorCategory::Numerical);
  }
  const TrajectoryState S = TrajectoryState::start(soliton_initial_condition(small_grid()),
                                                   SchemeId::CN, c.fp);
  EXPECT_THROW(step_cn(S, op_for(p, 0), 0.01), NoConvergence);
}

TEST(Lt, PhaseRotationClosedForm) {
  FieldState X(small_grid());
  X[3] = {1.0, 0.0};
  const FieldState Y = nonlinear_phase_flow(X, std::numbers::pi);
  EXPECT_NEAR(std::abs(Y[3].first - cplx(-1.0, 0.0)), 0.0, 1e-15);
  std::mt19937_64 rng(10);
  const FieldState Z = oracle::random_field(small_grid(), rng);
  const FieldState W = nonlinear_phase_flow(Z, 0.37);
  for (std::size_t j = 0; j < Z.size(); ++j) EXPECT_NEAR(W[j].density(), Z[j].density(), 1e-14 * (1 + Z[j].density()));
}

TEST(Lt, PhaseFlowMatchesRungeKutta) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uh(0.0, 0.1);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    const double h = uh(rng);
    const std::array<cplx, 2> y{cplx(n(rng), n(rng)), cplx(n(rng), n(rng))};
    const auto expect = oracle::nonlinear_flow_rk4(y, h, 2000);
    FieldState X(std::vector<Spinor>{{y[0], y[1]}});
    const FieldState Y = nonlinear_phase_flow(X, h);
    EXPECT_LT(std::abs(Y[0].first - expect[0]), 1e-8);
    EXPECT_LT(std::abs(Y[0].second - expect[1]), 1e-8);
  }
}

TEST(Relax, ZeroFieldAndPhiInitialisation) {
  const auto p = sample_path({12, 0}, 4, 0.01);
  TrajectoryState S = TrajectoryState::start(FieldState(small_grid()), SchemeId::Relax);
  ASSERT_TRUE(S.phi_prev.has_value());
  for (std::size_t n = 0; n < p.steps(); ++n) {
    advance(S, op_for(p, n), 0.01, Nonlinearity::cubic());
    for (double v : *S.phi_prev) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(l2_norm(S.current), 0.0);
  }
  const FieldState X0 = soliton_initial_condition(small_grid());
  const TrajectoryState R = TrajectoryState::start(X0, SchemeId::Relax);
  for (std::size_t j = 0; j < X0.size(); ++j) EXPECT_EQ((*R.phi_prev)[j], X0[j].density());
  EXPECT_FALSE(TrajectoryState::start(X0, SchemeId::CN).phi_prev.has_value());
}

TEST(Relax, UpdatesPhiByExtrapolation) {
  const auto p = sample_path({13, 0}, 1, 0.01);
  const FieldState X0 = soliton_initial_condition(small_grid());
  TrajectoryState S = TrajectoryState::start(X0, SchemeId::Relax);
  std::vector<double> phi0(X0.size(), 0.25);
  S.phi_prev = phi0;
  const RelaxStep r = step_relax(S, op_for(p, 0), 0.01);
  for (std::size_t j = 0; j < X0.size(); ++j) EXPECT_DOUBLE_EQ(r.phi[j], 2.0 * X0[j].density() - 0.25);
}

TEST(Relax, SpectralBackendUnsupported) {
  const Grid gp = make_grid(10.0, 0.25, Boundary::Periodic);
  const auto p = sample_path({14, 0}, 2, 0.01);
  SchemeConfig c = config(SchemeId::Relax);
  c.backend = Backend::Spectral;
  try {
    run_trajectory(soliton_initial_condition(gp), p, c);
    FAIL() << "expected StepFailure";
  } catch (const StepFailure& e) {
    EXPECT_EQ(e.kind(), "UnsupportedBackend");
  }
}

TEST(Trajectory, BlowUpGuard) {
  const auto p = sample_path({15, 0}, 5, 0.01);
  SchemeConfig c = config(SchemeId::SEXP);
  c.blowup_threshold = 0.5;
  EXPECT_THROW(run_trajectory(soliton_initial_condition(small_grid()), p, c), BlowUp);
}

TEST(Trajectory, ZeroStepsReturnsInitialState) {
  const BrownianPath p(0.01, {});
  const FieldState X0 = soliton_initial_condition(small_grid());
  const auto r = run_trajectory(X0, p, config(SchemeId::SEXP));
  ASSERT_EQ(r.trajectory.size(), 1u);
  EXPECT_EQ(r.trajectory.states[0], X0);
}

TEST(Trajectory, DeterministicAndSnapshotLayout) {
  const auto p = sample_path({16, 3}, 10, 0.01);
  const FieldState X0 = soliton_initial_condition(small_grid());
  for (SchemeId s : all_schemes) {
    const auto a = run_trajectory(X0, p, config(s), 4);
    const auto b = run_trajectory(X0, p, config(s), 4);
    EXPECT_EQ(a.trajectory.states, b.trajectory.states);
    ASSERT_EQ(a.trajectory.times.size(), 4u);  // 0, 4, 8, 10
    EXPECT_DOUBLE_EQ(a.trajectory.times[3], 0.1);
  }
  EXPECT_THROW(run_trajectory(X0, p, config(SchemeId::SEXP), 0), ConfigError);
}

TEST(Trajectory, NoNoiseMeansPathIndependence) {
  const FieldState X0 = soliton_initial_condition(small_grid());
  for (SchemeId s : all_schemes) {
    const auto a = run_trajectory(X0, sample_path({1, 0}, 8, 0.01), config(s, 0.0));
    const auto b = run_trajectory(X0, sample_path({2, 5}, 8, 0.01), config(s, 0.0));
    EXPECT_EQ(a.trajectory.states, b.trajectory.states) << to_string(s);
  }
}

TEST(Trajectory, BoundaryMismatchRejected) {
  const auto p = sample_path({1, 0}, 2, 0.01);
  SchemeConfig c = config(SchemeId::SEXP);
  c.backend = Backend::Spectral;
  EXPECT_THROW(run_trajectory(soliton_initial_condition(small_grid()), p, c), BackendBoundaryMismatch);
}
