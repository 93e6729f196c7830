#ifndef SMANAKOV_TOOLS_SELFTEST_HPP
#define SMANAKOV_TOOLS_SELFTEST_HPP

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "smanakov/block_tridiag.hpp"
#include "smanakov/integrators.hpp"
#include "smanakov/noise.hpp"
#include "smanakov/observables.hpp"
#include "smanakov/propagator.hpp"

namespace smanakov::selftest {

struct Summary {
  int passed = 0;
  int failed = 0;
};

namespace detail {

inline FieldState random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  FieldState X(g);
  for (auto& v : X) v = {cplx(n(rng), n(rng)), cplx(n(rng), n(rng))};
  return X;
}

// Gaussian elimination with partial pivoting on the dense expansion of A.
inline std::vector<cplx> dense_solve(const BlockTridiagonalMatrix& A, const FieldState& B) {
  const std::size_t m = A.size();
  const std::size_t n = 2 * m;
  std::vector<cplx> M(n * n), b(n);
  auto put = [&](std::size_t bi, std::size_t bj, const Block2& blk) {
    M[(2 * bi) * n + 2 * bj] = blk.a;
    M[(2 * bi) * n + 2 * bj + 1] = blk.b;
    M[(2 * bi + 1) * n + 2 * bj] = blk.c;
    M[(2 * bi + 1) * n + 2 * bj + 1] = blk.d;
  };
  for (std::size_t j = 0; j < m; ++j) {
    put(j, j, A.diag[j]);
    if (j + 1 < m) {
      put(j, j + 1, A.super[j]);
      put(j + 1, j, A.sub[j]);
    }
    b[2 * j] = B[j].first;
    b[2 * j + 1] = B[j].second;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(M[r * n + c]) > std::abs(M[p * n + c])) p = r;
    }
    for (std::size_t k = 0; k < n; ++k) std::swap(M[c * n + k], M[p * n + k]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const cplx f = M[r * n + c] / M[c * n + c];
      for (std::size_t k = c; k < n; ++k) M[r * n + k] -= f * M[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<cplx> x(n);
  for (std::size_t r = n; r-- > 0;) {
    cplx s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= M[r * n + k] * x[k];
    x[r] = s / M[r * n + r];
  }
  return x;
}

inline bool unitarity(Backend backend, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uh(1e-4, 1e-1), ug(0.0, 2.0);
  std::normal_distribution<double> n;
  const Grid g = make_grid(8.0, 0.1, boundary_for(backend));
  for (int trial = 0; trial < 20; ++trial) {
    const auto op = assemble(g, uh(rng), ug(rng), {n(rng), n(rng), n(rng)}, backend);
    const FieldState X = random_field(g, rng);
    const double ratio = l2_norm(apply_cayley(op, X)) / l2_norm(X);
    if (std::abs(ratio - 1.0) > 1e-12) return false;
  }
  return true;
}

inline bool conservation(SchemeId scheme) {
  const Grid g = make_grid(20.0, 0.4, Boundary::Dirichlet);
  const FieldState X0 = soliton_initial_condition(g);
  const BrownianPath path = sample_path({7, 0}, 64, 1.0 / 128.0);
  SchemeConfig cfg;
  cfg.scheme = scheme;
  const auto run = run_trajectory(X0, path, cfg, 1);
  const double n0 = l2_norm(X0);
  const double tol = (scheme == SchemeId::LT || scheme == SchemeId::Relax) ? 1e-12 : 1e-10;
  for (const auto& X : run.trajectory.states) {
    if (std::abs(l2_norm(X) / n0 - 1.0) > tol) return false;
  }
  return true;
}

inline bool path_coupling() {
  const BrownianPath fine = sample_path({11, 3}, 256, 1.0 / 256.0);
  for (std::size_t f = 1; f <= 64; f *= 2) {
    const BrownianPath coarse = coarsen(fine, f);
    if (coarse.steps() * f != fine.steps()) return false;
    for (int k = 0; k < 3; ++k) {
      double wf = 0.0, wc = 0.0;
      for (std::size_t n = 0; n < coarse.steps(); ++n) {
        for (std::size_t i = 0; i < f; ++i) wf += fine.increment(n * f + i)[k];
        wc += coarse.increment(n)[k];
        if (std::abs(wf - wc) > 1e-13 * std::max(1.0, std::abs(wf))) return false;
      }
    }
  }
  return coarsen(coarsen(fine, 2), 2) == coarsen(fine, 4);
}

inline bool dense_oracle(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + trial % 8;
    BlockTridiagonalMatrix A(m);
    auto rnd = [&] { return Block2{cplx(n(rng), n(rng)), cplx(n(rng), n(rng)),
                                   cplx(n(rng), n(rng)), cplx(n(rng), n(rng))}; };
    for (auto& b : A.sub) b = 0.3 * rnd();
    for (auto& b : A.super) b = 0.3 * rnd();
    for (auto& b : A.diag) b = Block2::scalar(4.0) + 0.3 * rnd();
    FieldState B{std::vector<Spinor>(m)};
    for (auto& v : B) v = {cplx(n(rng), n(rng)), cplx(n(rng), n(rng))};
    const FieldState X = solve(A, B);
    const auto ref = dense_solve(A, B);
    double diff = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      diff += std::norm(X[j].first - ref[2 * j]) + std::norm(X[j].second - ref[2 * j + 1]);
      scale += std::norm(ref[2 * j]) + std::norm(ref[2 * j + 1]);
    }
    if (std::sqrt(diff) > 1e-10 * std::sqrt(scale)) return false;
  }
  return true;
}

} // namespace detail

/// Fast internal consistency checks; prints one line per check.
inline Summary run(std::ostream& out) {
  Summary s;
  std::mt19937_64 rng(20240611);
  auto check = [&](const std::string& name, const std::function<bool()>& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      out << "ERROR " << name << ": " << e.what() << '\n';
    }
    out << (ok ? "PASS " : "FAIL ") << name << '\n';
    (ok ? s.passed : s.failed)++;
  };
  check("unitarity-fd", [&] { return detail::unitarity(Backend::FiniteDifference, rng); });
  check("unitarity-spectral", [&] { return detail::unitarity(Backend::Spectral, rng); });
  for (SchemeId sc : {SchemeId::ModEXP, SchemeId::CN, SchemeId::LT, SchemeId::Relax}) {
    check("conservation-" + std::string(to_string(sc)), [sc] { return detail::conservation(sc); });
  }
  check("path-coupling", [] { return detail::path_coupling(); });
  check("dense-oracle", [&] { return detail::dense_oracle(rng); });
  out << "selftest: " << s.passed << " passed, " << s.failed << " failed\n";
  return s;
}

} // namespace smanakov::selftest

#endif // SMANAKOV_TOOLS_SELFTEST_HPP
