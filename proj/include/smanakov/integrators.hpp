#ifndef SMANAKOV_INTEGRATORS_HPP
#define SMANAKOV_INTEGRATORS_HPP

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smanakov/block_tridiag.hpp"
#include "smanakov/errors.hpp"
#include "smanakov/field.hpp"
#include "smanakov/model.hpp"
#include "smanakov/noise.hpp"
#include "smanakov/observables.hpp"
#include "smanakov/propagator.hpp"

namespace smanakov {

enum class SchemeId { SEXP, ModEXP, CN, LT, Relax };

inline constexpr SchemeId all_schemes[] = {SchemeId::SEXP, SchemeId::ModEXP, SchemeId::CN,
                                           SchemeId::LT, SchemeId::Relax};

inline std::string_view to_string(SchemeId s) {
  switch (s) {
  case SchemeId::SEXP: return "sexp";
  case SchemeId::ModEXP: return "modexp";
  case SchemeId::CN: return "cn";
  case SchemeId::LT: return "lt";
  case SchemeId::Relax: return "relax";
  }
  return "?";
}

inline SchemeId parse_scheme(std::string_view name) {
  for (SchemeId s : all_schemes) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

struct FixedPointConfig {
  double tol = 1e-12;  // absolute, discrete L2
  int max_iter = 50;

  void validate() const {
    if (!(tol > 0.0)) throw ConfigError("fixed-point tolerance must be > 0");
    if (max_iter < 1) throw ConfigError("fixed-point iteration cap must be >= 1");
  }
};

/// Residual history of one fixed-point solve.
struct FixedPointTrace {
  std::vector<double> residuals;
};

/// Which nonlinearity the schemes see: the cubic term, the cut-off term
/// theta(|X|_{H1}^2 / R) |X|^2 X, or none at all (the R -> 0 limit).
class Nonlinearity {
public:
  static Nonlinearity cubic() { return Nonlinearity(Kind::Cubic, 0.0); }
  static Nonlinearity off() { return Nonlinearity(Kind::Off, 0.0); }
  /// R = 0 switches the term off.
  static Nonlinearity truncated(double radius) {
    if (radius < 0.0 || !std::isfinite(radius)) throw InvalidRadius("truncation radius must be >= 0");
    return radius == 0.0 ? off() : Nonlinearity(Kind::Truncated, radius);
  }

  bool is_off() const { return kind_ == Kind::Off; }

  /// Scalar multiplying |X|^2 X at state X.
  double strength(const FieldState& X) const {
    switch (kind_) {
    case Kind::Cubic: return 1.0;
    case Kind::Off: return 0.0;
    case Kind::Truncated: return cutoff(h1_norm_squared(X) / radius_);
    }
    return 0.0;
  }

  FieldState apply(const FieldState& X) const {
    FieldState out = cubic_nonlinearity(X);
    if (kind_ != Kind::Cubic) out *= cplx(strength(X));
    return out;
  }

private:
  enum class Kind { Cubic, Truncated, Off };
  Nonlinearity(Kind k, double r) : kind_(k), radius_(r) {}
  Kind kind_;
  double radius_;
};

/// Everything a trajectory needs besides the initial state and the noise.
struct SchemeConfig {
  SchemeId scheme = SchemeId::SEXP;
  Backend backend = Backend::FiniteDifference;
  double gamma = 1.0;
  FixedPointConfig fp{};
  Nonlinearity nonlinearity = Nonlinearity::cubic();
  /// Abort when |X^n|_{H1} exceeds this.
  double blowup_threshold = 1e8;
};

struct TrajectoryState {
  FieldState current;
  std::size_t step_index = 0;
  std::optional<std::vector<double>> phi_prev;  // Phi^{n-1/2}, relaxation only
  SchemeId scheme = SchemeId::SEXP;
  FixedPointConfig fp{};

  static TrajectoryState start(FieldState X0, SchemeId scheme, FixedPointConfig fp = {},
                               const Nonlinearity& nl = Nonlinearity::cubic()) {
    TrajectoryState s{std::move(X0), 0, std::nullopt, scheme, fp};
    if (scheme == SchemeId::Relax) {
      const double k = nl.strength(s.current);
      std::vector<double> phi(s.current.size());
      for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = k * s.current[j].density();
      s.phi_prev = std::move(phi);
    }
    return s;
  }
};

/// Explicit exponential step X^{n+1} = U (X^n + i h F(X^n)).
inline FieldState step_sexp(const TrajectoryState& S, const StepOperator& U, double h,
                            const Nonlinearity& nl = Nonlinearity::cubic()) {
  FieldState rhs(S.current);
  if (!nl.is_off()) rhs.add_scaled(I_unit * h, nl.apply(S.current));
  return apply_cayley(U, rhs);
}

/// Norm-preserving variant: V = U X^n, F* = F(V + i h/2 F*) by fixed point,
/// X^{n+1} = V + i h F*.
inline FieldState step_modexp(const TrajectoryState& S, const StepOperator& U, double h,
                              const Nonlinearity& nl = Nonlinearity::cubic(),
                              FixedPointTrace* trace = nullptr) {
  S.fp.validate();
  FieldState V = apply_cayley(U, S.current);
  if (nl.is_off()) return V;
  FieldState F_star = nl.apply(V);
  for (int it = 1; it <= S.fp.max_iter; ++it) {
    FieldState arg(V);
    arg.add_scaled(I_unit * (h / 2.0), F_star);
    FieldState F_next = nl.apply(arg);
    const double residual = l2_norm(F_next - F_star);
    if (trace) trace->residuals.push_back(residual);
    F_star = std::move(F_next);
    if (residual <= S.fp.tol) {
      V.add_scaled(I_unit * h, F_star);
      return V;
    }
    if (!std::isfinite(residual) || it == S.fp.max_iter) throw NoConvergence(it, residual);
  }
  throw NoConvergence(S.fp.max_iter, std::numeric_limits<double>::quiet_NaN());
}

/// Nonlinearly implicit Crank-Nicolson:
///   X^{n+1} = X^n - H X^{n+1/2} + i h G,  G = (|X^n|^2 + |X^{n+1}|^2)/2 X^{n+1/2},
/// by lagged fixed point with the frozen factorization of Id + H/2.
inline FieldState step_cn(const TrajectoryState& S, const StepOperator& U, double h,
                          const Nonlinearity& nl = Nonlinearity::cubic(),
                          FixedPointTrace* trace = nullptr) {
  S.fp.validate();
  const FieldState& Xn = S.current;
  const FieldState linear_rhs = apply_minus(U, Xn);
  if (nl.is_off()) return solve_plus(U, linear_rhs);
  const double k = nl.strength(Xn);
  FieldState X = Xn;
  FieldState rhs(Xn.grid());
  for (int it = 1; it <= S.fp.max_iter; ++it) {
    for (std::size_t j = 0; j < Xn.size(); ++j) {
      const double rho = 0.5 * k * (Xn[j].density() + X[j].density());
      rhs[j] = linear_rhs[j] + (I_unit * (h * rho * 0.5)) * (X[j] + Xn[j]);
    }
    FieldState X_next = solve_plus(U, rhs);
    const double residual = l2_norm(X_next - X);
    if (trace) trace->residuals.push_back(residual);
    X = std::move(X_next);
    if (residual <= S.fp.tol) return X;
    if (!std::isfinite(residual) || it == S.fp.max_iter) throw NoConvergence(it, residual);
  }
  throw NoConvergence(S.fp.max_iter, std::numeric_limits<double>::quiet_NaN());
}

/// Exact pointwise nonlinear flow of i dY + k|Y|^2 Y dt = 0 over time h:
/// Y(h) = e^{i k h |Y0|^2} Y0.
inline FieldState nonlinear_phase_flow(const FieldState& X, double h, double strength = 1.0) {
  FieldState out(X);
  for (auto& v : out) v *= std::exp(I_unit * (strength * h * v.density()));
  return out;
}

/// Lie-Trotter splitting: exact nonlinear flow, then the Cayley propagator.
inline FieldState step_lt(const TrajectoryState& S, const StepOperator& U, double h,
                          const Nonlinearity& nl = Nonlinearity::cubic()) {
  if (nl.is_off()) return apply_cayley(U, S.current);
  return apply_cayley(U, nonlinear_phase_flow(S.current, h, nl.strength(S.current)));
}

struct RelaxStep {
  FieldState next;
  std::vector<double> phi;  // Phi^{n+1/2}
};

/// Linearly implicit relaxation step:
///   Phi^{n+1/2} = 2|X^n|^2 - Phi^{n-1/2},
///   (Id + H/2 - i h/2 Phi) X^{n+1} = (Id - H/2 + i h/2 Phi) X^n.
inline RelaxStep step_relax(const TrajectoryState& S, const StepOperator& U, double h,
                            const Nonlinearity& nl = Nonlinearity::cubic()) {
  if (!S.phi_prev) throw ConfigError("relaxation step needs the auxiliary density Phi");
  if (U.backend() != Backend::FiniteDifference) {
    throw UnsupportedBackend("the relaxation scheme needs the fd backend (Phi is not diagonal in Fourier space)");
  }
  const FieldState& Xn = S.current;
  const auto& phi_prev = *S.phi_prev;
  if (phi_prev.size() != Xn.size()) throw DimensionMismatch("Phi length does not match field");
  const double k = nl.strength(Xn);
  std::vector<double> phi(Xn.size());
  for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = 2.0 * k * Xn[j].density() - phi_prev[j];

  const auto& H = U.fd().generator;
  BlockTridiagonalMatrix plus = detail::shifted(H, 0.5);
  BlockTridiagonalMatrix minus = detail::shifted(H, -0.5);
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const Block2 shift = Block2::scalar(I_unit * (0.5 * h * phi[j]));
    plus.diag[j] -= shift;
    minus.diag[j] += shift;
  }
  FieldState next = solve(plus, matvec(minus, Xn));
  return {std::move(next), std::move(phi)};
}

/// Advances S by one step of its scheme.
inline void advance(TrajectoryState& S, const StepOperator& U, double h, const Nonlinearity& nl) {
  switch (S.scheme) {
  case SchemeId::SEXP: S.current = step_sexp(S, U, h, nl); break;
  case SchemeId::ModEXP: S.current = step_modexp(S, U, h, nl); break;
  case SchemeId::CN: S.current = step_cn(S, U, h, nl); break;
  case SchemeId::LT: S.current = step_lt(S, U, h, nl); break;
  case SchemeId::Relax: {
    auto r = step_relax(S, U, h, nl);
    S.current = std::move(r.next);
    S.phi_prev = std::move(r.phi);
    break;
  }
  }
  ++S.step_index;
}

struct TrajectoryResult {
  Trajectory trajectory;
  /// Wall time of the stepping loop alone (operator assembly included).
  double stepping_seconds = 0.0;
};

/// Integrates from X0 over every increment of `path` (step size = path step).
/// Records the state at step 0, at every multiple of `snapshot_stride`, and at the last step.
inline TrajectoryResult run_trajectory(const FieldState& X0, const BrownianPath& path,
                                       const SchemeConfig& cfg, std::size_t snapshot_stride = 1) {
  cfg.fp.validate();
  if (snapshot_stride == 0) throw ConfigError("snapshot stride must be >= 1");
  const double h = path.step_size();
  const std::size_t N = path.steps();
  if (X0.grid().boundary() != boundary_for(cfg.backend)) {
    throw BackendBoundaryMismatch("initial state grid does not match the backend's boundary");
  }
  TrajectoryResult out;
  out.trajectory.times.push_back(0.0);
  out.trajectory.states.push_back(X0);

  TrajectoryState S = TrajectoryState::start(X0, cfg.scheme, cfg.fp, cfg.nonlinearity);
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t n = 0; n < N; ++n) {
    try {
      const StepOperator U = assemble(X0.grid(), h, cfg.gamma, scaled_chi(path, n), cfg.backend);
      advance(S, U, h, cfg.nonlinearity);
    } catch (const Error& e) {
      throw StepFailure(n, e);
    }
    if (!S.current.all_finite()) throw BlowUp(n + 1, std::numeric_limits<double>::infinity());
    if (std::isfinite(cfg.blowup_threshold)) {
      const double h1 = h1_norm(S.current);
      if (h1 > cfg.blowup_threshold) throw BlowUp(n + 1, h1);
    }
    const std::size_t done = n + 1;
    if (done % snapshot_stride == 0 || done == N) {
      out.trajectory.times.push_back(static_cast<double>(done) * h);
      out.trajectory.states.push_back(S.current);
    }
  }
  out.stepping_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

} // namespace smanakov

#endif // SMANAKOV_INTEGRATORS_HPP
