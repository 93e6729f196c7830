#ifndef SMANAKOV_OBSERVABLES_HPP
#define SMANAKOV_OBSERVABLES_HPP

#include <algorithm>
#include <cmath>
#include <string_view>
#include <utility>
#include <vector>

#include "smanakov/errors.hpp"
#include "smanakov/fft.hpp"
#include "smanakov/field.hpp"

namespace smanakov {

/// Real scalar product dx * sum_j Re(X_j . conj(Y_j)), rectangle rule.
inline double inner_product(const FieldState& X, const FieldState& Y) {
  if (X.size() != Y.size()) throw DimensionMismatch("inner product of fields of different sizes");
  double acc = 0.0;
  for (std::size_t j = 0; j < X.size(); ++j) {
    acc += (X[j].first * std::conj(Y[j].first) + X[j].second * std::conj(Y[j].second)).real();
  }
  return X.grid().dx() * acc;
}

inline double l2_norm_squared(const FieldState& X) {
  double acc = 0.0;
  for (const auto& v : X) acc += v.density();
  return X.grid().dx() * acc;
}

inline double l2_norm(const FieldState& X) { return std::sqrt(l2_norm_squared(X)); }

/// First derivative in the discrete calculus of the grid's backend: centred
/// differences with zero ghosts on Dirichlet grids, Fourier differentiation on
/// periodic grids.
inline FieldState derivative(const FieldState& X) {
  const Grid& g = X.grid();
  const std::size_t m = X.size();
  FieldState D(g);
  if (g.boundary() == Boundary::Dirichlet) {
    const double inv = 1.0 / (2.0 * g.dx());
    for (std::size_t j = 0; j < m; ++j) {
      const Spinor right = j + 1 < m ? X[j + 1] : Spinor{};
      const Spinor left = j > 0 ? X[j - 1] : Spinor{};
      D[j] = inv * (right - left);
    }
    return D;
  }
  const auto transform = SpectralTransform::cached(m);
  D = X;
  transform->forward(D.values());
  for (std::size_t k = 0; k < m; ++k) D[k] *= I_unit * transform->frequency(k, g.length());
  transform->inverse(D.values());
  return D;
}

inline double h1_norm_squared(const FieldState& X) {
  return l2_norm_squared(X) + l2_norm_squared(derivative(X));
}

inline double h1_norm(const FieldState& X) { return std::sqrt(h1_norm_squared(X)); }

/// Pointwise |X1|^2 and |X2|^2.
inline std::pair<std::vector<double>, std::vector<double>> intensities(const FieldState& X) {
  std::vector<double> i1(X.size()), i2(X.size());
  for (std::size_t j = 0; j < X.size(); ++j) {
    i1[j] = std::norm(X[j].first);
    i2[j] = std::norm(X[j].second);
  }
  return {std::move(i1), std::move(i2)};
}

/// States recorded at selected times of one run.
struct Trajectory {
  std::vector<double> times;
  std::vector<FieldState> states;

  std::size_t size() const { return times.size(); }
  const FieldState& final_state() const { return states.back(); }
};

enum class ErrorNorm { L2, H1 };

inline std::string_view to_string(ErrorNorm n) { return n == ErrorNorm::L2 ? "l2" : "h1"; }

inline double norm_of(const FieldState& X, ErrorNorm n) {
  return n == ErrorNorm::L2 ? l2_norm(X) : h1_norm(X);
}

/// Errors of a trajectory against a reference at their shared times.
struct ErrorReport {
  ErrorNorm norm = ErrorNorm::H1;
  std::vector<double> times;
  std::vector<double> errors;
  double sup = 0.0;
  double final = 0.0;
};

/// Compares `traj` with `ref` at the times both record (matched to 1e-9 relative).
/// The final time of `traj` must be among them.
inline ErrorReport error_vs_reference(const Trajectory& traj, const Trajectory& ref,
                                      ErrorNorm norm) {
  if (traj.size() == 0 || ref.size() == 0) {
    throw IncompatibleTimelines("cannot compare empty trajectories");
  }
  ErrorReport rep;
  rep.norm = norm;
  std::size_t r = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    while (r < ref.size() && ref.times[r] < t - tol) ++r;
    if (r == ref.size() || std::abs(ref.times[r] - t) > tol) continue;
    const double e = norm_of(traj.states[i] - ref.states[r], norm);
    rep.times.push_back(t);
    rep.errors.push_back(e);
    rep.sup = std::max(rep.sup, e);
  }
  const double t_end = traj.times.back();
  if (rep.times.empty() || std::abs(rep.times.back() - t_end) > 1e-9 * std::max(1.0, t_end)) {
    throw IncompatibleTimelines("final time " + std::to_string(t_end) +
                                " is not recorded in the reference");
  }
  rep.final = rep.errors.back();
  return rep;
}

} // namespace smanakov

#endif // SMANAKOV_OBSERVABLES_HPP
