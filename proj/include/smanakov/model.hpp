#ifndef SMANAKOV_MODEL_HPP
#define SMANAKOV_MODEL_HPP

#include <array>
#include <cmath>
#include <numbers>

#include "smanakov/errors.hpp"
#include "smanakov/field.hpp"
#include "smanakov/grid.hpp"
#include "smanakov/small_matrix.hpp"

namespace smanakov {

using Vec3 = std::array<double, 3>;

/// Noise intensity of the Stratonovich Pauli-matrix forcing.
struct PhysicalParams {
  double gamma = 1.0;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be finite and >= 0");
  }
};

/// Polarized sech pulse
///   X0(x) = (cos(theta/2) e^{i phi1}, sin(theta/2) e^{i phi2}) eta sech(eta x) e^{-i kappa (x - tau) + i alpha}.
/// Defaults are the standard test pulse (theta = pi/4, eta = 1, all phases zero).
struct SolitonParams {
  double alpha = 0.0;
  double tau = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double kappa = 0.0;
  double theta = std::numbers::pi / 4.0;
  double eta = 1.0;

  void validate() const {
    if (!(eta > 0.0)) throw ConfigError("soliton amplitude eta must be > 0");
  }
};

inline FieldState soliton_initial_condition(const Grid& grid, const SolitonParams& p = {}) {
  p.validate();
  FieldState X(grid);
  const cplx pol1 = std::cos(p.theta / 2.0) * std::exp(I_unit * p.phi1);
  const cplx pol2 = std::sin(p.theta / 2.0) * std::exp(I_unit * p.phi2);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    const cplx envelope =
        p.eta / std::cosh(p.eta * x) * std::exp(I_unit * (-p.kappa * (x - p.tau) + p.alpha));
    X[j] = {pol1 * envelope, pol2 * envelope};
  }
  return X;
}

/// F(X) = |X|^2 X, pointwise.
inline FieldState cubic_nonlinearity(const FieldState& X) {
  FieldState out(X);
  for (auto& v : out) v *= cplx(v.density());
  return out;
}

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), C-infinity and monotone in between
/// (ratio of exp(-1/s) bumps).
inline double cutoff(double x) {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const auto g = [](double s) { return std::exp(-1.0 / s); };
  const double up = g(2.0 - x);
  return up / (up + g(x - 1.0));
}

/// theta(h1norm / R) F(X), where h1norm is the squared H1 norm of X supplied by the caller.
inline FieldState truncated_nonlinearity(const FieldState& X, double R, double h1norm) {
  if (!(R > 0.0)) throw InvalidRadius("truncation radius must be > 0");
  FieldState out = cubic_nonlinearity(X);
  out *= cplx(cutoff(h1norm / R));
  return out;
}

namespace pauli {
inline constexpr Block2 sigma1{0.0, 1.0, 1.0, 0.0};
inline constexpr Block2 sigma2{0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0};
inline constexpr Block2 sigma3{1.0, 0.0, 0.0, -1.0};
} // namespace pauli

/// chi1 sigma1 + chi2 sigma2 + chi3 sigma3 (hermitian).
inline Block2 pauli_combination(const Vec3& chi) {
  return {cplx(chi[2]), cplx(chi[0], -chi[1]), cplx(chi[0], chi[1]), cplx(-chi[2])};
}

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

} // namespace smanakov

#endif // SMANAKOV_MODEL_HPP
