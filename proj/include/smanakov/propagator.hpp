#ifndef SMANAKOV_PROPAGATOR_HPP
#define SMANAKOV_PROPAGATOR_HPP

#include <cmath>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "smanakov/block_tridiag.hpp"
#include "smanakov/errors.hpp"
#include "smanakov/fft.hpp"
#include "smanakov/field.hpp"
#include "smanakov/grid.hpp"
#include "smanakov/model.hpp"

namespace smanakov {

enum class Backend { FiniteDifference, Spectral };

inline std::string_view to_string(Backend b) {
  return b == Backend::FiniteDifference ? "fd" : "spectral";
}

inline Boundary boundary_for(Backend b) {
  return b == Backend::FiniteDifference ? Boundary::Dirichlet : Boundary::Periodic;
}

/// Scalar Cayley factor (1 - i lambda/2) / (1 + i lambda/2); modulus one for real lambda.
inline cplx cayley_factor(double lambda) {
  return (1.0 - I_unit * (lambda / 2.0)) / (1.0 + I_unit * (lambda / 2.0));
}

/// Per-step random generator
///   H = -i h I2 d_xx + sqrt(gamma h) (chi . sigma) d_x
/// in assembled form, together with everything needed to apply
/// U = (Id + H/2)^{-1} (Id - H/2).
class StepOperator {
public:
  struct FiniteDifferenceData {
    BlockTridiagonalMatrix generator;  // H
    BlockTridiagonalMatrix minus;      // Id - H/2
    BlockThomasFactorization plus;     // factored Id + H/2
  };

  struct SpectralData {
    std::shared_ptr<const SpectralTransform> transform;
    std::vector<Block2> symbol;      // S(xi), with H -> i S(xi)
    std::vector<Block2> cayley;      // (1 + iS/2)^{-1} (1 - iS/2)
    std::vector<Block2> plus_inv;    // (1 + iS/2)^{-1}
  };

  Backend backend() const { return std::holds_alternative<FiniteDifferenceData>(data_)
                                        ? Backend::FiniteDifference
                                        : Backend::Spectral; }
  double h() const { return h_; }
  double gamma() const { return gamma_; }
  const Vec3& chi() const { return chi_; }
  const Grid& grid() const { return grid_; }

  const FiniteDifferenceData& fd() const { return std::get<FiniteDifferenceData>(data_); }
  const SpectralData& spectral() const { return std::get<SpectralData>(data_); }

private:
  friend StepOperator assemble(const Grid&, double, double, const Vec3&, Backend);

  double h_ = 0.0;
  double gamma_ = 0.0;
  Vec3 chi_{};
  Grid grid_;
  std::variant<FiniteDifferenceData, SpectralData> data_;
};

namespace detail {

/// H with the 3-point stencils D2 = (1,-2,1)/dx^2 and D1 = (-1,0,1)/(2dx), zero ghosts.
inline BlockTridiagonalMatrix fd_generator(const Grid& grid, double h, double gamma,
                                           const Vec3& chi) {
  const std::size_t m = grid.size();
  const double dx = grid.dx();
  const Block2 sigma = pauli_combination(chi);
  const Block2 centre = Block2::scalar(I_unit * (2.0 * h / (dx * dx)));
  const Block2 laplace_off = Block2::scalar(-I_unit * (h / (dx * dx)));
  const Block2 drift_off = (std::sqrt(gamma * h) / (2.0 * dx)) * sigma;

  BlockTridiagonalMatrix H(m);
  for (auto& d : H.diag) d = centre;
  for (auto& s : H.super) s = laplace_off + drift_off;
  for (auto& s : H.sub) s = laplace_off - drift_off;
  return H;
}

/// Id + s H for a block tridiagonal H.
inline BlockTridiagonalMatrix shifted(const BlockTridiagonalMatrix& H, double s) {
  BlockTridiagonalMatrix A = H;
  for (auto& d : A.diag) d = Block2::identity() + s * d;
  for (auto& b : A.sub) b = s * b;
  for (auto& b : A.super) b = s * b;
  return A;
}

// Spectral projectors P+- = (I +- chi_hat . sigma)/2 act on the eigenspaces of S.
inline void spectral_multipliers(double h, double gamma, const Vec3& chi, double xi,
                                 Block2& symbol, Block2& cayley, Block2& plus_inv) {
  const Block2 sigma = pauli_combination(chi);
  const double chi_norm = norm3(chi);
  const double diffusion = h * xi * xi;
  const double split = xi * std::sqrt(gamma * h) * chi_norm;
  symbol = Block2::scalar(diffusion) + (xi * std::sqrt(gamma * h)) * sigma;
  if (split == 0.0) {
    cayley = Block2::scalar(cayley_factor(diffusion));
    plus_inv = Block2::scalar(1.0 / (1.0 + I_unit * (diffusion / 2.0)));
    return;
  }
  const Block2 unit_sigma = (1.0 / chi_norm) * sigma;
  const Block2 p_plus = 0.5 * (Block2::identity() + unit_sigma);
  const Block2 p_minus = 0.5 * (Block2::identity() - unit_sigma);
  const double lam_plus = diffusion + split;
  const double lam_minus = diffusion - split;
  cayley = cayley_factor(lam_plus) * p_plus + cayley_factor(lam_minus) * p_minus;
  plus_inv = (1.0 / (1.0 + I_unit * (lam_plus / 2.0))) * p_plus +
             (1.0 / (1.0 + I_unit * (lam_minus / 2.0))) * p_minus;
}

inline FieldState apply_multiplier(const StepOperator::SpectralData& sp,
                                   const std::vector<Block2>& mult, const FieldState& X) {
  FieldState Y(X);
  sp.transform->forward(Y.values());
  for (std::size_t k = 0; k < Y.size(); ++k) Y[k] = mult[k] * Y[k];
  sp.transform->inverse(Y.values());
  return Y;
}

inline void check_grid(const StepOperator& op, const FieldState& X) {
  if (X.size() != op.grid().size()) throw DimensionMismatch("field does not live on operator grid");
}

} // namespace detail

inline StepOperator assemble(const Grid& grid, double h, double gamma, const Vec3& chi,
                             Backend backend) {
  if (!(h > 0.0)) throw ConfigError("time step must be > 0");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (grid.boundary() != boundary_for(backend)) {
    throw BackendBoundaryMismatch(std::string(to_string(backend)) + " backend requires a " +
                                  std::string(to_string(boundary_for(backend))) + " grid");
  }
  StepOperator op;
  op.h_ = h;
  op.gamma_ = gamma;
  op.chi_ = chi;
  op.grid_ = grid;
  if (backend == Backend::FiniteDifference) {
    StepOperator::FiniteDifferenceData fd;
    fd.generator = detail::fd_generator(grid, h, gamma, chi);
    fd.minus = detail::shifted(fd.generator, -0.5);
    fd.plus.factor(detail::shifted(fd.generator, 0.5));
    op.data_ = std::move(fd);
  } else {
    StepOperator::SpectralData sp;
    const std::size_t m = grid.size();
    sp.transform = SpectralTransform::cached(m);
    sp.symbol.resize(m);
    sp.cayley.resize(m);
    sp.plus_inv.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double xi = sp.transform->frequency(k, grid.length());
      detail::spectral_multipliers(h, gamma, chi, xi, sp.symbol[k], sp.cayley[k], sp.plus_inv[k]);
    }
    op.data_ = std::move(sp);
  }
  return op;
}

/// U X = (Id + H/2)^{-1} (Id - H/2) X.
inline FieldState apply_cayley(const StepOperator& op, const FieldState& X) {
  detail::check_grid(op, X);
  if (op.backend() == Backend::FiniteDifference) {
    const auto& fd = op.fd();
    FieldState Y = matvec(fd.minus, X);
    fd.plus.solve_in_place(Y);
    return Y;
  }
  return detail::apply_multiplier(op.spectral(), op.spectral().cayley, X);
}

/// (Id - H/2) X.
inline FieldState apply_minus(const StepOperator& op, const FieldState& X) {
  detail::check_grid(op, X);
  if (op.backend() == Backend::FiniteDifference) return matvec(op.fd().minus, X);
  const auto& sp = op.spectral();
  std::vector<Block2> mult(sp.symbol.size());
  for (std::size_t k = 0; k < mult.size(); ++k) {
    mult[k] = Block2::identity() - (0.5 * I_unit) * sp.symbol[k];
  }
  return detail::apply_multiplier(sp, mult, X);
}

/// (Id + H/2)^{-1} B.
inline FieldState solve_plus(const StepOperator& op, const FieldState& B) {
  detail::check_grid(op, B);
  if (op.backend() == Backend::FiniteDifference) return op.fd().plus.solve(B);
  return detail::apply_multiplier(op.spectral(), op.spectral().plus_inv, B);
}

/// H X.
inline FieldState apply_generator(const StepOperator& op, const FieldState& X) {
  detail::check_grid(op, X);
  if (op.backend() == Backend::FiniteDifference) return matvec(op.fd().generator, X);
  const auto& sp = op.spectral();
  std::vector<Block2> mult(sp.symbol.size());
  for (std::size_t k = 0; k < mult.size(); ++k) mult[k] = I_unit * sp.symbol[k];
  return detail::apply_multiplier(sp, mult, X);
}

/// U_{n-1} ... U_0 X: ops[0] is applied first.
inline FieldState compose_apply(std::span<const StepOperator> ops, const FieldState& X) {
  FieldState Y(X);
  for (const auto& op : ops) {
    if (op.grid() != ops.front().grid() || op.backend() != ops.front().backend()) {
      throw ConfigError("composed operators must share grid and backend");
    }
    Y = apply_cayley(op, Y);
  }
  return Y;
}

} // namespace smanakov

#endif // SMANAKOV_PROPAGATOR_HPP
