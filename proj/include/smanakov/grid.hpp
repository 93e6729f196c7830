#ifndef SMANAKOV_GRID_HPP
#define SMANAKOV_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "smanakov/errors.hpp"

namespace smanakov {

enum class Boundary { Dirichlet, Periodic };

inline std::string_view to_string(Boundary b) {
  return b == Boundary::Dirichlet ? "dirichlet" : "periodic";
}

/// Uniform mesh on [-a, a].
///
/// Dirichlet grids store the m = 2a/dx - 1 interior nodes x_j = -a + j dx, j = 1..m;
/// the boundary values are identically zero and never stored. Periodic grids store
/// m = 2a/dx nodes, j = 0..m-1.
class Grid {
public:
  Grid() = default;

  double half_width() const { return a_; }
  double dx() const { return dx_; }
  std::size_t size() const { return m_; }
  Boundary boundary() const { return boundary_; }

  /// Coordinate of stored node i (0-based).
  double x(std::size_t i) const {
    const double offset = boundary_ == Boundary::Dirichlet ? 1.0 : 0.0;
    return -a_ + (static_cast<double>(i) + offset) * dx_;
  }

  /// Period length 2a; only meaningful for periodic grids.
  double length() const { return 2.0 * a_; }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  friend Grid make_grid(double a, double dx, Boundary boundary);

  double a_ = 0.0;
  double dx_ = 0.0;
  std::size_t m_ = 0;
  Boundary boundary_ = Boundary::Dirichlet;
};

inline Grid make_grid(double a, double dx, Boundary boundary) {
  if (!(a > 0.0) || !(dx > 0.0) || !std::isfinite(a) || !std::isfinite(dx)) {
    throw ConfigError("grid requires a > 0 and dx > 0");
  }
  const double cells = 2.0 * a / dx;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
    throw NonDivisibleDomain("2a/dx = " + std::to_string(cells) + " is not an integer");
  }
  const auto n_cells = static_cast<long long>(rounded);
  const long long m = boundary == Boundary::Dirichlet ? n_cells - 1 : n_cells;
  if (m < 3) {
    throw DegenerateGrid("grid has " + std::to_string(m) + " nodes; at least 3 are required");
  }
  Grid g;
  g.a_ = a;
  g.dx_ = dx;
  g.m_ = static_cast<std::size_t>(m);
  g.boundary_ = boundary;
  return g;
}

} // namespace smanakov

#endif // SMANAKOV_GRID_HPP
