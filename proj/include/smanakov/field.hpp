#ifndef SMANAKOV_FIELD_HPP
#define SMANAKOV_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "smanakov/errors.hpp"
#include "smanakov/grid.hpp"
#include "smanakov/small_matrix.hpp"

namespace smanakov {

/// Discrete two-component field: one Spinor per stored grid node, interleaved
/// (X1_0, X2_0, X1_1, X2_1, ...).
class FieldState {
public:
  FieldState() = default;
  explicit FieldState(const Grid& grid) : grid_(grid), values_(grid.size()) {}
  /// Values without mesh geometry, for pure linear algebra (norms are meaningless).
  explicit FieldState(std::vector<Spinor> values) : values_(std::move(values)) {}
  FieldState(const Grid& grid, std::vector<Spinor> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw DimensionMismatch("field length does not match grid size");
    }
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  Spinor& operator[](std::size_t i) { return values_[i]; }
  const Spinor& operator[](std::size_t i) const { return values_[i]; }

  std::span<Spinor> values() { return values_; }
  std::span<const Spinor> values() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](const Spinor& s) {
      return std::isfinite(s.first.real()) && std::isfinite(s.first.imag()) &&
             std::isfinite(s.second.real()) && std::isfinite(s.second.imag());
    });
  }

  FieldState& operator+=(const FieldState& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  FieldState& operator-=(const FieldState& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  FieldState& operator*=(cplx s) {
    for (auto& v : values_) v *= s;
    return *this;
  }

  /// this += s * o
  FieldState& add_scaled(cplx s, const FieldState& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
    return *this;
  }

  friend FieldState operator+(FieldState x, const FieldState& y) { return x += y; }
  friend FieldState operator-(FieldState x, const FieldState& y) { return x -= y; }
  friend FieldState operator*(cplx s, FieldState x) { return x *= s; }
  friend bool operator==(const FieldState&, const FieldState&) = default;

private:
  void check_same(const FieldState& o) const {
    if (o.values_.size() != values_.size()) throw DimensionMismatch("field sizes differ");
  }

  Grid grid_;
  std::vector<Spinor> values_;
};

} // namespace smanakov

#endif // SMANAKOV_FIELD_HPP
