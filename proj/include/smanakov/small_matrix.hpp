#ifndef SMANAKOV_SMALL_MATRIX_HPP
#define SMANAKOV_SMALL_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <complex>

namespace smanakov {

using cplx = std::complex<double>;

inline constexpr cplx I_unit{0.0, 1.0};

/// Value of the two-component field at one node.
struct Spinor {
  cplx first{};
  cplx second{};

  Spinor& operator+=(const Spinor& o) {
    first += o.first;
    second += o.second;
    return *this;
  }
  Spinor& operator-=(const Spinor& o) {
    first -= o.first;
    second -= o.second;
    return *this;
  }
  Spinor& operator*=(cplx s) {
    first *= s;
    second *= s;
    return *this;
  }

  /// |X1|^2 + |X2|^2
  double density() const { return std::norm(first) + std::norm(second); }

  friend Spinor operator+(Spinor a, const Spinor& b) { return a += b; }
  friend Spinor operator-(Spinor a, const Spinor& b) { return a -= b; }
  friend Spinor operator*(cplx s, Spinor a) { return a *= s; }
  friend Spinor operator*(double s, Spinor a) { return a *= cplx(s); }
  friend bool operator==(const Spinor&, const Spinor&) = default;
};

/// Dense complex 2x2 matrix [[a, b], [c, d]], the block unit of every operator here.
struct Block2 {
  cplx a{}, b{}, c{}, d{};

  static constexpr Block2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Block2 zero() { return {}; }
  static constexpr Block2 scalar(cplx s) { return {s, 0.0, 0.0, s}; }

  cplx det() const { return a * d - b * c; }
  Block2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }

  Block2& operator+=(const Block2& o) {
    a += o.a;
    b += o.b;
    c += o.c;
    d += o.d;
    return *this;
  }
  Block2& operator-=(const Block2& o) {
    a -= o.a;
    b -= o.b;
    c -= o.c;
    d -= o.d;
    return *this;
  }
  Block2& operator*=(cplx s) {
    a *= s;
    b *= s;
    c *= s;
    d *= s;
    return *this;
  }

  friend Block2 operator+(Block2 x, const Block2& y) { return x += y; }
  friend Block2 operator-(Block2 x, const Block2& y) { return x -= y; }
  friend Block2 operator*(cplx s, Block2 x) { return x *= s; }
  friend Block2 operator*(double s, Block2 x) { return x *= cplx(s); }
  friend Block2 operator*(const Block2& x, const Block2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
  }
  friend Spinor operator*(const Block2& m, const Spinor& v) {
    return {m.a * v.first + m.b * v.second, m.c * v.first + m.d * v.second};
  }
  friend bool operator==(const Block2&, const Block2&) = default;
};

/// Largest entry modulus.
inline double max_abs(const Block2& m) {
  return std::max(std::max(std::abs(m.a), std::abs(m.b)), std::max(std::abs(m.c), std::abs(m.d)));
}

} // namespace smanakov

#endif // SMANAKOV_SMALL_MATRIX_HPP
