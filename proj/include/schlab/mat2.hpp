#pragma once

// Fixed 2x2 matrices used by the transfer-matrix and SDE code. Row-major,
// entries named by position so formulas read like the algebra.

#include <cmath>
#include <complex>

namespace schlab {

template <typename T>
struct Mat2T {
  T a11{}, a12{}, a21{}, a22{};

  static constexpr Mat2T identity() { return {T(1), T(0), T(0), T(1)}; }

  constexpr T det() const { return a11 * a22 - a12 * a21; }
  constexpr T trace() const { return a11 + a22; }

  friend constexpr Mat2T operator*(const Mat2T& x, const Mat2T& y) {
    return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
            x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
  }
  friend constexpr Mat2T operator+(const Mat2T& x, const Mat2T& y) {
    return {x.a11 + y.a11, x.a12 + y.a12, x.a21 + y.a21, x.a22 + y.a22};
  }
  friend constexpr Mat2T operator-(const Mat2T& x, const Mat2T& y) {
    return {x.a11 - y.a11, x.a12 - y.a12, x.a21 - y.a21, x.a22 - y.a22};
  }
  friend constexpr Mat2T operator*(T s, const Mat2T& x) {
    return {s * x.a11, s * x.a12, s * x.a21, s * x.a22};
  }
  constexpr bool operator==(const Mat2T&) const = default;
};

using Mat2 = Mat2T<double>;
using Complex = std::complex<double>;
using Mat2c = Mat2T<Complex>;

template <typename T>
struct Vec2T {
  T x{}, y{};
};
using Vec2c = Vec2T<Complex>;

template <typename T>
constexpr Vec2T<T> operator*(const Mat2T<T>& m, const Vec2T<T>& v) {
  return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}

/// Hilbert-Schmidt (Frobenius) norm.
inline double hs_norm(const Mat2& m) {
  return std::sqrt(m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 +
                   m.a22 * m.a22);
}
inline double hs_norm(const Mat2c& m) {
  return std::sqrt(std::norm(m.a11) + std::norm(m.a12) + std::norm(m.a21) +
                   std::norm(m.a22));
}

inline double max_abs_entry(const Mat2& m) {
  return std::fmax(std::fmax(std::fabs(m.a11), std::fabs(m.a12)),
                   std::fmax(std::fabs(m.a21), std::fabs(m.a22)));
}

inline Mat2c to_complex(const Mat2& m) {
  return {Complex(m.a11), Complex(m.a12), Complex(m.a21), Complex(m.a22)};
}

/// Real part entrywise.
inline Mat2 real_part(const Mat2c& m) {
  return {m.a11.real(), m.a12.real(), m.a21.real(), m.a22.real()};
}

inline double max_abs_imag(const Mat2c& m) {
  return std::fmax(std::fmax(std::fabs(m.a11.imag()), std::fabs(m.a12.imag())),
                   std::fmax(std::fabs(m.a21.imag()), std::fabs(m.a22.imag())));
}

}  // namespace schlab
