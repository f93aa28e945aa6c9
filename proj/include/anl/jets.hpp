#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

// Truncated jet arithmetic used throughout the pointwise kernels.
//
// TJ<K>  : value plus time derivatives up to order K (K <= 3). Products use
//          the Leibniz rule, so slot m holds d^m/dt^m exactly (no 1/m!).
// J2<T>  : recursive two-direction jet in (h,s), used by the EOS to produce
//          exact closed-form partial derivatives of thermodynamic quantities.

namespace anl {

template <int K>
struct TJ {
  static_assert(K >= 0 && K <= 3, "time jets implemented up to order 3");
  std::array<double, K + 1> c{};

  TJ() = default;
  explicit TJ(double v) { c[0] = v; }
  static TJ constant(double v) { return TJ(v); }
  // Slots beyond those given stay zero.
  static TJ make(double v0, double v1 = 0.0, double v2 = 0.0, double v3 = 0.0) {
    TJ r;
    const double vals[4] = {v0, v1, v2, v3};
    for (int m = 0; m <= K; ++m) r.c[m] = vals[m];
    return r;
  }

  double value() const { return c[0]; }
  double d1() const { static_assert(K >= 1); return c[1]; }
  double d2() const { static_assert(K >= 2); return c[2]; }
  double d3() const { static_assert(K >= 3); return c[3]; }

  template <int K2>
  TJ<K2> truncate() const {
    static_assert(K2 <= K);
    TJ<K2> r;
    for (int m = 0; m <= K2; ++m) r.c[m] = c[m];
    return r;
  }
};

template <int K> TJ<K> operator+(const TJ<K>& a, const TJ<K>& b) {
  TJ<K> r;
  for (int m = 0; m <= K; ++m) r.c[m] = a.c[m] + b.c[m];
  return r;
}
template <int K> TJ<K> operator-(const TJ<K>& a, const TJ<K>& b) {
  TJ<K> r;
  for (int m = 0; m <= K; ++m) r.c[m] = a.c[m] - b.c[m];
  return r;
}
template <int K> TJ<K> operator-(const TJ<K>& a) {
  TJ<K> r;
  for (int m = 0; m <= K; ++m) r.c[m] = -a.c[m];
  return r;
}
template <int K> TJ<K> operator*(double s, const TJ<K>& a) {
  TJ<K> r;
  for (int m = 0; m <= K; ++m) r.c[m] = s * a.c[m];
  return r;
}
template <int K> TJ<K> operator*(const TJ<K>& a, double s) { return s * a; }
template <int K> TJ<K> operator/(const TJ<K>& a, double s) { return (1.0 / s) * a; }
template <int K> TJ<K> operator+(const TJ<K>& a, double s) {
  TJ<K> r = a;
  r.c[0] += s;
  return r;
}
template <int K> TJ<K> operator+(double s, const TJ<K>& a) { return a + s; }
template <int K> TJ<K> operator-(const TJ<K>& a, double s) { return a + (-s); }
template <int K> TJ<K> operator-(double s, const TJ<K>& a) { return (-a) + s; }

template <int K> TJ<K> operator*(const TJ<K>& a, const TJ<K>& b) {
  TJ<K> r;
  r.c[0] = a.c[0] * b.c[0];
  if constexpr (K >= 1) r.c[1] = a.c[1] * b.c[0] + a.c[0] * b.c[1];
  if constexpr (K >= 2) r.c[2] = a.c[2] * b.c[0] + 2.0 * a.c[1] * b.c[1] + a.c[0] * b.c[2];
  if constexpr (K >= 3)
    r.c[3] = a.c[3] * b.c[0] + 3.0 * a.c[2] * b.c[1] + 3.0 * a.c[1] * b.c[2] + a.c[0] * b.c[3];
  return r;
}

// a / b from Leibniz on a = r*b.
template <int K> TJ<K> operator/(const TJ<K>& a, const TJ<K>& b) {
  TJ<K> r;
  const double ib = 1.0 / b.c[0];
  r.c[0] = a.c[0] * ib;
  if constexpr (K >= 1) r.c[1] = (a.c[1] - r.c[0] * b.c[1]) * ib;
  if constexpr (K >= 2) r.c[2] = (a.c[2] - r.c[0] * b.c[2] - 2.0 * r.c[1] * b.c[1]) * ib;
  if constexpr (K >= 3)
    r.c[3] = (a.c[3] - r.c[0] * b.c[3] - 3.0 * r.c[1] * b.c[2] - 3.0 * r.c[2] * b.c[1]) * ib;
  return r;
}
template <int K> TJ<K> operator/(double s, const TJ<K>& b) { return TJ<K>(s) / b; }

template <int K> TJ<K> sqrt(const TJ<K>& a) {
  TJ<K> r;
  r.c[0] = std::sqrt(a.c[0]);
  const double i2r = 1.0 / (2.0 * r.c[0]);
  if constexpr (K >= 1) r.c[1] = a.c[1] * i2r;
  if constexpr (K >= 2) r.c[2] = (a.c[2] - 2.0 * r.c[1] * r.c[1]) * i2r;
  if constexpr (K >= 3) r.c[3] = (a.c[3] - 6.0 * r.c[1] * r.c[2]) * i2r;
  return r;
}

// (e^a)' = e^a a'; higher slots by Leibniz on r' = r*a'.
template <int K> TJ<K> exp(const TJ<K>& a) {
  TJ<K> r;
  r.c[0] = std::exp(a.c[0]);
  if constexpr (K >= 1) r.c[1] = r.c[0] * a.c[1];
  if constexpr (K >= 2) r.c[2] = r.c[1] * a.c[1] + r.c[0] * a.c[2];
  if constexpr (K >= 3) r.c[3] = r.c[2] * a.c[1] + 2.0 * r.c[1] * a.c[2] + r.c[0] * a.c[3];
  return r;
}

// Scalar math usable from unqualified calls in jet-generic code.
inline double exp(double x) { return std::exp(x); }
inline double sqrt(double x) { return std::sqrt(x); }

// Two-direction recursive jet over (h, s). Bottoming out at double gives
// exact mixed partials of any composition of the ops below.
template <class T>
struct J2 {
  T v{}, dh{}, ds{};
  J2() = default;
  J2(T v_, T dh_, T ds_) : v(v_), dh(dh_), ds(ds_) {}
  static T inner_constant(double x) {
    if constexpr (std::is_same_v<T, double>)
      return x;
    else
      return T::constant(x);
  }
  static J2 constant(double x) {
    return J2{inner_constant(x), inner_constant(0.0), inner_constant(0.0)};
  }
};

namespace jet_detail {
inline double inv(double x) { return 1.0 / x; }
template <int K> TJ<K> inv(const TJ<K>& x) { return 1.0 / x; }
template <class T> J2<T> inv(const J2<T>& x);
inline double jexp(double x) { return std::exp(x); }
template <int K> TJ<K> jexp(const TJ<K>& x) { return exp(x); }
template <class T> J2<T> jexp(const J2<T>& x);
inline double jsqrt(double x) { return std::sqrt(x); }
template <int K> TJ<K> jsqrt(const TJ<K>& x) { return sqrt(x); }
template <class T> J2<T> jsqrt(const J2<T>& x);
}  // namespace jet_detail

template <class T> J2<T> operator+(const J2<T>& a, const J2<T>& b) {
  return {a.v + b.v, a.dh + b.dh, a.ds + b.ds};
}
template <class T> J2<T> operator-(const J2<T>& a, const J2<T>& b) {
  return {a.v - b.v, a.dh - b.dh, a.ds - b.ds};
}
template <class T> J2<T> operator-(const J2<T>& a) { return {-a.v, -a.dh, -a.ds}; }
template <class T> J2<T> operator*(const J2<T>& a, const J2<T>& b) {
  return {a.v * b.v, a.dh * b.v + a.v * b.dh, a.ds * b.v + a.v * b.ds};
}
template <class T> J2<T> operator*(double s, const J2<T>& a) {
  return J2<T>::constant(s) * a;
}
template <class T> J2<T> operator*(const J2<T>& a, double s) { return s * a; }
template <class T> J2<T> operator+(const J2<T>& a, double s) {
  return a + J2<T>::constant(s);
}
template <class T> J2<T> operator+(double s, const J2<T>& a) { return a + s; }
template <class T> J2<T> operator-(const J2<T>& a, double s) {
  return a - J2<T>::constant(s);
}
template <class T> J2<T> operator-(double s, const J2<T>& a) {
  return J2<T>::constant(s) - a;
}

namespace jet_detail {
template <class T> J2<T> inv(const J2<T>& x) {
  auto iv = inv(x.v);
  auto m = -(iv * iv);
  return {iv, m * x.dh, m * x.ds};
}
template <class T> J2<T> jexp(const J2<T>& x) {
  auto e = jexp(x.v);
  return {e, e * x.dh, e * x.ds};
}
template <class T> J2<T> jsqrt(const J2<T>& x) {
  auto r = jsqrt(x.v);
  auto half_ir = 0.5 * inv(r);
  return {r, half_ir * x.dh, half_ir * x.ds};
}
}  // namespace jet_detail

template <class T> J2<T> operator/(const J2<T>& a, const J2<T>& b) {
  return a * jet_detail::inv(b);
}
template <class T> J2<T> operator/(const J2<T>& a, double s) { return (1.0 / s) * a; }
template <class T> J2<T> operator/(double s, const J2<T>& b) {
  return s * jet_detail::inv(b);
}
template <class T> J2<T> exp(const J2<T>& a) { return jet_detail::jexp(a); }
template <class T> J2<T> sqrt(const J2<T>& a) { return jet_detail::jsqrt(a); }

// Order-2 nested (h,s) jet and its seeds.
using J2d = J2<double>;
using J22 = J2<J2d>;

inline J22 seed_h2(double h) {
  return J22{J2d{h, 1.0, 0.0}, J2d{1.0, 0.0, 0.0}, J2d{0.0, 0.0, 0.0}};
}
inline J22 seed_s2(double s) {
  return J22{J2d{s, 0.0, 1.0}, J2d{0.0, 0.0, 0.0}, J2d{1.0, 0.0, 0.0}};
}

}  // namespace anl
