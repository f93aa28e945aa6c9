#pragma once

#include <array>
#include <cmath>

// Index conventions shared by the pointwise kernels: Greek indices 0..3 are
// raised and lowered with the Minkowski metric eta = diag(-1,1,1,1) (never
// with the acoustical metric), and the fully antisymmetric symbol is
// normalized by eps_{0123} = 1, eps^{0123} = -1.

namespace anl {

template <class T>
using Vec4 = std::array<T, 4>;
template <class T>
using Mat4 = std::array<std::array<T, 4>, 4>;
template <class T>
using Mat3 = std::array<std::array<T, 3>, 3>;

inline constexpr double eta_diag(int a) { return a == 0 ? -1.0 : 1.0; }

// eps_{abcd}, indices in 0..3; returns 0, +1 or -1.
inline int eps4_lower(int a, int b, int c, int d) {
  const int p[4] = {a, b, c, d};
  int sign = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (p[i] == p[j]) return 0;
      if (p[i] > p[j]) sign = -sign;
    }
  return sign;
}
inline int eps4_upper(int a, int b, int c, int d) { return -eps4_lower(a, b, c, d); }

// eps_{abc} = eps^{abc}, indices in 0..2.
inline int eps3(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  int sign = 1;
  const int p[3] = {a, b, c};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (p[i] > p[j]) sign = -sign;
  return sign;
}

// eta-dual: lower an upper 4-vector.
template <class T>
Vec4<T> lower(const Vec4<T>& v) {
  return {-v[0], v[1], v[2], v[3]};
}

template <class T>
T dot_eta(const Vec4<T>& a, const Vec4<T>& b) {
  return -(a[0] * b[0]) + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

// Solve A x = b for a 6x6 system by LU with partial pivoting. A is consumed.
inline std::array<double, 6> solve6(std::array<std::array<double, 6>, 6> A,
                                    std::array<double, 6> b) {
  int perm[6] = {0, 1, 2, 3, 4, 5};
  for (int col = 0; col < 6; ++col) {
    int piv = col;
    double best = std::abs(A[perm[col]][col]);
    for (int r = col + 1; r < 6; ++r) {
      const double v = std::abs(A[perm[r]][col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    std::swap(perm[col], perm[piv]);
    const double d = A[perm[col]][col];
    for (int r = col + 1; r < 6; ++r) {
      const double f = A[perm[r]][col] / d;
      A[perm[r]][col] = f;
      for (int c = col + 1; c < 6; ++c) A[perm[r]][c] -= f * A[perm[col]][c];
    }
  }
  std::array<double, 6> y{};
  for (int r = 0; r < 6; ++r) {
    double s = b[perm[r]];
    for (int c = 0; c < r; ++c) s -= A[perm[r]][c] * y[c];
    y[r] = s;
  }
  std::array<double, 6> x{};
  for (int r = 5; r >= 0; --r) {
    double s = y[r];
    for (int c = r + 1; c < 6; ++c) s -= A[perm[r]][c] * x[c];
    x[r] = s / A[perm[r]][r];
  }
  return x;
}

}  // namespace anl
