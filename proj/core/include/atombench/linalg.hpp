#pragma once

// Fixed-size 3-vector / 3x3 matrix helpers. Matrices are row-major and,
// when they hold a lattice, row i is lattice vector i.

#include <array>
#include <cmath>
#include <cstdint>

namespace atombench {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;
using IMat3 = std::array<std::array<std::int64_t, 3>, 3>;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline Vec3 operator+(const Vec3& u, const Vec3& v) {
  return {u[0] + v[0], u[1] + v[1], u[2] + v[2]};
}
inline Vec3 operator-(const Vec3& u, const Vec3& v) {
  return {u[0] - v[0], u[1] - v[1], u[2] - v[2]};
}
inline Vec3 operator*(double s, const Vec3& v) {
  return {s * v[0], s * v[1], s * v[2]};
}

inline double dot(const Vec3& u, const Vec3& v) {
  return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}
inline Vec3 cross(const Vec3& u, const Vec3& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
          u[0] * v[1] - u[1] * v[0]};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double det(const Mat3& m) { return dot(m[0], cross(m[1], m[2])); }

inline std::int64_t det(const IMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Mat3 transpose(const Mat3& m) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return r;
}

inline IMat3 matmul(const IMat3& a, const IMat3& b) {
  IMat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return r;
}

// Integer matrix applied to a real matrix: rows of the result are integer
// combinations of the rows of m.
inline Mat3 matmul(const IMat3& a, const Mat3& m) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r[i][j] = static_cast<double>(a[i][0]) * m[0][j] +
                static_cast<double>(a[i][1]) * m[1][j] +
                static_cast<double>(a[i][2]) * m[2][j];
  return r;
}

// Row vector times matrix: v * m.
inline Vec3 vecmat(const Vec3& v, const Mat3& m) {
  return {v[0] * m[0][0] + v[1] * m[1][0] + v[2] * m[2][0],
          v[0] * m[0][1] + v[1] * m[1][1] + v[2] * m[2][1],
          v[0] * m[0][2] + v[1] * m[1][2] + v[2] * m[2][2]};
}

inline Vec3 vecmat(const Vec3& v, const IMat3& m) {
  Vec3 r{};
  for (int j = 0; j < 3; ++j)
    r[j] = v[0] * static_cast<double>(m[0][j]) +
           v[1] * static_cast<double>(m[1][j]) +
           v[2] * static_cast<double>(m[2][j]);
  return r;
}

// Inverse through the adjugate. Caller guarantees a nonsingular matrix.
inline Mat3 inverse(const Mat3& m) {
  const double d = det(m);
  Mat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
  return inv;
}

// Exact inverse of a unimodular integer matrix (det must be +1 or -1).
inline IMat3 unimodular_inverse(const IMat3& m) {
  const std::int64_t d = det(m);
  IMat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * d;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * d;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * d;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d;
  return inv;
}

inline constexpr IMat3 kIdentity3 = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

}  // namespace atombench
