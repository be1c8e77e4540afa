#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace norminflate {

/// Real 3-vector used for velocity coefficients.
struct Vec3 {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double x, double y, double z) : c{x, y, z} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr Vec3& operator+=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec3& operator*=(double a) {
    for (auto& x : c) x *= a;
    return *this;
  }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(Vec3 a) { return a *= -1.0; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// 3x3 matrix stored by rows; row i is the gradient of component i.
struct Mat3 {
  std::array<Vec3, 3> row{};

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t i = 0; i < 3; ++i) row[i] += o.row[i];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t i = 0; i < 3; ++i) row[i] -= o.row[i];
    return *this;
  }
  constexpr Mat3& operator*=(double a) {
    for (auto& r : row) r *= a;
    return *this;
  }
  friend constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
  friend constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
  friend constexpr Mat3 operator-(Mat3 a) { return a *= -1.0; }
  friend constexpr Mat3 operator*(double s, Mat3 a) { return a *= s; }
  friend constexpr Mat3 operator*(Mat3 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double magnitude(const Mat3& m) {
  double s = 0.0;
  for (const auto& r : m.row) s += dot(r, r);
  return std::sqrt(s);
}

/// Squared magnitude, kept separate so the l1 bracket can combine cos and sin parts.
inline double magnitude2(double x) { return x * x; }
inline double magnitude2(const Vec3& v) { return dot(v, v); }
inline double magnitude2(const Mat3& m) {
  double s = 0.0;
  for (const auto& r : m.row) s += dot(r, r);
  return s;
}

inline bool all_finite(double x) { return std::isfinite(x); }
inline bool all_finite(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}
inline bool all_finite(const Mat3& m) {
  return all_finite(m.row[0]) && all_finite(m.row[1]) && all_finite(m.row[2]);
}

inline constexpr Vec3 e3{0.0, 0.0, 1.0};

}  // namespace norminflate
