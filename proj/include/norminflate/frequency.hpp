#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace norminflate {

/// Integer wavenumber component. 128 bits so that 2^(r-1) K stays exact for r up to ~120.
using Wavenumber = __int128;

inline Wavenumber abs_wavenumber(Wavenumber x) { return x < 0 ? -x : x; }

inline std::string to_string(Wavenumber x) {
  if (x == 0) return "0";
  const bool neg = x < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(x + 1)) + 1
                            : static_cast<unsigned __int128>(x);
  std::string s;
  while (u > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  return neg ? "-" + s : s;
}

/// Wavenumber on the 3-torus [0, 2 pi)^3.
struct Frequency {
  std::array<Wavenumber, 3> k{0, 0, 0};

  constexpr Frequency() = default;
  constexpr Frequency(Wavenumber a, Wavenumber b, Wavenumber c) : k{a, b, c} {}

  constexpr Wavenumber operator[](std::size_t i) const { return k[i]; }

  constexpr bool is_zero() const { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

  /// True when the leading nonzero entry is positive (the stored representative of {k, -k}).
  constexpr bool is_canonical() const {
    for (auto x : k) {
      if (x != 0) return x > 0;
    }
    return true;
  }

  constexpr Frequency operator-() const { return {-k[0], -k[1], -k[2]}; }
  friend constexpr Frequency operator+(const Frequency& a, const Frequency& b) {
    return {a.k[0] + b.k[0], a.k[1] + b.k[1], a.k[2] + b.k[2]};
  }
  friend constexpr Frequency operator-(const Frequency& a, const Frequency& b) {
    return {a.k[0] - b.k[0], a.k[1] - b.k[1], a.k[2] - b.k[2]};
  }

  friend constexpr bool operator==(const Frequency& a, const Frequency& b) {
    return a.k[0] == b.k[0] && a.k[1] == b.k[1] && a.k[2] == b.k[2];
  }
  friend constexpr std::strong_ordering operator<=>(const Frequency& a, const Frequency& b) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (a.k[i] < b.k[i]) return std::strong_ordering::less;
      if (a.k[i] > b.k[i]) return std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
  }

  std::array<double, 3> as_double() const {
    return {static_cast<double>(k[0]), static_cast<double>(k[1]), static_cast<double>(k[2])};
  }

  /// |k|^2 in double precision (exact while |k| < 2^26).
  double norm2() const {
    const auto d = as_double();
    return d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  }
  double norm() const { return std::sqrt(norm2()); }

  Wavenumber max_abs_component() const {
    Wavenumber m = 0;
    for (auto x : k) {
      const auto a = abs_wavenumber(x);
      if (a > m) m = a;
    }
    return m;
  }

  std::string str() const {
    return "(" + to_string(k[0]) + "," + to_string(k[1]) + "," + to_string(k[2]) + ")";
  }
};

inline double dot(const Frequency& a, const std::array<double, 3>& x) {
  const auto d = a.as_double();
  return d[0] * x[0] + d[1] * x[1] + d[2] * x[2];
}

}  // namespace norminflate
