#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "norminflate/errors.hpp"
#include "norminflate/frequency.hpp"

namespace norminflate {

inline constexpr Frequency eta{0, 1, 0};

struct LacunaryParams {
  int r = 4;             // number of waves
  double beta = 0.45;    // amplitude exponent
  std::int64_t K = 4;    // base frequency
  double nu = 0.1;       // time exponent, T = r^-nu
  double delta = 0.01;   // small loss exponent
  double s = 0.5;        // order of the inflating Besov norm

  /// Parameter ranges only; enough for the scalar closed forms, which never build frequencies.
  void validate_ranges() const {
    auto fail = [](const std::string& m) { throw parameter_error("LacunaryParams: " + m); };
    if (r < 1) fail("r must be >= 1, got " + std::to_string(r));
    if (!(beta > 0.0) || !std::isfinite(beta)) fail("beta must be positive, got " + std::to_string(beta));
    if (K < 2) fail("K must be an integer >= 2, got " + std::to_string(K));
    if (!(nu >= 0.0) || !std::isfinite(nu)) fail("nu must be non-negative, got " + std::to_string(nu));
    if (!(delta > 0.0 && delta <= 0.2)) fail("delta must lie in (0, 0.2], got " + std::to_string(delta));
    if (!(s > 0.0) || !std::isfinite(s)) fail("s must be positive, got " + std::to_string(s));
  }

  /// Ranges plus 2^r K fitting a Wavenumber with headroom.
  void validate() const {
    validate_ranges();
    // 2^r K < 2^126 leaves room for sums k_i + k'_j.
    int bits = 0;
    for (auto k = K; k > 0; k >>= 1) ++bits;
    if (r + bits > 125) {
      throw parameter_error("LacunaryParams: 2^(r-1) K overflows the 128-bit wavenumber range (r=" +
                            std::to_string(r) + ", K=" + std::to_string(K) + ")");
    }
  }

  /// beta > max{0, 1/2 - (3/4) nu}, needed by the remainder bound.
  bool satisfies_proposition_constraint() const {
    return beta > std::max(0.0, 0.5 - 0.75 * nu);
  }

  void require_proposition_constraint() const {
    if (!satisfies_proposition_constraint()) {
      throw parameter_error("parameters violate the remainder-bound constraint beta > max{0, 1/2 - (3/4) nu}: beta=" +
                            std::to_string(beta) + ", 1/2 - (3/4) nu = " +
                            std::to_string(0.5 - 0.75 * nu));
    }
  }

  double amplitude() const { return std::pow(static_cast<double>(r), -beta); }
  double final_time() const { return std::pow(static_cast<double>(r), -nu); }

  /// 2^(i-1) K for 1-based i.
  Wavenumber kbar(int i) const { return static_cast<Wavenumber>(K) << (i - 1); }
};

/// K = max(2, round(r^(nu/2))).
inline std::int64_t k_rule(int r, double nu) {
  const auto k = std::llround(std::pow(static_cast<double>(r), 0.5 * nu));
  return std::max<std::int64_t>(2, k);
}

/// beta = 1/2 - nu/2, K from k_rule.
inline LacunaryParams inflation_params(int r, double nu, double delta, double s) {
  LacunaryParams p;
  p.r = r;
  p.nu = nu;
  p.beta = 0.5 - 0.5 * nu;
  p.K = k_rule(r, nu);
  p.delta = delta;
  p.s = s;
  return p;
}

}  // namespace norminflate
