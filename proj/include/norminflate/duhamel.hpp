#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace norminflate {

/// Time kernel of one mode interaction inside a Duhamel integral.
///
/// The integrand is (t-s)^p exp(-(t-s) M) exp(-s A): M is |m|^2 of the output
/// frequency, A the summed decay |a|^2 + |b|^2 of the two heat-evolved sources.
struct DuhamelKernel {
  int weight_power = 0;  // 0 for B1 and B3, 1 for B2
  double outgoing_decay = 0.0;
  double incoming_decay = 0.0;
};

namespace detail {

inline constexpr double kSeriesThreshold = 1e-6;

/// (1 - e^-x) / x for x >= 0.
inline double phi1(double x) {
  if (x < kSeriesThreshold) return 1.0 - x / 2.0 + x * x / 6.0;
  return -std::expm1(-x) / x;
}

/// (1 - (1 + x) e^-x) / x^2 for x >= 0.
inline double phi2(double x) {
  if (x < kSeriesThreshold) return 0.5 - x / 3.0 + x * x / 8.0;
  if (x < 0.5) {
    // sum_{n>=2} (-1)^n (n-1) x^(n-2) / n!; the closed form cancels badly here.
    double term = 0.5;  // n = 2
    double sum = term;
    double power = 1.0, fact = 2.0;
    for (int n = 3; n < 30; ++n) {
      power *= -x;
      fact *= n;
      term = (n - 1) * power / fact;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return (1.0 - (1.0 + x) * std::exp(-x)) / (x * x);
}

}  // namespace detail

/// Closed form of  int_0^t (t-s)^p e^{-(t-s) M} e^{-s A} ds  for p in {0, 1}.
///
/// Written in terms of min(M, A) and |M - A| so that no exponential overflows and
/// the value is continuous across M = A; small |M - A| t switches to series.
inline double duhamel_integral(const DuhamelKernel& kern, double t) {
  const double M = kern.outgoing_decay;
  const double A = kern.incoming_decay;
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("duhamel_integral: t must be positive, got " + std::to_string(t));
  }
  if (!(M >= 0.0) || !(A >= 0.0)) {
    throw std::invalid_argument("duhamel_integral: decays must be non-negative");
  }
  if (kern.weight_power != 0 && kern.weight_power != 1) {
    throw std::invalid_argument("duhamel_integral: weight_power must be 0 or 1");
  }
  const double D = M - A;
  if (kern.weight_power == 0) {
    // D >= 0: e^{-At} t phi1(Dt);  D < 0: e^{-Mt} t phi1(-Dt)
    return D >= 0.0 ? std::exp(-A * t) * t * detail::phi1(D * t)
                    : std::exp(-M * t) * t * detail::phi1(-D * t);
  }
  // D >= 0: e^{-At} t^2 phi2(Dt);  D < 0: e^{-Mt} t^2 (phi1 - phi2)(-Dt)
  if (D >= 0.0) return std::exp(-A * t) * t * t * detail::phi2(D * t);
  const double x = -D * t;
  return std::exp(-M * t) * t * t * (detail::phi1(x) - detail::phi2(x));
}

}  // namespace norminflate
