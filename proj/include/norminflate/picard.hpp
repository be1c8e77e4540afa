#pragma once

// Mild-formulation bilinear operators and the first Picard iterates.
//
//   B1(u, v)     = -int_0^t e^{(t-s)Delta} P div(u (x) v) ds
//   B2(u, theta) = -int_0^t e^{(t-s)Delta} (t-s) P(div(u theta) e_3) ds
//   B3(u, theta) = -int_0^t e^{(t-s)Delta} div(u theta) ds
//
// Inputs are time-0 fields; inside the integral each source is heat-evolved to
// the source time s. Every mode pair is expanded onto its sum and difference
// frequencies and weighted by the closed-form Duhamel integral.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "norminflate/duhamel.hpp"
#include "norminflate/errors.hpp"
#include "norminflate/lacunary_data.hpp"
#include "norminflate/trig_field.hpp"

namespace norminflate {

/// Which output of a mode pair (a, b) a term lands on.
enum class PairOutput { sum, difference };

namespace detail {

inline void require_positive_time(double t, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument(std::string(who) + ": t must be positive, got " + std::to_string(t));
  }
}

/// Calls sink(ka, kb, which, m, cos, sin) with the time-integrated divergence-form
/// product of every mode pair; pairs are visited in canonical frequency order.
template <class T, class Sink>
void duhamel_pairs(const VectorField& u, const TrigField<T>& f, double t, int power, Sink&& sink) {
  for (const auto& [ka, ua] : u.modes()) {
    const double a2 = ka.norm2();
    for (const auto& [kb, fb] : f.modes()) {
      const auto p = divergence_form_pair(ka, ua, kb, fb);
      const double A = a2 + kb.norm2();
      const Frequency msum = ka + kb;
      const Frequency mdiff = ka - kb;
      const double wsum = duhamel_integral({power, msum.norm2(), A}, t);
      const double wdiff = duhamel_integral({power, mdiff.norm2(), A}, t);
      sink(ka, kb, PairOutput::sum, msum, wsum * p.sum_cos, wsum * p.sum_sin);
      sink(ka, kb, PairOutput::difference, mdiff, wdiff * p.diff_cos, wdiff * p.diff_sin);
    }
  }
}

}  // namespace detail

/// B1(u, v) at time t. Output is divergence-free.
inline VectorField b1(const VectorField& u, const VectorField& v, double t) {
  detail::require_positive_time(t, "b1");
  VectorField acc;
  detail::duhamel_pairs(u, v, t, 0,
                        [&](const Frequency&, const Frequency&, PairOutput, const Frequency& m,
                            const Vec3& c, const Vec3& s) { acc.add(m, c, s); });
  return -1.0 * leray_project(acc);
}

/// B1(u, v) split by pair output: sum frequencies (F1) and difference frequencies (F2).
struct B1Parts {
  VectorField f1;
  VectorField f2;
};

inline B1Parts b1_split(const VectorField& u, const VectorField& v, double t) {
  detail::require_positive_time(t, "b1_split");
  VectorField sums, diffs;
  detail::duhamel_pairs(u, v, t, 0,
                        [&](const Frequency&, const Frequency&, PairOutput which, const Frequency& m,
                            const Vec3& c, const Vec3& s) {
                          (which == PairOutput::sum ? sums : diffs).add(m, c, s);
                        });
  return {-1.0 * leray_project(sums), -1.0 * leray_project(diffs)};
}

/// B2(u, theta) at time t: (t-s)-weighted, directed along e_3, then projected.
inline VectorField b2(const VectorField& u, const ScalarField& theta, double t) {
  detail::require_positive_time(t, "b2");
  ScalarField acc;
  detail::duhamel_pairs(u, theta, t, 1,
                        [&](const Frequency&, const Frequency&, PairOutput, const Frequency& m,
                            double c, double s) { acc.add(m, c, s); });
  return -1.0 * leray_project(times(acc, e3));
}

/// B3(u, theta) at time t (no projection).
inline ScalarField b3(const VectorField& u, const ScalarField& theta, double t) {
  detail::require_positive_time(t, "b3");
  ScalarField acc;
  detail::duhamel_pairs(u, theta, t, 0,
                        [&](const Frequency&, const Frequency&, PairOutput, const Frequency& m,
                            double c, double s) { acc.add(m, c, s); });
  return -1.0 * acc;
}

struct Rho1Parts {
  ScalarField rho10;  // resonant part on eta
  ScalarField rho11;  // difference frequencies k_i - k'_j, i != j
  ScalarField rho12;  // sum frequencies k_i + k'_j
};

inline ScalarField sum(const Rho1Parts& p) { return p.rho10 + p.rho11 + p.rho12; }

struct PicardState {
  VectorField g;
  ScalarField theta;
  VectorField u1;
  ScalarField rho1;
  Rho1Parts rho1_parts;
  double t = 0.0;
  /// max |rho10 + rho11 + rho12 - rho1| relative to max |rho1|.
  double reconciliation_error = 0.0;
};

namespace detail {

inline double reconciliation(const ScalarField& rho1, const Rho1Parts& parts) {
  const double scale = rho1.max_abs_coefficient();
  const double diff = (sum(parts) - rho1).max_abs_coefficient();
  return scale == 0.0 ? diff : diff / scale;
}

inline void require_picard_time(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument("first_iterates: t must lie in (0, 1], got " + std::to_string(t));
  }
}

/// g = e^{t Delta}(u0 + t P(rho0 e3)) is only heat(u0) when P(rho0 e3) vanishes.
inline void require_projected_buoyancy_free(const ScalarField& rho0) {
  const double scale = std::max(1.0, rho0.max_abs_coefficient());
  if (leray_project(times(rho0, e3)).max_abs_coefficient() > 1e-14 * scale) {
    throw std::invalid_argument(
        "first_iterates: P(rho0 e3) must vanish (rho0 may only depend on x3)");
  }
}

}  // namespace detail

/// g, theta, u1 = B1(g,g) + B2(g,theta), rho1 = B3(g,theta) for generic data.
///
/// rho1 is split by mode pair: difference outputs landing on +-eta form rho10,
/// other difference outputs rho11, sum outputs rho12.
inline PicardState first_iterates(const VectorField& u0, const ScalarField& rho0, double t) {
  detail::require_picard_time(t);
  detail::require_projected_buoyancy_free(rho0);
  PicardState st;
  st.t = t;
  st.g = heat(u0, t);
  st.theta = heat(rho0, t);
  st.u1 = b1(u0, u0, t) + b2(u0, rho0, t);
  st.rho1 = b3(u0, rho0, t);
  detail::duhamel_pairs(u0, rho0, t, 0,
                        [&](const Frequency&, const Frequency&, PairOutput which,
                            const Frequency& m, double c, double s) {
                          ScalarField* dst = &st.rho1_parts.rho12;
                          if (which == PairOutput::difference) {
                            dst = (m == eta || m == -eta) ? &st.rho1_parts.rho10
                                                          : &st.rho1_parts.rho11;
                          }
                          dst->add(m, -c, -s);
                        });
  st.reconciliation_error = detail::reconciliation(st.rho1, st.rho1_parts);
  return st;
}

/// rho1 split evaluated from the explicit per-pair formulas of the lacunary construction:
///   coefficient of sin((k_i -+ k'_j).x) = -+ (r^-2beta / 2) |k_i| |k'_j| (v_i.k'_j) J,
/// J the Duhamel integral with outgoing |k_i -+ k'_j|^2 and incoming |k_i|^2 + |k'_j|^2.
inline Rho1Parts rho1_parts_closed_form(const LacunaryParams& p, double t) {
  detail::require_positive_time(t, "rho1_parts_closed_form");
  const auto waves = make_frequencies(p);
  const double a2 = p.amplitude() * p.amplitude();
  Rho1Parts parts;
  for (const auto& wi : waves) {
    for (const auto& wj : waves) {
      const double weight = 0.5 * a2 * wi.kfull.norm() * wj.kprime.norm() * v_dot(wi, wj.kprime);
      const double incoming = wi.kfull.norm2() + wj.kprime.norm2();
      const Frequency plus = wi.kfull + wj.kprime;
      const Frequency minus = wi.kfull - wj.kprime;
      parts.rho12.add(plus, 0.0, weight * duhamel_integral({0, plus.norm2(), incoming}, t));
      ScalarField& dst = wi.index == wj.index ? parts.rho10 : parts.rho11;
      dst.add(minus, 0.0, -weight * duhamel_integral({0, minus.norm2(), incoming}, t));
    }
  }
  return parts;
}

/// First iterates of the lacunary data; rho1_parts come from the explicit formulas.
inline PicardState first_iterates(const LacunaryParams& p, double t) {
  detail::require_picard_time(t);
  const auto data = make_initial_data(p);
  PicardState st;
  st.t = t;
  st.g = heat(data.u0, t);
  st.theta = heat(data.rho0, t);
  st.u1 = b1(data.u0, data.u0, t) + b2(data.u0, data.rho0, t);
  st.rho1 = b3(data.u0, data.rho0, t);
  st.rho1_parts = rho1_parts_closed_form(p, t);
  st.reconciliation_error = detail::reconciliation(st.rho1, st.rho1_parts);
  return st;
}

/// Amplitude of sin(eta.x) in rho_{1,0} as displayed in the analysis:
///   (r^-2beta / 4) sum_i e^{-t} |k_i|^2 (1 - e^{-t(|k_i|^2 + |k'_i|^2)}) / (|k_i|^2 + |k'_i|^2 - 1).
/// It replaces |k_i||k'_i| by |k_i|^2 and drops the -1 in the exponent; see
/// rho10_amplitude for the exact coefficient.
inline double rho10_coefficient(const LacunaryParams& p, double t) {
  p.validate_ranges();
  double acc = 0.0;
  for (int i = 1; i <= p.r; ++i) {
    const double kb = std::ldexp(static_cast<double>(p.K), i - 1);
    if (kb > 1e100) {
      acc += 0.5 * std::exp(-t);
      continue;
    }
    const double k2 = kb * kb + 1.0;
    const double A = k2 + kb * kb;
    acc += std::exp(-t) * k2 * (-std::expm1(-t * A)) / (A - 1.0);
  }
  return p.amplitude() * p.amplitude() / 4.0 * acc;
}

/// Exact coefficient of sin(eta.x) in rho_{1,0} = B3 restricted to the i = j pairs.
/// Evaluated in double precision for any r (frequencies beyond 1e100 use the limit term).
inline double rho10_amplitude(const LacunaryParams& p, double t) {
  p.validate_ranges();
  detail::require_positive_time(t, "rho10_amplitude");
  double acc = 0.0;
  for (int i = 1; i <= p.r; ++i) {
    const double kb = std::ldexp(static_cast<double>(p.K), i - 1);
    if (kb > 1e100) {
      // |k||k'| J -> e^{-t} / 2 as |k'| -> infinity
      acc += 0.5 * std::exp(-t);
      continue;
    }
    const double k2 = kb * kb + 1.0;
    const double J = duhamel_integral({0, 1.0, k2 + kb * kb}, t);
    acc += std::sqrt(k2) * kb * J;
  }
  return p.amplitude() * p.amplitude() / 4.0 * acc;
}

/// Three-term bound r^-3b + r^(1-3b) t^(1+d) + r^(2-4b) t^(5/2+d) on
/// M(t) = sup s^d |y| + t sup s^d |z|, unit implied constant, t in (0, r^-nu].
inline double remainder_bound_M(const LacunaryParams& p, double t) {
  p.validate_ranges();
  p.require_proposition_constraint();
  const double T = p.final_time();
  if (!(t > 0.0) || t > T * (1.0 + 1e-12)) {
    throw std::invalid_argument("remainder_bound_M: t must lie in (0, r^-nu] = (0, " +
                                std::to_string(T) + "], got " + std::to_string(t));
  }
  const double r = p.r, b = p.beta, d = p.delta;
  return std::pow(r, -3 * b) + std::pow(r, 1 - 3 * b) * std::pow(t, 1 + d) +
         std::pow(r, 2 - 4 * b) * std::pow(t, 2.5 + d);
}

/// Companion bound on |z(t)|: r^-3b t^(-1-d) + r^(1-3b) + r^(2-4b) t^(3/2).
inline double remainder_bound_z(const LacunaryParams& p, double t) {
  p.validate_ranges();
  p.require_proposition_constraint();
  const double T = p.final_time();
  if (!(t > 0.0) || t > T * (1.0 + 1e-12)) {
    throw std::invalid_argument("remainder_bound_z: t must lie in (0, r^-nu] = (0, " +
                                std::to_string(T) + "], got " + std::to_string(t));
  }
  const double r = p.r, b = p.beta, d = p.delta;
  return std::pow(r, -3 * b) * std::pow(t, -1 - d) + std::pow(r, 1 - 3 * b) +
         std::pow(r, 2 - 4 * b) * std::pow(t, 1.5);
}

}  // namespace norminflate
