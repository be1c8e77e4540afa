#pragma once

// Lacunary plane-wave initial data:
//   k'_i = (0, 0, 2^(i-1) K),  k_i = k'_i + eta,  eta = (0, 1, 0),
//   v_i  = (0, 1/2, -1/(2 |k'_i|)),
//   u0   = r^-beta  sum_i |k_i| v_i cos(k_i . x),
//   rho0 = r^-beta  sum_i |k'_i| cos(k'_i . x).

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "norminflate/params.hpp"
#include "norminflate/report.hpp"
#include "norminflate/trig_field.hpp"

namespace norminflate {

struct WaveTriple {
  int index = 1;       // 1-based
  Frequency kprime;    // (0, 0, 2^(i-1) K)
  Frequency kfull;     // kprime + eta
  Vec3 v;              // (0, 1/2, -1/(2 |kprime|))
};

/// v_i . k evaluated as k_2/2 - k_3/(2 kbar_i), exact for the construction's frequencies.
inline double v_dot(const WaveTriple& w, const Frequency& k) {
  const double kb = static_cast<double>(w.kprime[2]);
  return 0.5 * static_cast<double>(k[1]) - static_cast<double>(k[2]) / (2.0 * kb);
}

inline std::vector<WaveTriple> make_frequencies(const LacunaryParams& p) {
  p.validate();
  std::vector<WaveTriple> out;
  out.reserve(static_cast<std::size_t>(p.r));
  for (int i = 1; i <= p.r; ++i) {
    WaveTriple w;
    w.index = i;
    w.kprime = Frequency{0, 0, p.kbar(i)};
    w.kfull = w.kprime + eta;
    w.v = Vec3{0.0, 0.5, -1.0 / (2.0 * static_cast<double>(p.kbar(i)))};
    out.push_back(w);
  }
  return out;
}

struct InitialData {
  VectorField u0;
  ScalarField rho0;
};

inline InitialData make_initial_data(const LacunaryParams& p) {
  const double amp = p.amplitude();
  InitialData d;
  for (const auto& w : make_frequencies(p)) {
    d.u0.add(w.kfull, (amp * w.kfull.norm()) * w.v, Vec3{});
    d.rho0.add(w.kprime, amp * w.kprime.norm(), 0.0);
  }
  return d;
}

/// Checks the algebraic relations of the construction.
///
/// Exact relations (v_i.k_i = 0, v_i.k'_i = -1/2, v_i.k'_j = -|k'_j|/(2|k'_i|)) are
/// evaluated with the stored Vec3 v_i and must hold to a few ulps. The
/// approximate relation v_i.k_j ~ v_i.k'_j differs by the eta component v_i.eta = 1/2;
/// those entries are informational and always pass, with the relative deviation
/// recorded as the implied constant.
inline std::vector<BoundReport> verify_construction(const LacunaryParams& p) {
  const auto waves = make_frequencies(p);
  std::vector<BoundReport> out;
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b));
  };
  for (const auto& wi : waves) {
    const double vk = dot(wi.v, wi.kfull);
    out.push_back(make_report("v_i.k_i=0 (i=" + std::to_string(wi.index) + ")", p, NAN, vk, 0.0,
                              close(vk, 0.0)));
    out.back().implied_constant = std::abs(vk);
    const double vkp = dot(wi.v, wi.kprime);
    out.push_back(make_report("v_i.k'_i=-1/2 (i=" + std::to_string(wi.index) + ")", p, NAN, vkp,
                              -0.5, close(vkp, -0.5)));
    for (const auto& wj : waves) {
      if (wj.index == wi.index) continue;
      const std::string tag = " (i=" + std::to_string(wi.index) + ",j=" + std::to_string(wj.index) + ")";
      const double lhs = dot(wi.v, wj.kprime);
      const double rhs = -static_cast<double>(wj.kprime[2]) / (2.0 * static_cast<double>(wi.kprime[2]));
      out.push_back(make_report("v_i.k'_j=-|k'_j|/(2|k'_i|)" + tag, p, NAN, lhs, rhs, close(lhs, rhs)));
      const double approx = dot(wi.v, wj.kfull);
      auto r = make_report("v_i.k_j~v_i.k'_j" + tag, p, NAN, approx, lhs, true,
                           "informational: differs by v_i.eta = 1/2");
      r.implied_constant = std::abs(approx - lhs) / std::abs(lhs);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace norminflate
