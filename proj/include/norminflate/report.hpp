#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "norminflate/params.hpp"

namespace norminflate {

/// Measured quantity against a bound model with unit constant.
struct BoundReport {
  std::string name;
  LacunaryParams params;
  double t = std::numeric_limits<double>::quiet_NaN();
  double lhs = 0.0;
  double rhs_model = 0.0;
  double implied_constant = 0.0;  // lhs / rhs_model
  bool pass = true;
  std::string note;
  bool lower_bound = false;  // a ">~" check: the constant must stay away from 0
};

inline double implied_constant(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  return rhs == 0.0 ? std::numeric_limits<double>::infinity() : lhs / rhs;
}

inline BoundReport make_report(std::string name, const LacunaryParams& p, double t, double lhs,
                               double rhs, bool pass, std::string note = {}) {
  return {std::move(name), p, t, lhs, rhs, implied_constant(lhs, rhs), pass, std::move(note), false};
}

inline bool all_pass(const std::vector<BoundReport>& reports) {
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace norminflate
