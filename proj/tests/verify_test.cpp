#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "norminflate/verify.hpp"

using namespace norminflate;

namespace {

LacunaryParams params(int r, std::int64_t K = 4) {
  LacunaryParams p;
  p.r = r;
  p.K = K;
  return p;
}

const BoundReport* find(const std::vector<BoundReport>& reps, const std::string& name, double t) {
  for (const auto& r : reps) {
    if (r.name == name && std::abs(r.t - t) < 1e-15) return &r;
  }
  return nullptr;
}

}  // namespace

TEST(LacunarySums, DirectSummation) {
  const auto [ratio1, sup1] = check_lacunary_sums(params(5), 1.0);
  EXPECT_DOUBLE_EQ(ratio1.lhs, 60.0 / 64.0);
  EXPECT_TRUE(ratio1.pass);
  const auto [ratio2, sup2] = check_lacunary_sums(params(5), 2.0);
  EXPECT_DOUBLE_EQ(ratio2.lhs, (16.0 + 64.0 + 256.0 + 1024.0) / 4096.0);
  EXPECT_NEAR(ratio2.lhs, 0.3320, 1e-4);
}

TEST(LacunarySums, HeatSumBoundedAcrossSweep) {
  for (int r : {4, 8, 16, 32, 64}) {
    const auto [ratio, sup] = check_lacunary_sums(params(r), 1.0);
    EXPECT_LE(sup.lhs, 4.0) << r;
    EXPECT_TRUE(sup.pass);
  }
}

TEST(LacunarySums, SupMatchesBruteForce) {
  // dense scan in log t, independent of the grid-and-zoom search
  const auto p = params(6, 3);
  double brute = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double t = std::exp(std::log(1e-7) + (std::log(4.0) - std::log(1e-7)) * i / 200000.0);
    double acc = 0.0;
    for (int j = 1; j <= 6; ++j) {
      const double kb = 3.0 * std::pow(2.0, j - 1);
      const double k = std::sqrt(kb * kb + 1.0);
      acc += k * std::exp(-k * k * t);
    }
    brute = std::max(brute, std::sqrt(t) * acc);
  }
  EXPECT_NEAR(check_lacunary_sums(p, 1.0).second.lhs, brute, 1e-8);
}

TEST(LacunarySums, RejectsNonPositiveGamma) {
  EXPECT_THROW(check_lacunary_sums(params(4), 0.0), std::invalid_argument);
  EXPECT_THROW(check_lacunary_sums(params(4), -1.0), std::invalid_argument);
}

TEST(DataNorms, AmplitudeArithmetic) {
  const auto reps = check_data_norms(params(4));
  ASSERT_EQ(reps.size(), 4u);
  EXPECT_NEAR(reps[0].rhs_model, 0.535887, 1e-6);
  for (const auto& r : reps) EXPECT_TRUE(r.pass) << r.name << " " << r.implied_constant;
}

TEST(DataNorms, Homogeneity) {
  const auto d = make_initial_data(params(4));
  const auto a = besov_norm(d.u0, 1.0).value;
  const auto b = besov_norm(2.0 * d.u0, 1.0).value;
  EXPECT_EQ(b, 2.0 * a);
  EXPECT_EQ(besov_norm(2.0 * d.rho0, 1.0).value, 2.0 * besov_norm(d.rho0, 1.0).value);
}

TEST(DataNorms, ClosedFormMatchesFields) {
  for (int r : {2, 4, 6}) {
    const auto p = params(r);
    const auto d = make_initial_data(p);
    const auto closed = data_norms_closed_form(p);
    const auto u = besov_norm(d.u0, 1.0);
    // the closed form for u0 is the l1 heat bound: above the attained value, close to it
    EXPECT_GE(closed.u0, u.value * (1.0 - 1e-9));
    EXPECT_LE(closed.u0, u.value * 1.01);
    EXPECT_NEAR(closed.rho0, besov_norm(d.rho0, 1.0).value, 1e-3 * closed.rho0);
  }
}

TEST(DataNorms, RatioStableWithinFactorFour) {
  double lo = INFINITY, hi = 0.0;
  for (int r : {4, 8, 16, 32, 64}) {
    const double c = data_norms_closed_form(params(r)).rho0 / params(r).amplitude();
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_LT(hi / lo, 4.0);
}

TEST(Rho1Bounds, SingleWaveHasNoOffDiagonalPart) {
  const auto res = check_rho1_bounds(params(1), {0.1, 0.5});
  const auto* r = find(res.reports, "rho11", 0.1);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->lhs, 0.0);
  EXPECT_EQ(r->implied_constant, 0.0);
  EXPECT_TRUE(r->pass);
}

TEST(Rho1Bounds, LowerBoundOnlyAfterKMinusTwo) {
  const auto p = params(6);
  const auto res = check_rho1_bounds(p, {0.01, 1.0 / 16.0, 0.5});
  EXPECT_EQ(find(res.reports, "rho10_lower", 0.01), nullptr);
  const auto* at = find(res.reports, "rho10_lower", 1.0 / 16.0);
  ASSERT_NE(at, nullptr);
  EXPECT_TRUE(at->lower_bound);
  EXPECT_GE(at->implied_constant, frozen::rho10_low);
  // single mode: B^-s norm is the amplitude times sup t^(s/2) e^-t
  const double amp = std::abs(rho10_amplitude(p, 1.0 / 16.0));
  EXPECT_NEAR(at->lhs, amp * unit_mode_besov(p.s), 1e-6 * amp);
  EXPECT_TRUE(res.pass());
}

TEST(Rho1Bounds, ConstantsBoundedOverGrid) {
  for (int r : {4, 16}) {
    const auto p = params(r);
    const auto res = check_rho1_bounds(p, rho1_times(p));
    for (const auto& rep : res.reports) {
      EXPECT_TRUE(std::isfinite(rep.implied_constant)) << rep.name;
      EXPECT_TRUE(rep.pass) << rep.name << " r=" << r << " t=" << rep.t << " C=" << rep.implied_constant;
    }
  }
}

TEST(Rho1Bounds, RowsSortedByTime) {
  const auto res = check_rho1_bounds(params(3), {0.5, 0.01, 0.1});
  for (std::size_t i = 1; i < res.reports.size(); ++i) {
    EXPECT_LE(res.reports[i - 1].t, res.reports[i].t);
  }
  EXPECT_EQ(res.columns, report_columns());
  EXPECT_EQ(res.rows.size(), res.reports.size());
  EXPECT_THROW(check_rho1_bounds(params(3), {1.5}), std::invalid_argument);
}

TEST(Rho1Bounds, ClosedFormTailsMatchFields) {
  for (int r : {2, 5}) {
    const auto p = params(r, 3);
    for (double t : {0.01, 0.3}) {
      const auto parts = rho1_parts_closed_form(p, t);
      const auto tails = rho1_tails_closed_form(p, t);
      EXPECT_NEAR(tails.rho11, l1_bound(parts.rho11), 1e-12 * std::max(1.0, tails.rho11));
      EXPECT_NEAR(tails.rho12, l1_bound(parts.rho12), 1e-12 * std::max(1.0, tails.rho12));
    }
  }
}

TEST(B3GRho1, QuadratureMatchesSimpson) {
  // independent composite Simpson on a graded grid for a single wave
  const auto p = params(1, 2);
  const double t = 0.2;
  const auto d = make_initial_data(p);
  const int n = 4000;
  ScalarField acc;
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double s = t * u * u;  // clusters nodes near s = 0
    const double ds = 2.0 * t * u;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    if (i == 0) continue;  // ds = 0
    const auto src = heat(divergence_form(heat(d.u0, s), b3(d.u0, d.rho0, s)), t - s);
    acc = acc + (-w * ds / (3.0 * n)) * src;
  }
  const auto quad = b3_g_rho1(p, t);
  EXPECT_LE((quad - acc).max_abs_coefficient(), 1e-8 * acc.max_abs_coefficient());
}

TEST(B3GRho1, ReportFlagsDisplayedForm) {
  const auto rep = check_b3_g_rho1(params(2), 0.1);
  EXPECT_NE(rep.note.find("displayed form"), std::string::npos);
  EXPECT_TRUE(rep.pass) << rep.implied_constant;
  const double r = 2, b = 0.45, d = 0.01;
  EXPECT_DOUBLE_EQ(rep.rhs_model, std::pow(r, -3 * b) * std::pow(0.1, -d) + std::pow(r, 1 - 3 * b));
}

TEST(Quadrature, GaussLegendreExactForPolynomials) {
  const auto [x, w] = detail::gauss_legendre(8);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * std::pow(x[i], 14);
  EXPECT_NEAR(acc, 2.0 / 15.0, 1e-14);
}

TEST(Quadrature, KernelRuleIntegratesPowers) {
  const double t = 0.3;
  const auto rule = detail::kernel_rule(t);
  double minus = 0.0, plus = 0.0;
  for (std::size_t q = 0; q < rule.s.size(); ++q) {
    minus += rule.w_minus[q] * rule.s[q];
    plus += rule.w_plus[q];
  }
  // int_0^t (t-s)^(-1/2) s ds = (4/3) t^(3/2); int_0^t (t-s)^(1/2) ds = (2/3) t^(3/2)
  EXPECT_NEAR(minus, 4.0 / 3.0 * std::pow(t, 1.5), 1e-14);
  EXPECT_NEAR(plus, 2.0 / 3.0 * std::pow(t, 1.5), 1e-14);
}

TEST(OperatorProbes, CosineGradientConstant) {
  const double c = grad_heat_leray_constant(VectorField::cosine({0, 0, 4}, Vec3{1.0, 0.0, 0.0}));
  EXPECT_NEAR(c, 1.0 / std::sqrt(2.0 * std::numbers::e), 1e-6);
  EXPECT_NEAR(c, 0.42888, 1e-5);
}

TEST(OperatorProbes, ZeroFieldGivesZero) {
  EXPECT_EQ(grad_heat_leray_constant(VectorField{}), 0.0);
  const auto c = bilinear_constants(VectorField{}, VectorField{}, ScalarField{}, 0.1);
  EXPECT_EQ(c.b1, 0.0);
  EXPECT_EQ(c.b2, 0.0);
  EXPECT_EQ(c.b3, 0.0);
  // gradient fields vanish under the projection
  EXPECT_EQ(grad_heat_leray_constant(gradient(ScalarField::cosine({1, 2, 0}, 1.0))), 0.0);
}

TEST(OperatorProbes, FiniteAndThreadInvariant) {
  const auto a = operator_norm_probes(6, 7, 1);
  const auto b = operator_norm_probes(6, 7, 3);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(std::isfinite(a[i].lhs));
    EXPECT_GT(a[i].lhs, 0.0);
    EXPECT_EQ(a[i].lhs, b[i].lhs);
  }
  EXPECT_THROW(operator_norm_probes(-1, 0), std::invalid_argument);
}

TEST(Stability, SpreadUsesWorstConstantPerR) {
  const LacunaryParams p4 = params(4), p8 = params(8);
  std::vector<BoundReport> reps{make_report("x", p4, 0.1, 1.0, 1.0, true),
                                make_report("x", p4, 0.2, 3.0, 1.0, true),
                                make_report("x", p8, 0.1, 2.0, 1.0, true)};
  auto low = make_report("y", p4, 0.1, 1.0, 1.0, true);
  low.lower_bound = true;
  reps.push_back(low);
  low.lhs = 0.5;
  low.implied_constant = 0.5;
  reps.push_back(low);
  low.params = p8;
  low.implied_constant = 4.0;
  reps.push_back(low);
  const auto spread = constant_spread(reps, 10.0);
  ASSERT_EQ(spread.size(), 2u);
  EXPECT_DOUBLE_EQ(spread[0].ratio, 1.5);  // x: 3 at r=4, 2 at r=8
  EXPECT_DOUBLE_EQ(spread[1].ratio, 8.0);  // y: min 0.5 at r=4, 4 at r=8
  EXPECT_TRUE(spread[1].pass);
  EXPECT_FALSE(constant_spread(reps, 4.0)[1].pass);
}

TEST(Stability, SweepIsThreadInvariant) {
  const auto a = bound_sweep({2, 3}, LacunaryParams{}, 1);
  const auto b = bound_sweep({2, 3}, LacunaryParams{}, 2);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(a.reports[i].name, b.reports[i].name);
    EXPECT_EQ(a.reports[i].lhs, b.reports[i].lhs);
  }
  for (std::size_t i = 1; i < a.reports.size(); ++i) {
    EXPECT_LE(a.reports[i - 1].params.r, a.reports[i].params.r);
  }
}

TEST(ParallelMap, OrderAndErrors) {
  const auto sq = parallel_map(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < sq.size(); ++i) EXPECT_EQ(sq[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map(8, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
}

TEST(Inflation, SlopeOfExactPowerLaw) {
  EXPECT_NEAR(loglog_slope({2, 4, 8, 16}, {3 * std::pow(2, 0.7), 3 * std::pow(4, 0.7),
                                           3 * std::pow(8, 0.7), 3 * std::pow(16, 0.7)}),
              0.7, 1e-12);
  EXPECT_THROW(loglog_slope({1}, {1}), std::invalid_argument);
}

TEST(Inflation, ChainExponentSigns) {
  const auto ex = chain_exponents(0.4, 0.2, 0.01);
  for (double e : ex) EXPECT_LT(e, 0.0);
  EXPECT_TRUE(chain_conditions_hold(0.4, 0.2, 0.01));
  EXPECT_FALSE(chain_conditions_hold(0.5, 0.0, 0.01));  // 1 - 2 beta = 0
}

TEST(Inflation, ColumnsAndRows) {
  const auto empty = inflation_experiment({});
  EXPECT_TRUE(empty.rows.empty());
  EXPECT_EQ(empty.columns.size(), 13u);
  EXPECT_EQ(empty.columns.front(), "r");
  EXPECT_EQ(empty.columns.back(), "slope_running");
  const auto res = inflation_experiment({16, 8});
  ASSERT_EQ(res.rows.size(), 2u);
  EXPECT_EQ(std::get<std::int64_t>(res.rows[0][0]), 8);
  EXPECT_TRUE(std::isnan(std::get<double>(res.rows[0][12])));
  EXPECT_DOUBLE_EQ(std::get<double>(res.rows[1][12]), res.slope);
}

TEST(Inflation, Rho10MatchesFieldBesov) {
  for (int r : {8, 16}) {
    const auto row = inflation_row(r, {});
    const auto st = first_iterates(row.params, row.T);
    const double field = besov_norm(st.rho1_parts.rho10, row.params.s).value;
    EXPECT_NEAR(row.rho10_besov, field, 1e-8 * field);
  }
}

TEST(Inflation, SlopeIgnoresAmplitudeScale) {
  InflationOptions o;
  const auto a = inflation_experiment({8, 16, 32, 64}, o);
  o.amplitude_scale = 0.01;
  const auto b = inflation_experiment({8, 16, 32, 64}, o);
  EXPECT_NEAR(a.slope, b.slope, 1e-6);
  EXPECT_NE(std::get<double>(a.rows[0][9]), std::get<double>(b.rows[0][9]));
}

TEST(Inflation, NoInflationWithoutNu) {
  InflationOptions o;
  o.nu = 0.0;
  EXPECT_LT(std::abs(inflation_experiment({8, 16, 32, 64}, o).slope), 0.05);
}

TEST(Witness, FoundInsideEnvelope) {
  const auto w = theorem_witness(0.9, 0.5);
  ASSERT_TRUE(w.found) << w.message;
  EXPECT_LE(w.row.params.r, 1 << 14);
  EXPECT_LT(std::max(w.row.norm_u0, w.row.norm_rho0), 0.9);
  EXPECT_LT(w.row.T, 0.9);
  EXPECT_GT(w.row.net_lower_bound, 1.0 / 0.9);
  // smallest such r
  InflationOptions o;
  o.nu = 0.5;
  const auto before = inflation_row(w.row.params.r - 1, o);
  const bool all = std::max(before.norm_u0, before.norm_rho0) < 0.9 && before.T < 0.9 &&
                   before.net_lower_bound > 1.0 / 0.9;
  EXPECT_FALSE(all);
}

TEST(Witness, MonotoneInEpsilon) {
  const auto a = theorem_witness(0.9, 0.5);
  const auto b = theorem_witness(0.85, 0.5);
  ASSERT_TRUE(a.found && b.found);
  EXPECT_GE(b.row.params.r, a.row.params.r);
}

TEST(Witness, EnvelopeExhausted) {
  WitnessOptions o;
  o.r_max = 50;
  const auto w = theorem_witness(0.9, 0.5, o);
  EXPECT_FALSE(w.found);
  EXPECT_NE(w.message.find("not reached"), std::string::npos);
}

TEST(Witness, Preconditions) {
  EXPECT_THROW(theorem_witness(1.5, 0.5), std::invalid_argument);
  EXPECT_THROW(theorem_witness(1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(theorem_witness(0.5, 0.0), std::invalid_argument);
}

TEST(Inflation, LowerBoundWeightsOtherTermsAboveOrderTwo) {
  for (double s : {0.5, 2.0, 3.0}) {
    InflationOptions o;
    o.s = s;
    const auto row = inflation_row(64, o);
    const double w = std::max(1.0, std::pow(s / 2.0, s / 2.0));
    EXPECT_DOUBLE_EQ(row.net_lower_bound,
                     row.rho10_besov - w * (row.theta_linf + row.rho11 + row.rho12 + row.z_bound))
        << s;
  }
}
