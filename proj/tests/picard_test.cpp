#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "norminflate/norms.hpp"
#include "norminflate/picard.hpp"
#include "oracles.hpp"

using namespace norminflate;

TEST(Duhamel, Examples) {
  EXPECT_NEAR(duhamel_integral({0, 2.0, 1.0}, 1.0), std::exp(-1.0) - std::exp(-2.0), 1e-15);
  EXPECT_NEAR(duhamel_integral({0, 2.0, 1.0}, 1.0), 0.232544, 1e-6);
  EXPECT_NEAR(duhamel_integral({0, 1.0, 1.0}, 1.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(duhamel_integral({1, 2.0, 1.0}, 1.0), std::exp(-1.0) * (1 - 2 * std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(duhamel_integral({1, 2.0, 1.0}, 1.0), 0.097209, 1e-6);
  EXPECT_NEAR(duhamel_integral({1, 3.0, 3.0}, 0.5), 0.125 * std::exp(-1.5), 1e-15);
}

TEST(Duhamel, MatchesQuadrature) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(0.0, 60.0), td(0.01, 1.0);
  for (int i = 0; i < 200; ++i) {
    const int p = i % 2;
    const double M = d(rng), A = d(rng), t = td(rng);
    const double q = oracle::kernel_quadrature(p, M, A, t);
    EXPECT_NEAR(duhamel_integral({p, M, A}, t), q, 1e-10 * std::abs(q)) << p << " " << M << " " << A;
  }
}

TEST(Duhamel, ContinuousAcrossDegeneracy) {
  for (int p : {0, 1}) {
    const double A = 5.0, t = 0.3;
    // second differences of a smooth function sampled at step h are O(h^2)
    const double h = 1e-7;
    double prev2 = duhamel_integral({p, A - 1001 * h, A}, t);
    double prev = duhamel_integral({p, A - 1000 * h, A}, t);
    for (int i = -999; i <= 1000; ++i) {
      const double v = duhamel_integral({p, A + i * h, A}, t);
      EXPECT_LT(std::abs(v - 2 * prev + prev2), 1e-10) << "p=" << p << " i=" << i;
      prev2 = prev;
      prev = v;
    }
    // across the series switch at |M - A| t = 1e-6 the increment matches the local slope
    const double a = A + 1e-6 / t, d = 1e-8 / t;
    auto f = [&](double M) { return duhamel_integral({p, M, A}, t); };
    const double expected = (f(a + 3 * d) - f(a - 3 * d)) / 3.0;
    EXPECT_LT(std::abs((f(a + d) - f(a - d)) - expected), 1e-13);
  }
}

TEST(Duhamel, Errors) {
  EXPECT_THROW(duhamel_integral({0, -1.0, 1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(duhamel_integral({0, 1.0, -1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(duhamel_integral({0, 1.0, 1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(duhamel_integral({2, 1.0, 1.0}, 1.0), std::invalid_argument);
}

TEST(Duhamel, HugeDecaysDoNotOverflow) {
  const double v = duhamel_integral({0, 1.0, 1e30}, 0.5);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v * 1e30, std::exp(-0.5), 1e-12);
}

TEST(Bilinear, SingleTransverseWaveHasNoSelfInteraction) {
  LacunaryParams p;
  p.r = 1;
  const auto d = make_initial_data(p);
  EXPECT_TRUE(b1(d.u0, d.u0, 0.1).empty());
}

TEST(Bilinear, AgreesWithTimeQuadrature) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> td(0.01, 0.2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = oracle::random_vector_field(rng);
    const auto v = oracle::random_vector_field(rng);
    const auto th = oracle::random_scalar_field(rng);
    const double t = td(rng);
    const auto U = oracle::expand(u);
    const double floor1 = 1e-6 * std::max(1e-300, b1(u, v, t).max_abs_coefficient());
    EXPECT_LT(oracle::max_relative_mismatch(
                  oracle::bilinear_spectrum(oracle::Kind::B1, U, oracle::expand(v), t), b1(u, v, t), floor1),
              1e-8);
    const auto b2v = b2(u, th, t);
    EXPECT_LT(oracle::max_relative_mismatch(
                  oracle::bilinear_spectrum(oracle::Kind::B2, U, oracle::expand(th), t), b2v,
                  1e-6 * b2v.max_abs_coefficient()),
              1e-8);
    const auto b3v = b3(u, th, t);
    EXPECT_LT(oracle::max_relative_mismatch(
                  oracle::bilinear_spectrum(oracle::Kind::B3, U, oracle::expand(th), t), b3v,
                  1e-6 * b3v.max_abs_coefficient()),
              1e-8);
  }
}

TEST(Bilinear, OutputsOfB1AndB2AreSolenoidal) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = oracle::random_vector_field(rng);
    const auto v = oracle::random_vector_field(rng);
    const auto th = oracle::random_scalar_field(rng);
    EXPECT_TRUE(divergence(b1(u, v, 0.1)).empty());
    EXPECT_TRUE(divergence(b2(u, th, 0.1)).empty());
  }
}

TEST(Bilinear, B3OnTheResonantFrequency) {
  // r = 1, K = 2, unit amplitude: eta coefficient equals the exact pair formula
  //   (1/4) |k||k'| e^{-t} t phi1((|k|^2 + |k'|^2 - 1) t)
  LacunaryParams p;
  p.r = 1;
  p.K = 2;
  const double t = 0.1;
  const auto d = make_initial_data(p);
  const double eta_coeff = b3(d.u0, d.rho0, t).coefficient(eta).sin_coeff;
  const double q = oracle::kernel_quadrature(0, 1.0, 9.0, t);
  EXPECT_NEAR(eta_coeff, 0.25 * std::sqrt(5.0) * 2.0 * q, 1e-12);
  EXPECT_NEAR(eta_coeff, 0.069635, 1e-6);
  EXPECT_NEAR(eta_coeff, rho10_amplitude(p, t), 1e-14);
  // the displayed closed form uses |k|^2 and the exponent |k|^2 + |k'|^2
  EXPECT_NEAR(rho10_coefficient(p, t), 0.25 * std::exp(-0.1) * 5 * (1 - std::exp(-0.9)) / 8, 1e-15);
  EXPECT_NEAR(rho10_coefficient(p, t), 0.083900, 1e-6);
}

TEST(Bilinear, B2IsOfOrderTTimesB3) {
  LacunaryParams p;
  p.r = 3;
  const auto d = make_initial_data(p);
  for (double t : {0.05, 0.1, 0.2}) {
    const double ratio = linf_norm(b2(d.u0, d.rho0, t)).value / (t * linf_norm(b3(d.u0, d.rho0, t)).value);
    EXPECT_GT(ratio, 0.1);
    EXPECT_LT(ratio, 2.0);
  }
}

TEST(Bilinear, RejectsNonPositiveTime) {
  const auto u = VectorField::cosine({1, 0, 0}, Vec3{0.0, 1.0, 0.0});
  EXPECT_THROW(b1(u, u, 0.0), std::invalid_argument);
  EXPECT_THROW(b3(u, ScalarField::cosine({1, 0, 0}, 1.0), -1.0), std::invalid_argument);
}

TEST(FirstIterates, ZeroDensity) {
  std::mt19937_64 rng(24);
  const auto u = oracle::random_vector_field(rng);
  const auto st = first_iterates(leray_project(u), ScalarField{}, 0.2);
  EXPECT_TRUE(st.rho1.empty());
  EXPECT_EQ((st.u1 - b1(leray_project(u), leray_project(u), 0.2)).max_abs_coefficient(), 0.0);
}

TEST(FirstIterates, SingleWaveHasNoOffDiagonalPart) {
  LacunaryParams p;
  p.r = 1;
  const auto st = first_iterates(p, 0.5);
  EXPECT_TRUE(st.rho1_parts.rho11.empty());
}

TEST(FirstIterates, ResonantPartLivesOnEta) {
  for (int r : {1, 2, 3, 6}) {
    LacunaryParams p;
    p.r = r;
    const auto st = first_iterates(p, 0.3);
    ASSERT_EQ(st.rho1_parts.rho10.size(), 1u);
    EXPECT_EQ(st.rho1_parts.rho10.modes().begin()->first, eta);
    EXPECT_NEAR(st.rho1_parts.rho10.coefficient(eta).sin_coeff, rho10_amplitude(p, 0.3), 1e-14);
    EXPECT_GT(rho10_amplitude(p, 0.3), 0.0);
  }
}

TEST(FirstIterates, PartsReconcileWithB3) {
  for (int r : {1, 2, 3}) {
    LacunaryParams p;
    p.r = r;
    p.K = 4;
    for (double t : {0.01, 0.1, 0.5, 1.0}) {
      const auto st = first_iterates(p, t);
      EXPECT_LE(st.reconciliation_error, 1e-12) << "r=" << r << " t=" << t;
      const auto d = make_initial_data(p);
      const auto generic = first_iterates(d.u0, d.rho0, t);
      EXPECT_LE(generic.reconciliation_error, 1e-12);
      EXPECT_LE((sum(generic.rho1_parts) - sum(st.rho1_parts)).max_abs_coefficient(),
                1e-12 * st.rho1.max_abs_coefficient());
    }
  }
}

TEST(FirstIterates, Preconditions) {
  LacunaryParams p;
  EXPECT_THROW(first_iterates(p, 0.0), std::invalid_argument);
  EXPECT_THROW(first_iterates(p, 1.5), std::invalid_argument);
  const auto u = VectorField::cosine({0, 1, 0}, Vec3{1.0, 0.0, 0.0});
  EXPECT_THROW(first_iterates(u, ScalarField::cosine({1, 0, 0}, 1.0), 0.1), std::invalid_argument);
}

TEST(Rho10, VanishesAsTimeGoesToZero) {
  LacunaryParams p;
  p.r = 8;
  EXPECT_LT(rho10_coefficient(p, 1e-16), 1e-10);
  EXPECT_LT(rho10_amplitude(p, 1e-16), 1e-10);
  EXPECT_LT(rho10_amplitude(p, 1e-14), rho10_amplitude(p, 1e-12));
}

TEST(Rho10, LargeRUsesTheLimitTerm) {
  LacunaryParams p;
  p.r = 120;
  p.K = 2;
  const double a = rho10_amplitude(p, 0.5);
  EXPECT_TRUE(std::isfinite(a));
  // each term tends to e^{-t}/2, so the sum approaches r e^{-t}/2
  EXPECT_NEAR(a / (p.amplitude() * p.amplitude() / 4.0), 120 * 0.5 * std::exp(-0.5), 1.0);
}

TEST(RemainderBound, DirectEvaluation) {
  LacunaryParams p;
  p.r = 16;
  const double T = p.final_time();
  const double expect = std::pow(16.0, -1.35) + std::pow(16.0, -0.35) * std::pow(T, 1.01) +
                        std::pow(16.0, 0.2) * std::pow(T, 2.51);
  EXPECT_NEAR(remainder_bound_M(p, T), expect, 1e-14);
  EXPECT_NEAR(remainder_bound_M(p, 1e-12), std::pow(16.0, -1.35), 1e-10);
  EXPECT_GT(remainder_bound_z(p, T), 0.0);
}

TEST(RemainderBound, ConstraintAndRange) {
  LacunaryParams p;
  p.beta = 0.3;
  p.nu = 0.1;
  try {
    remainder_bound_M(p, 0.1);
    FAIL();
  } catch (const parameter_error& e) {
    EXPECT_NE(std::string(e.what()).find("beta > max{0, 1/2 - (3/4) nu}"), std::string::npos);
  }
  p = {};
  EXPECT_THROW(remainder_bound_M(p, 2.0), std::invalid_argument);
}
