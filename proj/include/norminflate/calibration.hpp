#pragma once

// Frozen regression values for the verify module.
//
// The analysis only asserts that these constants exist. The numbers below were
// measured on the default sweep (r in {4,...,64}, K = 4, beta = 0.45,
// delta = 0.01, s = 0.5) and then frozen with a factor-2 margin in the
// direction of the bound: upper bounds are doubled, lower bounds halved.

namespace norminflate::frozen {

// sup_t t^(gamma/2) sum_i |k_i|^gamma e^{-|k_i|^2 t}
inline constexpr double lacunary_heat_sum = 4.0;

// ||u0||, ||rho0|| in B^-1 over r^-beta: two-sided
inline constexpr double data_norm_low = 0.28;    // measured 0.568
inline constexpr double data_norm_high = 2.6;    // measured 1.281
// sup_{t <= 1} t^(1/2) ||e^{t Delta} f||_inf over r^-beta
inline constexpr double heat_data = 2.6;         // measured 1.281

// rho_{1,0}: B^-s lower bound on [K^-2, 1] and sup-norm upper bound, against r^(1-2beta)
inline constexpr double rho10_low = 0.0125;      // measured 0.0253
inline constexpr double rho10_high = 0.25;       // measured 0.122
// against r^-2beta t^-delta
inline constexpr double rho11 = 1.4;             // measured 0.690
inline constexpr double rho12 = 0.8;             // measured 0.396
// against r^-2beta t^-delta + r^(1-2beta) t^(1-delta)
inline constexpr double u1 = 0.7;                // measured 0.344
// against r^-2beta |log t|
inline constexpr double f1 = 0.026;              // measured 0.0127
// against r^-3beta t^-delta + r^(1-3beta)
inline constexpr double b3_g_rho1 = 0.022;       // measured 0.0105 (r in {4, 8})

// operator probes, 100 fields with seed 20240601
inline constexpr double grad_heat_leray = 0.94;  // measured 0.467
inline constexpr double bilinear_b1 = 0.42;      // measured 0.208
inline constexpr double bilinear_b2 = 0.57;      // measured 0.282
inline constexpr double bilinear_b3 = 0.54;      // measured 0.266

// ||z(t)||_inf <= remainder_z * remainder_bound_z(t)
inline constexpr double remainder_z = 0.02;   // measured 0.00708 (r <= 4, K = 2, N = 128)

// max / min of each implied constant across the r sweep
inline constexpr double stability_factor = 10.0;

}  // namespace norminflate::frozen
