#pragma once

// Dealiased pseudo-spectral solver for the Boussinesq system on the 3-torus,
//
//   u_t - Delta u + P div(u (x) u) = P(rho e3),   rho_t - Delta rho + div(u rho) = 0,
//
// with integrating-factor RK4 (the Laplacian is integrated exactly) and the 2/3
// rule applied after every product. Spectral arrays hold normalized
// coefficients: the physical field is sum_k F_k e^{i k.x} on x_j = 2 pi j / N.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstring>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "norminflate/errors.hpp"
#include "norminflate/lacunary_data.hpp"
#include "norminflate/picard.hpp"
#include "norminflate/trig_field.hpp"

namespace norminflate {

using cplx = std::complex<double>;

/// Spectral representation on an N^3 grid, r2c half-spectrum layout
/// [component][i][j][l], l in [0, N/2].
struct GridField {
  int N = 0;
  int arity = 1;  // 1 scalar, 3 vector
  std::vector<cplx> coeffs;

  GridField() = default;
  GridField(int n, int a) : N(n), arity(a), coeffs(static_cast<std::size_t>(a) * per_component(n)) {}

  static std::size_t per_component(int n) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
  }
  std::size_t size_per_component() const { return per_component(N); }

  std::size_t index(int c, int i, int j, int l) const {
    return ((static_cast<std::size_t>(c) * N + i) * N + j) * (N / 2 + 1) + l;
  }
  cplx& at(int c, int i, int j, int l) { return coeffs[index(c, i, j, l)]; }
  cplx at(int c, int i, int j, int l) const { return coeffs[index(c, i, j, l)]; }

  /// Signed wavenumber of storage index i along a full axis.
  static int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }
};

namespace detail {

inline bool power_of_two(int n) { return n >= 4 && (n & (n - 1)) == 0; }

/// Largest wavenumber per axis kept by the 2/3 rule.
inline int dealias_limit(int n) { return n / 3; }

inline bool kept(int kx, int ky, int kz, int n) {
  const int lim = dealias_limit(n);
  return std::abs(kx) <= lim && std::abs(ky) <= lim && std::abs(kz) <= lim;
}

}  // namespace detail

/// Real-to-complex 3D FFT pair of size N^3. Not copyable; plans are created once.
class Fft3 {
 public:
  explicit Fft3(int n, bool deterministic = true) : n_(n) {
    if (!detail::power_of_two(n)) {
      throw std::invalid_argument("Fft3: grid size must be a power of two >= 4, got " + std::to_string(n));
    }
    real_size_ = static_cast<std::size_t>(n) * n * n;
    spec_size_ = GridField::per_component(n);
    real_ = fftw_alloc_real(real_size_);
    spec_ = fftw_alloc_complex(spec_size_);
    // FFTW_MEASURE may pick different algorithms run to run; ESTIMATE is reproducible.
    const unsigned flags = deterministic ? FFTW_ESTIMATE : FFTW_MEASURE;
    forward_ = fftw_plan_dft_r2c_3d(n, n, n, real_, spec_, flags);
    backward_ = fftw_plan_dft_c2r_3d(n, n, n, spec_, real_, flags);
  }
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;
  ~Fft3() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  int size() const { return n_; }
  std::size_t real_size() const { return real_size_; }

  /// Physical values -> normalized coefficients.
  void forward(const double* in, cplx* out) {
    std::memcpy(real_, in, real_size_ * sizeof(double));
    fftw_execute(forward_);
    const double norm = 1.0 / static_cast<double>(real_size_);
    for (std::size_t i = 0; i < spec_size_; ++i) out[i] = cplx(spec_[i][0], spec_[i][1]) * norm;
  }

  /// Normalized coefficients -> physical values (input untouched).
  void backward(const cplx* in, double* out) {
    for (std::size_t i = 0; i < spec_size_; ++i) {
      spec_[i][0] = in[i].real();
      spec_[i][1] = in[i].imag();
    }
    fftw_execute(backward_);
    std::memcpy(out, real_, real_size_ * sizeof(double));
  }

 private:
  int n_;
  std::size_t real_size_ = 0, spec_size_ = 0;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr, backward_ = nullptr;
};

namespace detail {

template <class T>
constexpr int arity_of() {
  return std::is_same_v<T, double> ? 1 : 3;
}
inline double comp(double x, int) { return x; }
inline double comp(const Vec3& v, int c) { return v[static_cast<std::size_t>(c)]; }

inline void place(GridField& g, int c, Wavenumber k0, Wavenumber k1, Wavenumber k2, cplx value) {
  const int n = g.N;
  if (k2 < 0) return;  // stored through its conjugate partner
  auto wrap = [n](Wavenumber k) { return static_cast<int>(k < 0 ? k + n : k); };
  g.at(c, wrap(k0), wrap(k1), static_cast<int>(k2)) += value;
}

}  // namespace detail

/// Embeds a TrigField into the spectral grid; every |k_axis| must be at most N/3.
template <class T>
GridField to_grid(const TrigField<T>& f, int N) {
  if (!detail::power_of_two(N)) {
    throw std::invalid_argument("to_grid: grid size must be a power of two >= 4, got " + std::to_string(N));
  }
  constexpr int arity = detail::arity_of<T>();
  GridField g(N, arity);
  const Wavenumber lim = detail::dealias_limit(N);
  for (const auto& [k, m] : f.modes()) {
    if (k.max_abs_component() > lim) {
      throw resolution_error("to_grid: mode k=" + k.str() + " exceeds the dealiasing limit N/3 = " +
                             to_string(lim) + " for N=" + std::to_string(N));
    }
    for (int c = 0; c < arity; ++c) {
      const double cc = detail::comp(m.cos_coeff, c), ss = detail::comp(m.sin_coeff, c);
      if (k.is_zero()) {
        g.at(c, 0, 0, 0) += cc;
        continue;
      }
      // c cos + s sin = (c - i s)/2 e^{ikx} + (c + i s)/2 e^{-ikx}
      detail::place(g, c, k[0], k[1], k[2], cplx(cc, -ss) / 2.0);
      detail::place(g, c, -k[0], -k[1], -k[2], cplx(cc, ss) / 2.0);
    }
  }
  return g;
}

/// Physical grid values, one array of N^3 doubles per component.
inline std::vector<std::vector<double>> to_physical(const GridField& g, Fft3& fft) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(g.arity));
  const std::size_t m = g.size_per_component();
  for (int c = 0; c < g.arity; ++c) {
    out[static_cast<std::size_t>(c)].resize(fft.real_size());
    fft.backward(g.coeffs.data() + static_cast<std::size_t>(c) * m, out[static_cast<std::size_t>(c)].data());
  }
  return out;
}

inline std::vector<std::vector<double>> to_physical(const GridField& g) {
  Fft3 fft(g.N);
  return to_physical(g, fft);
}

/// Grid maximum of the pointwise (Euclidean) magnitude.
inline double grid_linf(const std::vector<std::vector<double>>& phys) {
  double best = 0.0;
  const std::size_t n = phys.empty() ? 0 : phys[0].size();
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    for (const auto& comp : phys) s += comp[p] * comp[p];
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

inline double grid_linf(const GridField& g) { return grid_linf(to_physical(g)); }

/// Writes the nonzero stored coefficients as CSV with a commented header.
inline void write_snapshot_csv(std::ostream& os, const GridField& g, double t, const std::string& name) {
  os << "# field=" << name << " N=" << g.N << " time=" << t << " arity=" << g.arity
     << " layout=r2c-half-spectrum endianness=n/a(text)\n";
  os << "component,kx,ky,kz,re,im\n";
  const int n = g.N;
  os.precision(17);
  for (int c = 0; c < g.arity; ++c) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int l = 0; l <= n / 2; ++l) {
          const cplx v = g.at(c, i, j, l);
          if (v == cplx{}) continue;
          os << c << ',' << GridField::wavenumber(i, n) << ',' << GridField::wavenumber(j, n) << ','
             << l << ',' << v.real() << ',' << v.imag() << '\n';
        }
      }
    }
  }
}

struct SimConfig {
  int N = 32;
  double dt = 1e-3;
  double T = 0.1;
  std::vector<double> snapshot_times;  // sorted, in (0, T]; empty means {T}
  bool deterministic = true;

  /// Documented CFL heuristic dt <= 0.5 / (N max(1, ||u0||_inf)).
  static double dt_max(int n, double u0_linf) { return 0.5 / (n * std::max(1.0, u0_linf)); }

  void validate() const {
    if (!detail::power_of_two(N)) {
      throw std::invalid_argument("sim.N: must be a power of two >= 4, got " + std::to_string(N));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("sim.dt: must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("sim.T: must be positive");
    double prev = 0.0;
    for (double s : snapshot_times) {
      if (!(s > prev) || s > T) {
        throw std::invalid_argument("sim.snapshot_times: must be strictly increasing within (0, T]");
      }
      prev = s;
    }
  }
};

struct Snapshot {
  double t = 0.0;
  GridField u;
  GridField rho;
};

struct SimDiagnostics {
  int steps = 0;
  double max_divergence = 0.0;   // max over steps of max_k |k . u_k|
  double rho_mean_drift = 0.0;   // max over steps of |mean(rho) - mean(rho0)|
  double max_cfl_number = 0.0;   // max over steps of dt N ||u||_inf
};

struct SimResult {
  std::vector<Snapshot> snapshots;
  SimDiagnostics diagnostics;
};

/// Integrating-factor RK4 integrator of the Boussinesq system.
class BoussinesqSolver {
 public:
  explicit BoussinesqSolver(int N, bool deterministic = true)
      : n_(N), m_(GridField::per_component(N)), fft_(N, deterministic) {
    k2_.resize(m_);
    kvec_.resize(m_);
    mask_.resize(m_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        for (int l = 0; l <= n_ / 2; ++l) {
          const std::size_t p = (static_cast<std::size_t>(i) * n_ + j) * (n_ / 2 + 1) + l;
          const int kx = GridField::wavenumber(i, n_), ky = GridField::wavenumber(j, n_), kz = l;
          kvec_[p] = {double(kx), double(ky), double(kz)};
          k2_[p] = double(kx) * kx + double(ky) * ky + double(kz) * kz;
          mask_[p] = detail::kept(kx, ky, kz, n_) ? 1.0 : 0.0;
        }
      }
    }
    phys_.assign(4, std::vector<double>(fft_.real_size()));
    prod_.resize(fft_.real_size());
    spec_.assign(9, std::vector<cplx>(m_));
  }

  int size() const { return n_; }

  /// Runs from the given data to cfg.T, recording snapshots.
  SimResult run(const GridField& u0, const GridField& rho0, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.N != n_ || u0.N != n_ || rho0.N != n_ || u0.arity != 3 || rho0.arity != 1) {
      throw std::invalid_argument("simulate: grid sizes or arities do not match the solver");
    }
    std::vector<cplx> w(4 * m_);
    std::copy(u0.coeffs.begin(), u0.coeffs.end(), w.begin());
    std::copy(rho0.coeffs.begin(), rho0.coeffs.end(), w.begin() + 3 * static_cast<std::ptrdiff_t>(m_));
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t p = 0; p < m_; ++p) w[c * m_ + p] *= mask_[p];
    }

    SimResult res;
    const double rho_mean0 = w[3 * m_].real();
    auto u_linf0 = velocity_linf(w);
    if (cfg.dt > SimConfig::dt_max(n_, u_linf0)) {
      std::ostringstream os;
      os << "simulate: dt=" << cfg.dt << " exceeds the CFL bound 0.5/(N max(1, ||u0||_inf)) = "
         << SimConfig::dt_max(n_, u_linf0);
      throw simulation_error(os.str());
    }

    std::vector<double> targets = cfg.snapshot_times;
    if (targets.empty()) targets.push_back(cfg.T);
    std::size_t next = 0;
    double t = 0.0;
    const double eps = 1e-12 * std::max(1.0, cfg.T);
    while (next < targets.size()) {
      const double h = std::min(cfg.dt, targets[next] - t);
      step(w, h, cfg.dt, res.diagnostics);
      t = (targets[next] - t <= cfg.dt) ? targets[next] : t + h;
      res.diagnostics.steps++;
      res.diagnostics.max_divergence = std::max(res.diagnostics.max_divergence, divergence_max(w));
      res.diagnostics.rho_mean_drift =
          std::max(res.diagnostics.rho_mean_drift, std::abs(w[3 * m_].real() - rho_mean0));
      while (next < targets.size() && std::abs(targets[next] - t) <= eps) {
        Snapshot s;
        s.t = targets[next];
        s.u = GridField(n_, 3);
        s.rho = GridField(n_, 1);
        std::copy(w.begin(), w.begin() + 3 * static_cast<std::ptrdiff_t>(m_), s.u.coeffs.begin());
        std::copy(w.begin() + 3 * static_cast<std::ptrdiff_t>(m_), w.end(), s.rho.coeffs.begin());
        res.snapshots.push_back(std::move(s));
        ++next;
      }
    }
    return res;
  }

 private:
  double velocity_linf(const std::vector<cplx>& w) {
    for (int c = 0; c < 3; ++c) fft_.backward(w.data() + c * m_, phys_[static_cast<std::size_t>(c)].data());
    double best = 0.0;
    for (std::size_t p = 0; p < fft_.real_size(); ++p) {
      best = std::max(best, phys_[0][p] * phys_[0][p] + phys_[1][p] * phys_[1][p] + phys_[2][p] * phys_[2][p]);
    }
    return std::sqrt(best);
  }

  double divergence_max(const std::vector<cplx>& w) const {
    double best = 0.0;
    for (std::size_t p = 0; p < m_; ++p) {
      const auto& k = kvec_[p];
      const cplx d = k[0] * w[p] + k[1] * w[m_ + p] + k[2] * w[2 * m_ + p];
      best = std::max(best, std::abs(d));
    }
    return best;
  }

  /// Nonlinear and buoyancy terms: -P div(u (x) u) + P(rho e3), -div(u rho).
  void rhs(const std::vector<cplx>& w, std::vector<cplx>& out, double* u_linf) {
    const std::size_t R = fft_.real_size();
    for (int c = 0; c < 4; ++c) fft_.backward(w.data() + c * m_, phys_[static_cast<std::size_t>(c)].data());
    if (u_linf) {
      double best = 0.0;
      bool finite = true;
      for (std::size_t p = 0; p < R; ++p) {
        const double s = phys_[0][p] * phys_[0][p] + phys_[1][p] * phys_[1][p] + phys_[2][p] * phys_[2][p];
        if (!std::isfinite(s) || !std::isfinite(phys_[3][p])) finite = false;
        best = std::max(best, s);
      }
      if (!finite) throw simulation_error("simulate: non-finite value in the solution");
      *u_linf = std::sqrt(best);
    }
    // products u_a u_b (a <= b) then u_a rho
    static constexpr int pa[9] = {0, 0, 0, 1, 1, 2, 0, 1, 2};
    static constexpr int pb[9] = {0, 1, 2, 1, 2, 2, 3, 3, 3};
    for (int q = 0; q < 9; ++q) {
      const auto& a = phys_[static_cast<std::size_t>(pa[q])];
      const auto& b = phys_[static_cast<std::size_t>(pb[q])];
      for (std::size_t p = 0; p < R; ++p) prod_[p] = a[p] * b[p];
      fft_.forward(prod_.data(), spec_[static_cast<std::size_t>(q)].data());
    }
    auto sym = [](int a, int b) {
      static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
      return table[a][b];
    };
    const cplx I(0.0, 1.0);
    for (std::size_t p = 0; p < m_; ++p) {
      const double mk = mask_[p];
      const auto& k = kvec_[p];
      cplx nu[3];
      for (int a = 0; a < 3; ++a) {
        cplx d = 0.0;
        for (int b = 0; b < 3; ++b) d += I * k[static_cast<std::size_t>(b)] * spec_[static_cast<std::size_t>(sym(a, b))][p];
        nu[a] = -mk * d;
      }
      nu[2] += w[3 * m_ + p];
      if (k2_[p] > 0.0) {
        const cplx kn = (k[0] * nu[0] + k[1] * nu[1] + k[2] * nu[2]) / k2_[p];
        for (int a = 0; a < 3; ++a) nu[a] -= kn * k[static_cast<std::size_t>(a)];
      }
      cplx nr = 0.0;
      for (int b = 0; b < 3; ++b) nr += I * k[static_cast<std::size_t>(b)] * spec_[static_cast<std::size_t>(6 + b)][p];
      for (int a = 0; a < 3; ++a) out[static_cast<std::size_t>(a) * m_ + p] = mk * nu[a];
      out[3 * m_ + p] = -mk * nr;
    }
  }

  void step(std::vector<cplx>& w, double h, double dt_nominal, SimDiagnostics& diag) {
    const std::size_t total = 4 * m_;
    std::vector<cplx> k1(total), k2(total), k3(total), k4(total), tmp(total);
    std::vector<double> E(m_), E2(m_);
    for (std::size_t p = 0; p < m_; ++p) {
      E[p] = std::exp(-k2_[p] * h);
      E2[p] = std::exp(-k2_[p] * h / 2.0);
    }
    double u_linf = 0.0;
    rhs(w, k1, &u_linf);
    const double cfl = dt_nominal * n_ * u_linf;
    diag.max_cfl_number = std::max(diag.max_cfl_number, cfl);
    if (cfl > 1.0) {
      std::ostringstream os;
      os << "simulate: CFL number dt N ||u||_inf = " << cfl << " exceeds 1 at step " << diag.steps;
      throw simulation_error(os.str());
    }
    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t p = i % m_;
      tmp[i] = E2[p] * (w[i] + 0.5 * h * k1[i]);
    }
    rhs(tmp, k2, nullptr);
    for (std::size_t i = 0; i < total; ++i) tmp[i] = E2[i % m_] * w[i] + 0.5 * h * k2[i];
    rhs(tmp, k3, nullptr);
    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t p = i % m_;
      tmp[i] = E[p] * w[i] + h * E2[p] * k3[i];
    }
    rhs(tmp, k4, nullptr);
    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t p = i % m_;
      w[i] = E[p] * w[i] + h / 6.0 * (E[p] * k1[i] + 2.0 * E2[p] * (k2[i] + k3[i]) + k4[i]);
    }
  }

  int n_;
  std::size_t m_;
  Fft3 fft_;
  std::vector<double> k2_;
  std::vector<std::array<double, 3>> kvec_;
  std::vector<double> mask_;
  std::vector<std::vector<double>> phys_;
  std::vector<double> prod_;
  std::vector<std::vector<cplx>> spec_;
};

/// Embeds the data and integrates to cfg.T.
inline SimResult simulate(const VectorField& u0, const ScalarField& rho0, const SimConfig& cfg) {
  cfg.validate();
  BoussinesqSolver solver(cfg.N, cfg.deterministic);
  return solver.run(to_grid(u0, cfg.N), to_grid(rho0, cfg.N), cfg);
}

struct ResidualReport {
  double t = 0.0;
  double y_linf = 0.0;          // ||u_sim - g - u1||_inf on the grid
  double z_linf = 0.0;          // ||rho_sim - theta - rho1||_inf on the grid
  double picard_linf = 0.0;     // ||rho1||_inf on the grid
  double u1_linf = 0.0;         // ||u1||_inf on the grid
  double rho10_amplitude = 0.0; // |coefficient of sin(eta.x)| in rho_{1,0}
  double bound_M = std::numeric_limits<double>::quiet_NaN();
};

/// Remainder y, z of a snapshot against the first Picard iterates at the same time.
/// bound_M is filled when parameters are given and admissible at this t.
inline ResidualReport residual_decompose(const Snapshot& snap, const PicardState& picard,
                                         const std::optional<LacunaryParams>& params = std::nullopt) {
  if (std::abs(snap.t - picard.t) > 1e-12 * std::max(1.0, picard.t)) {
    throw std::invalid_argument("residual_decompose: snapshot time " + std::to_string(snap.t) +
                                " differs from Picard time " + std::to_string(picard.t));
  }
  const int N = snap.u.N;
  Fft3 fft(N);
  ResidualReport rep;
  rep.t = snap.t;
  GridField y = snap.u;
  const GridField lin_u = to_grid(picard.g + picard.u1, N);
  for (std::size_t i = 0; i < y.coeffs.size(); ++i) y.coeffs[i] -= lin_u.coeffs[i];
  GridField z = snap.rho;
  const GridField lin_rho = to_grid(picard.theta + picard.rho1, N);
  for (std::size_t i = 0; i < z.coeffs.size(); ++i) z.coeffs[i] -= lin_rho.coeffs[i];
  rep.y_linf = grid_linf(to_physical(y, fft));
  rep.z_linf = grid_linf(to_physical(z, fft));
  rep.picard_linf = grid_linf(to_physical(to_grid(picard.rho1, N), fft));
  rep.u1_linf = grid_linf(to_physical(to_grid(picard.u1, N), fft));
  rep.rho10_amplitude = std::abs(picard.rho1_parts.rho10.coefficient(eta).sin_coeff);
  if (params && params->satisfies_proposition_constraint() &&
      snap.t <= params->final_time() * (1 + 1e-12)) {
    rep.bound_M = remainder_bound_M(*params, snap.t);
  }
  return rep;
}

struct ResolutionVerdict {
  bool ok = false;
  Wavenumber needed = 0;  // 2^r K, the x3 component of k_r + k'_r
  int minimal_N = 0;      // smallest power of two with needed <= N/3
};

/// Checks 2^r K <= N/3, room for every first-interaction frequency.
inline ResolutionVerdict validate_resolution(const LacunaryParams& p, int N) {
  p.validate();
  ResolutionVerdict v;
  v.needed = 2 * p.kbar(p.r);
  v.ok = detail::power_of_two(N) && 3 * v.needed <= N;
  Wavenumber n = 4;
  while (3 * v.needed > n) n *= 2;
  v.minimal_N = n > std::numeric_limits<int>::max() ? std::numeric_limits<int>::max() : static_cast<int>(n);
  return v;
}

}  // namespace norminflate
