#pragma once

// L-infinity and negative-order Besov norm estimation for TrigFields.
//
// The L-infinity value is the maximum over a uniform grid, polished by Newton
// ascent from the best grid points; every reported value is attained at some
// point, so it is always a lower bound for the true supremum. Per axis the grid has max(16, 4 |k|max + 1)
// points, or a single point when no mode depends on that axis. When the grid
// times the mode count exceeds the evaluation budget the largest axes are
// halved, the estimate is flagged unresolved and the lower bound stays valid.
// The upper bound sums sqrt(|c|^2 + |s|^2) over modes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "norminflate/errors.hpp"
#include "norminflate/trig_field.hpp"

namespace norminflate {

struct LinfOptions {
  /// Upper limit on grid points times modes.
  std::size_t budget = std::size_t{1} << 18;
};

struct LinfEstimate {
  double value = 0.0;  // grid maximum (lower bound)
  double upper = 0.0;  // coefficient l1 bound
  bool resolved = true;
  std::array<std::size_t, 3> grid{1, 1, 1};
};

namespace detail {

inline std::array<std::size_t, 3> axis_sizes(const std::array<Wavenumber, 3>& kmax,
                                             std::size_t modes, std::size_t budget,
                                             bool& resolved) {
  std::array<std::size_t, 3> n{};
  constexpr Wavenumber huge = Wavenumber{1} << 40;
  for (std::size_t a = 0; a < 3; ++a) {
    if (kmax[a] == 0) {
      n[a] = 1;
    } else if (kmax[a] > huge) {
      n[a] = std::size_t{1} << 42;
    } else {
      n[a] = std::max<std::size_t>(16, 4 * static_cast<std::size_t>(kmax[a]) + 1);
    }
  }
  resolved = true;
  const std::size_t m = std::max<std::size_t>(modes, 1);
  auto total = [&] {
    long double p = static_cast<long double>(m);
    for (auto x : n) p *= static_cast<long double>(x);
    return p;
  };
  while (total() > static_cast<long double>(budget)) {
    auto it = std::max_element(n.begin(), n.end());
    if (*it == 1) break;
    *it = std::max<std::size_t>(1, *it / 2);
    resolved = false;
  }
  return n;
}

template <class T>
struct Flat;
template <>
struct Flat<double> {
  static constexpr std::size_t n = 1;
  static double get(double x, std::size_t) { return x; }
};
template <>
struct Flat<Vec3> {
  static constexpr std::size_t n = 3;
  static double get(const Vec3& v, std::size_t i) { return v[i]; }
};
template <>
struct Flat<Mat3> {
  static constexpr std::size_t n = 9;
  static double get(const Mat3& m, std::size_t i) { return m.row[i / 3][i % 3]; }
};

/// Solves the 3x3 system a x = b restricted to the axes flagged in `active`.
inline bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b,
                   const std::array<bool, 3>& active, std::array<double, 3>& x) {
  std::array<std::size_t, 3> idx{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (active[i]) idx[n++] = i;
  }
  double m[3][4] = {};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) m[r][c] = a[idx[r]][idx[c]];
    m[r][n] = b[idx[r]];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (std::abs(m[piv][c]) < 1e-300) return false;
    for (std::size_t k = 0; k <= n; ++k) std::swap(m[c][k], m[piv][k]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  x = {0.0, 0.0, 0.0};
  for (std::size_t r = 0; r < n; ++r) x[idx[r]] = m[r][n] / m[r][r];
  return true;
}

inline std::uint64_t mod_positive(Wavenumber k, std::size_t n) {
  const Wavenumber nn = static_cast<Wavenumber>(n);
  Wavenumber r = k % nn;
  if (r < 0) r += nn;
  return static_cast<std::uint64_t>(r);
}

}  // namespace detail

/// Point values of heat(f, tau) on a fixed grid, reusable across heat times.
template <class T>
class GridSampler {
 public:
  GridSampler(const TrigField<T>& f, const LinfOptions& opts = {}) {
    std::array<Wavenumber, 3> kmax{};
    for (std::size_t a = 0; a < 3; ++a) kmax[a] = f.max_abs_component(a);
    modes_ = f.size();
    grid_ = detail::axis_sizes(kmax, modes_, opts.budget, resolved_);
    decay_.reserve(modes_);
    amp_.reserve(modes_);
    std::vector<std::array<std::uint64_t, 3>> kmod;
    std::vector<Mode<T>> coeffs;
    for (const auto& [k, m] : f.modes()) {
      decay_.push_back(k.norm2());
      amp_.push_back(std::sqrt(magnitude2(m.cos_coeff) + magnitude2(m.sin_coeff)));
      kmod.push_back({detail::mod_positive(k[0], grid_[0]), detail::mod_positive(k[1], grid_[1]),
                      detail::mod_positive(k[2], grid_[2])});
      coeffs.push_back(m);
      kvec_.push_back(k.as_double());
      for (std::size_t i = 0; i < detail::Flat<T>::n; ++i) {
        flat_.push_back({detail::Flat<T>::get(m.cos_coeff, i), detail::Flat<T>::get(m.sin_coeff, i)});
      }
    }
    // double-precision phases k.x are only trustworthy for moderate frequencies
    polishable_ = f.max_abs_component() <= (Wavenumber{1} << 20);
    for (std::size_t a = 0; a < 3; ++a) active_[a] = kmax[a] != 0;
    points_ = grid_[0] * grid_[1] * grid_[2];
    if (modes_ == 0) return;
    basis_.resize(points_ * modes_);
    std::size_t p = 0;
    for (std::size_t i = 0; i < grid_[0]; ++i) {
      for (std::size_t j = 0; j < grid_[1]; ++j) {
        for (std::size_t l = 0; l < grid_[2]; ++l, ++p) {
          for (std::size_t m = 0; m < modes_; ++m) {
            const double frac =
                static_cast<double>((kmod[m][0] * i) % grid_[0]) / static_cast<double>(grid_[0]) +
                static_cast<double>((kmod[m][1] * j) % grid_[1]) / static_cast<double>(grid_[1]) +
                static_cast<double>((kmod[m][2] * l) % grid_[2]) / static_cast<double>(grid_[2]);
            const double phase = 2.0 * std::numbers::pi * frac;
            basis_[p * modes_ + m] =
                std::cos(phase) * coeffs[m].cos_coeff + std::sin(phase) * coeffs[m].sin_coeff;
          }
        }
      }
    }
  }

  /// Maximum of |heat(f, tau)| over the grid, polished from the best grid points.
  double max_at(double tau) const {
    if (modes_ == 0) return 0.0;
    std::vector<double> w(modes_);
    for (std::size_t m = 0; m < modes_; ++m) w[m] = std::exp(-decay_[m] * tau);
    constexpr std::size_t kStarts = 4;
    std::array<std::pair<double, std::size_t>, kStarts> top{};
    for (auto& e : top) e = {-1.0, 0};
    for (std::size_t p = 0; p < points_; ++p) {
      T acc{};
      const T* row = &basis_[p * modes_];
      for (std::size_t m = 0; m < modes_; ++m) acc += w[m] * row[m];
      const double v = magnitude(acc);
      if (v > top.back().first) {
        top.back() = {v, p};
        std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      }
    }
    double best = top.front().first;
    if (!polishable_) return best;
    for (const auto& [v, p] : top) {
      if (v < 0.0) break;
      best = std::max(best, polish(point_of(p), w));
    }
    return best;
  }

  /// l1 coefficient bound of heat(f, tau).
  double upper_at(double tau) const {
    double s = 0.0;
    for (std::size_t m = 0; m < modes_; ++m) s += amp_[m] * std::exp(-decay_[m] * tau);
    return s;
  }

  bool resolved() const { return resolved_; }
  const std::array<std::size_t, 3>& grid() const { return grid_; }

 private:
  std::array<double, 3> point_of(std::size_t p) const {
    const std::size_t l = p % grid_[2];
    const std::size_t j = (p / grid_[2]) % grid_[1];
    const std::size_t i = p / (grid_[2] * grid_[1]);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return {two_pi * static_cast<double>(i) / static_cast<double>(grid_[0]),
            two_pi * static_cast<double>(j) / static_cast<double>(grid_[1]),
            two_pi * static_cast<double>(l) / static_cast<double>(grid_[2])};
  }

  /// |F|^2 / 2 with its gradient and Hessian at x.
  double local_model(const std::array<double, 3>& x, const std::vector<double>& w,
                     std::array<double, 3>* grad, std::array<std::array<double, 3>, 3>* hess) const {
    constexpr std::size_t n = detail::Flat<T>::n;
    std::array<double, n> val{};
    std::array<std::array<double, 3>, n> dval{};
    std::array<std::array<std::array<double, 3>, 3>, n> hval{};
    for (std::size_t m = 0; m < modes_; ++m) {
      const auto& k = kvec_[m];
      const double phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
      const double c = std::cos(phase), s = std::sin(phase);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& cs = flat_[m * n + i];
        const double v = w[m] * (cs[0] * c + cs[1] * s);
        val[i] += v;
        if (!grad) continue;
        const double d = w[m] * (cs[1] * c - cs[0] * s);
        for (std::size_t a = 0; a < 3; ++a) {
          dval[i][a] += d * k[a];
          for (std::size_t b = 0; b < 3; ++b) hval[i][a][b] -= v * k[a] * k[b];
        }
      }
    }
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += 0.5 * val[i] * val[i];
    if (grad) {
      *grad = {};
      *hess = {};
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < 3; ++a) {
          (*grad)[a] += val[i] * dval[i][a];
          for (std::size_t b = 0; b < 3; ++b) {
            (*hess)[a][b] += dval[i][a] * dval[i][b] + val[i] * hval[i][a][b];
          }
        }
      }
    }
    return g;
  }

  /// Monotone Newton ascent of |F| from x; returns the best value reached.
  double polish(std::array<double, 3> x, const std::vector<double>& w) const {
    std::array<double, 3> grad;
    std::array<std::array<double, 3>, 3> hess;
    double g = local_model(x, w, &grad, &hess);
    for (int it = 0; it < 40; ++it) {
      std::array<double, 3> step{};
      std::array<double, 3> rhs{-grad[0], -grad[1], -grad[2]};
      const bool newton = detail::solve3(hess, rhs, active_, step) &&
                          step[0] * grad[0] + step[1] * grad[1] + step[2] * grad[2] > 0.0;
      if (!newton) {
        double kk = 0.0;
        for (const auto& k : kvec_) kk = std::max(kk, k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        const double alpha = 1.0 / (kk * std::max(2.0 * g, 1e-300));
        for (std::size_t a = 0; a < 3; ++a) step[a] = active_[a] ? alpha * grad[a] : 0.0;
      }
      bool improved = false;
      for (int half = 0; half < 40; ++half) {
        const std::array<double, 3> y{x[0] + step[0], x[1] + step[1], x[2] + step[2]};
        const double gy = local_model(y, w, nullptr, nullptr);
        if (gy > g) {
          x = y;
          improved = true;
          break;
        }
        for (auto& v : step) v *= 0.5;
      }
      if (!improved) break;
      const double before = g;
      g = local_model(x, w, &grad, &hess);
      if (g - before <= 1e-16 * g) break;
    }
    return std::sqrt(2.0 * g);
  }

  std::size_t modes_ = 0;
  std::size_t points_ = 0;
  std::array<std::size_t, 3> grid_{1, 1, 1};
  bool resolved_ = true;
  std::vector<double> decay_;
  std::vector<double> amp_;
  std::vector<T> basis_;
  std::vector<std::array<double, 3>> kvec_;
  std::vector<std::array<double, 2>> flat_;  // (cos, sin) per mode and component
  std::array<bool, 3> active_{};
  bool polishable_ = false;
};

/// Sum over modes of sqrt(|c|^2 + |s|^2): an upper bound for the sup norm.
template <class T>
double l1_bound(const TrigField<T>& f) {
  double acc = 0.0;
  for (const auto& [k, m] : f.modes()) acc += std::sqrt(magnitude2(m.cos_coeff) + magnitude2(m.sin_coeff));
  return acc;
}

template <class T>
LinfEstimate linf_norm(const TrigField<T>& f, const LinfOptions& opts = {}) {
  if (f.empty()) return {};
  GridSampler<T> sampler(f, opts);
  return {sampler.max_at(0.0), sampler.upper_at(0.0), sampler.resolved(), sampler.grid()};
}

/// Log-spaced heat-time grid for the Besov supremum.
struct TGridSpec {
  double t_min = 1e-8;
  double t_max = 4.0;
  int points = 400;
  /// Rounds of 10x zoom around the grid argmax.
  int refine_rounds = 3;

  void validate() const {
    if (!(t_min > 0.0) || !(t_max > t_min) || points < 3 || refine_rounds < 0) {
      throw std::invalid_argument("tgrid: need 0 < t_min < t_max, points >= 3, refine_rounds >= 0");
    }
  }

  std::vector<double> nodes() const {
    std::vector<double> t(static_cast<std::size_t>(points));
    const double a = std::log(t_min), b = std::log(t_max);
    for (int i = 0; i < points; ++i) {
      t[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
    }
    t.front() = t_min;
    t.back() = t_max;
    return t;
  }
};

struct SupResult {
  double value = 0.0;
  double argmax_t = 0.0;
  bool at_endpoint = false;
};

/// sup over the heat-time grid of t^(s/2) g(t), with local log-zoom refinement.
inline SupResult sup_over_tgrid(const std::function<double(double)>& g, double s,
                                const TGridSpec& grid) {
  grid.validate();
  const auto nodes = grid.nodes();
  auto weighted = [&](double t) { return std::pow(t, 0.5 * s) * g(t); };
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double v = weighted(nodes[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  SupResult r{best_val, nodes[best], best == 0 || best + 1 == nodes.size()};
  if (r.at_endpoint || grid.refine_rounds == 0) return r;

  double lo = std::log(nodes[best - 1]), hi = std::log(nodes[best + 1]);
  constexpr int kZoom = 21;
  for (int round = 0; round < grid.refine_rounds; ++round) {
    double arg = r.argmax_t;
    int idx = kZoom / 2;
    for (int i = 0; i < kZoom; ++i) {
      const double t = std::exp(lo + (hi - lo) * i / (kZoom - 1));
      const double v = weighted(t);
      if (v > r.value) {
        r.value = v;
        arg = t;
        idx = i;
      }
    }
    r.argmax_t = arg;
    const double step = (hi - lo) / (kZoom - 1);
    const double centre = lo + step * idx;
    lo = centre - step;
    hi = centre + step;
  }
  return r;
}

struct BesovEstimate {
  double value = 0.0;     // sup of t^(s/2) times the grid L-infinity lower bound
  double argmax_t = 0.0;  // heat time attaining it
  double s = 0.0;
  bool at_endpoint = false;  // maximum sits on the ends of the heat-time range
  double upper = 0.0;        // same supremum of the l1 coefficient bound
  bool resolved = true;
};

/// sup_t t^(s/2) ||e^{t Delta} f||_inf over the heat-time grid.
///
/// The default range [1e-8, 4] stands in for the homogeneous sup over t > 0;
/// pass t_max = 1 for the inhomogeneous norm.
template <class T>
BesovEstimate besov_norm(const TrigField<T>& f, double s, const TGridSpec& tgrid = {},
                         const LinfOptions& opts = {}) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("besov_norm: order s must be positive, got " + std::to_string(s));
  }
  if (!f.mean_zero()) {
    throw precondition_error(
        "besov_norm: field has a nonzero constant mode; the homogeneous norm is undefined");
  }
  BesovEstimate est;
  est.s = s;
  if (f.empty()) {
    est.argmax_t = tgrid.t_min;
    return est;
  }
  GridSampler<T> sampler(f, opts);
  const auto lower = sup_over_tgrid([&](double t) { return sampler.max_at(t); }, s, tgrid);
  const auto upper = sup_over_tgrid([&](double t) { return sampler.upper_at(t); }, s, tgrid);
  est.value = lower.value;
  est.argmax_t = lower.argmax_t;
  est.at_endpoint = lower.at_endpoint;
  est.upper = std::max(upper.value, lower.value);
  est.resolved = sampler.resolved();
  return est;
}

template <class T>
BesovEstimate besov_norm_inhomogeneous(const TrigField<T>& f, double s, TGridSpec tgrid = {},
                                       const LinfOptions& opts = {}) {
  tgrid.t_max = std::min(tgrid.t_max, 1.0);
  return besov_norm(f, s, tgrid, opts);
}

}  // namespace norminflate
