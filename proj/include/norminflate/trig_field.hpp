#pragma once

// Exact algebra of finite trigonometric polynomials on the 3-torus.
//
// A field is a finite sum  sum_k  c_k cos(k.x) + s_k sin(k.x)  with one stored
// entry per pair {k, -k}: the representative has a positive leading nonzero
// component, cos coefficients are even under k -> -k and sin coefficients odd.
// Coefficients are double (scalar fields), Vec3 (vector fields) or Mat3
// (gradients of vector fields).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "norminflate/frequency.hpp"
#include "norminflate/vec.hpp"

namespace norminflate {

template <class T>
struct Mode {
  T cos_coeff{};
  T sin_coeff{};
};

template <class T>
class TrigField {
 public:
  using value_type = T;
  using map_type = std::map<Frequency, Mode<T>>;

  TrigField() = default;

  static TrigField cosine(const Frequency& k, const T& c) {
    TrigField f;
    f.add(k, c, T{});
    return f;
  }
  static TrigField sine(const Frequency& k, const T& s) {
    TrigField f;
    f.add(k, T{}, s);
    return f;
  }

  /// Accumulates c cos(k.x) + s sin(k.x), folding k onto its canonical representative.
  void add(const Frequency& k, const T& c, const T& s) {
    if (k.is_zero()) {
      // sin(0) vanishes; only the constant survives.
      if (c == T{}) return;
      modes_[k].cos_coeff += c;
      return;
    }
    if (c == T{} && s == T{}) return;
    if (k.is_canonical()) {
      auto& m = modes_[k];
      m.cos_coeff += c;
      m.sin_coeff += s;
    } else {
      auto& m = modes_[-k];
      m.cos_coeff += c;
      m.sin_coeff -= s;
    }
  }

  const map_type& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }

  /// Mean-zero iff there is no (nonzero) constant mode.
  bool mean_zero() const {
    auto it = modes_.find(Frequency{});
    return it == modes_.end() || it->second.cos_coeff == T{};
  }

  /// Constant (zero-frequency) coefficient.
  T mean() const {
    auto it = modes_.find(Frequency{});
    return it == modes_.end() ? T{} : it->second.cos_coeff;
  }

  Mode<T> coefficient(const Frequency& k) const {
    const bool flip = !k.is_canonical();
    auto it = modes_.find(flip ? -k : k);
    if (it == modes_.end()) return {};
    Mode<T> m = it->second;
    if (flip) m.sin_coeff = -1.0 * m.sin_coeff;
    return m;
  }

  T evaluate(const std::array<double, 3>& x) const {
    T acc{};
    for (const auto& [k, m] : modes_) {
      const double phase = dot(k, x);
      acc += std::cos(phase) * m.cos_coeff;
      acc += std::sin(phase) * m.sin_coeff;
    }
    return acc;
  }

  /// Largest coefficient magnitude; 0 for the zero field.
  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [k, mode] : modes_) {
      m = std::max({m, magnitude(mode.cos_coeff), magnitude(mode.sin_coeff)});
    }
    return m;
  }

  /// Largest |k_axis| over the support.
  Wavenumber max_abs_component(std::size_t axis) const {
    Wavenumber m = 0;
    for (const auto& [k, mode] : modes_) m = std::max(m, abs_wavenumber(k[axis]));
    return m;
  }
  Wavenumber max_abs_component() const {
    Wavenumber m = 0;
    for (std::size_t a = 0; a < 3; ++a) m = std::max(m, max_abs_component(a));
    return m;
  }

  bool all_coefficients_finite() const {
    for (const auto& [k, m] : modes_) {
      if (!all_finite(m.cos_coeff) || !all_finite(m.sin_coeff)) return false;
    }
    return true;
  }

  /// Removes modes whose coefficients are both at most `threshold` in magnitude.
  void prune(double threshold) {
    std::erase_if(modes_, [threshold](const auto& kv) {
      return magnitude(kv.second.cos_coeff) <= threshold &&
             magnitude(kv.second.sin_coeff) <= threshold;
    });
  }

  TrigField& operator+=(const TrigField& o) {
    for (const auto& [k, m] : o.modes_) {
      auto& dst = modes_[k];
      dst.cos_coeff += m.cos_coeff;
      dst.sin_coeff += m.sin_coeff;
    }
    return *this;
  }
  TrigField& operator-=(const TrigField& o) {
    for (const auto& [k, m] : o.modes_) {
      auto& dst = modes_[k];
      dst.cos_coeff -= m.cos_coeff;
      dst.sin_coeff -= m.sin_coeff;
    }
    return *this;
  }
  TrigField& operator*=(double a) {
    for (auto& [k, m] : modes_) {
      m.cos_coeff *= a;
      m.sin_coeff *= a;
    }
    return *this;
  }
  friend TrigField operator+(TrigField a, const TrigField& b) { return a += b; }
  friend TrigField operator-(TrigField a, const TrigField& b) { return a -= b; }
  friend TrigField operator*(double s, TrigField a) { return a *= s; }
  friend TrigField operator*(TrigField a, double s) { return a *= s; }

  /// Applies `fn(k, mode)` to every mode, returning a new field (frequencies unchanged).
  template <class U = T, class Fn>
  TrigField<U> map_modes(Fn&& fn) const {
    TrigField<U> out;
    for (const auto& [k, m] : modes_) {
      const Mode<U> r = fn(k, m);
      out.add(k, r.cos_coeff, r.sin_coeff);
    }
    return out;
  }

 private:
  map_type modes_;
};

using ScalarField = TrigField<double>;
using VectorField = TrigField<Vec3>;
using MatrixField = TrigField<Mat3>;

inline double dot(const Vec3& v, const Frequency& k) {
  const auto d = k.as_double();
  return v[0] * d[0] + v[1] * d[1] + v[2] * d[2];
}

inline Vec3 to_vec(const Frequency& k) {
  const auto d = k.as_double();
  return {d[0], d[1], d[2]};
}

/// e^{t Delta} f: every coefficient scaled by exp(-|k|^2 t). Modes whose scaled
/// coefficients fall to at most `drop_threshold` are pruned when the threshold is positive.
template <class T>
TrigField<T> heat(const TrigField<T>& f, double t, double drop_threshold = 0.0) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("heat: time must be finite and non-negative, got " +
                                std::to_string(t));
  }
  TrigField<T> out;
  for (const auto& [k, m] : f.modes()) {
    const double w = std::exp(-k.norm2() * t);
    const T c = w * m.cos_coeff;
    const T s = w * m.sin_coeff;
    if (drop_threshold > 0.0 && magnitude(c) <= drop_threshold && magnitude(s) <= drop_threshold) {
      continue;
    }
    out.add(k, c, s);
  }
  return out;
}

namespace detail {

/// Zeroes x when it is within a few ulps of `scale`, the size of the terms that
/// produced it; cancellations that are exact in real arithmetic then stay exact.
inline double snap(double x, double scale) {
  return std::abs(x) <= 8.0 * std::numeric_limits<double>::epsilon() * scale ? 0.0 : x;
}

inline double dot_snapped(const Vec3& v, const Frequency& k) {
  const auto d = k.as_double();
  const double scale = std::abs(v[0] * d[0]) + std::abs(v[1] * d[1]) + std::abs(v[2] * d[2]);
  return snap(v[0] * d[0] + v[1] * d[1] + v[2] * d[2], scale);
}

inline Vec3 project_off(const Vec3& v, const Vec3& kv, double k2, double vk) {
  Vec3 out = v - (vk / k2) * kv;
  // second pass removes the rounding residue of the first, which is relative to |v|
  out -= (dot(out, kv) / k2) * kv;
  const double scale = magnitude(v);
  for (std::size_t i = 0; i < 3; ++i) out[i] = snap(out[i], scale);
  return out;
}

}  // namespace detail

/// Leray projector: v -> v - (v.k) k / |k|^2 on every nonzero mode; identity on the constant.
inline VectorField leray_project(const VectorField& f) {
  return f.map_modes([](const Frequency& k, const Mode<Vec3>& m) {
    if (k.is_zero()) return m;
    const Vec3 kv = to_vec(k);
    const double k2 = k.norm2();
    return Mode<Vec3>{detail::project_off(m.cos_coeff, kv, k2, detail::dot_snapped(m.cos_coeff, k)),
                      detail::project_off(m.sin_coeff, kv, k2, detail::dot_snapped(m.sin_coeff, k))};
  });
}

/// Divergence; mode contributions below rounding level of their terms are exact zeros.
inline ScalarField divergence(const VectorField& f) {
  // d/dx_j [c cos(k.x) + s sin(k.x)] = s k_j cos(k.x) - c k_j sin(k.x)
  ScalarField out;
  for (const auto& [k, m] : f.modes()) {
    out.add(k, detail::dot_snapped(m.sin_coeff, k), -detail::dot_snapped(m.cos_coeff, k));
  }
  return out;
}

inline VectorField gradient(const ScalarField& f) {
  VectorField out;
  for (const auto& [k, m] : f.modes()) {
    const Vec3 kv = to_vec(k);
    out.add(k, m.sin_coeff * kv, -m.cos_coeff * kv);
  }
  return out;
}

/// Row i of the result is the gradient of component i.
inline MatrixField gradient(const VectorField& f) {
  MatrixField out;
  for (const auto& [k, m] : f.modes()) {
    const Vec3 kv = to_vec(k);
    Mat3 c, s;
    for (std::size_t i = 0; i < 3; ++i) {
      c.row[i] = m.sin_coeff[i] * kv;
      s.row[i] = -m.cos_coeff[i] * kv;
    }
    out.add(k, c, s);
  }
  return out;
}

/// Scalar field times a constant direction, e.g. rho e_3.
inline VectorField times(const ScalarField& f, const Vec3& direction) {
  VectorField out;
  for (const auto& [k, m] : f.modes()) out.add(k, m.cos_coeff * direction, m.sin_coeff * direction);
  return out;
}

inline ScalarField component(const VectorField& f, std::size_t i) {
  ScalarField out;
  for (const auto& [k, m] : f.modes()) out.add(k, m.cos_coeff[i], m.sin_coeff[i]);
  return out;
}

/// Product of (ac cos a + as sin a) with (bc cos b + bs sin b), split onto a+b and a-b.
template <class T>
struct ProductTerms {
  T sum_cos{}, sum_sin{};    // coefficients of cos/sin((a+b).x)
  T diff_cos{}, diff_sin{};  // coefficients of cos/sin((a-b).x)
};

template <class T>
ProductTerms<T> product_terms(double ac, double as, const T& bc, const T& bs) {
  // cos a cos b = [cos(a+b) + cos(a-b)]/2    sin a sin b = [cos(a-b) - cos(a+b)]/2
  // cos a sin b = [sin(a+b) - sin(a-b)]/2    sin a cos b = [sin(a+b) + sin(a-b)]/2
  ProductTerms<T> p;
  p.sum_cos = 0.5 * (ac * bc - as * bs);
  p.sum_sin = 0.5 * (ac * bs + as * bc);
  p.diff_cos = 0.5 * (ac * bc + as * bs);
  p.diff_sin = 0.5 * (as * bc - ac * bs);
  return p;
}

template <class T>
ProductTerms<T>& operator+=(ProductTerms<T>& a, const ProductTerms<T>& b) {
  a.sum_cos += b.sum_cos;
  a.sum_sin += b.sum_sin;
  a.diff_cos += b.diff_cos;
  a.diff_sin += b.diff_sin;
  return a;
}

/// (u_a . grad) f_b for a single mode pair.
template <class T>
ProductTerms<T> advect_pair(const Frequency& ka, const Mode<Vec3>& ua, const Frequency& kb,
                            const Mode<T>& fb) {
  // u_a . grad(C cos b + S sin b) = (u_a . kb) (S cos b - C sin b)
  (void)ka;
  return product_terms<T>(dot(ua.cos_coeff, kb), dot(ua.sin_coeff, kb), fb.sin_coeff,
                          -1.0 * fb.cos_coeff);
}

/// (div u_a) f_b for a single mode pair.
template <class T>
ProductTerms<T> dilation_pair(const Frequency& ka, const Mode<Vec3>& ua, const Frequency& kb,
                              const Mode<T>& fb) {
  (void)kb;
  return product_terms<T>(dot(ua.sin_coeff, ka), -dot(ua.cos_coeff, ka), fb.cos_coeff,
                          fb.sin_coeff);
}

/// div(u_a (x) f_b) = (u_a . grad) f_b + (div u_a) f_b.
template <class T>
ProductTerms<T> divergence_form_pair(const Frequency& ka, const Mode<Vec3>& ua,
                                     const Frequency& kb, const Mode<T>& fb) {
  auto p = advect_pair(ka, ua, kb, fb);
  p += dilation_pair(ka, ua, kb, fb);
  return p;
}

template <class T>
void add_terms(TrigField<T>& out, const Frequency& ka, const Frequency& kb,
               const ProductTerms<T>& p) {
  out.add(ka + kb, p.sum_cos, p.sum_sin);
  out.add(ka - kb, p.diff_cos, p.diff_sin);
}

/// u . grad f, expanded exactly onto sum and difference frequencies.
template <class T>
TrigField<T> advect(const VectorField& u, const TrigField<T>& f) {
  TrigField<T> out;
  for (const auto& [ka, ua] : u.modes()) {
    for (const auto& [kb, fb] : f.modes()) add_terms(out, ka, kb, advect_pair(ka, ua, kb, fb));
  }
  return out;
}

/// Pointwise product a * f.
template <class T>
TrigField<T> multiply(const ScalarField& a, const TrigField<T>& f) {
  TrigField<T> out;
  for (const auto& [ka, am] : a.modes()) {
    for (const auto& [kb, fb] : f.modes()) {
      add_terms(out, ka, kb,
                product_terms<T>(am.cos_coeff, am.sin_coeff, fb.cos_coeff, fb.sin_coeff));
    }
  }
  return out;
}

/// div(u (x) f) = u . grad f + (div u) f.
template <class T>
TrigField<T> divergence_form(const VectorField& u, const TrigField<T>& f) {
  TrigField<T> out;
  for (const auto& [ka, ua] : u.modes()) {
    for (const auto& [kb, fb] : f.modes()) {
      add_terms(out, ka, kb, divergence_form_pair(ka, ua, kb, fb));
    }
  }
  return out;
}

/// Gradient evaluated pointwise straight from the modes (no product algebra involved).
inline Vec3 gradient_at(const ScalarField& f, const std::array<double, 3>& x) {
  Vec3 g;
  for (const auto& [k, m] : f.modes()) {
    const double phase = dot(k, x);
    const double d = m.sin_coeff * std::cos(phase) - m.cos_coeff * std::sin(phase);
    g += d * to_vec(k);
  }
  return g;
}

}  // namespace norminflate
