#pragma once

// Hyperbolic geometry of the unit disk with the density 1/(1-|z|^2),
// i.e. the metric of constant curvature -4.

#include <cmath>
#include <complex>
#include <concepts>
#include <functional>
#include <sstream>
#include <utility>

#include "blaschke/errors.hpp"

namespace blaschke {

using complex = std::complex<double>;

/// Largest modulus accepted for a point of the open unit disk.
inline constexpr double kMaxDiskModulus = 1.0 - 1e-15;

/// A point of the open unit disk. Construction outside the disk throws.
class DiskPoint {
 public:
  constexpr DiskPoint() = default;

  DiskPoint(complex v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (!(std::abs(v) <= kMaxDiskModulus)) {
      std::ostringstream os;
      os << "point " << v << " is not in the open unit disk";
      throw DomainError(os.str());
    }
  }
  DiskPoint(double re, double im = 0.0) : DiskPoint(complex(re, im)) {}  // NOLINT

  complex value() const { return value_; }
  double modulus() const { return std::abs(value_); }

  friend bool operator==(const DiskPoint&, const DiskPoint&) = default;

 private:
  complex value_{0.0, 0.0};
};

/// Value and first derivative of a holomorphic map at a point.
struct Jet {
  complex value;
  complex derivative;
};

/// Anything that can report (f(z), f'(z)) for z in the disk.
template <class M>
concept EvaluableMap = requires(const M& f, complex z) {
  { f.jet(z) } -> std::convertible_to<Jet>;
};

/// Type-erased EvaluableMap.
class AnyMap {
 public:
  AnyMap() = default;

  template <EvaluableMap M>
    requires(!std::same_as<std::remove_cvref_t<M>, AnyMap>)
  AnyMap(M f)  // NOLINT(google-explicit-constructor)
      : fn_([f = std::move(f)](complex z) { return Jet(f.jet(z)); }) {}

  /// Wraps a callable returning a Jet.
  static AnyMap from_function(std::function<Jet(complex)> fn) {
    AnyMap m;
    m.fn_ = std::move(fn);
    return m;
  }

  Jet jet(complex z) const { return fn_(z); }
  complex operator()(complex z) const { return fn_(z).value; }

 private:
  std::function<Jet(complex)> fn_;
};

/// 1 - |w|^2 without cancellation near the circle.
inline double one_minus_abs2(complex w) {
  const double r = std::abs(w);
  return (1.0 - r) * (1.0 + r);
}

/// T_w(z) = (w - z) / (1 - conj(w) z), the involutive automorphism with T_w(0) = w.
inline complex moebius(complex w, complex z) { return (w - z) / (1.0 - std::conj(w) * z); }

inline complex moebius_derivative(complex w, complex z) {
  const complex den = 1.0 - std::conj(w) * z;
  return -one_minus_abs2(w) / (den * den);
}

inline DiskPoint moebius_T(DiskPoint w, DiskPoint z) {
  const complex t = moebius(w.value(), z.value());
  // |T_w(z)| < 1 analytically; rounding can push points at the modulus cap over it.
  const double r = std::abs(t);
  return r <= kMaxDiskModulus ? DiskPoint(t) : DiskPoint(t * (kMaxDiskModulus / r));
}

/// The involution T_w as an EvaluableMap.
struct Involution {
  complex w;
  Jet jet(complex z) const { return {moebius(w, z), moebius_derivative(w, z)}; }
  complex operator()(complex z) const { return moebius(w, z); }
};

/// Pseudo-hyperbolic distance |T_a(b)|.
inline double pseudo_hyperbolic(complex a, complex b) { return std::abs(moebius(a, b)); }

/// Hyperbolic distance atanh|T_a(b)| (curvature -4 normalization).
inline double hyp_dist(DiskPoint a, DiskPoint b) {
  return std::atanh(pseudo_hyperbolic(a.value(), b.value()));
}

namespace detail {

inline void check_in_disk(complex v) {
  if (std::abs(v) > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "map value " << v << " lies outside the closed unit disk";
    throw DomainError(os.str());
  }
}

}  // namespace detail

/// D_h f(z) = (1-|z|^2)|f'(z)| / (1-|f(z)|^2); at most 1 by Schwarz-Pick.
template <EvaluableMap M>
double hyp_distortion(const M& f, DiskPoint z) {
  const Jet j = f.jet(z.value());
  detail::check_in_disk(j.value);
  return one_minus_abs2(z.value()) * std::abs(j.derivative) / one_minus_abs2(j.value);
}

/// Density lambda_f(z) = |f'(z)| / (1-|f(z)|^2) of the pulled-back metric.
template <EvaluableMap M>
double density(const M& f, complex z) {
  const Jet j = f.jet(z);
  detail::check_in_disk(j.value);
  return std::abs(j.derivative) / one_minus_abs2(j.value);
}

/// Lower bound for |H(z)| on |z| = r when H(0) = 0 and |H'(0)| = d0:
/// r (1 - (1 - d0)(1 + r)/(1 - r)). May be negative.
inline double schwarz_lower_bound(double d0, double r) {
  if (!(d0 >= 0.0 && d0 <= 1.0)) throw DomainError("schwarz_lower_bound: d0 must lie in [0, 1]");
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("schwarz_lower_bound: r must lie in [0, 1)");
  if (!(r < d0)) throw DomainError("schwarz_lower_bound: requires r < |H'(0)|");
  return r * (1.0 - (1.0 - d0) * (1.0 + r) / (1.0 - r));
}

}  // namespace blaschke
