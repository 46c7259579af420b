#pragma once

// Finite Blaschke products
//   B(z) = eta * prod_k (|z_k|/z_k) (z_k - z) / (1 - conj(z_k) z),
// with |z_k|/z_k read as 1 when z_k = 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <vector>

#include "blaschke/errors.hpp"
#include "blaschke/hyperbolic.hpp"
#include "blaschke/multiset.hpp"
#include "blaschke/polynomial.hpp"

namespace blaschke {

/// Default cap on the degree of explicitly expanded products.
inline constexpr int kDefaultDegreeCap = 64;
/// Newton steps applied to every eigenvalue root.
inline constexpr int kPolishSteps = 3;
/// Largest accepted |B(root) - a| after polishing.
inline constexpr double kPreimageResidualTol = 1e-9;

class FiniteBlaschke {
 public:
  FiniteBlaschke(complex eta, PointMultiset zeros) : eta_(eta), zeros_(std::move(zeros)) {
    if (std::abs(std::abs(eta_) - 1.0) > 1e-14) throw DomainError("FiniteBlaschke: |eta| must be 1");
    if (zeros_.cardinality() < 1) throw DomainError("FiniteBlaschke: degree must be at least 1");
    for (const auto& e : zeros_.entries()) {
      if (!(std::abs(e.point) <= kMaxDiskModulus))
        throw DomainError("FiniteBlaschke: zeros must lie in the open unit disk");
      for (int k = 0; k < e.multiplicity; ++k) {
        flat_.push_back(e.point);
        units_.push_back(e.point == complex(0.0) ? complex(1.0) : std::abs(e.point) / e.point);
      }
    }
  }

  static FiniteBlaschke from_zeros(std::span<const complex> zeros, complex eta = 1.0) {
    return FiniteBlaschke(eta, PointMultiset::from_points(zeros));
  }

  /// z^k (zero 0 with multiplicity k, eta = (-1)^k).
  static FiniteBlaschke power(int k) {
    PointMultiset z;
    z.insert(0.0, k);
    return FiniteBlaschke(k % 2 == 0 ? 1.0 : -1.0, std::move(z));
  }

  static FiniteBlaschke identity() { return power(1); }

  /// T_w(z) = (w - z)/(1 - conj(w) z).
  static FiniteBlaschke involution(complex w) {
    PointMultiset z;
    z.insert(w);
    return FiniteBlaschke(w == complex(0.0) ? complex(1.0) : w / std::abs(w), std::move(z));
  }

  /// rotation * T_w.
  static FiniteBlaschke automorphism(complex rotation, complex w) {
    return involution(w).rotated(rotation);
  }

  complex eta() const { return eta_; }
  const PointMultiset& zeros() const { return zeros_; }
  int degree() const { return static_cast<int>(flat_.size()); }

  FiniteBlaschke rotated(complex unimodular) const {
    return FiniteBlaschke(eta_ * unimodular, zeros_);
  }

  complex operator()(complex z) const {
    complex v = eta_;
    for (std::size_t k = 0; k < flat_.size(); ++k)
      v *= units_[k] * (flat_[k] - z) / (1.0 - std::conj(flat_[k]) * z);
    return v;
  }

  /// Value and derivative by the running product rule.
  Jet jet(complex z) const {
    complex value = 1.0;
    complex deriv = 0.0;
    for (std::size_t k = 0; k < flat_.size(); ++k) {
      const complex a = flat_[k];
      const complex den = 1.0 - std::conj(a) * z;
      const complex phi = units_[k] * (a - z) / den;
      const complex dphi = units_[k] * (std::norm(a) - 1.0) / (den * den);
      deriv = deriv * phi + value * dphi;
      value *= phi;
    }
    return {eta_ * value, eta_ * deriv};
  }

  /// eta * prod c_k (z_k - z).
  Polynomial numerator() const {
    Polynomial p = Polynomial::constant(eta_);
    for (std::size_t k = 0; k < flat_.size(); ++k)
      p = p * Polynomial({units_[k] * flat_[k], -units_[k]});
    return p;
  }

  /// prod (1 - conj(z_k) z).
  Polynomial denominator() const {
    Polynomial p = Polynomial::constant(1.0);
    for (complex a : flat_) p = p * Polynomial({1.0, -std::conj(a)});
    return p;
  }

 private:
  complex eta_;
  PointMultiset zeros_;
  std::vector<complex> flat_;
  std::vector<complex> units_;
};

namespace detail {

// Newton on g(z) = target with a residual-decrease guard; stays inside the disk.
template <class JetFn>
complex polish_root(const JetFn& jet, complex z, complex target, int steps) {
  complex best = z;
  double best_res = std::abs(jet(z).value - target);
  for (int s = 0; s < steps && best_res > 0.0; ++s) {
    const Jet j = jet(best);
    if (j.derivative == complex(0.0)) break;
    const complex next = best - (j.value - target) / j.derivative;
    if (!(std::abs(next) < 1.0)) break;
    const double res = std::abs(jet(next).value - target);
    if (!(res < best_res)) break;
    best = next;
    best_res = res;
  }
  return best;
}

}  // namespace detail

/// The degree-many solutions of B(z) = a, with multiplicity.
inline PointMultiset preimages(const FiniteBlaschke& b, DiskPoint a) {
  if (a.value() == complex(0.0)) {
    PointMultiset z;
    for (const auto& e : b.zeros().entries()) z.insert(e.point, e.multiplicity);
    return z;
  }
  const Polynomial p = b.numerator() - a.value() * b.denominator();
  PointMultiset out;
  for (complex r : companion_roots(p)) {
    const complex z = detail::polish_root([&](complex x) { return b.jet(x); }, r, a.value(), kPolishSteps);
    const double res = std::abs(b(z) - a.value());
    if (!(std::abs(z) < 1.0) || !(res < kPreimageResidualTol)) {
      std::ostringstream os;
      os << "preimages: root " << z << " failed to polish (residual " << res << ")";
      throw RootPolishError(os.str(), z, res);
    }
    out.insert(z);
  }
  return out;
}

/// Z_B(c): the fiber of B through c.
inline PointMultiset zero_multiset(const FiniteBlaschke& b, DiskPoint c) {
  return preimages(b, DiskPoint(b(c.value())));
}

/// Zeros of B' in the disk with multiplicity (total degree - 1).
///
/// A zero of multiplicity m contributes a critical point of multiplicity
/// m - 1 at the same location. The rest are the zeros inside the disk of the
/// logarithmic derivative
///   L(z) = sum_u m_u (|u|^2 - 1) / ((u - z)(1 - conj(u) z)),
/// found from the numerator of L over the common denominator and polished by
/// Newton on L itself.
inline PointMultiset critical_set(const FiniteBlaschke& b) {
  const auto distinct = b.zeros().entries();
  PointMultiset out;
  for (const auto& e : distinct)
    if (e.multiplicity > 1) out.insert(e.point, e.multiplicity - 1);
  const std::size_t s = distinct.size();
  if (s < 2) return out;

  Polynomial numer;
  for (std::size_t i = 0; i < s; ++i) {
    const complex u = distinct[i].point;
    Polynomial term = Polynomial::constant(static_cast<double>(distinct[i].multiplicity) * (std::norm(u) - 1.0));
    for (std::size_t j = 0; j < s; ++j) {
      if (j == i) continue;
      const complex v = distinct[j].point;
      term = term * Polynomial({v, -1.0}) * Polynomial({1.0, -std::conj(v)});
    }
    numer = numer + term;
  }

  auto log_derivative = [&](complex z) -> Jet {
    complex l = 0.0;
    complex dl = 0.0;
    for (const auto& e : distinct) {
      const complex u = e.point;
      const double w = e.multiplicity * (std::norm(u) - 1.0);
      const complex g = (u - z) * (1.0 - std::conj(u) * z);
      const complex dg = -1.0 - std::norm(u) + 2.0 * std::conj(u) * z;
      l += w / g;
      dl -= w * dg / (g * g);
    }
    return {l, dl};
  };

  int inside = 0;
  for (complex r : companion_roots(numer)) {
    if (!(std::abs(r) < 1.0)) continue;
    out.insert(detail::polish_root(log_derivative, r, 0.0, kPolishSteps));
    ++inside;
  }
  if (inside != static_cast<int>(s) - 1) {
    std::ostringstream os;
    os << "critical_set: found " << inside << " simple critical points inside the disk, expected "
       << s - 1;
    throw NumericalError(os.str());
  }
  return out;
}

/// Explicit form of B1 o B2 (B2 applied first).
inline FiniteBlaschke compose_explicit(const FiniteBlaschke& outer, const FiniteBlaschke& inner,
                                       int degree_cap = kDefaultDegreeCap) {
  const int d = outer.degree() * inner.degree();
  if (d > degree_cap) {
    std::ostringstream os;
    os << "compose_explicit: degree " << d << " exceeds cap " << degree_cap;
    throw CapExceededError(os.str());
  }
  PointMultiset zeros;
  for (const auto& e : outer.zeros().entries())
    zeros.merge(preimages(inner, DiskPoint(e.point)), e.multiplicity);
  const FiniteBlaschke unrotated(1.0, zeros);

  static constexpr complex kProbes[] = {{0.1234, 0.0567}, {-0.3141, 0.2718}, {0.0, -0.4142},
                                        {0.5, 0.5},       {-0.6, -0.2}};
  complex probe = kProbes[0];
  for (complex p : kProbes)
    if (std::abs(unrotated(p)) > std::abs(unrotated(probe))) probe = p;
  complex eta = outer(inner(probe)) / unrotated(probe);
  eta /= std::abs(eta);
  const FiniteBlaschke result(eta, zeros);

  for (complex p : kProbes) {
    const double mismatch = std::abs(result(p) - outer(inner(p)));
    if (mismatch > 1e-9) {
      std::ostringstream os;
      os << "compose_explicit: probe mismatch " << mismatch << " at " << p;
      throw NumericalError(os.str());
    }
  }
  return result;
}

}  // namespace blaschke
