#pragma once

#include <sstream>
#include <vector>

#include "blaschke/blaschke.hpp"

namespace blaschke {

/// Lazy composition f_n o ... o f_1 of finite Blaschke products; factors are
/// stored in application order (first applied first).
class CompositionChain {
 public:
  explicit CompositionChain(std::vector<FiniteBlaschke> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw DomainError("CompositionChain: needs at least one factor");
  }

  const std::vector<FiniteBlaschke>& factors() const { return factors_; }
  std::size_t length() const { return factors_.size(); }

  /// Product of factor degrees, saturating at 2^40.
  long long degree() const {
    long long d = 1;
    for (const auto& f : factors_) {
      d *= f.degree();
      if (d > (1LL << 40)) return 1LL << 40;
    }
    return d;
  }

  complex operator()(complex z) const {
    for (const auto& f : factors_) z = f(z);
    return z;
  }

  Jet jet(complex z) const {
    complex deriv = 1.0;
    for (const auto& f : factors_) {
      const Jet j = f.jet(z);
      deriv *= j.derivative;
      z = j.value;
    }
    return {z, deriv};
  }

  /// Prefix chain of the first k factors.
  CompositionChain prefix(std::size_t k) const {
    return CompositionChain({factors_.begin(), factors_.begin() + static_cast<std::ptrdiff_t>(k)});
  }

  void append(FiniteBlaschke f) { factors_.push_back(std::move(f)); }

 private:
  std::vector<FiniteBlaschke> factors_;
};

namespace detail {

inline void check_cap(const CompositionChain& c, int cap, const char* what) {
  if (c.degree() > cap) {
    std::ostringstream os;
    os << what << ": chain degree " << c.degree() << " exceeds cap " << cap;
    throw CapExceededError(os.str());
  }
}

// Pulls a multiset back through the factors [0, upto) in reverse order.
inline PointMultiset pull_back(const CompositionChain& c, PointMultiset values, std::size_t upto) {
  for (std::size_t k = upto; k-- > 0;) {
    PointMultiset next;
    for (const auto& e : values.entries())
      next.merge(preimages(c.factors()[k], DiskPoint(e.point)), e.multiplicity);
    values = std::move(next);
  }
  return values;
}

}  // namespace detail

/// Solutions of F(z) = a through backward preimages factor by factor.
inline PointMultiset preimages(const CompositionChain& c, DiskPoint a,
                               int degree_cap = kDefaultDegreeCap) {
  detail::check_cap(c, degree_cap, "preimages");
  PointMultiset start;
  start.insert(a.value());
  return detail::pull_back(c, std::move(start), c.length());
}

inline PointMultiset zero_multiset(const CompositionChain& c, DiskPoint c0,
                                   int degree_cap = kDefaultDegreeCap) {
  return preimages(c, DiskPoint(c(c0.value())), degree_cap);
}

/// Critical set of the composite: C(g o F) = C(F) + F^{-1}(C(g)).
inline PointMultiset critical_set(const CompositionChain& c, int degree_cap = kDefaultDegreeCap) {
  detail::check_cap(c, degree_cap, "critical_set");
  PointMultiset acc = critical_set(c.factors().front());
  for (std::size_t k = 1; k < c.length(); ++k) {
    const PointMultiset outer = critical_set(c.factors()[k]);
    if (outer.empty()) continue;
    acc.merge(detail::pull_back(c, outer, k));
  }
  return acc;
}

/// Explicit FiniteBlaschke for the whole chain.
inline FiniteBlaschke explicit_form(const CompositionChain& c, int degree_cap = kDefaultDegreeCap) {
  detail::check_cap(c, degree_cap, "explicit_form");
  FiniteBlaschke acc = c.factors().front();
  for (std::size_t k = 1; k < c.length(); ++k) acc = compose_explicit(c.factors()[k], acc, degree_cap);
  return acc;
}

}  // namespace blaschke
