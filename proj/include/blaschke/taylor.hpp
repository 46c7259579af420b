#pragma once

// Taylor coefficients at the origin from a discretized Cauchy integral.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "blaschke/hyperbolic.hpp"

namespace blaschke {

inline constexpr int kMaxTaylorOrder = 64;
/// An error bound above this marks a coefficient estimate as unreliable.
inline constexpr double kTaylorWarnThreshold = 1e-10;

struct TaylorEstimate {
  complex value;
  double error_bound = 0.0;
  bool warning = false;
};

struct CauchyOptions {
  double radius = 0.5;
  int samples = 0;  // 0 selects max(256, 8k)
};

namespace detail {

inline int cauchy_sample_count(int k, int requested) {
  return requested > 0 ? requested : std::max(256, 8 * k);
}

// Aliasing from coefficients k + mM (each bounded by sup|f| <= 1) plus the
// rounding error amplified by 1/radius^k.
inline double cauchy_error_bound(int k, double radius, int samples) {
  const double alias_tail = std::pow(radius, samples) / (1.0 - std::pow(radius, samples));
  const double rounding = 4.0 * 2.220446049250313e-16 / std::pow(radius, k);
  return alias_tail + rounding;
}

}  // namespace detail

/// Coefficients f^(0..k_max) from one set of M samples on |z| = radius.
template <EvaluableMap M>
std::vector<TaylorEstimate> taylor_coefficients(const M& f, int k_max, CauchyOptions opts = {}) {
  if (k_max < 0 || k_max > kMaxTaylorOrder)
    throw DomainError("taylor_coefficients: order outside [0, 64]");
  if (!(opts.radius > 0.0 && opts.radius < 1.0))
    throw DomainError("taylor_coefficients: radius must lie in (0, 1)");
  const int m = detail::cauchy_sample_count(k_max, opts.samples);
  std::vector<complex> samples(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / m;
    samples[static_cast<std::size_t>(j)] = f.jet(std::polar(opts.radius, theta)).value;
  }
  std::vector<TaylorEstimate> out;
  out.reserve(static_cast<std::size_t>(k_max + 1));
  for (int k = 0; k <= k_max; ++k) {
    complex acc = 0.0;
    for (int j = 0; j < m; ++j) {
      // Reduce the angle index mod m so large k stays accurate.
      const long long idx = (static_cast<long long>(j) * k) % m;
      acc += samples[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * idx / m);
    }
    const double bound = detail::cauchy_error_bound(k, opts.radius, m);
    out.push_back({acc / (m * std::pow(opts.radius, k)), bound, bound > kTaylorWarnThreshold});
  }
  return out;
}

/// The k-th Taylor coefficient of f at 0.
template <EvaluableMap M>
TaylorEstimate taylor_coeff(const M& f, int k, CauchyOptions opts = {}) {
  if (k < 0 || k > kMaxTaylorOrder) throw DomainError("taylor_coeff: order outside [0, 64]");
  if (!(opts.radius > 0.0 && opts.radius < 1.0))
    throw DomainError("taylor_coeff: radius must lie in (0, 1)");
  const int m = detail::cauchy_sample_count(k, opts.samples);
  complex acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const long long idx = (static_cast<long long>(j) * k) % m;
    const double theta = 2.0 * std::numbers::pi * j / m;
    acc += f.jet(std::polar(opts.radius, theta)).value * std::polar(1.0, -2.0 * std::numbers::pi * idx / m);
  }
  const double bound = detail::cauchy_error_bound(k, opts.radius, m);
  return {acc / (m * std::pow(opts.radius, k)), bound, bound > kTaylorWarnThreshold};
}

/// Sampling used for zero-order detection: large radius keeps 1/radius^k
/// rounding amplification small up to k = 64.
inline constexpr CauchyOptions kOrderDetectionCauchy{0.95, 1024};

struct ZeroOrder {
  int order = 0;
  complex coefficient;  // f^(order)
};

/// Order of the zero of f - f(0) at the origin: the first k >= 1 whose
/// coefficient exceeds `tol`, accepted only if it also exceeds 10 tol.
template <EvaluableMap M>
ZeroOrder zero_order_at_origin(const M& f, double tol = 1e-8, int k_max = kMaxTaylorOrder) {
  const auto coeffs = taylor_coefficients(f, k_max, kOrderDetectionCauchy);
  for (int k = 1; k <= k_max; ++k) {
    const double a = std::abs(coeffs[static_cast<std::size_t>(k)].value);
    if (a <= tol) continue;
    if (a < 10.0 * tol)
      throw InconclusiveError("zero order: coefficient " + std::to_string(k) +
                              " lies in the ambiguous band (tol, 10 tol]");
    return {k, coeffs[static_cast<std::size_t>(k)].value};
  }
  throw InconclusiveError("zero order: all coefficients up to the cap are below tolerance");
}

}  // namespace blaschke
