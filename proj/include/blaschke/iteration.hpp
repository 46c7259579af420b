#pragma once

// Forward iteration F_n = f_n o ... o f_1 of finite Blaschke products.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "blaschke/chain.hpp"
#include "blaschke/taylor.hpp"

namespace blaschke {

/// Index-deterministic sequence (f_n)_{n >= 1}. Generators must be pure.
class MapSequence {
 public:
  using Generator = std::function<FiniteBlaschke(std::size_t)>;

  explicit MapSequence(Generator g, std::optional<std::size_t> length = std::nullopt)
      : gen_(std::move(g)), length_(length) {}

  FiniteBlaschke operator[](std::size_t n) const {
    if (n < 1) throw DomainError("MapSequence: indices start at 1");
    if (length_ && n > *length_) {
      std::ostringstream os;
      os << "MapSequence: index " << n << " beyond declared length " << *length_;
      throw DomainError(os.str());
    }
    return gen_(n);
  }

  std::optional<std::size_t> length() const { return length_; }

  /// f_n(z) = z^2.
  static MapSequence squaring() {
    return MapSequence([](std::size_t) { return FiniteBlaschke::power(2); });
  }

  /// f_n(z) = z (r_n + z) / (1 + r_n z) with r_n = 1 - rate^n; f_n'(0) = r_n.
  static MapSequence tangential(double rate = 0.5) {
    if (!(rate > 0.0 && rate < 1.0)) throw DomainError("tangential: rate must lie in (0, 1)");
    return MapSequence([rate](std::size_t n) {
      const double r = 1.0 - std::pow(rate, static_cast<double>(n));
      PointMultiset z;
      z.insert(0.0);
      z.insert(-r);
      return FiniteBlaschke(-1.0, std::move(z));
    });
  }

  /// f_n(z) = e^{i angle} z.
  static MapSequence rotation(double angle) {
    return MapSequence([angle](std::size_t) {
      return FiniteBlaschke::identity().rotated(std::polar(1.0, angle));
    });
  }

  static MapSequence constant(FiniteBlaschke f) {
    return MapSequence([f = std::move(f)](std::size_t) { return f; });
  }

  /// f_n = maps[n - 1]; length equals the list size.
  static MapSequence from_list(std::vector<FiniteBlaschke> maps) {
    const std::size_t len = maps.size();
    return MapSequence([maps = std::move(maps)](std::size_t n) { return maps.at(n - 1); }, len);
  }

 private:
  Generator gen_;
  std::optional<std::size_t> length_;
};

inline complex forward_eval(const MapSequence& seq, std::size_t n, DiskPoint z) {
  if (n < 1) throw DomainError("forward_eval: n must be >= 1");
  complex w = z.value();
  for (std::size_t k = 1; k <= n; ++k) w = seq[k](w);
  return w;
}

/// F_n and F_n' at z; n = 0 gives the identity.
inline Jet forward_jet(const MapSequence& seq, std::size_t n, complex z) {
  complex deriv = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const Jet j = seq[k].jet(z);
    deriv *= j.derivative;
    z = j.value;
  }
  return {z, deriv};
}

/// h_{N,n} = f_{N+n} o ... o f_{N+1}.
inline CompositionChain tail_map(const MapSequence& seq, std::size_t skip, std::size_t n) {
  if (n < 1) throw DomainError("tail_map: n must be >= 1");
  std::vector<FiniteBlaschke> factors;
  factors.reserve(n);
  for (std::size_t k = skip + 1; k <= skip + n; ++k) factors.push_back(seq[k]);
  return CompositionChain(std::move(factors));
}

/// s_k = sum_{n <= k} (1 - D_h f_n(a)) for k = 1..count.
inline std::vector<double> criterion_partial_sums(const MapSequence& seq, DiskPoint a, std::size_t count) {
  if (count < 1) throw DomainError("criterion_partial_sums: N must be >= 1");
  std::vector<double> sums;
  sums.reserve(count);
  double s = 0.0;
  for (std::size_t n = 1; n <= count; ++n) {
    s += std::clamp(1.0 - hyp_distortion(seq[n], a), 0.0, 1.0);
    sums.push_back(s);
  }
  return sums;
}

/// f~_n = T_{F_n(a)} o f_n o T_{F_{n-1}(a)}, so that f~_n(0) = 0.
inline MapSequence normalize_sequence(const MapSequence& seq, DiskPoint a) {
  return MapSequence(
      [seq, a](std::size_t n) {
        const complex before = n == 1 ? a.value() : forward_eval(seq, n - 1, a);
        const FiniteBlaschke f = seq[n];
        const complex after = f(before);
        const FiniteBlaschke inner = compose_explicit(f, FiniteBlaschke::involution(before));
        return compose_explicit(FiniteBlaschke::involution(after), inner);
      },
      seq.length());
}

struct EquisummabilityBounds {
  double lower = 1.0;
  double upper = 1.0;
  double ratio = 1.0;
  double distance = 0.0;  // hyp_dist(a, F_{n-1}(a))
  bool holds = true;
};

/// Compares (1 - D_h f_n(F_{n-1}(a))) / (1 - D_h f_n(a)) with exp(-+4 hyp_dist(a, F_{n-1}(a))).
/// The exponent is 2 d for the curvature -1 distance d = 2 hyp_dist.
inline EquisummabilityBounds equisummability_bounds(const MapSequence& seq, DiskPoint a, std::size_t n) {
  if (n < 1) throw DomainError("equisummability_bounds: n must be >= 1");
  const DiskPoint moved = n == 1 ? a : DiskPoint(forward_eval(seq, n - 1, a));
  const FiniteBlaschke f = seq[n];
  const double den = 1.0 - hyp_distortion(f, a);
  if (den < 1e-14)
    throw DomainError("equisummability_bounds: 1 - D_h f_n(a) vanishes (degenerate input)");
  EquisummabilityBounds out;
  out.distance = hyp_dist(a, moved);
  out.lower = std::exp(-4.0 * out.distance);
  out.upper = std::exp(4.0 * out.distance);
  out.ratio = (1.0 - hyp_distortion(f, moved)) / den;
  out.holds = out.lower - 1e-10 <= out.ratio && out.ratio <= out.upper + 1e-10;
  return out;
}

/// Concentric circles of radii {0.3, 0.6, 0.9}, 20 angles each.
inline std::vector<DiskPoint> default_grid() {
  std::vector<DiskPoint> g;
  for (double r : {0.3, 0.6, 0.9})
    for (int k = 0; k < 20; ++k) g.emplace_back(std::polar(r, 2.0 * std::numbers::pi * k / 20.0));
  return g;
}

enum class ConvergenceStatus { converged_nonconstant, converged_constant, not_converged_at_cutoff };

inline const char* to_string(ConvergenceStatus s) {
  switch (s) {
    case ConvergenceStatus::converged_nonconstant: return "converged_nonconstant";
    case ConvergenceStatus::converged_constant: return "converged_constant";
    case ConvergenceStatus::not_converged_at_cutoff: return "not_converged_at_cutoff";
  }
  return "unknown";
}

struct ConvergenceOptions {
  std::size_t n_max = 200;
  double tol = 1e-9;
  double series_tol = 1e-3;
  DiskPoint a{0.0};
};

struct ConvergenceReport {
  ConvergenceStatus status = ConvergenceStatus::not_converged_at_cutoff;
  std::vector<double> criterion_partial_sums;
  double grid_cauchy_gap = 0.0;
  std::vector<complex> limit_samples;
  std::size_t n_used = 0;
  double series_tail = 0.0;      // s_{n_max} - s_{n_max / 2}
  double limit_variation = 0.0;  // max |F(z_i) - F(z_0)| over the grid
  std::string diagnostics;
};

/// Certificate of convergence at resolution (grid, tol).
///
/// The iterates are Cauchy at n when every lag m in {1, 2, 5, 10} with
/// n' + m <= n_max keeps max_grid |F_{n'+m} - F_{n'}| below tol for all
/// n <= n' < n_max. The limit is classified nonconstant when the criterion
/// series tail is below series_tol and the sampled limit varies by more
/// than 10 tol; both signals must agree.
inline ConvergenceReport detect_convergence(const MapSequence& seq, std::span<const DiskPoint> grid,
                                            ConvergenceOptions opts = {}) {
  if (grid.empty()) throw DomainError("detect_convergence: empty grid");
  for (const auto& z : grid)
    if (z.modulus() > 0.9 + 1e-12) throw DomainError("detect_convergence: grid must lie in |z| <= 0.9");
  if (opts.n_max < 2) throw DomainError("detect_convergence: n_max must be >= 2");
  const std::size_t n_max = opts.n_max;

  std::vector<std::vector<complex>> orbit(n_max + 1);
  orbit[0].reserve(grid.size());
  for (const auto& z : grid) orbit[0].push_back(z.value());
  for (std::size_t n = 1; n <= n_max; ++n) {
    const FiniteBlaschke f = seq[n];
    orbit[n].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) orbit[n][i] = f(orbit[n - 1][i]);
  }

  static constexpr std::array<std::size_t, 4> kLags{1, 2, 5, 10};
  std::vector<double> gap_at(n_max + 1, 0.0);
  for (std::size_t n = 1; n < n_max; ++n) {
    double g = 0.0;
    for (std::size_t m : kLags) {
      if (n + m > n_max) break;
      for (std::size_t i = 0; i < grid.size(); ++i) g = std::max(g, std::abs(orbit[n + m][i] - orbit[n][i]));
    }
    gap_at[n] = g;
  }
  std::vector<double> suffix(n_max + 1, 0.0);
  for (std::size_t n = n_max - 1; n >= 1; --n) suffix[n] = std::max(gap_at[n], suffix[n + 1]);

  ConvergenceReport report;
  std::optional<std::size_t> certified;
  for (std::size_t n = 1; n < n_max; ++n) {
    if (suffix[n] < opts.tol) {
      certified = n;
      break;
    }
  }

  report.criterion_partial_sums = criterion_partial_sums(seq, opts.a, n_max);
  report.series_tail = report.criterion_partial_sums.back() - report.criterion_partial_sums[n_max / 2 - 1];
  report.limit_samples = orbit[n_max];
  for (complex v : orbit[n_max]) report.limit_variation = std::max(report.limit_variation, std::abs(v - orbit[n_max][0]));

  std::ostringstream diag;
  if (!certified) {
    report.n_used = n_max;
    report.grid_cauchy_gap = suffix[n_max > 10 ? n_max - 10 : 1];
    report.status = ConvergenceStatus::not_converged_at_cutoff;
    diag << "iterates not Cauchy on the grid within n_max";
    report.diagnostics = diag.str();
    return report;
  }
  report.n_used = *certified;
  report.grid_cauchy_gap = suffix[*certified];

  const bool series_bounded = report.series_tail < opts.series_tol;
  const bool varies = report.limit_variation > 10.0 * opts.tol;
  if (series_bounded && varies) {
    report.status = ConvergenceStatus::converged_nonconstant;
  } else if (!series_bounded && !varies) {
    report.status = ConvergenceStatus::converged_constant;
  } else {
    report.status = ConvergenceStatus::not_converged_at_cutoff;
    diag << "classification signals disagree: series_tail=" << report.series_tail
         << " limit_variation=" << report.limit_variation;
  }
  report.diagnostics = diag.str();
  return report;
}

/// K_n: order of the zero of F_n - F_n(0) at the origin.
inline int order_of_zero(const MapSequence& seq, std::size_t n, double tol = 1e-8) {
  return zero_order_at_origin(tail_map(seq, 0, n), tol).order;
}

struct ZeroMonotonicity {
  bool included = false;
  double product_n = 1.0;
  double product_next = 1.0;
  bool monotone = true;  // product_next <= product_n + 1e-9
  PointMultiset fiber_n;
  PointMultiset fiber_next;
};

/// Checks Z_{F_n}(c) within Z_{F_{n+1}}(c) and the nonincreasing fiber products.
inline ZeroMonotonicity zero_monotonicity_check(const MapSequence& seq, DiskPoint c, std::size_t n,
                                                int degree_cap = kDefaultDegreeCap) {
  const CompositionChain next = tail_map(seq, 0, n + 1);
  detail::check_cap(next, degree_cap, "zero_monotonicity_check");
  const CompositionChain current = next.prefix(n);
  ZeroMonotonicity out;
  out.fiber_n = zero_multiset(current, c, degree_cap);
  out.fiber_next = zero_multiset(next, c, degree_cap);
  out.included = includes(out.fiber_next, out.fiber_n, kClusterTolerance);
  out.product_n = modulus_product(out.fiber_n, true);
  out.product_next = modulus_product(out.fiber_next, true);
  out.monotone = out.product_next <= out.product_n + 1e-9;
  return out;
}

struct CoveringCertificate {
  double min_modulus = 0.0;
  bool covered = false;
  double sample_radius = 0.0;  // 1 - sqrt(eps)
  double target_radius = 0.0;  // 1 - 3 sqrt(eps)
  int samples = 0;
  std::vector<int> winding_numbers;  // about 0, then the 8 probes
};

namespace detail {

// Winding number of the closed sampled curve about p; nullopt when two
// consecutive samples turn by more than pi/2 around p.
inline std::optional<int> winding_number(std::span<const complex> curve, complex p) {
  double total = 0.0;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const complex a = curve[j] - p;
    const complex b = curve[(j + 1) % curve.size()] - p;
    const double step = std::arg(b / a);
    if (std::abs(step) > std::numbers::pi / 2.0) return std::nullopt;
    total += step;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace detail

/// Samples H on |z| = 1 - sqrt(eps) and certifies that H covers the disk of
/// radius 1 - 3 sqrt(eps) by the argument principle.
template <EvaluableMap M>
CoveringCertificate covering_certificate(const M& h, double eps) {
  if (!(eps > 0.0 && eps < 1.0 / 9.0)) throw DomainError("covering_certificate: eps must lie in (0, 1/9)");
  const Jet at0 = h.jet(0.0);
  if (std::abs(at0.value) > 1e-12) throw DomainError("covering_certificate: requires H(0) = 0");
  if (!(std::abs(at0.derivative) > 1.0 - eps))
    throw DomainError("covering_certificate: requires |H'(0)| > 1 - eps");

  CoveringCertificate out;
  out.sample_radius = 1.0 - std::sqrt(eps);
  out.target_radius = 1.0 - 3.0 * std::sqrt(eps);

  std::vector<complex> probes{0.0};
  for (int k = 0; k < 8; ++k) probes.push_back(std::polar(0.9 * out.target_radius, k * std::numbers::pi / 4.0));

  for (int samples : {4096, 8192}) {
    std::vector<complex> curve(static_cast<std::size_t>(samples));
    double min_mod = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
      curve[static_cast<std::size_t>(j)] = h.jet(std::polar(out.sample_radius, 2.0 * std::numbers::pi * j / samples)).value;
      min_mod = std::min(min_mod, std::abs(curve[static_cast<std::size_t>(j)]));
    }
    std::vector<int> windings;
    bool stable = true;
    for (complex p : probes) {
      const auto w = detail::winding_number(curve, p);
      if (!w) {
        stable = false;
        break;
      }
      windings.push_back(*w);
    }
    if (!stable) continue;
    out.samples = samples;
    out.min_modulus = min_mod;
    out.winding_numbers = std::move(windings);
    out.covered = min_mod >= out.target_radius - 1e-9 &&
                  std::all_of(out.winding_numbers.begin(), out.winding_numbers.end(), [](int w) { return w >= 1; });
    return out;
  }
  throw NumericalError("covering_certificate: winding computation unstable after refinement");
}

}  // namespace blaschke
