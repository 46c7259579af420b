#pragma once

// Maximal Blaschke products: prescribed critical sets, pseudometric
// densities lambda_f = |f'|/(1-|f|^2) and their curvature -Lap(log lambda)/lambda^2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "blaschke/chain.hpp"
#include "blaschke/taylor.hpp"

namespace blaschke {

// ---------------------------------------------------------------------------
// Canonical representative under postcomposition with automorphisms.

/// rho (T_{B(0)} o B) with rho unimodular so that B(0) = 0 and the lowest
/// nonzero Taylor coefficient is positive real.
///
/// The zeros of T_{B(0)} o B are the fiber of B through 0; the k of them at
/// the origin are set exactly to 0, and eta = (-1)^k makes the z^k
/// coefficient equal to the product of the other zero moduli.
inline FiniteBlaschke canonicalize(const FiniteBlaschke& b) {
  const int k = zero_order_at_origin(b).order;
  auto fiber = zero_multiset(b, DiskPoint(0.0)).expanded();
  std::sort(fiber.begin(), fiber.end(), [](complex x, complex y) { return std::abs(x) < std::abs(y); });
  PointMultiset zeros;
  zeros.insert(0.0, k);
  for (std::size_t i = static_cast<std::size_t>(k); i < fiber.size(); ++i) zeros.insert(fiber[i]);
  return FiniteBlaschke(k % 2 == 0 ? 1.0 : -1.0, std::move(zeros));
}

/// sup over probes of the pseudo-hyperbolic distance |T_{g(z)}(f(z))|.
template <EvaluableMap F, EvaluableMap G>
double map_distance(const F& f, const G& g, std::span<const DiskPoint> probes) {
  double d = 0.0;
  for (const auto& z : probes) d = std::max(d, pseudo_hyperbolic(g.jet(z.value()).value, f.jet(z.value()).value));
  return d;
}

// ---------------------------------------------------------------------------
// Extended-precision densities.
//
// Differencing divides the roundoff in log(lambda) by h^2 lambda^2. Near the
// zero set lambda ~ K |z - c| and f' is evaluated with cancellation, so the
// double-precision error in kappa grows like eps / (K^2 h^2 |z - c|^3): about
// 1e-2 at |z - c| = 3h for h = 1e-3. Fields and probes therefore evaluate
// densities and lattice points in long double when the map allows it.

using complex_ext = std::complex<long double>;

struct JetExt {
  complex_ext value;
  complex_ext derivative;
};

inline complex_ext to_ext(complex z) { return {z.real(), z.imag()}; }

inline JetExt jet_ext(const FiniteBlaschke& b, complex_ext z) {
  // Hand-written products and reciprocals: the library's long double
  // complex division rescales on every call and dominates lattice sampling.
  auto mul = [](complex_ext x, complex_ext y) {
    return complex_ext(x.real() * y.real() - x.imag() * y.imag(), x.real() * y.imag() + x.imag() * y.real());
  };
  auto inv = [](complex_ext x) {
    const long double n = x.real() * x.real() + x.imag() * x.imag();
    return complex_ext(x.real() / n, -x.imag() / n);
  };
  complex_ext value = 1.0L;
  complex_ext deriv = 0.0L;
  for (const auto& e : b.zeros().entries()) {
    const complex_ext a = to_ext(e.point);
    const long double r = std::sqrt(a.real() * a.real() + a.imag() * a.imag());
    const complex_ext unit = e.point == complex(0.0) ? complex_ext(1.0L) : mul(complex_ext(r, 0.0L), inv(a));
    for (int m = 0; m < e.multiplicity; ++m) {
      const complex_ext den_inv = inv(1.0L - mul(std::conj(a), z));
      const complex_ext phi = mul(unit, mul(a - z, den_inv));
      const complex_ext dphi = mul(unit * (r * r - 1.0L), mul(den_inv, den_inv));
      deriv = mul(deriv, phi) + mul(value, dphi);
      value = mul(value, phi);
    }
  }
  const complex_ext eta = to_ext(b.eta());
  return {mul(eta, value), mul(eta, deriv)};
}

inline JetExt jet_ext(const CompositionChain& c, complex_ext z) {
  complex_ext deriv = 1.0L;
  for (const auto& f : c.factors()) {
    const JetExt j = jet_ext(f, z);
    deriv *= j.derivative;
    z = j.value;
  }
  return {z, deriv};
}

/// lambda_f in long double.
template <class M>
long double density_ext(const M& f, complex_ext z) {
  const JetExt j = jet_ext(f, z);
  const long double v2 = j.value.real() * j.value.real() + j.value.imag() * j.value.imag();
  if (v2 > 1.0L + 2e-12L) throw DomainError("density_ext: map value outside the closed unit disk");
  const long double d2 = j.derivative.real() * j.derivative.real() + j.derivative.imag() * j.derivative.imag();
  return std::sqrt(d2) / (1.0L - v2);
}

// ---------------------------------------------------------------------------
// Pseudometric fields on lattices.

/// Rectangular lattice origin + h (i + i j), clipped to |z| <= r_max.
struct GridSpec {
  complex origin;
  double h = 1e-2;
  int nx = 0;
  int ny = 0;
  double r_max = 0.8;

  static GridSpec disk(double h, double r_max = 0.8) {
    const int half = static_cast<int>(std::floor(r_max / h));
    return {complex(-half * h, -half * h), h, 2 * half + 1, 2 * half + 1, r_max};
  }

  /// (2 half + 1)^2 points centered on `center`.
  static GridSpec patch(complex center, double h, int half = 1, double r_max = 0.99) {
    return {center - complex(half * h, half * h), h, 2 * half + 1, 2 * half + 1, r_max};
  }

  complex point(int i, int j) const { return origin + complex(i * h, j * h); }
  /// The same point with exactly uniform spacing in long double.
  complex_ext point_ext(int i, int j) const {
    return to_ext(origin) + complex_ext(i * static_cast<long double>(h), j * static_cast<long double>(h));
  }
  bool admits(int i, int j) const { return std::abs(point(i, j)) <= r_max; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

/// Term order * log|z - point| of log(lambda); negative orders are poles.
struct LogSingularity {
  complex point;
  int order = 1;
};

/// Density samples; NaN marks lattice points outside |z| <= r_max.
struct PseudometricField {
  GridSpec grid;
  std::vector<double> values;
  PointMultiset zero_set;
  // Harmonic part of log(lambda) removed before differencing; defaults to
  // the zero set.
  std::vector<LogSingularity> singular;
  // log(lambda) in long double, filled by the extended samplers.
  std::vector<long double> log_values;

  double at(int i, int j) const { return values[grid.index(i, j)]; }
};

namespace detail {

inline std::vector<LogSingularity> singularities_of(const PointMultiset& s, int sign = 1) {
  std::vector<LogSingularity> out;
  for (const auto& e : s.entries()) out.push_back({e.point, sign * e.multiplicity});
  return out;
}

template <class C>
auto singular_part(const std::vector<LogSingularity>& s, C z) {
  using T = typename C::value_type;
  T num = 1;
  T den = 1;
  for (const auto& e : s) {
    const C d = z - C(e.point.real(), e.point.imag());
    const T d2 = d.real() * d.real() + d.imag() * d.imag();
    for (int k = 0; k < std::abs(e.order); ++k) (e.order > 0 ? num : den) *= d2;
  }
  return (std::log(num) - std::log(den)) / 2;
}

inline double distance_to(const PointMultiset& s, complex z) {
  double d2 = std::numeric_limits<double>::infinity();
  for (const auto& e : s.entries()) d2 = std::min(d2, std::norm(e.point - z));
  return std::sqrt(d2);
}

inline constexpr double kDensityFloor = 1e-300;

template <class T>
bool usable_density(T v) {
  return std::isfinite(v) && v > kDensityFloor;
}

inline void check_grid(const GridSpec& grid, const char* who) {
  if (!(grid.h > 0.0)) throw DomainError(std::string(who) + ": spacing must be positive");
  if (!(grid.r_max < 1.0)) throw DomainError(std::string(who) + ": r_max must be < 1");
}

}  // namespace detail

template <class Density>
PseudometricField sample_field(const Density& density_fn, GridSpec grid, PointMultiset zero_set = {}) {
  detail::check_grid(grid, "sample_field");
  PseudometricField f{grid, std::vector<double>(grid.size(), std::numeric_limits<double>::quiet_NaN()),
                      std::move(zero_set), {}, {}};
  f.singular = detail::singularities_of(f.zero_set);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (grid.admits(i, j)) f.values[grid.index(i, j)] = density_fn(grid.point(i, j));
  return f;
}

/// As sample_field with a long double density taking long double points.
template <class DensityExt>
PseudometricField sample_field_ext(const DensityExt& density_fn, GridSpec grid, PointMultiset zero_set = {}) {
  detail::check_grid(grid, "sample_field");
  const long double nan = std::numeric_limits<long double>::quiet_NaN();
  PseudometricField f{grid, std::vector<double>(grid.size(), std::numeric_limits<double>::quiet_NaN()),
                      std::move(zero_set), {}, std::vector<long double>(grid.size(), nan)};
  f.singular = detail::singularities_of(f.zero_set);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (!grid.admits(i, j)) continue;
      const long double v = density_fn(grid.point_ext(i, j));
      f.values[grid.index(i, j)] = static_cast<double>(v);
      f.log_values[grid.index(i, j)] = std::log(v);
    }
  return f;
}

/// lambda_f on the lattice; the zero set is the critical set of f.
template <EvaluableMap M>
PseudometricField lambda_field(const M& f, GridSpec grid) {
  PointMultiset zeros;
  if constexpr (requires { critical_set(f); }) zeros = critical_set(f);
  if constexpr (requires(complex_ext z) { jet_ext(f, z); })
    return sample_field_ext([&](complex_ext z) { return density_ext(f, z); }, grid, std::move(zeros));
  else
    return sample_field([&](complex z) { return density(f, z); }, grid, std::move(zeros));
}

struct CurvatureGrid {
  GridSpec grid;
  std::vector<double> kappa;     // NaN where excluded
  std::vector<char> excluded;

  double at(int i, int j) const { return kappa[grid.index(i, j)]; }
};

/// five_point: the plain O(h^2) Laplacian. extrapolated: Richardson
/// combination (4 L_h - L_2h)/3 of five-point Laplacians at h and 2h, O(h^4).
/// Both act on log(lambda) minus its known log-singular part.
enum class Stencil { five_point, extrapolated };

/// -Lap(log lambda)/lambda^2 at lattice points whose stencil lies inside
/// the sampled region and which are at least 3h away from the zero set.
inline CurvatureGrid curvature(const PseudometricField& field, Stencil stencil = Stencil::extrapolated) {
  const GridSpec& g = field.grid;
  CurvatureGrid out{g, std::vector<double>(g.size(), std::numeric_limits<double>::quiet_NaN()),
                    std::vector<char>(g.size(), 1)};
  const bool ext = !field.log_values.empty();
  std::vector<long double> reg(g.size(), std::numeric_limits<long double>::quiet_NaN());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!detail::usable_density(field.values[k])) continue;
      reg[k] = ext ? field.log_values[k] - detail::singular_part(field.singular, g.point_ext(i, j))
                   : std::log(field.values[k]) - detail::singular_part(field.singular, g.point(i, j));
    }
  auto lap = [&](int i, int j, int s) {
    const long double hs = s * static_cast<long double>(g.h);
    return (reg[g.index(i + s, j)] + reg[g.index(i - s, j)] + reg[g.index(i, j + s)] + reg[g.index(i, j - s)] -
            4.0L * reg[g.index(i, j)]) /
           (hs * hs);
  };
  const int reach = stencil == Stencil::extrapolated ? 2 : 1;
  for (int j = reach; j + reach < g.ny; ++j) {
    for (int i = reach; i + reach < g.nx; ++i) {
      if (detail::distance_to(field.zero_set, g.point(i, j)) < 3.0 * g.h) continue;
      long double l = lap(i, j, 1);
      if (stencil == Stencil::extrapolated) l = (4.0L * l - lap(i, j, 2)) / 3.0L;
      if (!std::isfinite(l)) continue;
      const std::size_t k = g.index(i, j);
      const long double v = field.values[k];
      out.kappa[k] = static_cast<double>(-l / (v * v));
      out.excluded[k] = 0;
    }
  }
  return out;
}

struct CurvatureProbe {
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double h = 0.0;
  bool excluded = true;
};

/// Curvature at a single point with step adapted to the distance d from the
/// zero set: h = clamp(0.02 d, 1e-4, 1e-2); excluded when d < 3h or the
/// stencil leaves the disk. A density callable with complex_ext is
/// evaluated in long double.
template <class Density>
CurvatureProbe curvature_probe(const Density& density_fn, complex z, const PointMultiset& zero_set,
                               double h = 0.0, Stencil stencil = Stencil::extrapolated) {
  using C = std::conditional_t<std::is_invocable_v<const Density&, complex_ext>, complex_ext, complex>;
  using T = typename C::value_type;
  CurvatureProbe p;
  const double dist = detail::distance_to(zero_set, z);
  p.h = h > 0.0 ? h : std::clamp(0.02 * dist, 1e-4, 1e-2);
  const int reach = stencil == Stencil::extrapolated ? 2 : 1;
  if (dist < 3.0 * p.h || std::abs(z) + reach * p.h >= 1.0) return p;
  const auto singular = detail::singularities_of(zero_set);
  const C zc(z.real(), z.imag());
  bool ok = true;
  auto reg = [&](C w) {
    const T v = density_fn(w);
    if (!detail::usable_density(v)) ok = false;
    return std::log(v) - detail::singular_part(singular, w);
  };
  const T center = reg(zc);
  auto lap = [&](T hs) {
    return (reg(zc + hs) + reg(zc - hs) + reg(zc + C(0, hs)) + reg(zc - C(0, hs)) - 4 * center) / (hs * hs);
  };
  T l = lap(static_cast<T>(p.h));
  if (stencil == Stencil::extrapolated) l = (4 * l - lap(2 * static_cast<T>(p.h))) / 3;
  const T c = density_fn(zc);
  if (!ok || !std::isfinite(l)) return p;
  p.kappa = static_cast<double>(-l / (c * c));
  p.excluded = false;
  return p;
}

// ---------------------------------------------------------------------------
// Prescribed critical sets.

struct SolverOptions {
  int degree_cap = kDefaultDegreeCap;
  double newton_tol = 1e-11;
  double fd_step = 1e-7;
  double initial_step = 0.25;
  double min_step = 1e-6;
  int max_newton_iters = 30;
  double residual_tol = 1e-9;
};

struct SolverResult {
  FiniteBlaschke product = FiniteBlaschke::identity();
  double residual = 0.0;           // normalized algebraic residual at the targets
  double critical_mismatch = 0.0;  // assignment cost between critical_set(product) and C
  int homotopy_steps = 0;
  int newton_iters = 0;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, std::vector<complex> last_iterate, double last_t)
      : NumericalError(what), last_iterate_(std::move(last_iterate)), last_t_(last_t) {}
  const std::vector<complex>& last_iterate() const { return last_iterate_; }
  double last_t() const { return last_t_; }

 private:
  std::vector<complex> last_iterate_;
  double last_t_;
};

namespace detail {

// B = z p / p* for monic p with lower coefficients x. Returns the numerator of
// B' (up to a unimodular factor): (z p)' p* - z p (p*)'.
inline Polynomial critical_numerator(std::span<const complex> x) {
  std::vector<complex> c(x.begin(), x.end());
  c.push_back(1.0);
  const Polynomial p(std::move(c));
  const Polynomial zp = p.shifted(1);
  const Polynomial ps = p.reciprocal();
  return zp.derivative() * ps - zp * ps.derivative();
}

inline Eigen::VectorXd solver_residual(std::span<const complex> x, const Polynomial& target) {
  const Polynomial r = critical_numerator(x).remainder_monic(target);
  const std::size_t n = x.size();
  Eigen::VectorXd v(2 * static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    v(static_cast<Eigen::Index>(k)) = r[k].real();
    v(static_cast<Eigen::Index>(n + k)) = r[k].imag();
  }
  return v;
}

inline bool roots_inside(std::span<const complex> x) {
  std::vector<complex> c(x.begin(), x.end());
  c.push_back(1.0);
  for (complex r : companion_roots(Polynomial(std::move(c))))
    if (!(std::abs(r) < 1.0 - 1e-12)) return false;
  return true;
}

struct NewtonOutcome {
  bool converged = false;
  int iters = 0;
  std::vector<complex> x;
};

inline NewtonOutcome newton_correct(std::vector<complex> x, const Polynomial& target, const SolverOptions& o) {
  const std::size_t n = x.size();
  const auto dim = static_cast<Eigen::Index>(2 * n);
  NewtonOutcome out;
  Eigen::VectorXd r = solver_residual(x, target);
  for (int it = 0; it < o.max_newton_iters; ++it) {
    if (r.lpNorm<Eigen::Infinity>() < o.newton_tol) {
      out.converged = true;
      break;
    }
    Eigen::MatrixXd jac(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
      const std::size_t k = static_cast<std::size_t>(col) % n;
      const complex step = col < static_cast<Eigen::Index>(n) ? complex(o.fd_step, 0.0) : complex(0.0, o.fd_step);
      auto xp = x;
      auto xm = x;
      xp[k] += step;
      xm[k] -= step;
      jac.col(col) = (solver_residual(xp, target) - solver_residual(xm, target)) / (2.0 * o.fd_step);
    }
    const Eigen::VectorXd dx = jac.fullPivLu().solve(-r);
    if (!dx.allFinite()) break;
    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 12; ++ls, alpha *= 0.5) {
      auto trial = x;
      for (std::size_t k = 0; k < n; ++k)
        trial[k] += alpha * complex(dx(static_cast<Eigen::Index>(k)), dx(static_cast<Eigen::Index>(n + k)));
      const Eigen::VectorXd rt = solver_residual(trial, target);
      if (rt.norm() < r.norm()) {
        x = std::move(trial);
        r = rt;
        improved = true;
        break;
      }
    }
    ++out.iters;
    if (!improved) break;
  }
  if (!out.converged) out.converged = r.lpNorm<Eigen::Infinity>() < o.newton_tol;
  out.x = std::move(x);
  return out;
}

// Max over target points c (multiplicity m) and i < m of |Q^(i)(c)/i!|,
// relative to the largest coefficient of Q.
inline double algebraic_residual(const Polynomial& q, const PointMultiset& targets) {
  const double scale = std::max(q.max_abs_coeff(), 1e-300);
  double worst = 0.0;
  for (const auto& e : targets.entries()) {
    const Polynomial shifted = q.taylor_shift(e.point);
    for (int i = 0; i < e.multiplicity; ++i) worst = std::max(worst, std::abs(shifted[static_cast<std::size_t>(i)]) / scale);
  }
  return worst;
}

inline double mismatch_threshold(const PointMultiset& targets) {
  int m = 1;
  for (const auto& e : targets.entries()) m = std::max(m, e.multiplicity);
  return std::max(1e-6, 10.0 * std::pow(1e-15, 1.0 / m));
}

}  // namespace detail

/// Finite Blaschke product of degree |C| + 1 in canonical form whose
/// critical set is C.
///
/// B = z p(z) / p*(z) with p monic of degree N = |C|; the N coefficients of
/// p are continued from p = z^N (B = z^{N+1}, critical set {0,...,0}) along
/// targets t C, t: 0 -> 1, requiring the critical numerator to be divisible
/// by prod (z - t c_j). Steps whose p leaves the Schur-stable region are
/// rejected.
inline SolverResult solve_maximal(const PointMultiset& targets, SolverOptions opts = {}) {
  const int n = targets.cardinality();
  if (n + 1 > opts.degree_cap) {
    std::ostringstream os;
    os << "solve_maximal: degree " << n + 1 << " exceeds cap " << opts.degree_cap;
    throw CapExceededError(os.str());
  }
  for (const auto& e : targets.entries())
    if (!(std::abs(e.point) < 1.0)) throw DomainError("solve_maximal: critical points must lie in the disk");

  SolverResult result;
  if (n == 0) return result;

  const auto points = targets.sorted().expanded();
  auto target_at = [&](double t) {
    std::vector<complex> scaled(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) scaled[k] = t * points[k];
    return Polynomial::from_roots(scaled);
  };

  std::vector<complex> x(static_cast<std::size_t>(n), complex(0.0));
  std::vector<complex> x_prev = x;
  double t = 0.0;
  double t_prev = 0.0;
  double dt = opts.initial_step;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    // Secant predictor from the last two accepted points.
    std::vector<complex> guess = x;
    if (t > t_prev) {
      const double s = (t_next - t) / (t - t_prev);
      for (std::size_t k = 0; k < x.size(); ++k) guess[k] = x[k] + s * (x[k] - x_prev[k]);
    }
    auto step = detail::newton_correct(std::move(guess), target_at(t_next), opts);
    result.newton_iters += step.iters;
    if (step.converged && detail::roots_inside(step.x)) {
      x_prev = std::move(x);
      x = std::move(step.x);
      t_prev = t;
      t = t_next;
      ++result.homotopy_steps;
      dt = std::min(2.0 * dt, 0.5);
    } else {
      dt *= 0.5;
      if (dt < opts.min_step) {
        std::ostringstream os;
        os << "solve_maximal: homotopy stalled at t=" << t;
        throw NonConvergenceError(os.str(), x, t);
      }
    }
  }

  // Final polish at t = 1 until the residual stops decreasing.
  {
    SolverOptions tight = opts;
    tight.newton_tol = 0.0;
    tight.max_newton_iters = 8;
    auto polished = detail::newton_correct(x, target_at(1.0), tight);
    result.newton_iters += polished.iters;
    if (detail::roots_inside(polished.x)) x = std::move(polished.x);
  }

  std::vector<complex> coeffs = x;
  coeffs.push_back(1.0);
  const Polynomial p(coeffs);
  const Polynomial dp = p.derivative();
  std::vector<complex> zeros{0.0};
  for (complex r : companion_roots(p)) {
    for (int s = 0; s < kPolishSteps; ++s) {
      const complex d = dp(r);
      if (d == complex(0.0)) break;
      const complex next = r - p(r) / d;
      if (!(std::abs(p(next)) < std::abs(p(r)))) break;
      r = next;
    }
    zeros.push_back(r);
  }
  result.product = canonicalize(FiniteBlaschke::from_zeros(zeros));
  result.residual = detail::algebraic_residual(detail::critical_numerator(x), targets);
  result.critical_mismatch = assignment_cost(critical_set(result.product), targets);
  if (result.critical_mismatch > detail::mismatch_threshold(targets)) {
    std::ostringstream os;
    os << "solve_maximal: critical-point assignment cost " << result.critical_mismatch << " above threshold";
    throw NumericalError(os.str());
  }
  if (!(result.residual < opts.residual_tol)) {
    std::ostringstream os;
    os << "solve_maximal: residual " << result.residual << " above tolerance";
    throw NonConvergenceError(os.str(), x, 1.0);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Maximality evidence.

using Competitor = std::variant<FiniteBlaschke, CompositionChain>;

struct MaximalityReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  std::vector<std::optional<double>> per_competitor;  // nullopt when rejected
  std::vector<std::size_t> rejected;
};

/// max over probes and admissible competitors f of lambda_f - lambda_B.
/// Competitors whose critical set does not contain C are rejected.
inline MaximalityReport verify_maximal(const FiniteBlaschke& b, const PointMultiset& targets,
                                       std::span<const Competitor> competitors, std::span<const DiskPoint> probes,
                                       double match_tol = kClusterTolerance) {
  MaximalityReport report;
  for (std::size_t i = 0; i < competitors.size(); ++i) {
    const auto crit = std::visit([](const auto& f) { return critical_set(f); }, competitors[i]);
    if (!includes(crit, targets, match_tol)) {
      report.per_competitor.emplace_back(std::nullopt);
      report.rejected.push_back(i);
      continue;
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& z : probes) {
      const double lf = std::visit([&](const auto& f) { return density(f, z.value()); }, competitors[i]);
      worst = std::max(worst, lf - density(b, z.value()));
    }
    report.per_competitor.emplace_back(worst);
    report.max_violation = std::max(report.max_violation, worst);
  }
  return report;
}

struct SigmaField {
  PseudometricField field;        // sigma = lambda_A lambda_B / lambda_{A2}, zero set C(A)
  double min_ratio_b_a2 = 0.0;    // min lambda_B / lambda_{A2}
  double min_ratio_a2_a = 0.0;    // min lambda_{A2} / lambda_A
  bool holds = false;             // both minima >= 1 - 1e-9
};

/// The auxiliary density sigma for A = A1 o A2 and B maximal for C(A2),
/// with both ratio inequalities checked at lattice points at least 3h from C(A).
inline SigmaField sigma_field(const FiniteBlaschke& a1, const FiniteBlaschke& a2, const FiniteBlaschke& b,
                              GridSpec grid, double match_tol = 1e-6) {
  const PointMultiset crit_a2 = critical_set(a2);
  const PointMultiset crit_b = critical_set(b);
  if (crit_a2.cardinality() != crit_b.cardinality() || !includes(crit_b, crit_a2, match_tol))
    throw DomainError("sigma_field: critical sets of B and A2 differ");
  const CompositionChain a({a2, a1});
  PointMultiset crit_a = critical_set(a);

  detail::check_grid(grid, "sigma_field");

  SigmaField out;
  out.min_ratio_b_a2 = std::numeric_limits<double>::infinity();
  out.min_ratio_a2_a = std::numeric_limits<double>::infinity();
  out.field = PseudometricField{grid, std::vector<double>(grid.size(), std::numeric_limits<double>::quiet_NaN()),
                                crit_a, {}, std::vector<long double>(grid.size(), std::numeric_limits<long double>::quiet_NaN())};
  // log sigma carries log|z - c| for C(A) and C(B) and -log|z - c| for C(A2).
  out.field.singular = detail::singularities_of(crit_a);
  for (const auto& e : detail::singularities_of(crit_b)) out.field.singular.push_back(e);
  for (const auto& e : detail::singularities_of(crit_a2, -1)) out.field.singular.push_back(e);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (!grid.admits(i, j)) continue;
      const complex_ext z = grid.point_ext(i, j);
      const long double la = density_ext(a, z);
      const long double la2 = density_ext(a2, z);
      const long double lb = density_ext(b, z);
      const long double sigma = la * lb / la2;
      out.field.values[grid.index(i, j)] = static_cast<double>(sigma);
      out.field.log_values[grid.index(i, j)] = std::log(sigma);
      if (detail::distance_to(crit_a, grid.point(i, j)) < 3.0 * grid.h) continue;
      out.min_ratio_b_a2 = std::min(out.min_ratio_b_a2, static_cast<double>(lb / la2));
      out.min_ratio_a2_a = std::min(out.min_ratio_a2_a, static_cast<double>(la2 / la));
    }
  }
  out.holds = out.min_ratio_b_a2 >= 1.0 - 1e-9 && out.min_ratio_a2_a >= 1.0 - 1e-9;
  return out;
}

struct DecompositionReport {
  FiniteBlaschke composite = FiniteBlaschke::identity();
  double gap_a1 = std::numeric_limits<double>::quiet_NaN();
  double gap_a2 = std::numeric_limits<double>::quiet_NaN();
  double gap_a = std::numeric_limits<double>::quiet_NaN();
  int degree = 0;
};

class DecompositionError : public NumericalError {
 public:
  DecompositionError(const std::string& what, DecompositionReport partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const DecompositionReport& partial() const { return partial_; }

 private:
  DecompositionReport partial_;
};

namespace detail {

template <EvaluableMap F, EvaluableMap G>
double density_gap(const F& f, const G& g, std::span<const DiskPoint> probes) {
  double gap = 0.0;
  for (const auto& z : probes) gap = std::max(gap, std::abs(density(f, z.value()) - density(g, z.value())));
  return gap;
}

}  // namespace detail

/// Solves for the maximal products of C(A1), C(A2) and C(A1 o A2) and
/// reports sup |lambda_solved - lambda_given| for each on the probes.
inline DecompositionReport decomposition_check(const FiniteBlaschke& a1, const FiniteBlaschke& a2,
                                               std::span<const DiskPoint> probes, SolverOptions opts = {}) {
  DecompositionReport report;
  report.degree = a1.degree() * a2.degree();
  report.composite = compose_explicit(a1, a2, opts.degree_cap);
  try {
    report.gap_a1 = detail::density_gap(solve_maximal(critical_set(a1), opts).product, a1, probes);
    report.gap_a2 = detail::density_gap(solve_maximal(critical_set(a2), opts).product, a2, probes);
    report.gap_a = detail::density_gap(solve_maximal(critical_set(report.composite), opts).product,
                                       report.composite, probes);
  } catch (const NumericalError& e) {
    throw DecompositionError(std::string("decomposition_check: ") + e.what(), report);
  }
  return report;
}

}  // namespace blaschke
