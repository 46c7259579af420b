#pragma once

// Seeded corpora. Only mt19937_64 raw output is used so that streams are
// identical across standard libraries (distribution classes are not portable).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "blaschke/iteration.hpp"

namespace blaschke {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in {lo, ..., hi}.
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }

  complex unimodular() { return std::polar(1.0, 2.0 * std::numbers::pi * uniform()); }

  /// Area-uniform point of the disk |z| < radius.
  complex in_disk(double radius) { return std::polar(radius * std::sqrt(uniform()), 2.0 * std::numbers::pi * uniform()); }

  /// Point with modulus uniform in [r_lo, r_hi].
  complex in_annulus(double r_lo, double r_hi) { return std::polar(uniform(r_lo, r_hi), 2.0 * std::numbers::pi * uniform()); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Degree uniform in [min_degree, max_degree], zeros area-uniform in
/// |z| < radius, eta uniform on the circle.
inline FiniteBlaschke random_blaschke(Rng& rng, int max_degree, double radius = 0.9, int min_degree = 1) {
  const int d = rng.integer(min_degree, max_degree);
  std::vector<complex> zeros(static_cast<std::size_t>(d));
  for (auto& z : zeros) z = rng.in_disk(radius);
  const complex eta = rng.unimodular();
  return FiniteBlaschke::from_zeros(zeros, eta);
}

/// Random critical multiset of the given size with points in |z| < radius.
inline PointMultiset random_critical_set(Rng& rng, int size, double radius = 0.8) {
  PointMultiset c;
  for (int k = 0; k < size; ++k) c.insert(rng.in_disk(radius));
  return c;
}

/// H(z) = z prod_k phi_k(z) with H(0) = 0 and |H'(0)| = prod |z_k| > 1 - eps:
/// 1 to max_extra zeros with moduli (1 - eps)^{u_k / m}, u_k uniform in (0, 1).
inline FiniteBlaschke random_near_identity(Rng& rng, double eps, int max_extra = 3) {
  const int m = rng.integer(1, max_extra);
  std::vector<complex> zeros{0.0};
  for (int k = 0; k < m; ++k) {
    const double u = 0.05 + 0.9 * rng.uniform();
    zeros.push_back(std::polar(std::pow(1.0 - eps, u / m), 2.0 * std::numbers::pi * rng.uniform()));
  }
  return FiniteBlaschke::from_zeros(zeros, rng.unimodular());
}

/// Finite random sequence of maps of degree <= max_degree.
inline MapSequence random_sequence(Rng& rng, std::size_t length, int max_degree, double radius = 0.9) {
  std::vector<FiniteBlaschke> maps;
  maps.reserve(length);
  for (std::size_t n = 0; n < length; ++n) maps.push_back(random_blaschke(rng, max_degree, radius));
  return MapSequence::from_list(std::move(maps));
}

}  // namespace blaschke
