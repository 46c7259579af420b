#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "blaschke/errors.hpp"

namespace blaschke {

using complex = std::complex<double>;

/// Dense complex polynomial, coefficients in ascending order.
class Polynomial {
 public:
  Polynomial() : coeffs_{complex(0.0)} {}
  explicit Polynomial(std::vector<complex> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
  }

  static Polynomial constant(complex c) { return Polynomial({c}); }

  /// prod (z - r) over the roots, built by incremental convolution.
  static Polynomial from_roots(std::span<const complex> roots) {
    std::vector<complex> c{1.0};
    for (complex r : roots) {
      c.push_back(0.0);
      for (std::size_t k = c.size() - 1; k > 0; --k) c[k] = c[k - 1] - r * c[k];
      c[0] = -r * c[0];
    }
    return Polynomial(std::move(c));
  }

  std::size_t size() const { return coeffs_.size(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const complex> coeffs() const { return coeffs_; }
  complex operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : complex(0.0); }
  complex& at(std::size_t k) { return coeffs_.at(k); }

  complex operator()(complex z) const {
    complex acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return Polynomial();
    std::vector<complex> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Polynomial(std::move(d));
  }

  /// Drops the highest coefficients beyond `max_degree`.
  Polynomial truncated(int max_degree) const {
    std::vector<complex> c(coeffs_.begin(),
                           coeffs_.begin() + std::min<std::ptrdiff_t>(max_degree + 1, std::ssize(coeffs_)));
    return Polynomial(std::move(c));
  }

  /// Multiplication by z^k.
  Polynomial shifted(int k) const {
    std::vector<complex> c(static_cast<std::size_t>(k), complex(0.0));
    c.insert(c.end(), coeffs_.begin(), coeffs_.end());
    return Polynomial(std::move(c));
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (complex c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<complex> c(a.size() + b.size() - 1, complex(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(complex s, Polynomial p) {
    for (auto& c : p.coeffs_) c *= s;
    return p;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<complex> c(std::max(a.size(), b.size()));
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] + b[k];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<complex> c(std::max(a.size(), b.size()));
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] - b[k];
    return Polynomial(std::move(c));
  }

  /// z^n conj(p(1/conj z)) for n = degree(): reverses and conjugates coefficients.
  Polynomial reciprocal() const {
    std::vector<complex> c(coeffs_.rbegin(), coeffs_.rend());
    for (auto& x : c) x = std::conj(x);
    return Polynomial(std::move(c));
  }

  /// Remainder of division by a monic polynomial.
  Polynomial remainder_monic(const Polynomial& divisor) const {
    const int dd = divisor.degree();
    if (dd == 0) return Polynomial();
    std::vector<complex> r = coeffs_;
    for (int k = static_cast<int>(r.size()) - 1; k >= dd; --k) {
      const complex q = r[static_cast<std::size_t>(k)];
      if (q == complex(0.0)) continue;
      for (int j = 0; j <= dd; ++j) r[static_cast<std::size_t>(k - dd + j)] -= q * divisor[static_cast<std::size_t>(j)];
    }
    r.resize(static_cast<std::size_t>(dd), complex(0.0));
    return Polynomial(std::move(r));
  }

  /// Coefficients of p(z + c), i.e. the Taylor coefficients of p at c.
  Polynomial taylor_shift(complex c) const {
    std::vector<complex> a = coeffs_;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t k = n - 1; k > i; --k) a[k - 1] += c * a[k];
    return Polynomial(std::move(a));
  }

 private:
  std::vector<complex> coeffs_;
};

namespace detail {

// Parlett-Reinsch style diagonal balancing by powers of two.
inline void balance(Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
      const double col = m.col(i).cwiseAbs().sum() - std::abs(m(i, i));
      if (row == 0.0 || col == 0.0) continue;
      int e = 0;
      std::frexp(row / col, &e);
      e /= 2;
      if (e == 0) continue;
      const double sc = std::ldexp(col, e);
      const double sr = std::ldexp(row, -e);
      if (sc + sr < 0.95 * (col + row)) {
        m.col(i) *= std::ldexp(1.0, e);
        m.row(i) *= std::ldexp(1.0, -e);
        changed = true;
      }
    }
  }
}

}  // namespace detail

/// All roots of p (with repetition), via eigenvalues of the balanced companion
/// matrix. Exact zero low-order coefficients yield exact roots at 0; leading
/// coefficients below 64 eps relative to the largest are treated as zero.
inline std::vector<complex> companion_roots(const Polynomial& p) {
  auto c = std::vector<complex>(p.coeffs().begin(), p.coeffs().end());
  const double scale = p.max_abs_coeff();
  if (scale == 0.0) throw DomainError("companion_roots: zero polynomial");
  while (c.size() > 1 && std::abs(c.back()) <= 64.0 * 2.220446049250313e-16 * scale) c.pop_back();

  std::vector<complex> roots;
  std::size_t lead_zeros = 0;
  while (lead_zeros + 1 < c.size() && c[lead_zeros] == complex(0.0)) ++lead_zeros;
  roots.assign(lead_zeros, complex(0.0));
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lead_zeros));

  const std::size_t n = c.size() - 1;
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
    return roots;
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -c[i] / c[n];
  detail::balance(m);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("companion_roots: eigenvalue iteration failed");
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) roots.push_back(solver.eigenvalues()(i));
  return roots;
}

}  // namespace blaschke
