#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "blaschke/errors.hpp"

namespace blaschke {

using complex = std::complex<double>;

/// Points closer than this merge into a single multiset entry.
inline constexpr double kClusterTolerance = 1e-7;

struct WeightedPoint {
  complex point;
  int multiplicity = 1;
};

/// Complex points with positive integer multiplicities. Inserting a point
/// within the clustering tolerance of an existing entry adds to that entry
/// (its location becomes the multiplicity-weighted mean).
class PointMultiset {
 public:
  PointMultiset() = default;
  explicit PointMultiset(double tolerance) : tolerance_(tolerance) {}

  static PointMultiset from_points(std::span<const complex> points,
                                   double tolerance = kClusterTolerance) {
    PointMultiset s(tolerance);
    for (complex p : points) s.insert(p);
    return s;
  }

  void insert(complex p, int multiplicity = 1) {
    if (multiplicity < 1) throw DomainError("PointMultiset: multiplicity must be >= 1");
    for (auto& e : entries_) {
      if (std::abs(e.point - p) < tolerance_) {
        const double w = static_cast<double>(e.multiplicity);
        e.point = (w * e.point + static_cast<double>(multiplicity) * p) / (w + multiplicity);
        e.multiplicity += multiplicity;
        return;
      }
    }
    entries_.push_back({p, multiplicity});
  }

  /// Appends an entry without clustering (exact deserialization).
  void append_exact(complex p, int multiplicity) {
    if (multiplicity < 1) throw DomainError("PointMultiset: multiplicity must be >= 1");
    entries_.push_back({p, multiplicity});
  }

  void merge(const PointMultiset& other, int scale = 1) {
    for (const auto& e : other.entries_) insert(e.point, e.multiplicity * scale);
  }

  std::span<const WeightedPoint> entries() const { return entries_; }
  std::size_t distinct() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double tolerance() const { return tolerance_; }

  int cardinality() const {
    int n = 0;
    for (const auto& e : entries_) n += e.multiplicity;
    return n;
  }

  /// Every point repeated according to its multiplicity.
  std::vector<complex> expanded() const {
    std::vector<complex> out;
    out.reserve(static_cast<std::size_t>(cardinality()));
    for (const auto& e : entries_)
      for (int k = 0; k < e.multiplicity; ++k) out.push_back(e.point);
    return out;
  }

  /// Total multiplicity of entries within `tol` of p.
  int multiplicity_near(complex p, double tol) const {
    int n = 0;
    for (const auto& e : entries_)
      if (std::abs(e.point - p) < tol) n += e.multiplicity;
    return n;
  }

  /// Entries ordered lexicographically by (re, im).
  PointMultiset sorted() const {
    PointMultiset s = *this;
    std::sort(s.entries_.begin(), s.entries_.end(), [](const auto& a, const auto& b) {
      if (a.point.real() != b.point.real()) return a.point.real() < b.point.real();
      return a.point.imag() < b.point.imag();
    });
    return s;
  }

  /// Copy with every entry closer than `tol` to the origin removed.
  PointMultiset without_origin(double tol) const {
    PointMultiset s(tolerance_);
    for (const auto& e : entries_)
      if (std::abs(e.point) >= tol) s.entries_.push_back(e);
    return s;
  }

 private:
  double tolerance_ = kClusterTolerance;
  std::vector<WeightedPoint> entries_;
};

/// Sum of multiplicity * (1 - |point|).
inline double blaschke_sum(const PointMultiset& points) {
  double s = 0.0;
  for (const auto& e : points.entries()) s += e.multiplicity * (1.0 - std::abs(e.point));
  return s;
}

/// Product of |point| over all entries with multiplicity; entries within
/// `origin_tol` of 0 are skipped when `exclude_origin` is set. Empty product is 1.
inline double modulus_product(const PointMultiset& points, bool exclude_origin = false,
                              double origin_tol = kClusterTolerance) {
  double p = 1.0;
  for (const auto& e : points.entries()) {
    const double r = std::abs(e.point);
    if (exclude_origin && r < origin_tol) continue;
    p *= std::pow(r, e.multiplicity);
  }
  return p;
}

/// Multiset inclusion: every entry of `sub` is covered, with at least its
/// multiplicity, by entries of `super` lying within `tol`.
inline bool includes(const PointMultiset& super, const PointMultiset& sub,
                     double tol = kClusterTolerance) {
  std::vector<int> remaining;
  for (const auto& e : super.entries()) remaining.push_back(e.multiplicity);
  const auto sup = super.entries();
  for (const auto& need : sub.entries()) {
    int left = need.multiplicity;
    for (std::size_t i = 0; i < sup.size() && left > 0; ++i) {
      if (remaining[i] == 0 || std::abs(sup[i].point - need.point) >= tol) continue;
      const int take = std::min(left, remaining[i]);
      remaining[i] -= take;
      left -= take;
    }
    if (left > 0) return false;
  }
  return true;
}

namespace detail {

// Hungarian algorithm (potentials, O(n^3)) on a square cost matrix.
// Returns assignment[row] = column minimizing the total cost.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace detail

/// Largest matched distance of the min-sum assignment between the expanded
/// point lists of two multisets of equal cardinality.
inline double assignment_cost(const PointMultiset& a, const PointMultiset& b) {
  const auto pa = a.sorted().expanded();
  const auto pb = b.sorted().expanded();
  if (pa.size() != pb.size())
    throw DomainError("assignment_cost: multisets differ in cardinality");
  if (pa.empty()) return 0.0;
  std::vector<std::vector<double>> cost(pa.size(), std::vector<double>(pb.size()));
  for (std::size_t i = 0; i < pa.size(); ++i)
    for (std::size_t j = 0; j < pb.size(); ++j) cost[i][j] = std::abs(pa[i] - pb[j]);
  const auto match = detail::hungarian(cost);
  double worst = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) worst = std::max(worst, cost[i][match[i]]);
  return worst;
}

}  // namespace blaschke
