#pragma once

// McLaughlin's two conditions characterizing indestructible Blaschke products:
//   |T_{f(0)}(a)| = prod_{z in f^{-1}(a)} |z|,          a != f(0),
//   |f^(k)| / (1 - |f(0)|^2) = prod_{z in Z_f(0) \ {0}} |z|,
// where k is the order of the zero of f - f(0) at the origin.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "blaschke/iteration.hpp"

namespace blaschke {

enum class McLaughlinCondition { nonzero_value_a, zero_value };

inline const char* to_string(McLaughlinCondition c) {
  return c == McLaughlinCondition::nonzero_value_a ? "nonzero_value_a" : "zero_value";
}

struct McLaughlinReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  McLaughlinCondition condition = McLaughlinCondition::zero_value;
  std::optional<DiskPoint> a;
  int order = 0;  // k, zero condition only
  std::optional<std::string> truncation_note;
};

inline constexpr double kDistinctValueTol = 1e-10;

/// Condition for values a != f(0). Map is a FiniteBlaschke or CompositionChain.
template <class Map>
McLaughlinReport mclaughlin_nonzero(const Map& f, DiskPoint a) {
  const complex f0 = f(complex(0.0));
  if (std::abs(a.value() - f0) < kDistinctValueTol)
    throw DomainError("mclaughlin_nonzero: a equals f(0); use mclaughlin_zero");
  McLaughlinReport r;
  r.condition = McLaughlinCondition::nonzero_value_a;
  r.a = a;
  r.lhs = std::abs(moebius(f0, a.value()));
  r.rhs = modulus_product(preimages(f, a));
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

/// Condition at the value f(0).
template <class Map>
McLaughlinReport mclaughlin_zero(const Map& f, double taylor_tol = 1e-8) {
  const complex f0 = f(complex(0.0));
  const ZeroOrder zo = zero_order_at_origin(f, taylor_tol);
  McLaughlinReport r;
  r.condition = McLaughlinCondition::zero_value;
  r.order = zo.order;
  r.lhs = std::abs(zo.coefficient) / one_minus_abs2(f0);

  // The fiber holds the origin k times; multiple roots scatter, so drop the
  // k points nearest the origin rather than thresholding.
  auto fiber = zero_multiset(f, DiskPoint(0.0)).expanded();
  std::sort(fiber.begin(), fiber.end(), [](complex x, complex y) { return std::abs(x) < std::abs(y); });
  if (static_cast<int>(fiber.size()) < zo.order)
    throw NumericalError("mclaughlin_zero: fiber smaller than the zero order");
  double prod = 1.0;
  for (std::size_t i = static_cast<std::size_t>(zo.order); i < fiber.size(); ++i) prod *= std::abs(fiber[i]);
  r.rhs = prod;
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

struct IbpRow {
  std::size_t n = 0;
  McLaughlinReport report;
};

struct IbpTable {
  std::vector<IbpRow> rows;
  std::optional<std::string> note;  // set when the table is partial
};

/// Both McLaughlin conditions for B_n = b_n o ... o b_1 at each requested n.
/// This is evidence along the finite iterates, not a verdict on the limit.
inline IbpTable verify_stability_ibp(const MapSequence& seq, std::span<const DiskPoint> a_samples,
                                     std::span<const std::size_t> n_list,
                                     int degree_cap = kDefaultDegreeCap) {
  IbpTable table;
  for (std::size_t n : n_list) {
    const CompositionChain bn = tail_map(seq, 0, n);
    if (bn.degree() > degree_cap) {
      std::ostringstream os;
      os << "stopped at n=" << n << ": degree " << bn.degree() << " exceeds cap " << degree_cap;
      table.note = os.str();
      break;
    }
    table.rows.push_back({n, mclaughlin_zero(bn)});
    const complex b0 = bn(complex(0.0));
    for (const auto& a : a_samples) {
      if (std::abs(a.value() - b0) < kDistinctValueTol) continue;
      table.rows.push_back({n, mclaughlin_nonzero(bn, a)});
    }
  }
  return table;
}

}  // namespace blaschke
