#include <catch_amalgamated.hpp>

#include <cmath>

#include "blaschke/iteration.hpp"
#include "blaschke/random.hpp"

using namespace blaschke;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

MapSequence negation() {
  return MapSequence([](std::size_t) { return FiniteBlaschke::involution(0.0); });
}

// f_1 = z^2, then maps with f_n'(0) != 0 and f_n(0) = 0.
MapSequence square_then_tangential() {
  const MapSequence tangential = MapSequence::tangential();
  return MapSequence([tangential](std::size_t n) { return n == 1 ? FiniteBlaschke::power(2) : tangential[n]; });
}

}  // namespace

TEST_CASE("MapSequence indexing and length") {
  const auto seq = MapSequence::from_list({FiniteBlaschke::power(2), FiniteBlaschke::identity()});
  CHECK(seq.length() == 2u);
  CHECK_THROWS_AS(seq[0], DomainError);
  CHECK_THROWS_AS(seq[3], DomainError);
  CHECK(seq[1].degree() == 2);
  CHECK_THROWS_AS(MapSequence::tangential(1.5), DomainError);
  // Repeated queries give identical maps.
  const auto t = MapSequence::tangential();
  CHECK(t[7](complex(0.1, 0.2)) == t[7](complex(0.1, 0.2)));
}

TEST_CASE("forward_eval examples") {
  CHECK(std::abs(forward_eval(negation(), 2, 0.4) - complex(0.4)) < 1e-16);
  CHECK_THAT(forward_eval(MapSequence::squaring(), 3, 0.9).real(), WithinRel(0.43046721, 1e-14));
  const auto mixed = MapSequence::from_list({FiniteBlaschke::power(2), FiniteBlaschke::involution(0.5)});
  CHECK(std::abs(forward_eval(mixed, 2, 0.0) - complex(0.5)) < 1e-16);
  CHECK_THROWS_AS(forward_eval(mixed, 0, 0.1), DomainError);
}

TEST_CASE("tail_map splices with forward iterates") {
  const auto sq = tail_map(MapSequence::squaring(), 2, 1);
  CHECK(sq.length() == 1);
  CHECK(sq.degree() == 2);

  Rng rng(8);
  const auto seq = random_sequence(rng, 12, 3);
  const auto whole = tail_map(seq, 0, 5);
  const auto tail = tail_map(seq, 4, 6);
  double gap = 0.0;
  for (int k = 0; k < 20; ++k) {
    const DiskPoint z = rng.in_disk(0.9);
    gap = std::max(gap, std::abs(whole(z.value()) - forward_eval(seq, 5, z)));
    gap = std::max(gap, std::abs(tail(forward_eval(seq, 4, z)) - forward_eval(seq, 10, z)));
  }
  CHECK(gap < 1e-12);
  CHECK_THROWS_AS(tail_map(seq, 0, 0), DomainError);
}

TEST_CASE("criterion_partial_sums examples") {
  Rng rng(2);
  std::vector<FiniteBlaschke> autos;
  for (int k = 0; k < 10; ++k) autos.push_back(FiniteBlaschke::automorphism(rng.unimodular(), rng.in_disk(0.9)));
  for (double s : criterion_partial_sums(MapSequence::from_list(autos), DiskPoint(0.2, -0.1), 10))
    CHECK_THAT(s, WithinAbs(0.0, 1e-12));

  const auto sq = criterion_partial_sums(MapSequence::squaring(), 0.0, 25);
  CHECK(sq.back() == 25.0);

  const auto tg = criterion_partial_sums(MapSequence::tangential(), 0.0, 30);
  for (std::size_t n = 1; n <= tg.size(); ++n)
    CHECK_THAT(tg[n - 1], WithinAbs(1.0 - std::ldexp(1.0, -static_cast<int>(n)), 1e-14));

  const auto random_sums = criterion_partial_sums(random_sequence(rng, 20, 4), rng.in_disk(0.9), 20);
  for (std::size_t n = 1; n < random_sums.size(); ++n) CHECK(random_sums[n] >= random_sums[n - 1]);
}

TEST_CASE("normalize_sequence examples") {
  // f_n(0) = 0 and a = 0: f~_n(z) = -f_n(-z).
  const auto tg = MapSequence::tangential();
  const auto norm = normalize_sequence(tg, 0.0);
  for (std::size_t n = 1; n <= 5; ++n)
    for (complex z : {complex(0.3, 0.1), complex(-0.6, 0.2)}) CHECK(std::abs(norm[n](z) + tg[n](-z)) < 1e-12);

  Rng rng(19);
  const auto seq = random_sequence(rng, 10, 3);
  const DiskPoint a = rng.in_disk(0.7);
  const auto ns = normalize_sequence(seq, a);
  for (std::size_t n = 1; n <= 10; ++n) CHECK(std::abs(ns[n](0.0)) < 1e-12);

  // F~_n = T_{F_n(a)} o F_n o T_a.
  double gap = 0.0;
  for (std::size_t n = 1; n <= 10; ++n) {
    const complex fna = forward_eval(seq, n, a);
    for (int k = 0; k < 20; ++k) {
      const DiskPoint z = rng.in_disk(0.9);
      const complex lhs = forward_eval(ns, n, z);
      const complex rhs = moebius(fna, forward_eval(seq, n, DiskPoint(moebius(a.value(), z.value()))));
      gap = std::max(gap, std::abs(lhs - rhs));
    }
  }
  CHECK(gap < 1e-11);
}

TEST_CASE("equisummability_bounds examples") {
  const auto trivial = equisummability_bounds(MapSequence::tangential(), 0.0, 4);
  CHECK(trivial.lower == 1.0);
  CHECK(trivial.upper == 1.0);
  CHECK_THAT(trivial.ratio, WithinAbs(1.0, 1e-15));

  // Reference: ratio 1.8272988790794564, hyp_dist(0.3, 0.09) = 0.21927541634696489.
  const auto b = equisummability_bounds(MapSequence::squaring(), 0.3, 2);
  CHECK_THAT(b.ratio, WithinRel(1.8272988790794564, 1e-13));
  CHECK_THAT(b.distance, WithinRel(0.21927541634696489, 1e-13));
  CHECK(b.holds);
  CHECK(b.ratio <= b.upper);

  Rng rng(4);
  std::vector<FiniteBlaschke> autos;
  for (int k = 0; k < 3; ++k) autos.push_back(FiniteBlaschke::automorphism(rng.unimodular(), rng.in_disk(0.5)));
  CHECK_THROWS_AS(equisummability_bounds(MapSequence::from_list(autos), DiskPoint(0.1), 2), DomainError);
}

TEST_CASE("equisummability bracket on random sequences") {
  Rng rng(55);
  for (int k = 0; k < 200; ++k) {
    const auto seq = random_sequence(rng, 4, 4, 0.8);
    const DiskPoint a = rng.in_disk(0.8);
    for (std::size_t n = 1; n <= 4; ++n) {
      if (seq[n].degree() < 2) continue;
      CHECK(equisummability_bounds(seq, a, n).holds);
    }
  }
}

TEST_CASE("detect_convergence classifies the reference families") {
  const auto grid = default_grid();
  CHECK(grid.size() == 60);

  const auto sq = detect_convergence(MapSequence::squaring(), grid, {30, 1e-9});
  CHECK(sq.status == ConvergenceStatus::converged_constant);
  for (complex v : sq.limit_samples) CHECK(std::abs(v) < 1e-9);

  const auto tg = detect_convergence(MapSequence::tangential(), grid, {40, 1e-9});
  CHECK(tg.status == ConvergenceStatus::converged_nonconstant);
  CHECK(tg.grid_cauchy_gap < 1e-9);
  CHECK(tg.grid_cauchy_gap >= 0.0);
  for (std::size_t n = 1; n < tg.criterion_partial_sums.size(); ++n)
    CHECK(tg.criterion_partial_sums[n] >= tg.criterion_partial_sums[n - 1]);

  const auto rot = detect_convergence(MapSequence::rotation(1.0), grid, {40, 1e-9});
  CHECK(rot.status == ConvergenceStatus::not_converged_at_cutoff);
  CHECK_FALSE(rot.diagnostics.empty());
}

TEST_CASE("detect_convergence preconditions") {
  const std::vector<DiskPoint> outer{DiskPoint(0.95)};
  CHECK_THROWS_AS(detect_convergence(MapSequence::squaring(), outer), DomainError);
  CHECK_THROWS_AS(detect_convergence(MapSequence::squaring(), std::vector<DiskPoint>{}), DomainError);
}

TEST_CASE("order_of_zero examples") {
  CHECK(order_of_zero(MapSequence::squaring(), 3) == 8);
  CHECK(order_of_zero(square_then_tangential(), 5) == 2);
  CHECK(order_of_zero(MapSequence::constant(FiniteBlaschke::involution(complex(0.2, 0.3))), 1) == 1);
}

TEST_CASE("zero_monotonicity_check examples") {
  const auto r = zero_monotonicity_check(MapSequence::squaring(), 0.5, 1);
  CHECK(r.included);
  CHECK_THAT(r.product_n, WithinAbs(0.25, 1e-14));
  CHECK_THAT(r.product_next, WithinAbs(0.0625, 1e-14));
  CHECK(r.fiber_next.cardinality() == 4);
  CHECK(r.monotone);

  Rng rng(6);
  std::vector<FiniteBlaschke> autos;
  for (int k = 0; k < 4; ++k) autos.push_back(FiniteBlaschke::automorphism(rng.unimodular(), rng.in_disk(0.5)));
  const DiskPoint c(0.3, -0.2);
  const auto a = zero_monotonicity_check(MapSequence::from_list(autos), c, 2);
  CHECK(a.included);
  CHECK(a.fiber_n.cardinality() == 1);
  CHECK(std::abs(a.fiber_n.entries()[0].point - c.value()) < 1e-12);

  const auto z = zero_monotonicity_check(MapSequence::squaring(), 0.0, 1);
  CHECK(z.product_n == 1.0);
  CHECK(z.product_next == 1.0);

  CHECK_THROWS_AS(zero_monotonicity_check(MapSequence::squaring(), 0.5, 6), CapExceededError);
}

TEST_CASE("covering_certificate examples") {
  const auto id = covering_certificate(FiniteBlaschke::identity(), 0.01);
  CHECK(id.covered);
  CHECK_THAT(id.min_modulus, WithinAbs(0.9, 1e-15));
  CHECK(id.winding_numbers.size() == 9);

  // Reference min |H| on |z| = 0.8 for r = 0.999: 0.79282868525896414.
  const std::vector<complex> z{0.0, -0.999};
  const auto h = FiniteBlaschke::from_zeros(z);
  const auto cert = covering_certificate(h, 0.04);
  CHECK(cert.covered);
  CHECK_THAT(cert.min_modulus, WithinAbs(0.79282868525896414, 1e-12));

  CHECK_THROWS_AS(covering_certificate(FiniteBlaschke::power(2), 0.01), DomainError);
  CHECK_THROWS_AS(covering_certificate(FiniteBlaschke::identity(), 0.2), DomainError);
  CHECK_THROWS_AS(covering_certificate(FiniteBlaschke::involution(0.3), 0.01), DomainError);
}

TEST_CASE("winding numbers of sampled circles") {
  std::vector<complex> circle;
  for (int j = 0; j < 64; ++j) circle.push_back(std::polar(1.0, 2.0 * M_PI * j / 64.0));
  CHECK(detail::winding_number(circle, 0.0) == 1);
  CHECK(detail::winding_number(circle, 2.0) == 0);
  std::vector<complex> coarse{1.0, -1.0};
  CHECK_FALSE(detail::winding_number(coarse, 0.0).has_value());
}
