#include <catch_amalgamated.hpp>

#include <cmath>

#include "blaschke/blaschke.hpp"
#include "blaschke/random.hpp"

using namespace blaschke;
using Catch::Matchers::WithinAbs;

TEST_CASE("DiskPoint rejects points on or outside the circle") {
  CHECK_NOTHROW(DiskPoint(0.3, 0.4));
  CHECK_NOTHROW(DiskPoint(1.0 - 1e-15));
  CHECK_THROWS_AS(DiskPoint(1.0), DomainError);
  CHECK_THROWS_AS(DiskPoint(0.8, 0.8), DomainError);
  CHECK_THROWS_AS(DiskPoint(std::nan(""), 0.0), DomainError);
}

TEST_CASE("moebius_T values") {
  const DiskPoint w(0.3, 0.1);
  CHECK(std::abs(moebius_T(w, 0.0).value() - complex(0.3, 0.1)) < 1e-16);
  CHECK(std::abs(moebius_T(0.0, 0.5).value() - complex(-0.5, 0.0)) < 1e-16);
  const DiskPoint z(-0.2, 0.55);
  CHECK(std::abs(moebius_T(w, moebius_T(w, z)).value() - z.value()) < 1e-14);
}

TEST_CASE("moebius_T stays inside the disk at the modulus cap") {
  const DiskPoint z(-(1.0 - 1e-15));
  CHECK_NOTHROW(moebius_T(DiskPoint(0.5), z));
  CHECK(moebius_T(DiskPoint(0.5), z).modulus() <= kMaxDiskModulus);
}

TEST_CASE("hyp_dist values and symmetry") {
  CHECK(hyp_dist(0.0, 0.0) == 0.0);
  CHECK_THAT(hyp_dist(0.0, 0.5), WithinAbs(0.54930614433405485, 1e-15));
  const DiskPoint a(0.1, -0.4), b(-0.6, 0.2);
  CHECK_THAT(hyp_dist(a, b), WithinAbs(hyp_dist(b, a), 1e-15));
  CHECK(hyp_dist(a, b) > 0.0);
}

TEST_CASE("involution and isometry on random samples") {
  Rng rng(101);
  for (int k = 0; k < 500; ++k) {
    const DiskPoint w = rng.in_disk(0.95), a = rng.in_disk(0.95), b = rng.in_disk(0.95);
    CHECK(std::abs(moebius_T(w, moebius_T(w, a)).value() - a.value()) < 1e-13);
    CHECK_THAT(hyp_dist(moebius_T(w, a), moebius_T(w, b)), WithinAbs(hyp_dist(a, b), 1e-11));
  }
}

TEST_CASE("hyp_distortion examples") {
  const Involution t{complex(0.3, -0.2)};
  for (complex z : {complex(0.0), complex(0.5, 0.1), complex(-0.7, -0.3)})
    CHECK_THAT(hyp_distortion(t, z), WithinAbs(1.0, 1e-12));
  const auto sq = FiniteBlaschke::power(2);
  CHECK(hyp_distortion(sq, 0.0) == 0.0);
  CHECK_THAT(hyp_distortion(sq, 0.5), WithinAbs(0.8, 1e-15));
}

TEST_CASE("hyp_distortion rejects maps leaving the disk") {
  const auto bad = AnyMap::from_function([](complex z) { return Jet{2.0 + z, 1.0}; });
  CHECK_THROWS_AS(hyp_distortion(bad, 0.1), DomainError);
}

TEST_CASE("Schwarz-Pick and the distortion chain rule on random products") {
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    const auto f = random_blaschke(rng, 5);
    const auto g = random_blaschke(rng, 5);
    const CompositionChain gf({f, g});
    const DiskPoint z = rng.in_disk(0.95);
    const double df = hyp_distortion(f, z);
    const double dg = hyp_distortion(g, DiskPoint(f(z.value())));
    CHECK(df <= 1.0 + 1e-12);
    CHECK(dg <= 1.0 + 1e-12);
    CHECK_THAT(hyp_distortion(gf, z), WithinAbs(df * dg, 1e-11));
  }
}

TEST_CASE("schwarz_lower_bound values and domain") {
  CHECK_THAT(schwarz_lower_bound(1.0, 0.5), WithinAbs(0.5, 1e-16));
  const double eps = 0.01;
  const double bound = schwarz_lower_bound(1.0 - eps, 1.0 - std::sqrt(eps));
  CHECK_THAT(bound, WithinAbs(0.729, 1e-12));
  CHECK(bound >= 1.0 - 3.0 * std::sqrt(eps));
  CHECK_THROWS_AS(schwarz_lower_bound(0.5, 0.5), DomainError);
  CHECK_THROWS_AS(schwarz_lower_bound(0.5, 0.7), DomainError);
  CHECK_THROWS_AS(schwarz_lower_bound(1.2, 0.1), DomainError);
  CHECK(schwarz_lower_bound(0.6, 0.55) < 0.0);
}

TEST_CASE("schwarz_lower_bound against sampled self-maps fixing 0") {
  // H(z) = z * (T_a o z^2 o T_b)(z): H(0) = 0, |H'(0)| = |T_a(T_b(0)^2)|.
  Rng rng(2024);
  int tested = 0;
  for (int k = 0; k < 100; ++k) {
    const complex a = rng.in_disk(0.3), b = rng.in_disk(0.3);
    const CompositionChain inner({FiniteBlaschke::involution(b), FiniteBlaschke::power(2), FiniteBlaschke::involution(a)});
    const auto h = AnyMap::from_function([&](complex z) {
      const Jet j = inner.jet(z);
      return Jet{z * j.value, j.value + z * j.derivative};
    });
    const double d0 = std::abs(h.jet(0.0).derivative);
    const double r = 0.5 * d0;
    const double bound = schwarz_lower_bound(d0, r);
    double min_mod = 1.0;
    for (int j = 0; j < 720; ++j) min_mod = std::min(min_mod, std::abs(h(std::polar(r, 2.0 * M_PI * j / 720.0))));
    CHECK(min_mod >= bound - 1e-10);
    ++tested;
  }
  CHECK(tested == 100);
}
