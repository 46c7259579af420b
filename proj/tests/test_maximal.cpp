#include <catch_amalgamated.hpp>

#include <cmath>

#include "blaschke/maximal.hpp"
#include "blaschke/random.hpp"

using namespace blaschke;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FiniteBlaschke sample_product() {
  const std::vector<complex> z{{0.3, 0.2}, {-0.5, 0.1}, {0.1, -0.7}, {0.6, 0.6}};
  return FiniteBlaschke::from_zeros(z, std::polar(1.0, 0.7));
}

std::vector<DiskPoint> probes(std::uint64_t seed, int count = 200, double radius = 0.95) {
  Rng rng(seed);
  std::vector<DiskPoint> out;
  for (int k = 0; k < count; ++k) out.push_back(rng.in_disk(radius));
  return out;
}

PointMultiset single(complex c, int m = 1) {
  PointMultiset s;
  s.insert(c, m);
  return s;
}

// Smallest distance from p to any nonzero zero of b.
double nearest_zero(const FiniteBlaschke& b, complex p) {
  double d = 1.0;
  for (const auto& e : b.zeros().entries()) d = std::min(d, std::abs(e.point - p));
  return d;
}

}  // namespace

TEST_CASE("density examples") {
  CHECK_THAT(density(FiniteBlaschke::identity(), 0.5), WithinAbs(1.0 / 0.75, 1e-15));
  // Reference: lambda_{z^2}(0.5) = 1.0666666666666667.
  CHECK_THAT(density(FiniteBlaschke::power(2), 0.5), WithinAbs(1.0666666666666667, 1e-15));
  CHECK(density(FiniteBlaschke::power(2), 0.0) == 0.0);
  const auto t = FiniteBlaschke::involution(complex(0.2, -0.4));
  for (complex z : {complex(0.1, 0.3), complex(-0.7, 0.0)})
    CHECK_THAT(density(t, z), WithinRel(1.0 / one_minus_abs2(z), 1e-12));
}

TEST_CASE("GridSpec geometry") {
  const auto g = GridSpec::disk(0.1, 0.8);
  CHECK(g.nx == 17);
  CHECK(g.ny == 17);
  CHECK(std::abs(g.point(8, 8)) < 1e-15);
  CHECK_FALSE(g.admits(0, 0));
  CHECK(g.admits(8, 0));
  const auto p = GridSpec::patch(complex(0.3, 0.1), 1e-3);
  CHECK(p.nx == 3);
  CHECK(std::abs(p.point(1, 1) - complex(0.3, 0.1)) < 1e-15);
  CHECK_THROWS_AS(sample_field([](complex) { return 1.0; }, GridSpec::disk(0.1, 1.0)), DomainError);
  GridSpec bad = g;
  bad.h = 0.0;
  CHECK_THROWS_AS(sample_field([](complex) { return 1.0; }, bad), DomainError);
}

TEST_CASE("curvature of the disk density") {
  // Reference five-point value at 0.3 with h = 1e-3: -4.0000028694633462.
  const auto id = FiniteBlaschke::identity();
  const auto field = lambda_field(id, GridSpec::patch(0.3, 1e-3));
  const auto k = curvature(field, Stencil::five_point);
  CHECK_THAT(k.at(1, 1), WithinRel(-4.0000028694633462, 1e-8));
  CHECK(k.excluded[k.grid.index(0, 0)] == 1);
  // The extrapolated stencil needs two rings of neighbours.
  CHECK(curvature(field).excluded[k.grid.index(1, 1)] == 1);
  const auto wide = curvature(lambda_field(id, GridSpec::patch(0.3, 1e-3, 2)));
  CHECK_THAT(wide.at(2, 2), WithinAbs(-4.0, 1e-8));

  for (Stencil s : {Stencil::five_point, Stencil::extrapolated}) {
    const auto disk = curvature(lambda_field(id, GridSpec::disk(1e-2, 0.8)), s);
    const double tol = s == Stencil::five_point ? 1e-2 : 1e-4;
    int used = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < disk.kappa.size(); ++i) {
      if (disk.excluded[i]) continue;
      ++used;
      worst = std::max(worst, std::abs(disk.kappa[i] + 4.0));
    }
    CHECK(used > 15000);
    CHECK(worst < tol);
  }
}

TEST_CASE("curvature of lambda for z^2 and scaled densities") {
  const auto sq = FiniteBlaschke::power(2);
  const auto probe = curvature_probe([&](complex z) { return density(sq, z); }, 0.4, critical_set(sq));
  CHECK_FALSE(probe.excluded);
  CHECK_THAT(probe.h, WithinAbs(0.008, 1e-15));
  CHECK_THAT(probe.kappa, WithinAbs(-4.0, 1e-4));
  // Plain differencing of log|z| near the critical point: error ~ h^2/|z|^6.
  const auto plain =
      curvature_probe([&](complex z) { return density(sq, z); }, 0.4, critical_set(sq), 0.0, Stencil::five_point);
  CHECK_THAT(plain.kappa, WithinAbs(-4.0, 1e-2));
  CHECK(std::abs(plain.kappa + 4.0) > std::abs(probe.kappa + 4.0));
  const auto fine =
      curvature_probe([&](complex z) { return density(sq, z); }, 0.4, critical_set(sq), 1e-3, Stencil::five_point);
  CHECK_THAT(fine.kappa, WithinAbs(-4.0, 1e-4));

  const auto near = curvature_probe([&](complex z) { return density(sq, z); }, 1e-4, critical_set(sq));
  CHECK(near.excluded);
  CHECK(std::isnan(near.kappa));

  // 2 lambda has curvature -1.
  const auto id = FiniteBlaschke::identity();
  const auto scaled = curvature_probe([&](complex z) { return 2.0 * density(id, z); }, complex(0.2, 0.5), {}, 1e-3);
  CHECK_THAT(scaled.kappa, WithinAbs(-1.0, 1e-5));

  const auto grid = curvature(lambda_field(sq, GridSpec::disk(1e-2, 0.8)));
  for (int j = 0; j < grid.grid.ny; ++j)
    for (int i = 0; i < grid.grid.nx; ++i) {
      if (grid.excluded[grid.grid.index(i, j)]) continue;
      CHECK(std::abs(grid.grid.point(i, j)) >= 0.03 - 1e-12);
    }
}

TEST_CASE("canonicalize normal form") {
  const auto c = canonicalize(sample_product());
  CHECK(std::abs(c(0.0)) < 1e-15);
  const auto ps = probes(3);
  CHECK(map_distance(canonicalize(c), c, ps) < 1e-12);

  // Reference canonical zeros.
  const std::vector<complex> ref{{-0.26630498101824106, 0.16161593729475878},
                                 {0.11807029154597569, -0.58757942305049494},
                                 {0.63692750363499749, 0.61171895834621713}};
  for (complex r : ref) CHECK(nearest_zero(c, r) < 1e-12);

  const auto orbit = canonicalize(compose_explicit(FiniteBlaschke::automorphism(std::polar(1.0, 1.1), 0.35),
                                                   sample_product()));
  CHECK(map_distance(orbit, c, ps) < 1e-10);
  CHECK(map_distance(canonicalize(sample_product().rotated(std::polar(1.0, 1.1))), c, ps) < 1e-12);

  // z^k is already canonical.
  CHECK(map_distance(canonicalize(FiniteBlaschke::power(3)), FiniteBlaschke::power(3), ps) < 1e-15);
}

TEST_CASE("solve_maximal examples") {
  const auto ps = probes(5);

  const auto sq = solve_maximal(single(0.0));
  CHECK(sq.product.degree() == 2);
  CHECK(map_distance(sq.product, FiniteBlaschke::power(2), ps) < 1e-12);

  // The critical point of z(z - 1/2)/(1 - z/2) is 2 - sqrt(3).
  const auto half = solve_maximal(single(0.26794919243112271));
  const std::vector<complex> zh{0.0, 0.5};
  CHECK(map_distance(half.product, canonicalize(FiniteBlaschke::from_zeros(zh)), ps) < 1e-10);
  CHECK(nearest_zero(half.product, 0.5) < 1e-10);
  CHECK(half.residual < 1e-9);

  const auto s = solve_maximal(critical_set(sample_product()));
  CHECK(map_distance(s.product, canonicalize(sample_product()), ps) < 1e-10);
  CHECK(s.critical_mismatch < 1e-8);
  CHECK(s.homotopy_steps >= 2);
  CHECK(s.newton_iters > 0);

  const auto empty = solve_maximal(PointMultiset{});
  CHECK(empty.product.degree() == 1);
  CHECK(map_distance(empty.product, FiniteBlaschke::identity(), ps) == 0.0);
}

TEST_CASE("solve_maximal recovers random products") {
  Rng rng(77);
  const auto ps = probes(6);
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    const auto b = random_blaschke(rng, 6, 0.9, 2);
    const auto r = solve_maximal(critical_set(b));
    worst = std::max(worst, map_distance(r.product, canonicalize(b), ps));
    CHECK(r.residual < 1e-9);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("solve_maximal with multiple critical points") {
  const auto ps = probes(7);
  // T_{0.1} o z^3 o T_{0.3}: a double critical point at 0.3.
  const auto b = compose_explicit(FiniteBlaschke::involution(0.1),
                                  compose_explicit(FiniteBlaschke::power(3), FiniteBlaschke::involution(0.3)));
  const auto r = solve_maximal(single(0.3, 2));
  CHECK(r.product.degree() == 3);
  CHECK(map_distance(r.product, canonicalize(b), ps) < 1e-7);

  PointMultiset mixed;
  mixed.insert(complex(0.2, 0.1), 2);
  mixed.insert(complex(-0.4, 0.3));
  const auto m = solve_maximal(mixed);
  CHECK(m.product.degree() == 4);
  CHECK(includes(critical_set(m.product), mixed, 1e-4));
}

TEST_CASE("solve_maximal errors") {
  PointMultiset many;
  for (int k = 0; k < 64; ++k) many.insert(std::polar(0.5, 0.09 * k));
  CHECK_THROWS_AS(solve_maximal(many), CapExceededError);
  PointMultiset outside;
  outside.append_exact(complex(1.2, 0.0), 1);
  CHECK_THROWS_AS(solve_maximal(outside), DomainError);
}

TEST_CASE("verify_maximal against admissible competitors") {
  Rng rng(21);
  const auto ps = probes(8);
  const auto b = random_blaschke(rng, 4, 0.8, 3);
  const auto targets = critical_set(b);
  const auto m = solve_maximal(targets).product;

  std::vector<Competitor> comps;
  comps.emplace_back(b);
  comps.emplace_back(CompositionChain({b, random_blaschke(rng, 2, 0.8)}));
  PointMultiset bigger = targets;
  bigger.insert(rng.in_disk(0.7));
  comps.emplace_back(solve_maximal(bigger).product);
  comps.emplace_back(FiniteBlaschke::power(2));

  const auto report = verify_maximal(m, targets, comps, ps);
  REQUIRE(report.per_competitor.size() == 4);
  CHECK(report.rejected == std::vector<std::size_t>{3});
  CHECK_FALSE(report.per_competitor[3].has_value());
  CHECK(report.max_violation < 1e-9);
  CHECK(*report.per_competitor[0] > -1e-9);
  CHECK(*report.per_competitor[1] < 0.0);
}

TEST_CASE("verify_maximal flags a non-maximal candidate") {
  Rng rng(22);
  const auto ps = probes(9);
  const PointMultiset targets = single(complex(0.3, -0.2));
  PointMultiset bigger = targets;
  bigger.insert(complex(-0.5, 0.1));
  const auto candidate = solve_maximal(bigger).product;
  const std::vector<Competitor> comps{solve_maximal(targets).product};
  const auto report = verify_maximal(candidate, targets, comps, ps);
  CHECK(report.rejected.empty());
  CHECK(report.max_violation > 1e-3);
}

TEST_CASE("sigma_field ratio inequalities") {
  Rng rng(23);
  for (int k = 0; k < 5; ++k) {
    const auto a1 = random_blaschke(rng, 3, 0.8, 2);
    const auto a2 = random_blaschke(rng, 3, 0.8, 2);
    const auto b = solve_maximal(critical_set(a2)).product;
    const auto s = sigma_field(a1, a2, b, GridSpec::disk(0.05, 0.9));
    CHECK(s.holds);
    CHECK(s.min_ratio_a2_a >= 1.0 - 1e-9);
    CHECK(s.min_ratio_b_a2 >= 1.0 - 1e-9);
    // Curvature needs a fine grid: near the zeros the stencil error grows like h^2 / r^6.
    if (k < 2) {
      const auto fine = sigma_field(a1, a2, b, GridSpec::disk(5e-3, 0.8));
      const auto kappa = curvature(fine.field);
      std::size_t used = 0;
      for (std::size_t i = 0; i < kappa.kappa.size(); ++i) {
        if (kappa.excluded[i]) continue;
        ++used;
        CHECK(kappa.kappa[i] <= -4.0 + 1e-3);
      }
      CHECK(used > 60000);
    }
  }
  const auto a2 = FiniteBlaschke::power(2);
  CHECK_THROWS_AS(sigma_field(FiniteBlaschke::power(2), a2, solve_maximal(single(0.2)).product, GridSpec::disk(0.1)),
                  DomainError);
}

TEST_CASE("decomposition_check") {
  const auto ps = probes(10, 100, 0.9);
  const auto r = decomposition_check(FiniteBlaschke::power(2), FiniteBlaschke::power(2), ps);
  CHECK(r.degree == 4);
  CHECK(r.gap_a1 < 1e-12);
  CHECK(r.gap_a < 1e-12);

  Rng rng(24);
  for (int k = 0; k < 5; ++k) {
    const auto a1 = random_blaschke(rng, 3, 0.8, 2);
    const auto a2 = random_blaschke(rng, 3, 0.8, 2);
    const auto d = decomposition_check(a1, a2, ps);
    CHECK(d.degree == a1.degree() * a2.degree());
    CHECK(d.gap_a1 < 1e-8);
    CHECK(d.gap_a2 < 1e-8);
    CHECK(d.gap_a < 1e-8);
  }
}
