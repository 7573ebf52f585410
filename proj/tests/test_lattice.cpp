#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "lfpp/lattice.hpp"
#include "lfpp/rng.hpp"
#include "oracles.hpp"

using namespace lfpp;

namespace {

// n x n lattice with unit spacing whose vertex (i, j) sits at (i, j).
GridSpec unit_grid(int n) { return GridSpec{n, 1.0, Point::Constant(-0.5), 0}; }

GridArray<double> random_values(int n, std::uint64_t seed, double scale = 1.0) {
  KeyedNormals g(seed, 0);
  GridArray<double> v(n, n);
  for (int i = 0; i < n * n; ++i) v(i / n, i % n) = scale * g(i);
  return v;
}

// Fine grid with a vertex exactly at the origin (n odd).
GridSpec fine_grid(int n, double h) {
  return GridSpec{n, h, Point::Constant(-(n / 2 + 0.5) * h), n / 8};
}

std::vector<bool> all_members(int count) { return std::vector<bool>(count, true); }

}  // namespace

TEST_CASE("zero and constant fields give Euclidean lengths times e^{xi c}") {
  const auto spec = fine_grid(201, 0.01);
  const double xi = 0.4;
  const WeightedLattice zero(spec, GridArray<double>::Zero(201, 201), xi);
  const auto d0 = distance(zero, Point(0, 0), Point(0, 0.5));
  CHECK(d0.value == doctest::Approx(0.5).epsilon(1e-12));
  const double c = 1.7;
  const WeightedLattice shifted(spec, GridArray<double>::Constant(201, 201, c), xi);
  const auto dc = distance(shifted, Point(0, 0), Point(0, 0.5));
  CHECK(dc.value == doctest::Approx(0.5 * std::exp(xi * c)).epsilon(1e-12));
  CHECK(*dc.path == *d0.path);
}

TEST_CASE("edge weights are symmetric, positive, and follow the trapezoid rule") {
  const auto spec = unit_grid(6);
  const auto values = random_values(6, 3);
  const WeightedLattice lat(spec, values, 0.7);
  for (int v = 0; v < lat.vertex_count(); ++v)
    lat.for_each_neighbor(v, [&](int u, double w) {
      CHECK(w > 0);
      CHECK(w == lat.weight(u, v));
      const double len = (lat.position(u) - lat.position(v)).norm();
      const double expect =
          len * std::exp(0.7 * (values(lat.iy(u), lat.ix(u)) + values(lat.iy(v), lat.ix(v))) / 2);
      CHECK(w == doctest::Approx(expect).epsilon(1e-13));
    });
  CHECK_THROWS(lat.weight(0, 20));
}

TEST_CASE("point distances match exhaustive enumeration and Floyd-Warshall on 5x5") {
  for (auto conn : {Connectivity::eight, Connectivity::four}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const WeightedLattice lat(unit_grid(5), random_values(5, seed), 1.0, conn);
      const auto g = oracle::restrict(lat, all_members(25));
      const auto fw = oracle::floyd_warshall(g);
      for (int a = 0; a < 25; a += 3)
        for (int b = 0; b < 25; ++b) {
          const auto d = distance(lat, lat.position(a), lat.position(b));
          CHECK(d.value == doctest::Approx(fw[a][b]).epsilon(1e-12));
          CHECK(d.value == doctest::Approx(oracle::min_simple_path(g, {a}, {b})).epsilon(1e-12));
          CHECK(lat.summed_weight(*d.path) == doctest::Approx(d.value).epsilon(1e-9));
        }
    }
  }
}

TEST_CASE("metric axioms on a random lattice") {
  const auto spec = GridSpec::centered(24, 1.0);
  const WeightedLattice lat(spec, random_values(24, 9, 1.5), 0.5);
  KeyedNormals u(4, 0);
  std::vector<Point> pts;
  for (int i = 0; i < 12; ++i)
    pts.emplace_back(0.35 * (2 * u.uniform(2 * i) - 1), 0.35 * (2 * u.uniform(2 * i + 1) - 1));
  for (const auto& p : pts) {
    CHECK(distance(lat, p, p).value == 0.0);
    for (const auto& q : pts) {
      const double pq = distance(lat, p, q).value;
      CHECK(pq == doctest::Approx(distance(lat, q, p).value).epsilon(1e-13));
      for (const auto& r : pts)
        CHECK(pq <= distance(lat, p, r).value + distance(lat, r, q).value + 1e-12);
    }
  }
}

TEST_CASE("across distance: zero field, Weyl scaling, enumeration oracle") {
  SUBCASE("zero field is the radial gap") {
    const auto spec = GridSpec::centered(121, 1.2);
    const WeightedLattice lat(spec, GridArray<double>::Zero(121, 121), 0.4);
    const AnnulusSpec a{Point(0, 0), 0.2, 0.4};
    const auto d = distance_across(lat, a);
    CHECK(std::abs(d.value - 0.2) <= spec.spacing);
    const WeightedLattice up(spec, GridArray<double>::Constant(121, 121, -0.8), 0.4);
    const auto du = distance_across(up, a);
    CHECK(du.value == doctest::Approx(d.value * std::exp(-0.32)).epsilon(1e-12));
    CHECK(up.summed_weight(*d.path) == doctest::Approx(du.value).epsilon(1e-12));
  }
  SUBCASE("7x7 random instances") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const WeightedLattice lat(unit_grid(7), random_values(7, seed), 1.0);
      const AnnulusSpec a{Point(3, 3), 2.0, 3.0};
      const auto g = oracle::restrict(lat, oracle::annulus_members(lat, a));
      const double brute = oracle::min_simple_path(g, oracle::ring(lat, a.center, 2.0),
                                                   oracle::ring(lat, a.center, 3.0));
      CHECK(distance_across(lat, a).value == doctest::Approx(brute).epsilon(1e-12));
    }
  }
  SUBCASE("errors") {
    const auto spec = GridSpec::centered(64, 1.0);
    const WeightedLattice lat(spec, GridArray<double>::Zero(64, 64), 0.4);
    CHECK_THROWS_AS(distance_across(lat, {Point(0, 0), spec.spacing, 0.2}), PreconditionError);
    CHECK_THROWS_AS(distance_across(lat, {Point(0, 0), 0.2, 0.1}), PreconditionError);
    CHECK_THROWS_AS(distance_across(lat, {Point(0, 0), 0.1, 0.45}), PreconditionError);
  }
}

TEST_CASE("around distance: separating cycle") {
  SUBCASE("zero field is close to the circumscribed lattice octagon") {
    const auto spec = GridSpec::centered(121, 1.2);
    const WeightedLattice lat(spec, GridArray<double>::Zero(121, 121), 0.4);
    const AnnulusSpec a{Point(0, 0), 0.2, 0.4};
    const auto d = distance_around(lat, a);
    const double octagon = 16 * 0.2 * std::tan(std::numbers::pi / 8);
    CHECK(std::abs(d.value - octagon) <= 0.1 * octagon);
    CHECK(winding_number(lat, *d.path, a.center) != 0);
    CHECK(lat.summed_weight(*d.path) == doctest::Approx(d.value).epsilon(1e-9));

    const WeightedLattice up(spec, GridArray<double>::Constant(121, 121, 0.6), 0.4);
    const auto du = distance_around(up, a);
    CHECK(du.value == doctest::Approx(d.value * std::exp(0.24)).epsilon(1e-12));
    CHECK(up.summed_weight(*d.path) == doctest::Approx(du.value).epsilon(1e-12));
  }
  SUBCASE("matches exhaustive separating-cycle enumeration") {
    for (auto conn : {Connectivity::eight, Connectivity::four}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const WeightedLattice lat(unit_grid(7), random_values(7, seed), 1.0, conn);
        const AnnulusSpec a{Point(3, 3), 2.0, 3.0};
        const auto g = oracle::restrict(lat, oracle::annulus_members(lat, a));
        const double brute = oracle::min_separating_cycle(g, a.center);
        CHECK(distance_around(lat, a).value == doctest::Approx(brute).epsilon(1e-12));
      }
    }
  }
  SUBCASE("removing the cycle disconnects inside from outside") {
    const auto spec = GridSpec::centered(48, 1.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const WeightedLattice lat(spec, random_values(48, seed, 1.2), 0.8);
      const AnnulusSpec a{Point(0.03, -0.02), 0.1, 0.3};
      const auto d = distance_around(lat, a);
      std::vector<bool> removed(lat.vertex_count(), false);
      for (int v : *d.path) removed[v] = true;
      std::vector<int> inside, outside;
      for (int v = 0; v < lat.vertex_count(); ++v) {
        const double r = (lat.position(v) - a.center).norm();
        if (r < a.r_inner - spec.spacing) inside.push_back(v);
        if (r > a.r_outer + spec.spacing) outside.push_back(v);
      }
      CHECK_FALSE(oracle::connected_avoiding(lat, inside, outside, removed));
    }
  }
}

TEST_CASE("internal distance") {
  const auto spec = GridSpec::centered(32, 1.0);
  const WeightedLattice lat(spec, random_values(32, 5), 0.6);
  const Point z(-0.2, 0.1), w(0.25, -0.15);
  SUBCASE("whole region equals the unrestricted distance") {
    CHECK(internal_distance(lat, z, w, Region::whole()).value == distance(lat, z, w).value);
  }
  SUBCASE("restriction never shortens") {
    const auto inner = internal_distance(lat, z, w, Region::disk({Point(0, 0), 0.35}));
    CHECK(inner.value >= distance(lat, z, w).value);
  }
  SUBCASE("a removed column disconnects") {
    std::vector<std::uint8_t> mask(lat.vertex_count(), 1);
    for (int y = 0; y < 32; ++y) mask[lat.vertex(16, y)] = 0;
    const auto d = internal_distance(lat, Point(-0.2, 0), Point(0.2, 0), Region::mask(mask));
    CHECK(std::isinf(d.value));
    CHECK_FALSE(d.finite());
  }
  SUBCASE("6x6 annulus region against enumeration") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const WeightedLattice small(unit_grid(6), random_values(6, seed), 1.0);
      const AnnulusSpec a{Point(2.5, 2.5), 1.2, 2.5};
      const auto member = oracle::annulus_members(small, a);
      const auto g = oracle::restrict(small, member);
      const auto fw = oracle::floyd_warshall(g);
      for (int s = 0; s < 36; ++s)
        for (int t = 0; t < 36; ++t) {
          if (!member[s] || !member[t]) continue;
          const double got =
              internal_distance(small, small.position(s), small.position(t), Region::annulus(a))
                  .value;
          CHECK(got == doctest::Approx(fw[s][t]).epsilon(1e-12));
          if ((s * 7 + t) % 97 == 0)
            CHECK(got == doctest::Approx(oracle::min_simple_path(g, {s}, {t})).epsilon(1e-12));
        }
    }
  }
}

TEST_CASE("left-right crossing") {
  SUBCASE("zero field crosses the unit square at cost ~1") {
    const auto spec = GridSpec::centered(150, 1.5, Point(0.5, 0.5));
    const WeightedLattice lat(spec, GridArray<double>::Zero(150, 150), 0.3);
    const auto d = left_right_crossing_cost(lat, {Point(0, 0), 1.0});
    CHECK(std::abs(d.value - 1.0) <= spec.spacing);
    const WeightedLattice up(spec, GridArray<double>::Constant(150, 150, 2.0), 0.3);
    CHECK(left_right_crossing_cost(up, {Point(0, 0), 1.0}).value ==
          doctest::Approx(d.value * std::exp(0.6)).epsilon(1e-12));
  }
  SUBCASE("5x5 enumeration") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const WeightedLattice lat(unit_grid(5), random_values(5, seed), 1.0);
      std::vector<int> left, right;
      for (int y = 0; y < 5; ++y) left.push_back(lat.vertex(0, y)), right.push_back(lat.vertex(4, y));
      const auto g = oracle::restrict(lat, all_members(25));
      const double brute = oracle::min_simple_path(g, left, right);
      CHECK(left_right_crossing_cost(lat, {Point(0, 0), 4.0}).value ==
            doctest::Approx(brute).epsilon(1e-12));
    }
  }
  SUBCASE("square outside the domain") {
    const auto spec = GridSpec::centered(64, 1.0);
    const WeightedLattice lat(spec, GridArray<double>::Zero(64, 64), 0.3);
    CHECK_THROWS_AS(left_right_crossing_cost(lat, {Point(0, 0), 1.0}), PreconditionError);
  }
}

TEST_CASE("point queries outside the unpadded domain are rejected") {
  const auto spec = GridSpec::centered(64, 1.0);
  const WeightedLattice lat(spec, GridArray<double>::Zero(64, 64), 0.3);
  CHECK_THROWS_AS(distance(lat, Point(0, 0), Point(0.49, 0)), PreconditionError);
  CHECK_THROWS_AS(WeightedLattice(spec, GridArray<double>::Zero(64, 64), -1.0), PreconditionError);
}

TEST_CASE("geodesic dump") {
  const auto spec = unit_grid(5);
  const WeightedLattice lat(spec, GridArray<double>::Zero(5, 5), 1.0);
  const auto d = distance(lat, Point(0, 0), Point(2, 0));
  std::ostringstream out;
  write_geodesic(out, lat, *d.path);
  CHECK(out.str() == "0 0 0\n1 0 1\n2 0 2\n");
}
