#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "rpl/convexsets.hpp"
#include "rpl/error.hpp"
#include "rpl/family.hpp"
#include "rpl/gauss.hpp"
#include "rpl/harness.hpp"

using namespace rpl;

namespace {

SetMask interval(const Grid& g, double a, double b) { return make_mask(Indicator{{BoxRegion{{a, 0.0}, {b, 0.0}}}}, g); }

SetMask random_mask(const Grid& g, oracle::SplitMix& rng, double density) {
  SetMask m(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.index_of(i);
    bool inner = true;
    for (int a = 0; a < g.dim(); ++a) inner = inner && idx[a] >= g.n(a) / 4 && idx[a] < 3 * g.n(a) / 4;
    if (inner && rng.uniform() < density) m.set(i);
  }
  return m;
}

}  // namespace

TEST_SUITE("convexsets") {

TEST_CASE("volumes") {
  Grid g(0.0, 1.0, 64);
  CHECK(volume(SetMask(g), MeasureSpec::lebesgue()) == 0.0);
  SetMask full(g, std::vector<std::uint8_t>(64, 1));
  CHECK(std::abs(volume(full, MeasureSpec::lebesgue()) - 1.0) <= 1e-12);
  Grid w(-8.0, 8.0, 512);
  SetMask half = make_mask(Indicator{{HalfSpaceRegion{{1.0, 0.0}, 0.0}}}, w);
  CHECK(std::abs(volume(half, MeasureSpec::gaussian()) - 0.5) <= 2e-3);
}

TEST_CASE("gauges") {
  ConvexBody ball = ConvexBody::ball(2.0, 2);
  CHECK(ball.gauge({0.0, 0.0}) == 0.0);
  CHECK(ball.gauge({3.0, 4.0}) == doctest::Approx(2.5));
  ConvexBody box = ConvexBody::box({1.0, 0.5}, 2);
  CHECK(box.gauge({0.5, 1.0}) == doctest::Approx(2.0));
  ConvexBody tri = ConvexBody::polygon({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  CHECK_FALSE(tri.symmetric());
  CHECK(tri.gauge({0.25, 0.25}) == doctest::Approx(0.5));
  CHECK(std::isinf(tri.gauge({-1.0, 0.0})));
  CHECK(tri.volume() == doctest::Approx(0.5));
  CHECK_THROWS_AS(ConvexBody::polygon({{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(ConvexBody::polygon({{1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}}), InvalidArgument);
}

TEST_CASE("property: gauges are positively homogeneous and detect the body") {
  oracle::SplitMix rng(5);
  std::vector<ConvexBody> bodies = {ConvexBody::ball(1.3, 2), ConvexBody::box({0.7, 1.9}, 2),
                                    ConvexBody::polygon({{-1.0, -1.0}, {2.0, -0.5}, {1.0, 1.5}, {-1.2, 0.8}})};
  for (const ConvexBody& k : bodies) {
    for (int i = 0; i < 500; ++i) {
      Point x{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      double s = rng.uniform(0.0, 4.0);
      CHECK(k.gauge({s * x[0], s * x[1]}) == doctest::Approx(s * k.gauge(x)).epsilon(1e-12));
    }
  }
  ConvexBody quad = ConvexBody::polygon({{-1.0, -1.0}, {2.0, -0.5}, {1.0, 1.5}, {-1.2, 0.8}});
  // A point is in the closed quadrilateral iff it is on the inner side of all edges.
  const Point v[4] = {{-1.0, -1.0}, {2.0, -0.5}, {1.0, 1.5}, {-1.2, 0.8}};
  for (int i = 0; i < 2000; ++i) {
    Point x{rng.uniform(-2.0, 3.0), rng.uniform(-2.0, 2.0)};
    bool inside = true;
    for (int e = 0; e < 4; ++e) {
      const Point& a = v[e];
      const Point& b = v[(e + 1) % 4];
      inside = inside && (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) >= 0.0;
    }
    CHECK((quad.gauge(x) <= 1.0) == inside);
  }
}

TEST_CASE("scaled bodies") {
  Grid g({-3.0, -3.0}, {3.0, 3.0}, {256, 256});
  ConvexBody ball = ConvexBody::ball(1.0, 2);
  CHECK(scaled_body_mask(ball, 0.0, g).empty());
  double area = volume(scaled_body_mask(ball, 2.0, g), MeasureSpec::lebesgue());
  CHECK(std::abs(area - 4.0 * std::numbers::pi) <= 2.0 * 2.0 * std::numbers::pi * g.spacing(0));
  SetMask previous = scaled_body_mask(ball, 0.1, g);
  for (double s = 0.2; s < 2.9; s += 0.1) {
    SetMask m = scaled_body_mask(ball, s, g);
    CHECK(previous.subset_of(m));
    previous = m;
  }
}

TEST_CASE("property: scaled body volume scales like s^d") {
  Grid g({-4.0, -4.0}, {4.0, 4.0}, {200, 200});
  ConvexBody quad = ConvexBody::polygon({{-1.0, -1.0}, {2.0, -0.5}, {1.0, 1.5}, {-1.2, 0.8}});
  for (double s = 0.5; s <= 2.0; s += 0.25) {
    double v = volume(scaled_body_mask(quad, s, g), MeasureSpec::lebesgue());
    CHECK(std::abs(v - s * s * quad.volume()) <= 2.0 * s * 10.0 * g.spacing(0));
  }
}

TEST_CASE("minkowski sums") {
  Grid g(-4.0, 4.0, 80);
  const double h = g.spacing(0);
  SetMask a = interval(g, 0.0, 1.0);
  SetMask b = interval(g, -3.0, -1.5);
  const SetMask ab[2] = {a, b};
  const double ones[2] = {1.0, 1.0};
  SetMask s = minkowski_weighted_sum(ab, ones, g);
  CHECK(std::abs(volume(s, MeasureSpec::lebesgue()) - 2.5) <= 2 * h);

  const SetMask aa[2] = {a, a};
  const double halves[2] = {0.5, 0.5};
  SetMask self = minkowski_weighted_sum(aa, halves, g);
  CHECK(symmetric_difference(self, a) <= 2);

  Grid big(-1.0, 6.0, 140);
  SetMask a2 = interval(big, 0.0, 1.0), b2 = interval(big, 2.0, 4.0);
  const SetMask ab2[2] = {a2, b2};
  SetMask s2 = minkowski_weighted_sum(ab2, ones, big);
  CHECK(std::abs(volume(s2, MeasureSpec::lebesgue()) - 3.0) <= 2 * big.spacing(0));
  CHECK(symmetric_difference(s2, interval(big, 2.0, 5.0)) <= 2);

  Grid plane({-2.0, -2.0}, {2.0, 2.0}, {41, 41});
  SetMask point(plane);
  point.set(plane.flat(20, 20));
  SetMask disc = make_mask(Indicator{{BallRegion{{0.0, 0.0}, 1.0}}}, plane);
  const SetMask pd[2] = {point, disc};
  SetMask translated = minkowski_weighted_sum(pd, ones, plane);
  CHECK(symmetric_difference(translated, disc) <= boundary_layer(disc));
}

TEST_CASE("minkowski sums leaving the box") {
  Grid g(-1.0, 1.0, 20);
  SetMask a = interval(g, 0.2, 0.9);
  const SetMask aa[2] = {a, a};
  const double ones[2] = {1.0, 1.0};
  CHECK_THROWS_AS(minkowski_weighted_sum(aa, ones, g), BoundsError);
  SetMask clipped = minkowski_weighted_sum(aa, ones, g, {.clip = true});
  CHECK(clipped.contains(g.size() - 1));
}

TEST_CASE("property: minkowski sums match the pair-scan oracle") {
  oracle::SplitMix rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const bool planar = trial % 2 == 1;
    Grid g = planar ? Grid({-2.0, -2.0}, {2.0, 2.0}, {24, 20}) : Grid(-2.0, 2.0, 64);
    Grid out = planar ? Grid({-3.0, -3.0}, {3.0, 3.0}, {36, 30}) : Grid(-3.0, 3.0, 96);
    SetMask a = random_mask(g, rng, 0.2 + 0.6 * rng.uniform());
    SetMask b = random_mask(g, rng, 0.2 + 0.6 * rng.uniform());
    double t0 = rng.uniform(-1.2, 1.2), t1 = rng.uniform(0.1, 1.2);
    const SetMask ab[2] = {a, b};
    const double t[2] = {t0, t1};
    SetMask fast = minkowski_weighted_sum(ab, t, out);
    SetMask slow = oracle::brute_minkowski(a, b, t0, t1, out);
    INFO("trial " << trial << " t = " << t0 << ", " << t1);
    CHECK(symmetric_difference(fast, slow) == 0);
  }
}

TEST_CASE("property: minkowski sums are monotone") {
  oracle::SplitMix rng(4);
  Grid g({-2.0, -2.0}, {2.0, 2.0}, {32, 32});
  Grid out({-4.0, -4.0}, {4.0, 4.0}, {64, 64});
  for (int trial = 0; trial < 20; ++trial) {
    SetMask a = random_mask(g, rng, 0.3), b = random_mask(g, rng, 0.3);
    SetMask a2 = a, b2 = b;
    a2 |= random_mask(g, rng, 0.2);
    b2 |= random_mask(g, rng, 0.2);
    const double t[2] = {0.7, 1.3};
    const SetMask small[2] = {a, b}, large[2] = {a2, b2};
    CHECK(minkowski_weighted_sum(small, t, out).subset_of(minkowski_weighted_sum(large, t, out)));
  }
}

TEST_CASE("rearranged sets combine into scaled bodies") {
  Grid g({-4.0, -4.0}, {4.0, 4.0}, {128, 128});
  ConvexBody k = ConvexBody::box({1.0, 0.5}, 2);
  RearrangementSpec spec = RearrangementSpec::convex_body(k, g);
  SetMask a = make_mask(Indicator{{BallRegion{{1.0, 1.0}, 0.8}}}, g);
  SetMask b = make_mask(Indicator{{BoxRegion{{-2.0, -1.0}, {0.0, 0.5}}}}, g);
  SetImage ia = rearrange_set_image(a, spec), ib = rearrange_set_image(b, spec);
  const double t[2] = {0.6, -0.4};
  const SetMask stars[2] = {ia.mask, ib.mask};
  SetMask sum = minkowski_weighted_sum(stars, t, g);
  double s = (std::abs(t[0]) * std::sqrt(volume(a, MeasureSpec::lebesgue())) +
              std::abs(t[1]) * std::sqrt(volume(b, MeasureSpec::lebesgue()))) /
             std::sqrt(k.volume());
  SetMask body = scaled_body_mask(k, s, g);
  CHECK(symmetric_difference(sum, body) <= 2 * boundary_layer(body));
}

TEST_CASE("bmi chain") {
  Grid g(-4.0, 4.0, 800);
  RearrangementSpec spec = RearrangementSpec::convex_body(ConvexBody::ball(1.0, 1), g);
  ChainReport r = bmi_check(interval(g, 0.0, 1.0), interval(g, 0.0, 2.0), 0.5, spec);
  REQUIRE(r.values.size() == 3);
  CHECK(std::abs(r.values[0] - 1.5) <= 2 * g.spacing(0));
  CHECK(std::abs(r.values[1] - 1.5) <= 2 * g.spacing(0));
  CHECK(std::abs(r.values[2] - std::sqrt(2.0)) <= 1e-9);
  CHECK(r.passed());

  SetMask ball = make_mask(Indicator{{BallRegion{{0.0, 0.0}, 1.0}}}, g);
  ChainReport eq = bmi_check(ball, ball, 0.3, spec);
  CHECK(eq.passed());
  CHECK(std::abs(eq.values[0] - eq.values[2]) <= eq.tol);

  ChainReport empty = bmi_check(SetMask(g), ball, 0.5, spec);
  CHECK(empty.degenerate);
  CHECK(empty.passed());
}

TEST_CASE("bmi chain for a square and a thin rectangle of equal area") {
  Grid g({-4.0, -4.0}, {4.0, 4.0}, {160, 160});
  RearrangementSpec spec = RearrangementSpec::convex_body(ConvexBody::ball(1.0, 2), g);
  SetMask square = make_mask(Indicator{{BoxRegion{{-1.0, -1.0}, {1.0, 1.0}}}}, g);
  SetMask thin = make_mask(Indicator{{BoxRegion{{-2.0, -0.5}, {2.0, 0.5}}}}, g);
  ChainReport r = bmi_check(square, thin, 0.5, spec);
  CHECK(r.passed());
  CHECK(r.values[0] - r.values[1] > 0.2);
  CHECK(r.values[1] - r.values[2] > -r.tol);
}

TEST_CASE("property: bmi chain on seeded interval and polygon pairs") {
  oracle::SplitMix rng(2718);
  Grid line(-6.0, 6.0, 600);
  Grid plane({-5.0, -5.0}, {5.0, 5.0}, {80, 80});
  RearrangementSpec s1 = RearrangementSpec::convex_body(ConvexBody::ball(1.0, 1), line);
  RearrangementSpec s2 = RearrangementSpec::convex_body(ConvexBody::ball(1.0, 2), plane);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    double t = rng.uniform(0.1, 0.9);
    ChainReport r;
    if (trial % 2 == 0) {
      auto pick = [&] {
        double a = rng.uniform(-2.5, 2.0);
        return interval(line, a, a + rng.uniform(0.1, 2.0));
      };
      r = bmi_check(pick(), pick(), t, s1);
    } else {
      auto pick = [&] {
        double r0 = rng.uniform(0.5, 1.5);
        std::vector<Point> v;
        for (int k = 0; k < 5; ++k) {
          double ang = 2.0 * std::numbers::pi * (k + 0.3 * rng.uniform()) / 5.0;
          v.push_back({r0 * std::cos(ang), r0 * rng.uniform(0.5, 1.0) * std::sin(ang)});
        }
        return make_mask(Indicator{{BodyRegion{ConvexBody::polygon(v), {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, 1.0}}}, plane);
      };
      r = bmi_check(pick(), pick(), t, s2);
    }
    failures += r.passed() ? 0 : 1;
  }
  CHECK(failures == 0);
}

TEST_CASE("gaussian isoperimetry") {
  Grid g(-8.0, 8.0, 1024);
  SetMask half = make_mask(Indicator{{HalfSpaceRegion{{1.0, 0.0}, 0.3}}}, g);
  ChainReport r = gaussian_isoperimetry_check(half, 0.5);
  CHECK(r.passed());
  CHECK(std::abs(r.values[0] - gauss_phi(0.8)) <= 2 * g.spacing(0) * gauss_density(0.75));
  CHECK(std::abs(r.values[0] - r.values[1]) <= r.tol);

  ChainReport zero = gaussian_isoperimetry_check(half, 0.0);
  CHECK(zero.values[0] == doctest::Approx(zero.values[1]).epsilon(1e-12));

  // Two intervals of total mass 0.3.
  double b = gauss_phi_inv(gauss_phi(0.5) + 0.15);
  SetMask two = make_mask(Indicator{{BoxRegion{{-b, 0.0}, {-0.5, 0.0}}, BoxRegion{{0.5, 0.0}, {b, 0.0}}}}, g);
  CHECK(std::abs(volume(two, MeasureSpec::gaussian()) - 0.3) <= 2e-3);
  ChainReport strict = gaussian_isoperimetry_check(two, 0.5);
  CHECK(strict.passed());
  CHECK(strict.values[0] - strict.values[1] > 0.05);
  CHECK_THROWS_AS(gaussian_isoperimetry_check(half, -1.0), InvalidArgument);
}

}
