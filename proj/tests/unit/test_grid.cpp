#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../support/oracles.hpp"
#include "rpl/error.hpp"
#include "rpl/family.hpp"
#include "rpl/gauss.hpp"
#include "rpl/grid.hpp"
#include "rpl/io.hpp"

using namespace rpl;

TEST_SUITE("grid") {

TEST_CASE("grid geometry") {
  Grid g(-2.0, 2.0, 8);
  CHECK(g.dim() == 1);
  CHECK(g.spacing(0) == doctest::Approx(0.5));
  CHECK(g.center(0, 0) == doctest::Approx(-1.75));
  CHECK(g.nearest(0, 0.1) == 4);
  CHECK(g.nearest(0, 2.5) == -1);
  CHECK_THROWS_AS(Grid(1.0, 0.0, 4), InvalidArgument);
  CHECK_THROWS_AS(Grid(0.0, 1.0, 1), InvalidArgument);
  Grid g2({-1.0, 0.0}, {1.0, 4.0}, {4, 8});
  CHECK(g2.size() == 32);
  CHECK(g2.cell_volume() == doctest::Approx(0.25));
  auto idx = g2.index_of(g2.flat(2, 5));
  CHECK(idx[0] == 2);
  CHECK(idx[1] == 5);
}

TEST_CASE("integrate") {
  Grid g(0.0, 1.0, 100);
  CHECK(integrate(GridFunction(g), MeasureSpec::lebesgue()) == 0.0);
  GridFunction one(g, std::vector<double>(100, 1.0));
  CHECK(std::abs(integrate(one, MeasureSpec::lebesgue()) - 1.0) <= 1e-12);

  Grid w(-8.0, 8.0, 512);
  std::vector<double> v(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) v[i] = gauss_density(w.center_of(i)[0]);
  CHECK(std::abs(integrate(GridFunction(w, v), MeasureSpec::lebesgue()) - 1.0) <= 1e-6);
}

TEST_CASE("gaussian cell weights are the centre density times the cell volume") {
  Grid g({-1.0, -1.0}, {1.0, 1.0}, {4, 4});
  std::size_t c = g.flat(1, 2);
  Point x = g.center_of(c);
  double expect = gauss_density(x[0]) * gauss_density(x[1]) * g.cell_volume();
  CHECK(cell_weight(g, c, MeasureSpec::gaussian()) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("grid functions reject negative and non-finite values") {
  Grid g(0.0, 1.0, 4);
  CHECK_THROWS_AS(GridFunction(g, {1.0, -0.5, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(GridFunction(g, {1.0, std::nan(""), 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(GridFunction(g, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("superlevel sets are strict") {
  Grid g(-2.0, 2.0, 40);
  GridFunction one(g, std::vector<double>(40, 1.0));
  CHECK(superlevel_set(one, 1.0).empty());
  CHECK(superlevel_set(one, 0.5).count() == 40);
  GridFunction ind = make_function(Indicator{{BoxRegion{{0.0, 0.0}, {1.0, 0.0}}}}, g);
  SetMask m = superlevel_set(ind, 0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.center_of(i)[0];
    CHECK(m.contains(i) == (x > 0.0 && x < 1.0));
  }
}

TEST_CASE("distribution function") {
  Grid g(-2.0, 2.0, 40);
  CHECK(distribution_function(GridFunction(g), MeasureSpec::lebesgue())(0.0) == 0.0);
  GridFunction two = make_function(Indicator{{BoxRegion{{0.0, 0.0}, {1.0, 0.0}}}, 2.0}, g);
  DistributionFunction d = distribution_function(two, MeasureSpec::lebesgue());
  CHECK(d(0.0) == doctest::Approx(1.0));
  CHECK(d(1.999) == doctest::Approx(1.0));
  CHECK(d(2.0) == 0.0);
  CHECK(d(3.0) == 0.0);
}

TEST_CASE("distribution function matches a brute-force count") {
  Grid g(-4.0, 4.0, 256);
  GridFunction f = make_function(PiecewiseRandom{8, 42}, g);
  DistributionFunction d = distribution_function(f, MeasureSpec::lebesgue());
  double previous = d(0.0);
  for (double lambda : d.breakpoints()) {
    std::size_t cells = 0;
    for (std::size_t i = 0; i < f.size(); ++i) cells += f[i] > lambda ? 1 : 0;
    CHECK(d(lambda) == doctest::Approx(static_cast<double>(cells) * g.cell_volume()).epsilon(1e-12));
    CHECK(d(lambda) <= previous);
    previous = d(lambda);
  }
}

TEST_CASE("threshold ladders") {
  Grid g(0.0, 1.0, 3);
  ThresholdLadder l = threshold_ladder(GridFunction(g, {0.0, 1.0, 3.0}), AllValues{});
  REQUIRE(l.size() == 2);
  CHECK(l[0] == 1.0);
  CHECK(l[1] == 3.0);
  ThresholdLadder c = threshold_ladder(GridFunction(g, {0.7, 0.7, 0.7}), AllValues{});
  REQUIRE(c.size() == 1);
  CHECK(c[0] == 0.7);
  CHECK_THROWS_AS(threshold_ladder(GridFunction(g), AllValues{}), InvalidArgument);
  CHECK_THROWS_AS(ThresholdLadder({1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(ThresholdLadder({0.0, 1.0}), InvalidArgument);
}

TEST_CASE("quantile ladder levels are equidistributed in measure") {
  Grid g(-6.0, 6.0, 2048);
  GridFunction f = make_function(GaussianBump{{0.0, 0.0}, 1.0, 1.0}, g);
  ThresholdLadder l = threshold_ladder(f, Quantile{16});
  CHECK(l.size() == 16);
  DistributionFunction d = distribution_function(f, MeasureSpec::lebesgue());
  double total = d(0.0);
  for (std::size_t k = 0; k + 1 < l.size(); ++k) {
    double expected = (1.0 - static_cast<double>(k + 1) / 16.0) * total;
    CHECK(std::abs(d(l[k]) - expected) <= 4 * g.spacing(0));
  }
  CHECK(l.top() == f.max());
}

TEST_CASE("layer cake") {
  Grid g(0.0, 1.0, 10);
  SetMask a(g);
  for (std::size_t i = 2; i < 6; ++i) a.set(i);
  ThresholdLadder one({1.0});
  SetMask masks[1] = {a};
  GridFunction f = layer_cake(one, masks);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(f[i] == (a.contains(i) ? 1.0 : 0.0));

  SetMask b(g);
  b.set(7);
  SetMask bad[2] = {a, b};
  CHECK_THROWS_AS(layer_cake(ThresholdLadder({1.0, 2.0}), bad), InvalidArgument);

  SetMask capped[2] = {a, SetMask(g)};
  GridFunction c = layer_cake(ThresholdLadder({1.0, 2.0}), capped);
  CHECK(c.max() == 1.0);
}

TEST_CASE("property: layer cake reproduces piecewise-constant functions exactly") {
  oracle::SplitMix rng(20240611);
  for (int trial = 0; trial < 50; ++trial) {
    Grid g(-1.0, 1.0, 64 + rng.below(64));
    GridFunction f = oracle::random_steps(g, rng, 2 + rng.below(7), 1 + rng.below(12));
    if (f.is_zero()) continue;
    ThresholdLadder l = threshold_ladder(f, AllValues{});
    std::vector<SetMask> masks = ladder_masks(f, l);
    GridFunction r = layer_cake(l, masks);
    for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(r[i] == f[i]);
  }
}

TEST_CASE("property: integral equals the layer-cake sum of tail measures") {
  oracle::SplitMix rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    Grid g(-3.0, 3.0, 100);
    GridFunction f = oracle::random_steps(g, rng, 5, 9);
    if (f.is_zero()) continue;
    const MeasureSpec m = trial % 2 ? MeasureSpec::gaussian() : MeasureSpec::lebesgue();
    ThresholdLadder l = threshold_ladder(f, AllValues{});
    DistributionFunction d = distribution_function(f, m);
    double sum = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) sum += (l[k] - l.below(k)) * d(l.below(k));
    double direct = integrate(f, m);
    CHECK(std::abs(sum - direct) <= 1e-12 * direct);
  }
}

TEST_CASE("normal distribution function") {
  CHECK(gauss_phi(0.0) == 0.5);
  CHECK(std::abs(gauss_phi_inv(gauss_phi(1.2345)) - 1.2345) <= 1e-9);
  CHECK(std::abs(gauss_phi(1.0) - static_cast<double>(oracle::kPhiOfOne)) <= 1e-9);
  CHECK_THROWS_AS(gauss_phi_inv(0.0), DomainError);
  CHECK_THROWS_AS(gauss_phi_inv(1.0), DomainError);
  CHECK(gauss_phi_inv_extended(0.0) == -INFINITY);
  CHECK(gauss_phi_inv_extended(1.0) == INFINITY);
}

TEST_CASE("normal distribution function agrees with the series oracle") {
  for (double x = -7.5; x <= 7.5; x += 0.37) {
    long double ref = oracle::phi(x);
    CHECK(std::abs(gauss_phi(x) - static_cast<double>(ref)) <= 1e-15 + 1e-12 * static_cast<double>(ref));
  }
  double prev = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.01) {
    double v = gauss_phi(x);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("families") {
  Grid g(-2.0, 2.0, 5);
  GridFunction bump = make_function(GaussianBump{{0.0, 0.0}, 1.0, 1.0}, g);
  CHECK(bump[2] == 1.0);
  GridFunction ind = make_function(Indicator{{BallRegion{{0.0, 0.0}, 1.0}}}, Grid(-2.0, 2.0, 64));
  for (double v : ind.values()) CHECK((v == 0.0 || v == 1.0));
  Grid p(-4.0, 4.0, 256);
  GridFunction a = make_function(PiecewiseRandom{8, 7}, p);
  GridFunction b = make_function(PiecewiseRandom{8, 7}, p);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  CHECK(threshold_ladder(a, AllValues{}).size() == 8);
  GridFunction e = make_function(ExpLinear{{1.0, 0.0}, 2.0}, Grid(-4.0, 4.0, 16));
  CHECK(e.max() == 2.0);
  GridFunction lc = make_function(LogConcaveRandom{5}, Grid({-2.0, -2.0}, {2.0, 2.0}, {16, 16}));
  CHECK(lc.max() == doctest::Approx(1.0));
  CHECK(resampleable(GaussianBump{}));
  CHECK_FALSE(resampleable(PiecewiseRandom{}));
}

TEST_CASE("grid function files round-trip") {
  Grid g({-1.0, 0.0}, {1.0, 2.0}, {3, 4});
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i) + 1.0 / 3.0;
  std::stringstream s;
  write_function(s, GridFunction(g, v));
  GridFunction back = read_function(s);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(back[i] == v[i]);

  std::stringstream neg("1 2 0 1\n0.5 -1\n");
  CHECK_THROWS_AS(read_function(neg), Error);
  std::stringstream text("1 2 0 1\n0.5 x\n");
  CHECK_THROWS_AS(read_function(text), InvalidArgument);

  SetMask m(g);
  m.set(3);
  std::stringstream ms;
  write_mask(ms, m);
  CHECK(read_mask(ms) == m);
}

}
