#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "../support/oracles.hpp"
#include "rpl/error.hpp"
#include "rpl/family.hpp"
#include "rpl/gauss.hpp"
#include "rpl/harness.hpp"

using namespace rpl;

namespace {

GridFunction interval_fn(const Grid& g, double a, double b, double v = 1.0) {
  return make_function(Indicator{{BoxRegion{{a, 0.0}, {b, 0.0}}}, v}, g);
}

RearrangementSpec ball(const Grid& g) { return RearrangementSpec::convex_body(ConvexBody::ball(1.0, g.dim()), g); }

bool within(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("pli: a log-concave function against itself") {
  Grid g(-8.0, 8.0, 256);
  GridFunction f = make_function(GaussianBump{{0.5, 0.0}, 1.0, 1.0}, g);
  ChainReport r = pli_chain(f, f, 0.3, ball(g));
  REQUIRE(r.values.size() == 3);
  CHECK(r.passed());
  CHECK(std::abs(r.values[0] - r.values[2]) <= r.tol);
  CHECK(r.values[0] >= r.values[2]);
  CHECK(within(r.values[0], r.values[1], 1e-9));
  CHECK(r.comparisons.size() == 2);
}

TEST_CASE("pli on indicators reproduces the bmi volumes") {
  Grid g(-4.0, 4.0, 800);
  GridFunction a = interval_fn(g, 0.0, 1.0), b = interval_fn(g, -1.0, 1.0);
  ChainReport p = pli_chain(a, b, 0.4, ball(g));
  ChainReport s = bmi_check(superlevel_set(a, 0.0), superlevel_set(b, 0.0), 0.4, ball(g));
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(p.values[k] - s.values[k]) <= 1e-12);
}

TEST_CASE("pli with monotone transforms on a seeded corpus") {
  Grid g(-4.0, 4.0, 128);
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    GridFunction f = make_function(PiecewiseRandom{6, seed}, g), h = make_function(PiecewiseRandom{6, seed + 50}, g);
    for (const PsiTransform& psi : {PsiTransform{Power{2.0}}, PsiTransform{Clamp{0.5}}, PsiTransform{Clamp{0.2}}}) {
      ChainReport r = pli_chain(f, h, 0.5, ball(g), psi);
      CHECK(r.values.size() == 2);
      failures += r.passed() ? 0 : 1;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("pli degenerate inputs") {
  Grid g(-2.0, 2.0, 64);
  ChainReport r = pli_chain(GridFunction(g), interval_fn(g, 0.0, 1.0), 0.5, ball(g));
  CHECK(r.degenerate);
  CHECK(r.passed());
  for (const auto& c : r.comparisons) CHECK(c.verdict == Verdict::Degenerate);
  CHECK_THROWS_AS(pli_chain(GridFunction(g), GridFunction(g), 1.0, ball(g)), InvalidArgument);
}

TEST_CASE("bbl: p = 0 is the pli chain") {
  Grid g(-4.0, 4.0, 128);
  GridFunction f = make_function(PiecewiseRandom{5, 1}, g), h = make_function(PiecewiseRandom{5, 2}, g);
  ChainReport b = bbl_chain(f, h, 0.35, ExtendedReal::finite(0.0), ball(g));
  ChainReport p = pli_chain(f, h, 0.35, ball(g));
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(b.values[k] - p.values[k]) <= 1e-12);
}

TEST_CASE("bbl: p = inf on ball indicators") {
  Grid g({-3.0, -3.0}, {3.0, 3.0}, {96, 96});
  GridFunction a = make_function(Indicator{{BallRegion{{0.5, 0.0}, 1.0}}}, g);
  GridFunction b = make_function(Indicator{{BallRegion{{-0.5, 0.5}, 0.6}}}, g);
  const double t = 0.5;
  ChainReport r = bbl_chain(a, b, t, ExtendedReal::pos_inf(), ball(g));
  CHECK(r.passed());
  double ia = volume(superlevel_set(a, 0.0), MeasureSpec::lebesgue());
  double ib = volume(superlevel_set(b, 0.0), MeasureSpec::lebesgue());
  double expect = std::pow((1 - t) * std::sqrt(ia) + t * std::sqrt(ib), 2.0);
  CHECK(r.values[2] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::abs(r.values[1] - expect) <= r.tol);
}

TEST_CASE("bbl: exponent boundary and rejection") {
  Grid g(-4.0, 4.0, 128);
  GridFunction f = interval_fn(g, -1.0, 0.5, 0.7), h = interval_fn(g, 0.0, 2.0, 0.3);
  ChainReport r = bbl_chain(f, h, 0.5, ExtendedReal::finite(-1.0), ball(g));
  CHECK(r.values[2] == doctest::Approx(std::min(integrate(f, MeasureSpec::lebesgue()), integrate(h, MeasureSpec::lebesgue()))));
  CHECK(r.passed());
  CHECK_THROWS_AS(bbl_chain(f, h, 0.5, ExtendedReal::finite(-2.0), ball(g)), PreconditionError);
}

TEST_CASE("ehrhard: half-line indicators are extremal") {
  Grid g(-8.0, 8.0, 512);
  std::vector<GridFunction> fs = {make_function(Indicator{{HalfSpaceRegion{{1.0, 0.0}, 0.5}}}, g),
                                  make_function(Indicator{{HalfSpaceRegion{{1.0, 0.0}, -1.0}}}, g)};
  const double w[2] = {0.5, 0.5};
  const std::size_t all[2] = {0, 1};
  ChainReport r = ehrhard_functional_chain(fs, w, all, g);
  CHECK(r.passed());
  CHECK(std::abs(r.values[0] - r.values[1]) <= 1e-9);
  CHECK(std::abs(r.values[1] - r.values[2]) <= 1e-6);
  CHECK_FALSE(r.advisory);
}

TEST_CASE("ehrhard: phi of affine functions") {
  Grid g(-6.0, 6.0, 400);
  std::vector<GridFunction> fs = {make_function(PhiConcave{0.3, {0.8, 0.0}, 0.0, {0.0, 0.0}}, g),
                                  make_function(PhiConcave{-0.2, {0.9, 0.0}, 0.0, {0.0, 0.0}}, g)};
  const double w[2] = {0.4, 0.6};
  const std::size_t all[2] = {0, 1};
  ChainReport r = ehrhard_functional_chain(fs, w, all, Grid(-8.0, 8.0, 400));
  CHECK(r.passed());
  CHECK(r.values[0] >= r.values[2] - r.tol);
}

TEST_CASE("ehrhard: weight and concavity preconditions") {
  Grid g(-8.0, 8.0, 128);
  std::vector<GridFunction> fs = {make_function(PhiConcave{0.3, {0.8, 0.0}, 0.0, {0.0, 0.0}}, g),
                                  interval_fn(g, -3.0, -1.0, 0.5)};
  fs[1] = GridFunction(g, [&] {
    std::vector<double> v(fs[1].values().begin(), fs[1].values().end());
    for (std::size_t i = 90; i < 100; ++i) v[i] = 0.5;
    return v;
  }());
  const std::size_t all[2] = {0, 1};
  const std::size_t first[1] = {0};
  const double small[2] = {0.3, 0.3};
  CHECK_THROWS_AS(ehrhard_functional_chain(fs, small, first, g), PreconditionError);
  const double lopsided[2] = {2.5, 0.5};
  CHECK_THROWS_AS(ehrhard_functional_chain(fs, lopsided, std::span<const std::size_t>(), g), PreconditionError);
  const double w[2] = {0.5, 0.5};
  try {
    (void)ehrhard_functional_chain(fs, w, all, g);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(e.witness().find("i=1") != std::string::npos);
  }
  ChainReport mixed = ehrhard_functional_chain(fs, w, first, g);
  CHECK(mixed.advisory);
}

TEST_CASE("ehrhard: the set case") {
  Grid g({-6.0, -6.0}, {6.0, 6.0}, {96, 96});
  std::vector<GridFunction> fs = {make_function(Indicator{{BallRegion{{0.5, 0.0}, 1.5}}}, g),
                                  make_function(Indicator{{BoxRegion{{-2.0, -1.0}, {1.0, 2.0}}}}, g)};
  const double w[2] = {0.5, 0.5};
  const std::size_t all[2] = {0, 1};
  ChainReport r = ehrhard_functional_chain(fs, w, all, Grid(-8.0, 8.0, 512));
  CHECK(r.passed());
  double a = volume(superlevel_set(fs[0], 0.0), MeasureSpec::gaussian());
  double b = volume(superlevel_set(fs[1], 0.0), MeasureSpec::gaussian());
  CHECK(std::abs(r.values[2] - gauss_phi(0.5 * gauss_phi_inv(a) + 0.5 * gauss_phi_inv(b))) <= 1e-12);
}

TEST_CASE("polar: constants in closed form") {
  Grid g(-2.0, 2.0, 64);
  const double c = 0.6, t = 0.3, lambda = 0.3;
  GridFunction f(g, std::vector<double>(g.size(), c));
  GridFunction h(g, std::vector<double>(g.size(), c));
  ChainReport r = polar_pli_chain(f, h, t, lambda, ball(g));
  double m = std::min(std::pow(c, (1 - t) / (1 - lambda)), std::pow(c, t / lambda));
  CHECK(r.values[0] == doctest::Approx(m * 4.0).epsilon(1e-12));
  CHECK(r.values[2] == doctest::Approx(c * 4.0).epsilon(1e-12));
  CHECK(r.passed());
}

TEST_CASE("polar: indicators and gaussian half-lines") {
  Grid g(-4.0, 4.0, 256);
  ChainReport leb = polar_pli_chain(interval_fn(g, -1.0, 0.0), interval_fn(g, 0.0, 1.5), 0.4, 0.4, ball(g));
  CHECK(leb.passed());
  Grid src(-5.0, 5.0, 200);
  RearrangementSpec half = RearrangementSpec::gaussian_half_space(src, Grid(-8.0, 8.0, 256));
  GridFunction f = make_function(PiecewiseRandom{5, 4}, src), h = make_function(PiecewiseRandom{5, 8}, src);
  ChainReport gs = polar_pli_chain(f, h, 0.6, 0.6, half);
  CHECK(gs.passed());
}

TEST_CASE("polar: the final inequality needs t = lambda") {
  Grid g(-2.0, 14.0, 320);
  ChainReport r = polar_pli_chain(interval_fn(g, 0.0, 1.0), interval_fn(g, 0.0, 10.0), 0.1, 0.9, ball(g));
  CHECK_FALSE(r.passed());
  CHECK(r.comparisons.back().verdict == Verdict::Fail);
}

TEST_CASE("lsi: exponential equality case") {
  Grid g(-10.0, 10.0, 1024);
  GridFunction f = make_function(ExpLinear{{0.7, 0.0}}, g);
  ChainReport r = integrated_lsi_chain(f, 0.5, g);
  const double exact = std::exp(0.7 * 0.7 * 1.5 / 2);
  for (double v : r.values) CHECK(within(v, exact, 0.01));
  CHECK(r.passed());
}

TEST_CASE("lsi: half-line indicator has a strict gap") {
  Grid g(-8.0, 8.0, 512);
  GridFunction f = make_function(Indicator{{HalfSpaceRegion{{1.0, 0.0}, 0.0}}}, g);
  ChainReport r = integrated_lsi_chain(f, 0.5, g);
  CHECK(r.passed());
  CHECK(r.values[0] - r.values[2] > 0.05);
  ChainReport z = integrated_lsi_chain(GridFunction(g), 0.5, g);
  CHECK(z.degenerate);
}

TEST_CASE("lsi: seeded piecewise functions") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Grid g({-4.0, -4.0}, {4.0, 4.0}, {32, 32});
    ChainReport r = integrated_lsi_chain(make_function(PiecewiseRandom{6, seed}, g), 0.5, Grid(-8.0, 8.0, 512));
    CHECK(r.passed());
  }
}

TEST_CASE("dominance: fixed point and strict case") {
  Grid g(-8.0, 8.0, 512);
  const std::vector<double> levels = {0.1, 0.3, 0.5, 0.7, 0.9};
  GridFunction dec = make_function(PhiConcave{0.3, {-1.0, 0.0}, 0.0, {0.0, 0.0}}, g);
  ChainReport fixed = superlevel_dominance_check(dec, 0.5, levels, g);
  CHECK(fixed.passed());
  for (const auto& c : fixed.comparisons) CHECK(std::abs(c.gap) <= fixed.tol);

  GridFunction centred = interval_fn(g, -0.5, 0.5);
  ChainReport strict = superlevel_dominance_check(centred, 0.5, levels, g);
  CHECK(strict.passed());
  CHECK(strict.comparisons[2].gap > 0.01);
}

TEST_CASE("dominance: 2-D seeded function at 8 levels") {
  Grid g({-4.0, -4.0}, {4.0, 4.0}, {32, 32});
  const std::vector<double> levels = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  ChainReport r = superlevel_dominance_check(make_function(LogConcaveRandom{7}, g), 0.5, levels, Grid(-8.0, 8.0, 512));
  CHECK(r.passed());
  CHECK(r.comparisons.size() == 8);
  CHECK(r.checks.size() == 8);
}

TEST_CASE("curved pli") {
  Grid g(-4.0, 4.0, 64);
  GridFunction v = make_function(GaussianBump{{-0.5, 0.0}, 1.0, 1.0}, g);
  GridFunction w = make_function(GaussianBump{{1.0, 0.0}, 0.7, 0.8}, g);
  ChainReport r = curved_pli_check(std::nullopt, v, w, 0.4);
  CHECK(r.passed());

  GridFunction one(g, std::vector<double>(g.size(), 1.0));
  ChainReport eq = curved_pli_check(one, one, one, 0.5);
  CHECK(eq.passed());
  CHECK(eq.values[0] == doctest::Approx(eq.values[1]).epsilon(1e-12));

  GridFunction low(g, std::vector<double>(g.size(), 0.5));
  try {
    (void)curved_pli_check(low, one, one, 0.5);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(e.witness().find("x=cell") != std::string::npos);
  }
}

TEST_CASE("curved pli: the minimal admissible function satisfies the hypothesis") {
  oracle::SplitMix rng(12);
  Grid g(-3.0, 3.0, 40);
  for (int trial = 0; trial < 5; ++trial) {
    GridFunction v = oracle::random_steps(g, rng, 3, 4), w = oracle::random_steps(g, rng, 3, 4);
    if (v.is_zero() || w.is_zero()) continue;
    double t = rng.uniform(0.2, 0.8);
    GridFunction u = minimal_admissible_u(v, w, t);
    CHECK(curved_pli_check(u, v, w, t).passed());
  }
}

TEST_CASE("discrete phi concavity") {
  Grid g(-6.0, 6.0, 256);
  CHECK(discrete_phi_concavity(make_function(PhiConcave{0.4, {-0.3, 0.0}, 0.2, {0.0, 0.0}}, g), 1e-9).concave);
  std::vector<double> convex(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.center_of(i)[0];
    convex[i] = gauss_phi(0.4 - 0.3 * x + 0.1 * x * x - 2.0);
  }
  ConcavityResult bad = discrete_phi_concavity(GridFunction(g, convex), 1e-9);
  CHECK_FALSE(bad.concave);
  CHECK_FALSE(bad.witness.empty());
  std::vector<double> gap(g.size(), 0.0);
  for (std::size_t i = 50; i < 80; ++i) gap[i] = 0.5;
  for (std::size_t i = 120; i < 140; ++i) gap[i] = 0.5;
  CHECK_FALSE(discrete_phi_concavity(GridFunction(g, gap), 1e-9).concave);
}

TEST_CASE("concavity preservation") {
  Grid g(-6.0, 6.0, 256);
  Grid target(-8.0, 8.0, 512);
  RearrangementSpec half = RearrangementSpec::gaussian_half_space(g, target);
  ChainReport affine = concavity_preservation_check(make_function(PhiConcave{0.2, {0.6, 0.0}, 0.0, {0.0, 0.0}}, g), half);
  CHECK(affine.passed());
  ChainReport bumpish = concavity_preservation_check(make_function(PhiConcave{0.0, {0.0, 0.0}, 1.0, {0.5, 0.0}}, g), half);
  CHECK(bumpish.passed());
  GridFunction two = make_function(Indicator{{BoxRegion{{-3.0, 0.0}, {-1.0, 0.0}}, BoxRegion{{1.0, 0.0}, {3.0, 0.0}}}, 0.5}, g);
  CHECK_THROWS_AS(concavity_preservation_check(two, half), PreconditionError);
}

TEST_CASE("convergence studies") {
  auto pli = [](int n) {
    Grid g(-8.0, 8.0, n);
    GridFunction f = make_function(GaussianBump{{0.0, 0.0}, 1.0, 1.0}, g);
    GridFunction h = make_function(GaussianBump{{0.0, 0.0}, 1.25, 1.0}, g);
    return pli_chain(f, h, 0.5, ball(g));
  };
  const int res[3] = {128, 256, 512};
  const double limit = std::sqrt(std::numbers::pi * (1 + 1.5625)) - std::sqrt(2 * std::numbers::pi * 1.25);
  const std::optional<double> limits[2] = {0.0, limit};
  ConvergenceReport r = convergence_study(pli, res, limits);
  CHECK(r.passed());
  CHECK(r.rows.size() == 3);
  CHECK(r.min_ratio[1] >= 1.7);

  auto bmi = [](int n) {
    Grid g(-4.0, 4.0, n);
    auto iv = [&](double a, double b) { return make_mask(Indicator{{BoxRegion{{a, 0.0}, {b, 0.0}}}}, g); };
    return bmi_check(iv(0.013, 1.0), iv(0.0, 2.0), 0.5, ball(g));
  };
  const int bmi_res[4] = {100, 200, 400, 800};
  ConvergenceReport b = convergence_study(bmi, bmi_res, {});
  CHECK(b.violations_ok);
  std::string csv = to_csv(b);
  CHECK(csv.rfind("chain,gap,n,h,value,limit,error,tol\n", 0) == 0);

  const int single[1] = {128};
  CHECK_THROWS_AS(convergence_study(pli, single, {}), InvalidArgument);
}

TEST_CASE("reports serialize") {
  Grid g(-4.0, 4.0, 64);
  ChainReport r = pli_chain(interval_fn(g, 0.0, 1.0), interval_fn(g, 0.0, 2.0), 0.5, ball(g));
  std::string csv = to_csv(r);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "chain,term,value,gap,tol,verdict");
  CHECK(csv.find("pli,check:equimeasurable_f") != std::string::npos);
  auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["chain"] == "pli");
  CHECK(j["terms"].size() == 3);
  CHECK(j["passed"] == true);
}

}
