#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "rpl/convexsets.hpp"
#include "rpl/grid.hpp"

namespace rpl {

// amplitude * exp(-|x - center|^2 / (2 sigma^2)).
struct GaussianBump {
  Point center{0.0, 0.0};
  double sigma = 1.0;
  double amplitude = 1.0;
};

// Open regions for indicator functions.
struct BoxRegion {
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};
};
struct BallRegion {
  Point center{0.0, 0.0};
  double radius = 1.0;
};
// {normal . x < offset}
struct HalfSpaceRegion {
  Point normal{1.0, 0.0};
  double offset = 0.0;
};
// {gauge_K(x - shift) < scale}
struct BodyRegion {
  ConvexBody body = ConvexBody::ball(1.0, 1);
  Point shift{0.0, 0.0};
  double scale = 1.0;
};
using Region = std::variant<BoxRegion, BallRegion, HalfSpaceRegion, BodyRegion>;

// value * indicator of the union of the regions.
struct Indicator {
  std::vector<Region> regions;
  double value = 1.0;
};

// min(exp(slope . x), clip).
struct ExpLinear {
  Point slope{1.0, 0.0};
  double clip = std::numeric_limits<double>::infinity();
};

// Random piecewise-constant function on the middle half of the box with
// `levels` distinct values in [0.05, 0.95]. The pieces are laid out in cell
// units, so the function depends on the grid and cannot be re-sampled.
struct PiecewiseRandom {
  int levels = 8;
  std::uint64_t seed = 0;
};

// exp(-V) with V a random max of affine functions, shifted so that max f = 1
// on the grid.
struct LogConcaveRandom {
  std::uint64_t seed = 0;
};

// Phi(offset + slope . x - curvature |x - center|^2); Phi^{-1} of it is
// concave whenever curvature >= 0.
struct PhiConcave {
  double offset = 0.0;
  Point slope{0.0, 0.0};
  double curvature = 0.0;
  Point center{0.0, 0.0};
};

using FamilySpec =
    std::variant<GaussianBump, Indicator, ExpLinear, PiecewiseRandom, LogConcaveRandom, PhiConcave>;

GridFunction make_function(const FamilySpec& family, const Grid& grid);
SetMask make_mask(const Indicator& family, const Grid& grid);
bool region_contains(const Region& region, Point x, int dim);

// Whether the family is defined pointwise on R^d and can be sampled at any
// resolution.
bool resampleable(const FamilySpec& family);
std::string family_name(const FamilySpec& family);

// std::mt19937_64 with fixed mappings to doubles and integers; the standard
// distributions are implementation-defined, these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(uniform() * n); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rpl
