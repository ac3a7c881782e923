#include "rpl/family.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rpl/error.hpp"
#include "rpl/gauss.hpp"
#include "overloaded.hpp"

namespace rpl {

namespace {

double dot(Point a, Point b, int dim) { return a[0] * b[0] + (dim == 2 ? a[1] * b[1] : 0.0); }

double dist2(Point a, Point b, int dim) {
  double d0 = a[0] - b[0];
  double d1 = dim == 2 ? a[1] - b[1] : 0.0;
  return d0 * d0 + d1 * d1;
}

template <class F>
GridFunction sample(const Grid& grid, F&& f) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid.center_of(i));
  return GridFunction(grid, std::move(values));
}

std::vector<int> random_cuts(Rng& rng, int begin, int end, int pieces) {
  // pieces - 1 distinct interior cut points, sorted.
  int span = end - begin;
  pieces = std::clamp(pieces, 1, span);
  std::vector<int> interior(static_cast<std::size_t>(span - 1));
  std::iota(interior.begin(), interior.end(), begin + 1);
  for (int k = 0; k < pieces - 1; ++k) {
    int j = k + rng.below(static_cast<int>(interior.size()) - k);
    std::swap(interior[k], interior[j]);
  }
  std::vector<int> cuts(interior.begin(), interior.begin() + (pieces - 1));
  cuts.push_back(begin);
  cuts.push_back(end);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

std::vector<double> piece_values(Rng& rng, int levels, int pieces) {
  std::vector<double> values;
  while (static_cast<int>(values.size()) < levels) {
    double v = rng.uniform(0.05, 0.95);
    bool fresh = std::none_of(values.begin(), values.end(),
                              [&](double w) { return std::abs(w - v) < 1e-3; });
    if (fresh) values.push_back(v);
  }
  std::vector<double> assigned(static_cast<std::size_t>(pieces));
  for (int k = 0; k < pieces; ++k) {
    if (k < levels) {
      assigned[k] = values[k];
    } else {
      assigned[k] = rng.below(6) == 0 ? 0.0 : values[rng.below(levels)];
    }
  }
  for (int k = pieces - 1; k > 0; --k) std::swap(assigned[k], assigned[rng.below(k + 1)]);
  return assigned;
}

GridFunction piecewise_random(const PiecewiseRandom& p, const Grid& grid) {
  if (p.levels < 1) throw InvalidArgument("PiecewiseRandom: levels must be >= 1");
  Rng rng(p.seed);
  std::vector<double> values(grid.size(), 0.0);
  auto support = [&](int axis) {
    int n = grid.n(axis);
    return std::pair<int, int>{n / 4, n - n / 4};
  };
  if (grid.dim() == 1) {
    auto [b, e] = support(0);
    int pieces = std::min(2 * p.levels, e - b);
    if (pieces < p.levels) throw InvalidArgument("PiecewiseRandom: grid too coarse for the level count");
    auto cuts = random_cuts(rng, b, e, pieces);
    auto assigned = piece_values(rng, p.levels, pieces);
    for (int k = 0; k < pieces; ++k) {
      for (int i = cuts[k]; i < cuts[k + 1]; ++i) values[i] = assigned[k];
    }
    return GridFunction(grid, std::move(values));
  }
  int m = static_cast<int>(std::ceil(std::sqrt(2.0 * p.levels)));
  auto [b0, e0] = support(0);
  auto [b1, e1] = support(1);
  if (m > e0 - b0 || m > e1 - b1) throw InvalidArgument("PiecewiseRandom: grid too coarse for the level count");
  auto cuts0 = random_cuts(rng, b0, e0, m);
  auto cuts1 = random_cuts(rng, b1, e1, m);
  auto assigned = piece_values(rng, p.levels, m * m);
  for (int a = 0; a < m; ++a) {
    for (int c = 0; c < m; ++c) {
      for (int i = cuts0[a]; i < cuts0[a + 1]; ++i) {
        for (int j = cuts1[c]; j < cuts1[c + 1]; ++j) values[grid.flat(i, j)] = assigned[a * m + c];
      }
    }
  }
  return GridFunction(grid, std::move(values));
}

GridFunction log_concave_random(const LogConcaveRandom& p, const Grid& grid) {
  Rng rng(p.seed);
  const int dim = grid.dim();
  Point center{0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    double mid = 0.5 * (grid.lo(a) + grid.hi(a));
    double quarter = 0.125 * (grid.hi(a) - grid.lo(a));
    center[a] = rng.uniform(mid - quarter, mid + quarter);
  }
  std::vector<Point> slopes;
  std::vector<double> intercepts;
  if (dim == 1) {
    for (double sign : {1.0, 1.0, -1.0, -1.0}) {
      slopes.push_back({sign * rng.uniform(0.5, 2.0), 0.0});
      intercepts.push_back(rng.uniform(-1.0, 0.0));
    }
  } else {
    const int k = 6;
    for (int j = 0; j < k; ++j) {
      double theta = 2.0 * std::numbers::pi * (j + rng.uniform(-0.25, 0.25)) / k;
      double r = rng.uniform(0.5, 2.0);
      slopes.push_back({r * std::cos(theta), r * std::sin(theta)});
      intercepts.push_back(rng.uniform(-1.0, 0.0));
    }
  }
  std::vector<double> potential(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Point x = grid.center_of(i);
    Point d{x[0] - center[0], x[1] - center[1]};
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < slopes.size(); ++j) v = std::max(v, dot(slopes[j], d, dim) + intercepts[j]);
    potential[i] = v;
  }
  double vmin = *std::min_element(potential.begin(), potential.end());
  for (double& v : potential) v = std::exp(-(v - vmin));
  return GridFunction(grid, std::move(potential));
}

}  // namespace

bool region_contains(const Region& region, Point x, int dim) {
  return std::visit(
      overloaded{
          [&](const BoxRegion& b) {
            for (int a = 0; a < dim; ++a) {
              if (!(x[a] > b.lo[a] && x[a] < b.hi[a])) return false;
            }
            return true;
          },
          [&](const BallRegion& b) { return dist2(x, b.center, dim) < b.radius * b.radius; },
          [&](const HalfSpaceRegion& h) { return dot(h.normal, x, dim) < h.offset; },
          [&](const BodyRegion& b) {
            return b.body.gauge({x[0] - b.shift[0], x[1] - b.shift[1]}) < b.scale;
          },
      },
      region);
}

SetMask make_mask(const Indicator& family, const Grid& grid) {
  SetMask mask(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Point x = grid.center_of(i);
    for (const Region& r : family.regions) {
      if (region_contains(r, x, grid.dim())) {
        mask.set(i);
        break;
      }
    }
  }
  return mask;
}

GridFunction make_function(const FamilySpec& family, const Grid& grid) {
  const int dim = grid.dim();
  return std::visit(
      overloaded{
          [&](const GaussianBump& b) {
            if (!(b.sigma > 0.0) || !(b.amplitude >= 0.0)) {
              throw InvalidArgument("GaussianBump: need sigma > 0 and amplitude >= 0");
            }
            double s2 = 2.0 * b.sigma * b.sigma;
            return sample(grid, [&](Point x) { return b.amplitude * std::exp(-dist2(x, b.center, dim) / s2); });
          },
          [&](const Indicator& ind) {
            if (!(ind.value > 0.0)) throw InvalidArgument("Indicator: value must be positive");
            for (const Region& r : ind.regions) {
              if (auto* body = std::get_if<BodyRegion>(&r); body && body->body.dim() != dim) {
                throw InvalidArgument("Indicator: body dimension differs from the grid");
              }
            }
            SetMask mask = make_mask(ind, grid);
            std::vector<double> values(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) values[i] = mask.contains(i) ? ind.value : 0.0;
            return GridFunction(grid, std::move(values));
          },
          [&](const ExpLinear& e) {
            if (!(e.clip > 0.0)) throw InvalidArgument("ExpLinear: clip must be positive");
            return sample(grid, [&](Point x) { return std::min(std::exp(dot(e.slope, x, dim)), e.clip); });
          },
          [&](const PiecewiseRandom& p) { return piecewise_random(p, grid); },
          [&](const LogConcaveRandom& p) { return log_concave_random(p, grid); },
          [&](const PhiConcave& p) {
            if (!(p.curvature >= 0.0)) throw InvalidArgument("PhiConcave: curvature must be >= 0");
            return sample(grid, [&](Point x) {
              return gauss_phi(p.offset + dot(p.slope, x, dim) - p.curvature * dist2(x, p.center, dim));
            });
          },
      },
      family);
}

bool resampleable(const FamilySpec& family) {
  return !std::holds_alternative<PiecewiseRandom>(family);
}

std::string family_name(const FamilySpec& family) {
  return std::visit(overloaded{
                        [](const GaussianBump&) { return std::string("gaussian_bump"); },
                        [](const Indicator&) { return std::string("indicator"); },
                        [](const ExpLinear&) { return std::string("exp_linear"); },
                        [](const PiecewiseRandom&) { return std::string("piecewise_random"); },
                        [](const LogConcaveRandom&) { return std::string("log_concave_random"); },
                        [](const PhiConcave&) { return std::string("phi_concave"); },
                    },
                    family);
}

}  // namespace rpl
