#include "rpl/supconv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rpl/convexsets.hpp"
#include "rpl/error.hpp"
#include "rpl/parallel.hpp"

namespace rpl {

namespace {

constexpr std::size_t kMaxOutputLevels = 512;
constexpr std::size_t kAutoTupleLimit = 4096;

void check_inputs(std::span<const GridFunction> fs, const MeanSpec& mean, const ComboMap& combo,
                  const Grid& out, const char* what) {
  if (fs.size() < 2) throw InvalidArgument(std::string(what) + ": need at least two functions");
  if (combo.t.size() != fs.size()) throw InvalidArgument(std::string(what) + ": need one weight per function");
  if (arity(mean) != fs.size()) throw InvalidArgument(std::string(what) + ": mean arity differs from function count");
  validate(mean);
  for (const GridFunction& f : fs) {
    if (f.grid().dim() != out.dim()) throw GridMismatch(std::string(what) + ": dimensions differ");
  }
  for (double w : combo.t) {
    if (!std::isfinite(w)) throw InvalidArgument(std::string(what) + ": weights must be finite");
  }
}

// Centre bounding box of {f > 0} on one axis.
bool support_range(const GridFunction& f, int axis, double& lo, double& hi) {
  const Grid& g = f.grid();
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] <= 0.0) continue;
    double c = g.center_of(i)[axis];
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return lo <= hi;
}

void check_support_fits(std::span<const GridFunction> fs, const ComboMap& combo, const Grid& out,
                        const char* what) {
  for (int a = 0; a < out.dim(); ++a) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      double l, h;
      if (!support_range(fs[i], a, l, h)) return;
      double w = combo.t[i];
      lo += w >= 0 ? w * l : w * h;
      hi += w >= 0 ? w * h : w * l;
    }
    double slack = 1e-9 * out.spacing(a);
    if (lo < out.lo(a) - slack || hi > out.hi(a) + slack) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": combination of the supports [" << lo << ", " << hi << "] on axis " << a
         << " leaves the output box [" << out.lo(a) << ", " << out.hi(a) << "]";
      throw BoundsError(os.str());
    }
  }
}

std::vector<double> thin_levels(std::vector<double> levels, bool& thinned) {
  thinned = levels.size() > kMaxOutputLevels;
  if (!thinned) return levels;
  std::vector<double> kept;
  const std::size_t n = levels.size();
  for (std::size_t k = 0; k < kMaxOutputLevels; ++k) {
    std::size_t idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * (n - 1) / (kMaxOutputLevels - 1)));
    if (kept.empty() || levels[idx] > kept.back()) kept.push_back(levels[idx]);
  }
  return kept;
}

}  // namespace

GridFunction sup_convolve_direct(std::span<const GridFunction> fs, const MeanSpec& mean,
                                 const ComboMap& combo, const Grid& out) {
  check_inputs(fs, mean, combo, out, "sup_convolve_direct");
  if (fs.size() != 2) throw InvalidArgument("sup_convolve_direct: exactly two functions");
  const double t1 = combo.t[0];
  const double t2 = combo.t[1];
  if (t2 == 0.0) throw InvalidArgument("sup_convolve_direct: t_2 must be non-zero");
  check_support_fits(fs, combo, out, "sup_convolve_direct");

  const GridFunction& f1 = fs[0];
  const GridFunction& f2 = fs[1];
  const Grid& g1 = f1.grid();
  const Grid& g2 = f2.grid();
  const int dim = out.dim();
  struct Source {
    Point x;
    double v;
  };
  std::vector<Source> support;
  for (std::size_t i = 0; i < f1.size(); ++i) {
    if (f1[i] > 0.0) support.push_back({g1.center_of(i), f1[i]});
  }
  std::vector<double> values(out.size(), 0.0);
  parallel_for(static_cast<std::size_t>(out.row_count()), [&](std::size_t row) {
    const int len = out.row_length();
    double u[2];
    for (int j = 0; j < len; ++j) {
      std::size_t cell = dim == 1 ? out.flat(j) : out.flat(static_cast<int>(row), j);
      Point z = out.center_of(cell);
      double best = 0.0;
      for (const Source& s : support) {
        int k0 = g2.nearest(0, (z[0] - t1 * s.x[0]) / t2);
        if (k0 < 0) continue;
        int k1 = 0;
        if (dim == 2) {
          k1 = g2.nearest(1, (z[1] - t1 * s.x[1]) / t2);
          if (k1 < 0) continue;
        }
        double v2 = f2[g2.flat(k0, k1)];
        if (v2 <= 0.0) continue;
        u[0] = s.v;
        u[1] = v2;
        best = std::max(best, evaluate_mean(mean, u));
      }
      values[cell] = best;
    }
  });
  return GridFunction(out, std::move(values));
}

LevelSetResult sup_convolve_levelset_detail(std::span<const GridFunction> fs, const MeanSpec& mean,
                                            const ComboMap& combo,
                                            std::span<const ThresholdLadder> ladders, const Grid& out) {
  check_inputs(fs, mean, combo, out, "sup_convolve_levelset");
  if (ladders.size() != fs.size()) throw InvalidArgument("sup_convolve_levelset: need one ladder per function");
  check_support_fits(fs, combo, out, "sup_convolve_levelset");
  const std::size_t n = fs.size();

  std::vector<std::vector<SetMask>> masks(n);
  for (std::size_t i = 0; i < n; ++i) masks[i] = ladder_masks(fs[i], ladders[i]);

  // Mean of every ladder tuple, last index fastest.
  std::vector<std::size_t> sizes(n), stride(n);
  std::size_t total = 1;
  for (std::size_t i = n; i-- > 0;) {
    sizes[i] = ladders[i].size();
    stride[i] = total;
    total *= sizes[i];
  }
  std::vector<double> table(total);
  {
    std::vector<double> u(n);
    for (std::size_t flat = 0; flat < total; ++flat) {
      for (std::size_t i = 0; i < n; ++i) u[i] = ladders[i][(flat / stride[i]) % sizes[i]];
      table[flat] = evaluate_mean(mean, u);
    }
  }
  std::vector<double> levels;
  for (double v : table) {
    if (v > 0.0) levels.push_back(v);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  LevelSetResult result{GridFunction(out), {}, 0, false};
  if (levels.empty()) return result;
  levels = thin_levels(std::move(levels), result.thinned);

  std::map<std::size_t, SetMask> cache;
  auto summand = [&](std::size_t flat) -> const SetMask& {
    auto it = cache.find(flat);
    if (it != cache.end()) return it->second;
    std::vector<SetMask> parts;
    parts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) parts.push_back(masks[i][(flat / stride[i]) % sizes[i]]);
    return cache.emplace(flat, minkowski_weighted_sum(parts, combo.t, out)).first->second;
  };

  const std::size_t last = n - 1;
  const std::size_t prefixes = total / sizes[last];
  std::vector<SetMask> level_masks;
  level_masks.reserve(levels.size());
  for (double level : levels) {
    // For each prefix the smallest last index reaching the level.
    std::vector<std::vector<std::size_t>> candidates;
    for (std::size_t p = 0; p < prefixes; ++p) {
      std::size_t base = p * sizes[last];
      std::size_t lo = 0, hi = sizes[last];
      while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (table[base + mid] >= level) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      if (lo == sizes[last]) continue;
      std::vector<std::size_t> q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = ((base + lo) / stride[i]) % sizes[i];
      candidates.push_back(std::move(q));
    }
    SetMask acc(out);
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      bool dominated = false;
      for (std::size_t b = 0; b < candidates.size() && !dominated; ++b) {
        if (a == b) continue;
        bool le = true;
        for (std::size_t i = 0; i < n && le; ++i) le = candidates[b][i] <= candidates[a][i];
        dominated = le && candidates[b] != candidates[a];
      }
      if (dominated) continue;
      std::size_t flat = 0;
      for (std::size_t i = 0; i < n; ++i) flat += candidates[a][i] * stride[i];
      acc |= summand(flat);
    }
    level_masks.push_back(std::move(acc));
  }
  result.tuples_evaluated = cache.size();
  result.levels = levels;
  result.values = layer_cake(ThresholdLadder(levels), level_masks);
  return result;
}

GridFunction sup_convolve_levelset(std::span<const GridFunction> fs, const MeanSpec& mean,
                                   const ComboMap& combo, std::span<const ThresholdLadder> ladders,
                                   const Grid& out) {
  return sup_convolve_levelset_detail(fs, mean, combo, ladders, out).values;
}

SupconvMethod resolve_method(std::span<const GridFunction> fs, const SupconvOptions& options) {
  if (options.method != SupconvMethod::Auto) return options.method;
  if (fs.size() > 2) return SupconvMethod::LevelSet;
  std::size_t tuples = 1;
  for (const GridFunction& f : fs) {
    if (f.is_zero()) return SupconvMethod::LevelSet;
    std::size_t m = threshold_ladder(f, options.ladder).size();
    tuples = tuples > kAutoTupleLimit ? tuples : tuples * m;
  }
  return tuples <= kAutoTupleLimit ? SupconvMethod::LevelSet : SupconvMethod::Direct;
}

GridFunction sup_convolve(std::span<const GridFunction> fs, const MeanSpec& mean, const ComboMap& combo,
                          const Grid& out, const SupconvOptions& options) {
  for (const GridFunction& f : fs) {
    if (f.is_zero()) return GridFunction(out);
  }
  SupconvMethod method = resolve_method(fs, options);
  if (method == SupconvMethod::Direct) return sup_convolve_direct(fs, mean, combo, out);
  std::vector<ThresholdLadder> ladders;
  for (const GridFunction& f : fs) ladders.push_back(threshold_ladder(f, options.ladder));
  return sup_convolve_levelset(fs, mean, combo, ladders, out);
}

GridFunction q_lambda(const GridFunction& f, double lambda, const Grid& out) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("q_lambda: lambda must be positive");
  const Grid& g = f.grid();
  if (g.dim() != out.dim()) throw GridMismatch("q_lambda: dimensions differ");
  auto kernel = [&](int axis) {
    const int ns = g.n(axis);
    const int no = out.n(axis);
    std::vector<double> k(static_cast<std::size_t>(ns) * no);
    for (int x = 0; x < ns; ++x) {
      for (int z = 0; z < no; ++z) {
        double d = g.center(axis, x) - out.center(axis, z);
        k[static_cast<std::size_t>(x) * no + z] = std::exp(-d * d / (2.0 * lambda));
      }
    }
    return k;
  };
  if (g.dim() == 1) {
    auto k = kernel(0);
    const int no = out.n(0);
    std::vector<double> values(out.size(), 0.0);
    parallel_for(static_cast<std::size_t>(no), [&](std::size_t z) {
      double best = 0.0;
      for (int x = 0; x < g.n(0); ++x) best = std::max(best, f[x] * k[static_cast<std::size_t>(x) * no + z]);
      values[z] = best;
    });
    return GridFunction(out, std::move(values));
  }
  auto k0 = kernel(0);
  auto k1 = kernel(1);
  const int ns0 = g.n(0), ns1 = g.n(1);
  const int no0 = out.n(0), no1 = out.n(1);
  // Axis 1 first: partial[x0][z1] = max_x1 f(x0, x1) k1(x1, z1).
  std::vector<double> partial(static_cast<std::size_t>(ns0) * no1, 0.0);
  parallel_for(static_cast<std::size_t>(ns0), [&](std::size_t x0) {
    for (int z1 = 0; z1 < no1; ++z1) {
      double best = 0.0;
      for (int x1 = 0; x1 < ns1; ++x1) {
        best = std::max(best, f[g.flat(static_cast<int>(x0), x1)] * k1[static_cast<std::size_t>(x1) * no1 + z1]);
      }
      partial[x0 * no1 + z1] = best;
    }
  });
  std::vector<double> values(out.size(), 0.0);
  parallel_for(static_cast<std::size_t>(no0), [&](std::size_t z0) {
    for (int z1 = 0; z1 < no1; ++z1) {
      double best = 0.0;
      for (int x0 = 0; x0 < ns0; ++x0) {
        best = std::max(best, partial[static_cast<std::size_t>(x0) * no1 + z1] * k0[static_cast<std::size_t>(x0) * no0 + z0]);
      }
      values[out.flat(static_cast<int>(z0), z1)] = best;
    }
  });
  return GridFunction(out, std::move(values));
}

SetMask supconv_superlevel(const GridFunction& f, double lambda, double s, const ThresholdLadder& ladder,
                           const Grid& out) {
  if (!(lambda > 0.0)) throw InvalidArgument("supconv_superlevel: lambda must be positive");
  if (!(s > 0.0)) throw InvalidArgument("supconv_superlevel: s must be positive");
  const Grid& g = f.grid();
  if (g.dim() != out.dim()) throw GridMismatch("supconv_superlevel: dimensions differ");
  SetMask acc(out);
  const double t[2] = {1.0, 1.0};
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    double q = ladder[k];
    if (!(q > s)) continue;
    SetMask level = superlevel_set(f, ladder.below(k));
    if (level.empty()) continue;
    double r = std::sqrt(2.0 * lambda * std::log(q / s));
    SetMask ball = centered_ball_mask(r, g.dim(), {g.spacing(0), g.dim() == 2 ? g.spacing(1) : 1.0});
    const SetMask parts[2] = {level, ball};
    acc |= minkowski_weighted_sum(parts, t, out, {.clip = true});
  }
  return acc;
}

double layer_sup_distance(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("layer_sup_distance: different grids");
  const Grid& g = a.grid();
  auto one_way = [&](const GridFunction& p, const GridFunction& q) {
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto idx = g.index_of(i);
      double best = std::numeric_limits<double>::infinity();
      for (int d0 = -1; d0 <= 1; ++d0) {
        int i0 = idx[0] + d0;
        if (i0 < 0 || i0 >= g.n(0)) continue;
        for (int d1 = g.dim() == 2 ? -1 : 0; d1 <= (g.dim() == 2 ? 1 : 0); ++d1) {
          int i1 = idx[1] + d1;
          if (g.dim() == 2 && (i1 < 0 || i1 >= g.n(1))) continue;
          best = std::min(best, std::abs(p[i] - q[g.flat(i0, i1)]));
        }
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

}  // namespace rpl
