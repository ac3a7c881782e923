#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rpl/grid.hpp"
#include "rpl/means.hpp"

namespace rpl {

// m(x) = sum_i t_i x_i.
struct ComboMap {
  std::vector<double> t;
};

enum class SupconvMethod { Auto, Direct, LevelSet };

// sup over t_1 x + t_2 y = z of M(f_1(x), f_2(y)) with y sampled at the
// nearest cell of f_2's grid; y off that grid contributes nothing. Two
// functions only.
GridFunction sup_convolve_direct(std::span<const GridFunction> fs, const MeanSpec& mean,
                                 const ComboMap& combo, const Grid& out);

struct LevelSetResult {
  GridFunction values;
  std::vector<double> levels;  // output ladder, empty when the result is 0
  std::size_t tuples_evaluated = 0;
  bool thinned = false;
};

// Builds {box f >= Lambda_j} as unions of Minkowski sums sum_i t_i {f_i >=
// q_i} over the Pareto-minimal ladder tuples with M(q) >= Lambda_j, then
// reassembles through the layer cake. Lambda is the image of the ladder
// tuples under M, capped at 512 levels.
LevelSetResult sup_convolve_levelset_detail(std::span<const GridFunction> fs, const MeanSpec& mean,
                                            const ComboMap& combo,
                                            std::span<const ThresholdLadder> ladders, const Grid& out);
GridFunction sup_convolve_levelset(std::span<const GridFunction> fs, const MeanSpec& mean,
                                   const ComboMap& combo, std::span<const ThresholdLadder> ladders,
                                   const Grid& out);

struct SupconvOptions {
  SupconvMethod method = SupconvMethod::Auto;
  LadderStrategy ladder = AllValues{};
};

// Auto picks the level-set method when the tuple count is at most 4096 or
// more than two functions are given, the direct method otherwise.
SupconvMethod resolve_method(std::span<const GridFunction> fs, const SupconvOptions& options);

GridFunction sup_convolve(std::span<const GridFunction> fs, const MeanSpec& mean, const ComboMap& combo,
                          const Grid& out, const SupconvOptions& options = {});

// max over source cells x of f(x) exp(-|x - z|^2 / (2 lambda)), evaluated
// one axis at a time.
GridFunction q_lambda(const GridFunction& f, double lambda, const Grid& out);

// Level-set route to {Q_lambda f > s}: the union over ladder levels q > s of
// {f >= q} + {|y| < sqrt(2 lambda ln(q / s))}, clipped to `out`.
SetMask supconv_superlevel(const GridFunction& f, double lambda, double s, const ThresholdLadder& ladder,
                           const Grid& out);

// Sup-norm distance that lets each cell match any cell of the other function
// within one cell (one boundary layer of slack).
double layer_sup_distance(const GridFunction& a, const GridFunction& b);

}  // namespace rpl
