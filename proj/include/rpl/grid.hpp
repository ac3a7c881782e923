#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rpl {

using Point = std::array<double, 2>;

// Uniform cell-centred box grid in one or two dimensions. Cells are stored
// row-major: flat index = i0 * n1 + i1, axis 0 is x_1.
class Grid {
 public:
  Grid(double lo, double hi, int n);
  Grid(Point lo, Point hi, std::array<int, 2> n);

  static Grid make(std::span<const double> lo, std::span<const double> hi, std::span<const int> n);

  int dim() const noexcept { return dim_; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  int n(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double max_spacing() const noexcept;
  double cell_volume() const noexcept;
  std::size_t size() const noexcept;

  // Number of cells along the last axis; a 1-D grid is a single row.
  int row_length() const noexcept { return n_[dim_ - 1]; }
  int row_count() const noexcept { return dim_ == 1 ? 1 : n_[0]; }

  double center(int axis, int k) const noexcept { return lo_[axis] + (k + 0.5) * h_[axis]; }
  Point center_of(std::size_t flat) const noexcept;
  std::size_t flat(int i0, int i1 = 0) const noexcept {
    return dim_ == 1 ? static_cast<std::size_t>(i0)
                     : static_cast<std::size_t>(i0) * static_cast<std::size_t>(n_[1]) + i1;
  }
  std::array<int, 2> index_of(std::size_t flat) const noexcept;

  // Nearest cell index along an axis, or -1 when x lies outside the box.
  int nearest(int axis, double x) const noexcept;

  // Same box refined to n cells on every axis.
  Grid with_resolution(int n) const;

  std::string describe() const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_;
  Point lo_{};
  Point hi_{};
  std::array<int, 2> n_{};
  Point h_{};
};

enum class MeasureKind { Lebesgue, Gaussian };

struct MeasureSpec {
  MeasureKind kind = MeasureKind::Lebesgue;

  static MeasureSpec lebesgue() { return {MeasureKind::Lebesgue}; }
  static MeasureSpec gaussian() { return {MeasureKind::Gaussian}; }
  bool operator==(const MeasureSpec&) const = default;
};

std::string to_string(MeasureKind kind);

// Quadrature weight of a cell: the cell volume, times the standard Gaussian
// density at the cell centre for the Gaussian measure.
double cell_weight(const Grid& grid, std::size_t flat, MeasureSpec m);
std::vector<double> cell_weights(const Grid& grid, MeasureSpec m);

// Non-negative sampled function; every value finite and >= 0.
class GridFunction {
 public:
  explicit GridFunction(Grid grid);  // identically zero
  GridFunction(Grid grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double max() const noexcept;
  bool is_zero() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

// Membership mask of a set on a grid. Sets are open by convention; a cell is
// a member when its centre lies in the set.
class SetMask {
 public:
  explicit SetMask(Grid grid);  // empty
  SetMask(Grid grid, std::vector<std::uint8_t> member);

  const Grid& grid() const noexcept { return grid_; }
  bool contains(std::size_t flat) const { return member_[flat] != 0; }
  void set(std::size_t flat, bool value = true) { member_[flat] = value ? 1 : 0; }
  std::span<const std::uint8_t> members() const noexcept { return member_; }
  std::size_t count() const noexcept;
  bool empty() const noexcept { return count() == 0; }
  bool subset_of(const SetMask& other) const;

  SetMask& operator|=(const SetMask& other);
  bool operator==(const SetMask& other) const = default;

 private:
  Grid grid_;
  std::vector<std::uint8_t> member_;
};

// Number of cells in the symmetric difference of two masks on one grid.
std::size_t symmetric_difference(const SetMask& a, const SetMask& b);

// Number of cells of `mask` lying on its own topological boundary (members
// with a non-member or off-grid axis neighbour). Used as the one-cell-layer
// allowance when comparing discretised sets.
std::size_t boundary_layer(const SetMask& mask);

// Strictly increasing positive thresholds lambda_1 < ... < lambda_m.
class ThresholdLadder {
 public:
  explicit ThresholdLadder(std::vector<double> levels);

  std::span<const double> levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  double operator[](std::size_t k) const { return levels_[k]; }
  double top() const { return levels_.back(); }
  // Level below index k, with lambda_{-1} = 0.
  double below(std::size_t k) const { return k == 0 ? 0.0 : levels_[k - 1]; }
  double max_gap() const noexcept;

 private:
  std::vector<double> levels_;
};

struct AllValues {};
struct Quantile {
  int m = 32;
};
using LadderStrategy = std::variant<AllValues, Quantile>;

double integrate(const GridFunction& f, MeasureSpec m);

// {f > lambda}, strict.
SetMask superlevel_set(const GridFunction& f, double lambda);

// lambda -> mu{f > lambda}, a right-continuous non-increasing step function.
class DistributionFunction {
 public:
  DistributionFunction(std::vector<double> values, std::vector<double> tails, double total);

  double operator()(double lambda) const;
  // Sorted distinct sample values and mu{f > value} for each.
  std::span<const double> breakpoints() const noexcept { return values_; }
  std::span<const double> tails() const noexcept { return tails_; }
  double total() const noexcept { return total_; }

 private:
  std::vector<double> values_;
  std::vector<double> tails_;
  double total_;
};

DistributionFunction distribution_function(const GridFunction& f, MeasureSpec m);

// AllValues: the distinct positive samples. Quantile(m): m levels at the
// measure quantiles of f restricted to {f > 0}, so that mu{f > lambda_k} is
// approximately (1 - k/m) mu{f > 0}. `weights` sets the measure used for the
// quantiles.
ThresholdLadder threshold_ladder(const GridFunction& f, const LadderStrategy& strategy,
                                 MeasureSpec weights = MeasureSpec::lebesgue());

// Masks feeding layer_cake: mask_k = {f > lambda_{k-1}} with lambda_{-1} = 0,
// the set on which the ladder reconstruction reaches lambda_k.
std::vector<SetMask> ladder_masks(const GridFunction& f, const ThresholdLadder& ladder);

// Sum_k (lambda_k - lambda_{k-1}) 1_{mask_k}. Masks must be nested
// (mask_{k+1} subset of mask_k); the value on a cell lying in exactly j masks
// is lambda_j, computed without accumulation so that piecewise-constant
// inputs are reproduced bit for bit.
GridFunction layer_cake(const ThresholdLadder& ladder, std::span<const SetMask> masks);

}  // namespace rpl
