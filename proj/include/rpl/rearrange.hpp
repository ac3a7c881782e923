#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpl/convexsets.hpp"
#include "rpl/grid.hpp"

namespace rpl {

enum class RearrangementKind { ConvexBody, GaussianHalfSpace };

// The set map A -> A*: either the scaled body of equal Lebesgue volume on a
// target grid of the same dimension, or the half-line {x < Phi^{-1}(gamma_d(A))}
// on a 1-D Gaussian target grid.
class RearrangementSpec {
 public:
  static RearrangementSpec convex_body(ConvexBody k, Grid source, std::optional<Grid> target = {});
  static RearrangementSpec gaussian_half_space(Grid source, Grid target);

  RearrangementKind kind() const noexcept { return kind_; }
  const ConvexBody& body() const;
  const Grid& source() const noexcept { return source_; }
  const Grid& target() const noexcept { return target_; }
  MeasureSpec source_measure() const noexcept;
  MeasureSpec target_measure() const noexcept;
  std::string describe() const;

  struct Shells {
    std::vector<double> gauges;   // distinct target gauge values, increasing
    std::vector<double> volumes;  // volume of {gauge <= gauges[k]}
  };
  const Shells& shells() const;

 private:
  RearrangementSpec(RearrangementKind kind, Grid source, Grid target)
      : kind_(kind), source_(std::move(source)), target_(std::move(target)) {}

  RearrangementKind kind_;
  Grid source_;
  Grid target_;
  std::optional<ConvexBody> body_;
  std::shared_ptr<const Shells> shells_;
};

struct SetImage {
  SetMask mask;
  double source_measure = 0.0;
  // Convex body: grid volume of the image. Half-space: Phi(scale), the exact
  // Gaussian mass of the continuum half-line.
  double target_measure = 0.0;
  // Body scale s, or the half-line end point c.
  double scale = 0.0;
  // The image was truncated by the target box.
  bool clamped = false;
};

// Image of a set of source measure mu.
SetImage rearrange_measure(double mu, const RearrangementSpec& spec);
SetImage rearrange_set_image(const SetMask& a, const RearrangementSpec& spec);
SetMask rearrange_set(const SetMask& a, const RearrangementSpec& spec);

class RearrangedFunction {
 public:
  RearrangedFunction(GridFunction values, ThresholdLadder ladder, std::vector<SetImage> images);

  const GridFunction& function() const noexcept { return values_; }
  const ThresholdLadder& ladder() const noexcept { return ladder_; }
  // One image per ladder level: images[k] is the image of {f > lambda_{k-1}}.
  const std::vector<SetImage>& images() const noexcept { return images_; }
  bool clamped() const noexcept;
  // Target measure of {f* > lambda} read from the level images.
  double measure_above(double lambda) const;

 private:
  GridFunction values_;
  ThresholdLadder ladder_;
  std::vector<SetImage> images_;
};

// Layer cake over the ladder of the images of {f > lambda_{k-1}}.
RearrangedFunction rearrange_function_detail(const GridFunction& f, const RearrangementSpec& spec,
                                             const ThresholdLadder& ladder);
GridFunction rearrange_function(const GridFunction& f, const RearrangementSpec& spec,
                                const ThresholdLadder& ladder);

// sum_i a_i 1_{A_i*} for strictly nested A_i and positive a_i.
GridFunction rearrange_simple(std::span<const double> a, std::span<const SetMask> sets,
                              const RearrangementSpec& spec);

struct CharacterizationLevel {
  double lambda = 0.0;
  std::size_t mismatch = 0;   // cells in the symmetric difference
  std::size_t allowance = 0;  // one boundary layer
  double source_measure = 0.0;
  double target_measure = 0.0;
  bool ok = false;
};

struct CharacterizationReport {
  std::vector<CharacterizationLevel> levels;
  double tol = 0.0;
  bool passed = true;
};

// Compares {f* > lambda} with ({f > lambda})* at every ladder level.
CharacterizationReport characterization_check(const GridFunction& f, const RearrangementSpec& spec,
                                              const ThresholdLadder& ladder, double tol);

}  // namespace rpl
