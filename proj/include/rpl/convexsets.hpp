#pragma once

#include <span>
#include <string>
#include <vector>

#include "rpl/grid.hpp"

namespace rpl {

// Ball, axis box, or (2-D) convex polygon containing the origin in its
// closure. Membership in the scaled body sK is evaluated through the gauge.
class ConvexBody {
 public:
  enum class Kind { Ball, Box, Polygon };

  static ConvexBody ball(double r, int dim);
  static ConvexBody box(Point halfwidths, int dim);
  // Vertices strictly convex and counter-clockwise.
  static ConvexBody polygon(std::vector<Point> vertices);

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  bool symmetric() const noexcept { return symmetric_; }
  double radius() const noexcept { return r_; }
  Point halfwidths() const noexcept { return hw_; }
  const std::vector<Point>& vertices() const noexcept { return vertices_; }

  // inf{s > 0 : x in sK}; +inf when no positive multiple contains x.
  double gauge(Point x) const;
  // Analytic |K|.
  double volume() const;
  std::string describe() const;

 private:
  ConvexBody() = default;

  Kind kind_ = Kind::Ball;
  int dim_ = 1;
  bool symmetric_ = true;
  double r_ = 1.0;
  Point hw_{1.0, 1.0};
  std::vector<Point> vertices_;
  // Outward normals n_e and offsets b_e with K = {n_e . x <= b_e}.
  std::vector<Point> normals_;
  std::vector<double> offsets_;
};

double volume(const SetMask& a, MeasureSpec m);

// Open scaled body {gauge < s} sampled at cell centres.
SetMask scaled_body_mask(const ConvexBody& k, double s, const Grid& grid);

// Point reflection x -> -x onto `out`; cells whose reflected centre leaves
// the box are dropped.
SetMask reflect(const SetMask& a, const Grid& out);

struct MinkowskiOptions {
  // Drop points outside the output box instead of raising BoundsError.
  bool clip = false;
};

// t_1 A_1 + ... + t_n A_n snapped onto `out`: an output cell is a member when
// some combination of member centres lies within half a cell of its centre on
// every axis (ties count). Negative weights reflect the summand. Summands may
// live on different grids of the same dimension. Sums of more than two sets
// are folded pairwise on `out`.
SetMask minkowski_weighted_sum(std::span<const SetMask> masks, std::span<const double> t,
                               const Grid& out, MinkowskiOptions options = {});

// Origin-centred open Euclidean ball of radius r on a grid with the given
// per-axis spacing and an odd number of cells per axis, so its centre cell
// sits at 0.
SetMask centered_ball_mask(double r, int dim, Point spacing);

}  // namespace rpl
