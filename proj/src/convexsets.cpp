#include "rpl/convexsets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rpl/error.hpp"

namespace rpl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Snapping slack in units of the output cell width.
constexpr double kSnap = 1e-9;

// Points start + k * step for k < count, step >= 0.
struct Run {
  double start;
  double step;
  int count;

  double last() const { return start + (count - 1) * step; }
};

struct Row {
  double coord0;
  std::vector<Run> runs;
};

std::vector<Row> scaled_rows(const SetMask& m, double w) {
  const Grid& g = m.grid();
  const int last = g.dim() - 1;
  const double h = g.spacing(last);
  std::vector<Row> rows;
  if (w == 0.0) {
    if (!m.empty()) rows.push_back({0.0, {{0.0, 0.0, 1}}});
    return rows;
  }
  for (int i = 0; i < g.row_count(); ++i) {
    Row row{g.dim() == 2 ? w * g.center(0, i) : 0.0, {}};
    int j = 0;
    const int len = g.row_length();
    while (j < len) {
      if (!m.contains(g.dim() == 2 ? g.flat(i, j) : g.flat(j))) {
        ++j;
        continue;
      }
      int j0 = j;
      while (j < len && m.contains(g.dim() == 2 ? g.flat(i, j) : g.flat(j))) ++j;
      int count = j - j0;
      double a = w * g.center(last, j0);
      double b = w * g.center(last, j - 1);
      row.runs.push_back({std::min(a, b), std::abs(w) * h, count});
    }
    if (!row.runs.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Row> origin_rows() { return {{0.0, {{0.0, 0.0, 1}}}}; }

// Largest gap between consecutive points of {a_i} + {b_j}.
double sum_gap(const Run& a, const Run& b) {
  if (a.count == 1 && b.count == 1) return 0.0;
  if (a.count == 1) return b.step;
  if (b.count == 1) return a.step;
  const Run& small = a.step <= b.step ? a : b;
  const Run& big = a.step <= b.step ? b : a;
  double between = big.step - (small.count - 1) * small.step;
  return std::max(small.step, between);
}

class RowMarker {
 public:
  RowMarker(const Grid& out, bool clip) : out_(out), clip_(clip), member_(out.size(), 0) {}

  // Output indices along `axis` whose centres lie in [a - H/2, b + H/2].
  bool span(int axis, double a, double b, int& k0, int& k1) const {
    const double h = out_.spacing(axis);
    const double lo = out_.lo(axis);
    const double hi = out_.hi(axis);
    if (a < lo - kSnap * h || b > hi + kSnap * h) {
      if (!clip_) {
        std::ostringstream os;
        os.precision(17);
        os << "minkowski_weighted_sum: combination [" << a << ", " << b << "] on axis " << axis
           << " leaves the output box [" << lo << ", " << hi << "]";
        throw BoundsError(os.str());
      }
    }
    double u0 = (a - lo) / h - 0.5 - 0.5 * (1.0 + 2.0 * kSnap);
    double u1 = (b - lo) / h - 0.5 + 0.5 * (1.0 + 2.0 * kSnap);
    k0 = std::max(0, static_cast<int>(std::ceil(u0)));
    k1 = std::min(out_.n(axis) - 1, static_cast<int>(std::floor(u1)));
    return k0 <= k1;
  }

  void mark(int r0, int r1, int c0, int c1) {
    const int len = out_.row_length();
    for (int r = r0; r <= r1; ++r) {
      std::uint8_t* row = member_.data() + static_cast<std::size_t>(r) * len;
      std::fill(row + c0, row + c1 + 1, std::uint8_t{1});
    }
  }

  SetMask finish() && { return SetMask(out_, std::move(member_)); }

 private:
  const Grid& out_;
  bool clip_;
  std::vector<std::uint8_t> member_;
};

SetMask sum_rows(const std::vector<Row>& ra, const std::vector<Row>& rb, const Grid& out,
                 bool clip) {
  RowMarker marker(out, clip);
  const int last = out.dim() - 1;
  const double H = out.spacing(last);
  for (const Row& a : ra) {
    for (const Row& b : rb) {
      int r0 = 0, r1 = 0;
      if (out.dim() == 2) {
        double p0 = a.coord0 + b.coord0;
        if (!marker.span(0, p0, p0, r0, r1)) continue;
      }
      for (const Run& x : a.runs) {
        for (const Run& y : b.runs) {
          double lo = x.start + y.start;
          double hi = x.last() + y.last();
          int c0, c1;
          if (sum_gap(x, y) <= H * (1.0 + kSnap)) {
            if (marker.span(last, lo, hi, c0, c1)) marker.mark(r0, r1, c0, c1);
            continue;
          }
          for (int i = 0; i < x.count; ++i) {
            for (int j = 0; j < y.count; ++j) {
              double p = x.start + i * x.step + y.start + j * y.step;
              if (marker.span(last, p, p, c0, c1)) marker.mark(r0, r1, c0, c1);
            }
          }
        }
      }
    }
  }
  return std::move(marker).finish();
}

double polygon_area(const std::vector<Point>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& p = v[i];
    const Point& q = v[(i + 1) % v.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * a;
}

}  // namespace

ConvexBody ConvexBody::ball(double r, int dim) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ConvexBody::ball: radius must be positive");
  if (dim != 1 && dim != 2) throw InvalidArgument("ConvexBody::ball: dim must be 1 or 2");
  ConvexBody k;
  k.kind_ = Kind::Ball;
  k.dim_ = dim;
  k.r_ = r;
  return k;
}

ConvexBody ConvexBody::box(Point halfwidths, int dim) {
  if (dim != 1 && dim != 2) throw InvalidArgument("ConvexBody::box: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (!(halfwidths[a] > 0.0) || !std::isfinite(halfwidths[a])) {
      throw InvalidArgument("ConvexBody::box: half-widths must be positive");
    }
  }
  ConvexBody k;
  k.kind_ = Kind::Box;
  k.dim_ = dim;
  k.hw_ = {halfwidths[0], dim == 2 ? halfwidths[1] : 1.0};
  return k;
}

ConvexBody ConvexBody::polygon(std::vector<Point> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw InvalidArgument("ConvexBody::polygon: need at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = vertices[i];
    const Point& q = vertices[(i + 1) % n];
    const Point& r = vertices[(i + 2) % n];
    double cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
    if (!(cross > 0.0)) {
      throw InvalidArgument("ConvexBody::polygon: vertices are not strictly convex and "
                            "counter-clockwise at vertex " + std::to_string((i + 1) % n));
    }
  }
  ConvexBody k;
  k.kind_ = Kind::Polygon;
  k.dim_ = 2;
  double scale = 0.0;
  for (auto& v : vertices) scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = vertices[i];
    const Point& q = vertices[(i + 1) % n];
    Point normal{q[1] - p[1], p[0] - q[0]};
    double len = std::hypot(normal[0], normal[1]);
    normal = {normal[0] / len, normal[1] / len};
    double offset = normal[0] * p[0] + normal[1] * p[1];
    if (offset < -1e-12 * scale) {
      throw InvalidArgument("ConvexBody::polygon: origin outside the closure of the polygon");
    }
    k.normals_.push_back(normal);
    k.offsets_.push_back(std::max(offset, 0.0));
  }
  bool symmetric = true;
  for (auto& v : vertices) {
    bool found = std::any_of(vertices.begin(), vertices.end(), [&](const Point& w) {
      return std::abs(w[0] + v[0]) <= 1e-12 * scale && std::abs(w[1] + v[1]) <= 1e-12 * scale;
    });
    symmetric = symmetric && found;
  }
  k.symmetric_ = symmetric;
  k.vertices_ = std::move(vertices);
  return k;
}

double ConvexBody::gauge(Point x) const {
  switch (kind_) {
    case Kind::Ball:
      return (dim_ == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1])) / r_;
    case Kind::Box:
      return dim_ == 1 ? std::abs(x[0]) / hw_[0]
                       : std::max(std::abs(x[0]) / hw_[0], std::abs(x[1]) / hw_[1]);
    case Kind::Polygon: {
      double g = 0.0;
      for (std::size_t e = 0; e < normals_.size(); ++e) {
        double d = normals_[e][0] * x[0] + normals_[e][1] * x[1];
        if (offsets_[e] > 0.0) {
          g = std::max(g, d / offsets_[e]);
        } else if (d > 0.0) {
          return kInf;
        }
      }
      return g;
    }
  }
  return kInf;
}

double ConvexBody::volume() const {
  switch (kind_) {
    case Kind::Ball:
      return dim_ == 1 ? 2.0 * r_ : std::numbers::pi * r_ * r_;
    case Kind::Box:
      return dim_ == 1 ? 2.0 * hw_[0] : 4.0 * hw_[0] * hw_[1];
    case Kind::Polygon:
      return polygon_area(vertices_);
  }
  return 0.0;
}

std::string ConvexBody::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Ball:
      os << "ball(r=" << r_ << ", d=" << dim_ << ")";
      break;
    case Kind::Box:
      os << "box(" << hw_[0];
      if (dim_ == 2) os << ", " << hw_[1];
      os << ")";
      break;
    case Kind::Polygon:
      os << "polygon(" << vertices_.size() << " vertices)";
      break;
  }
  return os.str();
}

double volume(const SetMask& a, MeasureSpec m) {
  const Grid& g = a.grid();
  if (m.kind == MeasureKind::Lebesgue) return static_cast<double>(a.count()) * g.cell_volume();
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (a.contains(i)) total += cell_weight(g, i, m);
  }
  return total;
}

SetMask scaled_body_mask(const ConvexBody& k, double s, const Grid& grid) {
  if (!(s >= 0.0)) throw InvalidArgument("scaled_body_mask: s must be >= 0");
  if (k.dim() != grid.dim()) throw GridMismatch("scaled_body_mask: body and grid dimensions differ");
  SetMask mask(grid);
  if (s == 0.0) return mask;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (k.gauge(grid.center_of(i)) < s) mask.set(i);
  }
  return mask;
}

SetMask reflect(const SetMask& a, const Grid& out) {
  const Grid& g = a.grid();
  if (g.dim() != out.dim()) throw GridMismatch("reflect: dimensions differ");
  SetMask r(out);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!a.contains(i)) continue;
    Point c = g.center_of(i);
    int k0 = out.nearest(0, -c[0]);
    int k1 = out.dim() == 2 ? out.nearest(1, -c[1]) : 0;
    if (k0 < 0 || k1 < 0) continue;
    r.set(out.flat(k0, k1));
  }
  return r;
}

SetMask minkowski_weighted_sum(std::span<const SetMask> masks, std::span<const double> t,
                               const Grid& out, MinkowskiOptions options) {
  if (masks.empty()) throw InvalidArgument("minkowski_weighted_sum: no summands");
  if (masks.size() != t.size()) {
    throw InvalidArgument("minkowski_weighted_sum: need one weight per summand");
  }
  for (const SetMask& m : masks) {
    if (m.grid().dim() != out.dim()) throw GridMismatch("minkowski_weighted_sum: dimensions differ");
  }
  for (double w : t) {
    if (!std::isfinite(w)) throw InvalidArgument("minkowski_weighted_sum: weights must be finite");
  }
  for (const SetMask& m : masks) {
    if (m.empty()) return SetMask(out);
  }
  if (masks.size() == 1) {
    return sum_rows(scaled_rows(masks[0], t[0]), origin_rows(), out, options.clip);
  }
  SetMask acc = sum_rows(scaled_rows(masks[0], t[0]), scaled_rows(masks[1], t[1]), out, options.clip);
  for (std::size_t k = 2; k < masks.size(); ++k) {
    if (acc.empty()) return acc;
    acc = sum_rows(scaled_rows(acc, 1.0), scaled_rows(masks[k], t[k]), out, options.clip);
  }
  return acc;
}

SetMask centered_ball_mask(double r, int dim, Point spacing) {
  if (!(r >= 0.0) || !(spacing[0] > 0.0) || (dim == 2 && !(spacing[1] > 0.0))) {
    throw InvalidArgument("centered_ball_mask: need r >= 0 and positive spacing");
  }
  std::array<int, 2> n{1, 1};
  Point extent{0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    int half = static_cast<int>(std::ceil(r / spacing[a])) + 1;
    n[a] = 2 * half + 1;
    extent[a] = (half + 0.5) * spacing[a];
  }
  Grid grid = dim == 1 ? Grid(-extent[0], extent[0], n[0]) : Grid({-extent[0], -extent[1]}, extent, n);
  SetMask mask(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Point c = grid.center_of(i);
    double d = dim == 1 ? std::abs(c[0]) : std::hypot(c[0], c[1]);
    if (d < r) mask.set(i);
  }
  return mask;
}

}  // namespace rpl
