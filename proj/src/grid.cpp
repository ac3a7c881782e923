#include "rpl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rpl/error.hpp"
#include "rpl/gauss.hpp"

namespace rpl {

namespace {

void check_axis(double lo, double hi, int n, int axis) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) {
    throw InvalidArgument("grid axis " + std::to_string(axis) + ": need lo < hi");
  }
  if (n < 2) {
    throw InvalidArgument("grid axis " + std::to_string(axis) + ": need at least 2 cells");
  }
}

}  // namespace

Grid::Grid(double lo, double hi, int n) : dim_(1), lo_{lo, 0.0}, hi_{hi, 0.0}, n_{n, 1} {
  check_axis(lo, hi, n, 0);
  h_ = {(hi - lo) / n, 1.0};
}

Grid::Grid(Point lo, Point hi, std::array<int, 2> n) : dim_(2), lo_(lo), hi_(hi), n_(n) {
  for (int a = 0; a < 2; ++a) check_axis(lo[a], hi[a], n[a], a);
  h_ = {(hi[0] - lo[0]) / n[0], (hi[1] - lo[1]) / n[1]};
}

Grid Grid::make(std::span<const double> lo, std::span<const double> hi, std::span<const int> n) {
  if (lo.size() != hi.size() || lo.size() != n.size()) {
    throw InvalidArgument("grid: lo, hi and n must have the same length");
  }
  if (lo.size() == 1) return Grid(lo[0], hi[0], n[0]);
  if (lo.size() == 2) return Grid({lo[0], lo[1]}, {hi[0], hi[1]}, {n[0], n[1]});
  throw InvalidArgument("grid: only 1-D and 2-D grids are supported");
}

double Grid::max_spacing() const noexcept {
  return dim_ == 1 ? h_[0] : std::max(h_[0], h_[1]);
}

double Grid::cell_volume() const noexcept { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }

std::size_t Grid::size() const noexcept {
  return dim_ == 1 ? static_cast<std::size_t>(n_[0])
                   : static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]);
}

std::array<int, 2> Grid::index_of(std::size_t flat) const noexcept {
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / n_[1]), static_cast<int>(flat % n_[1])};
}

Point Grid::center_of(std::size_t flat) const noexcept {
  auto idx = index_of(flat);
  if (dim_ == 1) return {center(0, idx[0]), 0.0};
  return {center(0, idx[0]), center(1, idx[1])};
}

int Grid::nearest(int axis, double x) const noexcept {
  double u = (x - lo_[axis]) / h_[axis];
  if (!(u >= -1e-9 && u <= n_[axis] + 1e-9)) return -1;
  int k = static_cast<int>(std::floor(u));
  return std::clamp(k, 0, n_[axis] - 1);
}

Grid Grid::with_resolution(int n) const {
  if (dim_ == 1) return Grid(lo_[0], hi_[0], n);
  return Grid(lo_, hi_, {n, n});
}

std::string Grid::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << dim_ << "-D";
  for (int a = 0; a < dim_; ++a) {
    os << (a ? " x " : " ") << '[' << lo_[a] << ", " << hi_[a] << "]/" << n_[a];
  }
  return os.str();
}

std::string to_string(MeasureKind kind) {
  return kind == MeasureKind::Lebesgue ? "lebesgue" : "gaussian";
}

double cell_weight(const Grid& grid, std::size_t flat, MeasureSpec m) {
  double w = grid.cell_volume();
  if (m.kind == MeasureKind::Gaussian) {
    Point c = grid.center_of(flat);
    double r2 = c[0] * c[0] + (grid.dim() == 2 ? c[1] * c[1] : 0.0);
    double norm = grid.dim() == 1 ? kInvSqrtTwoPi : kInvSqrtTwoPi * kInvSqrtTwoPi;
    w *= norm * std::exp(-0.5 * r2);
  }
  return w;
}

std::vector<double> cell_weights(const Grid& grid, MeasureSpec m) {
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = cell_weight(grid, i, m);
  return w;
}

GridFunction::GridFunction(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("GridFunction: value count does not match grid size");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw DomainError("GridFunction: value at cell " + std::to_string(i) +
                        " is negative or not finite");
    }
  }
}

double GridFunction::max() const noexcept {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

bool GridFunction::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

SetMask::SetMask(Grid grid) : grid_(std::move(grid)), member_(grid_.size(), 0) {}

SetMask::SetMask(Grid grid, std::vector<std::uint8_t> member)
    : grid_(std::move(grid)), member_(std::move(member)) {
  if (member_.size() != grid_.size()) {
    throw InvalidArgument("SetMask: member count does not match grid size");
  }
  for (auto& m : member_) m = m ? 1 : 0;
}

std::size_t SetMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), std::uint8_t{1}));
}

bool SetMask::subset_of(const SetMask& other) const {
  if (!(grid_ == other.grid_)) throw GridMismatch("SetMask::subset_of: different grids");
  for (std::size_t i = 0; i < member_.size(); ++i) {
    if (member_[i] && !other.member_[i]) return false;
  }
  return true;
}

SetMask& SetMask::operator|=(const SetMask& other) {
  if (!(grid_ == other.grid_)) throw GridMismatch("SetMask union: different grids");
  for (std::size_t i = 0; i < member_.size(); ++i) member_[i] |= other.member_[i];
  return *this;
}

std::size_t symmetric_difference(const SetMask& a, const SetMask& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("symmetric_difference: different grids");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.grid().size(); ++i) d += a.contains(i) != b.contains(i);
  return d;
}

std::size_t boundary_layer(const SetMask& mask) {
  const Grid& g = mask.grid();
  std::size_t layer = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask.contains(i)) continue;
    auto idx = g.index_of(i);
    bool edge = false;
    for (int a = 0; a < g.dim() && !edge; ++a) {
      for (int s : {-1, 1}) {
        auto nb = idx;
        nb[a] += s;
        if (nb[a] < 0 || nb[a] >= g.n(a) || !mask.contains(g.flat(nb[0], nb[1]))) {
          edge = true;
          break;
        }
      }
    }
    layer += edge;
  }
  return layer;
}

ThresholdLadder::ThresholdLadder(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw InvalidArgument("ThresholdLadder: no levels");
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    if (!(levels_[k] > 0.0) || !std::isfinite(levels_[k])) {
      throw InvalidArgument("ThresholdLadder: levels must be finite and positive");
    }
    if (k > 0 && !(levels_[k] > levels_[k - 1])) {
      throw InvalidArgument("ThresholdLadder: levels must be strictly increasing");
    }
  }
}

double ThresholdLadder::max_gap() const noexcept {
  double gap = levels_.front();
  for (std::size_t k = 1; k < levels_.size(); ++k) gap = std::max(gap, levels_[k] - levels_[k - 1]);
  return gap;
}

double integrate(const GridFunction& f, MeasureSpec m) {
  const Grid& g = f.grid();
  double total = 0.0;
  if (m.kind == MeasureKind::Lebesgue) {
    for (double v : f.values()) total += v;
    return total * g.cell_volume();
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] != 0.0) total += f[i] * cell_weight(g, i, m);
  }
  return total;
}

SetMask superlevel_set(const GridFunction& f, double lambda) {
  std::vector<std::uint8_t> member(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) member[i] = f[i] > lambda;
  return SetMask(f.grid(), std::move(member));
}

DistributionFunction::DistributionFunction(std::vector<double> values, std::vector<double> tails,
                                           double total)
    : values_(std::move(values)), tails_(std::move(tails)), total_(total) {}

double DistributionFunction::operator()(double lambda) const {
  auto it = std::upper_bound(values_.begin(), values_.end(), lambda);
  if (it == values_.begin()) return total_;
  return tails_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

DistributionFunction distribution_function(const GridFunction& f, MeasureSpec m) {
  std::vector<std::pair<double, double>> cells(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) cells[i] = {f[i], cell_weight(f.grid(), i, m)};
  std::sort(cells.begin(), cells.end());
  double total = 0.0;
  for (auto& c : cells) total += c.second;

  // Tails accumulated from the top so each is a direct sum over {f > v}.
  std::vector<double> values;
  std::vector<double> tails;
  double above = 0.0;
  std::size_t i = cells.size();
  while (i > 0) {
    double v = cells[i - 1].first;
    values.push_back(v);
    tails.push_back(above);
    while (i > 0 && cells[i - 1].first == v) {
      above += cells[i - 1].second;
      --i;
    }
  }
  std::reverse(values.begin(), values.end());
  std::reverse(tails.begin(), tails.end());
  return DistributionFunction(std::move(values), std::move(tails), total);
}

ThresholdLadder threshold_ladder(const GridFunction& f, const LadderStrategy& strategy,
                                 MeasureSpec weights) {
  if (f.is_zero()) throw InvalidArgument("threshold_ladder: function is identically zero");
  std::vector<std::pair<double, double>> cells;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 0.0) cells.push_back({f[i], cell_weight(f.grid(), i, weights)});
  }
  std::sort(cells.begin(), cells.end());

  std::vector<double> levels;
  if (std::holds_alternative<AllValues>(strategy)) {
    for (auto& c : cells) {
      if (levels.empty() || c.first != levels.back()) levels.push_back(c.first);
    }
    return ThresholdLadder(std::move(levels));
  }

  int m = std::get<Quantile>(strategy).m;
  if (m < 1) throw InvalidArgument("threshold_ladder: Quantile needs m >= 1");
  double total = 0.0;
  for (auto& c : cells) total += c.second;
  double cumulative = 0.0;
  std::size_t next = 1;
  for (auto& c : cells) {
    cumulative += c.second;
    while (next <= static_cast<std::size_t>(m) &&
           cumulative >= total * static_cast<double>(next) / m * (1.0 - 1e-12)) {
      if (levels.empty() || c.first > levels.back()) levels.push_back(c.first);
      ++next;
    }
  }
  if (levels.back() < cells.back().first) levels.push_back(cells.back().first);
  return ThresholdLadder(std::move(levels));
}

std::vector<SetMask> ladder_masks(const GridFunction& f, const ThresholdLadder& ladder) {
  std::vector<SetMask> masks;
  masks.reserve(ladder.size());
  for (std::size_t k = 0; k < ladder.size(); ++k) masks.push_back(superlevel_set(f, ladder.below(k)));
  return masks;
}

GridFunction layer_cake(const ThresholdLadder& ladder, std::span<const SetMask> masks) {
  if (masks.size() != ladder.size()) {
    throw InvalidArgument("layer_cake: need one mask per ladder level");
  }
  const Grid& g = masks.front().grid();
  for (std::size_t k = 1; k < masks.size(); ++k) {
    if (!(masks[k].grid() == g)) throw GridMismatch("layer_cake: masks on different grids");
    if (!masks[k].subset_of(masks[k - 1])) {
      throw InvalidArgument("layer_cake: masks are not nested at level " + std::to_string(k));
    }
  }
  std::vector<double> values(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t depth = 0;
    while (depth < masks.size() && masks[depth].contains(i)) ++depth;
    values[i] = depth == 0 ? 0.0 : ladder[depth - 1];
  }
  return GridFunction(g, std::move(values));
}

}  // namespace rpl
