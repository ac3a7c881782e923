#include "rpl/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rpl/error.hpp"
#include "rpl/gauss.hpp"
#include "rpl/parallel.hpp"

namespace rpl {

namespace {

bool touches_box(const SetMask& m) {
  const Grid& g = m.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m.contains(i)) continue;
    auto idx = g.index_of(i);
    for (int a = 0; a < g.dim(); ++a) {
      if (idx[a] == 0 || idx[a] == g.n(a) - 1) return true;
    }
  }
  return false;
}

std::shared_ptr<const RearrangementSpec::Shells> build_shells(const ConvexBody& k, const Grid& target) {
  std::vector<double> gauges(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) gauges[i] = k.gauge(target.center_of(i));
  std::sort(gauges.begin(), gauges.end());
  auto shells = std::make_shared<RearrangementSpec::Shells>();
  const double v = target.cell_volume();
  std::size_t i = 0;
  while (i < gauges.size() && std::isfinite(gauges[i])) {
    double g = gauges[i];
    // Group gauges equal up to rounding so mirror-image cells share a shell.
    while (i < gauges.size() && gauges[i] <= g + 1e-12 * std::max(1.0, g)) ++i;
    shells->gauges.push_back(gauges[i - 1]);
    shells->volumes.push_back(static_cast<double>(i) * v);
  }
  return shells;
}

SetImage body_image(double mu, const RearrangementSpec& spec) {
  const Grid& target = spec.target();
  SetImage image{SetMask(target), mu, 0.0, 0.0, false};
  if (!(mu > 0.0)) return image;
  const auto& shells = spec.shells();
  if (shells.gauges.empty()) {
    throw InvalidArgument("convex body rearrangement: no target cell has finite gauge");
  }
  // Volumes increase with k, so the first minimiser moves monotonically with mu.
  std::size_t best = 0;
  double best_err = std::abs(shells.volumes[0] - mu);
  for (std::size_t k = 1; k < shells.volumes.size(); ++k) {
    double err = std::abs(shells.volumes[k] - mu);
    if (err < best_err) {
      best = k;
      best_err = err;
    }
    if (shells.volumes[k] > mu) break;
  }
  double g = shells.gauges[best];
  double s = best + 1 < shells.gauges.size() ? 0.5 * (g + shells.gauges[best + 1])
                                             : g * (1.0 + 1e-9) + 1e-300;
  image.scale = s;
  image.mask = scaled_body_mask(spec.body(), s, target);
  image.target_measure = volume(image.mask, spec.target_measure());
  image.clamped = touches_box(image.mask);
  return image;
}

SetImage half_space_image(double mu, const RearrangementSpec& spec) {
  const Grid& target = spec.target();
  SetImage image{SetMask(target), mu, 0.0, -std::numeric_limits<double>::infinity(), false};
  if (!(mu > 0.0)) return image;
  if (mu >= 1.0) {
    image.mask = SetMask(target, std::vector<std::uint8_t>(target.size(), 1));
    image.scale = std::numeric_limits<double>::infinity();
    image.target_measure = 1.0;
    image.clamped = true;
    return image;
  }
  double c = gauss_phi_inv(mu);
  image.scale = c;
  for (int i = 0; i < target.n(0); ++i) {
    if (target.center(0, i) < c) image.mask.set(target.flat(i));
  }
  image.target_measure = gauss_phi(c);
  image.clamped = c >= target.hi(0) || c <= target.lo(0);
  return image;
}

}  // namespace

RearrangementSpec RearrangementSpec::convex_body(ConvexBody k, Grid source, std::optional<Grid> target) {
  Grid t = target ? *target : source;
  if (k.dim() != source.dim() || t.dim() != source.dim()) {
    throw InvalidArgument("convex body rearrangement: body, source and target dimensions must agree");
  }
  RearrangementSpec spec(RearrangementKind::ConvexBody, std::move(source), std::move(t));
  spec.shells_ = build_shells(k, spec.target_);
  spec.body_ = std::move(k);
  return spec;
}

RearrangementSpec RearrangementSpec::gaussian_half_space(Grid source, Grid target) {
  if (target.dim() != 1) throw InvalidArgument("half-space rearrangement: target grid must be 1-D");
  if (!(gauss_phi(target.lo(0)) < 1e-6 && gauss_phi(target.hi(0)) > 1.0 - 1e-6)) {
    throw InvalidArgument("half-space rearrangement: target grid must cover Phi^{-1}(1e-6) to "
                          "Phi^{-1}(1 - 1e-6), about [-4.76, 4.76]");
  }
  return RearrangementSpec(RearrangementKind::GaussianHalfSpace, std::move(source), std::move(target));
}

const ConvexBody& RearrangementSpec::body() const {
  if (!body_) throw InvalidArgument("RearrangementSpec::body: not a convex body rearrangement");
  return *body_;
}

const RearrangementSpec::Shells& RearrangementSpec::shells() const {
  if (!shells_) throw InvalidArgument("RearrangementSpec::shells: not a convex body rearrangement");
  return *shells_;
}

MeasureSpec RearrangementSpec::source_measure() const noexcept {
  return kind_ == RearrangementKind::ConvexBody ? MeasureSpec::lebesgue() : MeasureSpec::gaussian();
}

MeasureSpec RearrangementSpec::target_measure() const noexcept { return source_measure(); }

std::string RearrangementSpec::describe() const {
  std::ostringstream os;
  if (kind_ == RearrangementKind::ConvexBody) {
    os << "convex_body " << body_->describe();
  } else {
    os << "gaussian_half_space";
  }
  os << " source " << source_.describe() << " target " << target_.describe();
  return os.str();
}

SetImage rearrange_measure(double mu, const RearrangementSpec& spec) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("rearrange: measure must be finite and >= 0");
  return spec.kind() == RearrangementKind::ConvexBody ? body_image(mu, spec) : half_space_image(mu, spec);
}

SetImage rearrange_set_image(const SetMask& a, const RearrangementSpec& spec) {
  if (!(a.grid() == spec.source())) throw GridMismatch("rearrange_set: mask is not on the source grid");
  SetImage image = rearrange_measure(volume(a, spec.source_measure()), spec);
  return image;
}

SetMask rearrange_set(const SetMask& a, const RearrangementSpec& spec) {
  return rearrange_set_image(a, spec).mask;
}

RearrangedFunction::RearrangedFunction(GridFunction values, ThresholdLadder ladder,
                                       std::vector<SetImage> images)
    : values_(std::move(values)), ladder_(std::move(ladder)), images_(std::move(images)) {}

bool RearrangedFunction::clamped() const noexcept {
  return std::any_of(images_.begin(), images_.end(), [](const SetImage& i) { return i.clamped; });
}

double RearrangedFunction::measure_above(double lambda) const {
  auto levels = ladder_.levels();
  auto it = std::upper_bound(levels.begin(), levels.end(), lambda);
  if (it == levels.end()) return 0.0;
  return images_[static_cast<std::size_t>(it - levels.begin())].target_measure;
}

RearrangedFunction rearrange_function_detail(const GridFunction& f, const RearrangementSpec& spec,
                                             const ThresholdLadder& ladder) {
  if (!(f.grid() == spec.source())) throw GridMismatch("rearrange_function: f is not on the source grid");
  std::vector<SetImage> images(ladder.size(), SetImage{SetMask(spec.target())});
  parallel_for(ladder.size(), [&](std::size_t k) {
    images[k] = rearrange_set_image(superlevel_set(f, ladder.below(k)), spec);
  });
  std::vector<SetMask> masks;
  masks.reserve(images.size());
  for (auto& image : images) masks.push_back(image.mask);
  GridFunction values = layer_cake(ladder, masks);
  return RearrangedFunction(std::move(values), ladder, std::move(images));
}

GridFunction rearrange_function(const GridFunction& f, const RearrangementSpec& spec,
                                const ThresholdLadder& ladder) {
  return rearrange_function_detail(f, spec, ladder).function();
}

GridFunction rearrange_simple(std::span<const double> a, std::span<const SetMask> sets,
                              const RearrangementSpec& spec) {
  if (a.size() != sets.size() || a.empty()) {
    throw InvalidArgument("rearrange_simple: need one positive weight per set");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0) || !std::isfinite(a[i])) throw InvalidArgument("rearrange_simple: weights must be positive");
    if (!(sets[i].grid() == spec.source())) throw GridMismatch("rearrange_simple: set not on the source grid");
    if (i > 0 && (!sets[i].subset_of(sets[i - 1]) || sets[i] == sets[i - 1])) {
      throw InvalidArgument("rearrange_simple: sets are not strictly nested at index " + std::to_string(i));
    }
  }
  const Grid& target = spec.target();
  std::vector<double> values(target.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    SetMask image = rearrange_set(sets[i], spec);
    for (std::size_t c = 0; c < target.size(); ++c) {
      if (image.contains(c)) values[c] += a[i];
    }
  }
  return GridFunction(target, std::move(values));
}

CharacterizationReport characterization_check(const GridFunction& f, const RearrangementSpec& spec,
                                              const ThresholdLadder& ladder, double tol) {
  RearrangedFunction star = rearrange_function_detail(f, spec, ladder);
  CharacterizationReport report;
  report.tol = tol;
  for (double lambda : ladder.levels()) {
    SetMask lhs = superlevel_set(star.function(), lambda);
    SetImage rhs = rearrange_set_image(superlevel_set(f, lambda), spec);
    CharacterizationLevel level;
    level.lambda = lambda;
    level.mismatch = symmetric_difference(lhs, rhs.mask);
    level.allowance = std::max(boundary_layer(lhs), boundary_layer(rhs.mask));
    level.source_measure = rhs.source_measure;
    level.target_measure = star.measure_above(lambda);
    level.ok = level.mismatch <= level.allowance &&
               std::abs(level.source_measure - level.target_measure) <= tol;
    report.passed = report.passed && level.ok;
    report.levels.push_back(level);
  }
  return report;
}

}  // namespace rpl
