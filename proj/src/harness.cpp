#include "rpl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rpl/convexsets.hpp"
#include "rpl/error.hpp"
#include "rpl/family.hpp"
#include "rpl/gauss.hpp"
#include "rpl/parallel.hpp"

namespace rpl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void check_t(double t, const char* what) {
  if (!(t > 0.0 && t < 1.0)) throw InvalidArgument(std::string(what) + ": t must lie in (0,1)");
}

void check_on(const GridFunction& f, const Grid& g, const char* what) {
  if (!(f.grid() == g)) throw GridMismatch(std::string(what) + ": function is not on the source grid");
}

std::string num(double v) { return format_number(v); }

// f* or the zero function when f vanishes; ladder size reported through `levels`.
GridFunction star_of(const GridFunction& f, const RearrangementSpec& spec, const ChainOptions& options,
                     std::size_t& levels) {
  if (f.is_zero()) {
    levels = 0;
    return GridFunction(spec.target());
  }
  ThresholdLadder ladder = threshold_ladder(f, options.ladder, spec.source_measure());
  levels = ladder.size();
  return rearrange_function(f, spec, ladder);
}

SupconvOptions supconv_options(const ChainOptions& options) { return {options.method, options.ladder}; }

// Both sides of a chain use the same method, the direct one unless both
// resolve to level sets.
SupconvOptions supconv_options(const ChainOptions& options, std::span<const GridFunction> a,
                               std::span<const GridFunction> b) {
  SupconvOptions o = supconv_options(options);
  if (o.method == SupconvMethod::Auto) {
    bool level = resolve_method(a, o) == SupconvMethod::LevelSet && resolve_method(b, o) == SupconvMethod::LevelSet;
    o.method = level ? SupconvMethod::LevelSet : SupconvMethod::Direct;
  }
  return o;
}

std::string method_name(SupconvMethod m) {
  switch (m) {
    case SupconvMethod::Auto:
      return "auto";
    case SupconvMethod::Direct:
      return "direct";
    case SupconvMethod::LevelSet:
      return "levelset";
  }
  return "auto";
}

double h_of(const Grid& a, const Grid& b) { return std::max(a.max_spacing(), b.max_spacing()); }

void set_tol(ChainReport& r, const ToleranceModel& model, double h, double scale) {
  r.tol = model.tol(h, scale);
  r.meta("h", h);
}

void equimeasure_check(ChainReport& r, const std::string& name, double lhs, double rhs) {
  r.add_check("equimeasurable_" + name, lhs - rhs, r.tol, "source " + num(lhs) + " target " + num(rhs));
}

// Box scaled about the origin by `factor` with the same spacing.
Grid enlarged(const Grid& g, double factor) {
  if (factor <= 1.0) return g;
  std::array<double, 2> lo{}, hi{};
  std::array<int, 2> n{};
  for (int a = 0; a < g.dim(); ++a) {
    double extra = (factor - 1.0) * std::max(std::abs(g.lo(a)), std::abs(g.hi(a)));
    int cells = static_cast<int>(std::ceil(extra / g.spacing(a) - 1e-9));
    lo[a] = g.lo(a) - cells * g.spacing(a);
    hi[a] = g.hi(a) + cells * g.spacing(a);
    n[a] = g.n(a) + 2 * cells;
  }
  return g.dim() == 1 ? Grid(lo[0], hi[0], n[0]) : Grid({lo[0], lo[1]}, {hi[0], hi[1]}, n);
}

std::string cell_name(const Grid& g, std::size_t flat) {
  auto idx = g.index_of(flat);
  std::ostringstream os;
  os << "cell (" << idx[0];
  if (g.dim() == 2) os << "," << idx[1];
  os << ") at x=(" << num(g.center_of(flat)[0]);
  if (g.dim() == 2) os << "," << num(g.center_of(flat)[1]);
  os << ")";
  return os.str();
}

double phi_inv_closed(double v) {
  if (v >= 1.0) return kInf;
  return gauss_phi_inv(v);
}

void check_unit_valued(const GridFunction& f, const char* what, std::size_t index) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 1.0) {
      throw PreconditionError(std::string(what) + ": function values must lie in [0,1]",
                              "function " + std::to_string(index) + " " + cell_name(f.grid(), i) +
                                  " value " + num(f[i]));
    }
  }
}

}  // namespace

ChainReport bmi_check(const SetMask& a, const SetMask& b, double t, const RearrangementSpec& spec,
                      const ChainOptions& options) {
  Stopwatch clock;
  check_t(t, "bmi_check");
  if (spec.kind() != RearrangementKind::ConvexBody) throw InvalidArgument("bmi_check: needs a convex body rearrangement");
  if (!(a.grid() == spec.source()) || !(b.grid() == spec.source())) throw GridMismatch("bmi_check: sets not on the source grid");
  ChainReport r("bmi");
  const MeasureSpec leb = MeasureSpec::lebesgue();
  const double w[2] = {1.0 - t, t};
  double va = volume(a, leb), vb = volume(b, leb);
  r.degenerate = a.empty() || b.empty();
  if (r.degenerate) r.notes.push_back("empty set: chain holds trivially");
  const SetMask sources[2] = {a, b};
  SetMask sum = minkowski_weighted_sum(sources, w, spec.source());
  SetImage sa = rearrange_set_image(a, spec), sb = rearrange_set_image(b, spec);
  const SetMask images[2] = {sa.mask, sb.mask};
  SetMask sum_star = minkowski_weighted_sum(images, w, spec.target());
  const double vols[2] = {va, vb};
  r.add_term("|(1-t)A+tB|", volume(sum, leb));
  r.add_term("|(1-t)A*+tB*|", volume(sum_star, leb));
  r.add_term("|A|^(1-t)|B|^t", evaluate_mean(Geometric{{1.0 - t, t}}, vols));
  set_tol(r, options.tolerance, h_of(spec.source(), spec.target()), r.scale());
  r.compare_chain();
  equimeasure_check(r, "A", va, sa.target_measure);
  equimeasure_check(r, "B", vb, sb.target_measure);
  r.meta("t", t);
  r.meta("rearrangement", spec.describe());
  r.runtime_seconds = clock.seconds();
  return r;
}

ChainReport gaussian_isoperimetry_check(const SetMask& a, double radius, const ChainOptions& options) {
  Stopwatch clock;
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidArgument("gaussian_isoperimetry_check: r must be >= 0");
  const Grid& g = a.grid();
  const MeasureSpec gauss = MeasureSpec::gaussian();
  ChainReport r("isoperimetry");
  double mass = volume(a, gauss);
  r.degenerate = a.empty();
  SetMask dilated = a;
  if (radius > 0.0 && !a.empty()) {
    SetMask ball = centered_ball_mask(radius, g.dim(), {g.spacing(0), g.dim() == 2 ? g.spacing(1) : 1.0});
    const SetMask parts[2] = {a, ball};
    const double w[2] = {1.0, 1.0};
    dilated = minkowski_weighted_sum(parts, w, g, {.clip = true});
  }
  double rhs = mass <= 0.0 ? 0.0 : mass >= 1.0 ? 1.0 : gauss_phi(gauss_phi_inv(mass) + radius);
  r.add_term("gamma_d(A+rB)", volume(dilated, gauss));
  r.add_term("Phi(Phi^-1(gamma_d(A))+r)", rhs);
  set_tol(r, options.tolerance, g.max_spacing(), r.scale());
  r.compare_chain();
  r.meta("r", radius);
  r.meta("gamma_d(A)", mass);
  r.runtime_seconds = clock.seconds();
  return r;
}

ChainReport pli_chain(const GridFunction& f, const GridFunction& g, double t, const RearrangementSpec& spec,
                      const PsiTransform& psi, const ChainOptions& options) {
  Stopwatch clock;
  check_t(t, "pli_chain");
  if (spec.kind() != RearrangementKind::ConvexBody) throw InvalidArgument("pli_chain: needs a convex body rearrangement");
  check_on(f, spec.source(), "pli_chain");
  check_on(g, spec.source(), "pli_chain");
  validate(psi);
  ChainReport r("pli");
  const MeasureSpec leb = MeasureSpec::lebesgue();
  double int_f = integrate(f, leb), int_g = integrate(g, leb);
  r.degenerate = int_f == 0.0 || int_g == 0.0;
  if (r.degenerate) r.notes.push_back("vanishing integral: chain holds trivially");
  std::size_t lf = 0, lg = 0;
  GridFunction fs = star_of(f, spec, options, lf);
  GridFunction gs = star_of(g, spec, options, lg);
  const MeanSpec mean = Geometric{{1.0 - t, t}};
  const ComboMap combo{{1.0 - t, t}};
  const GridFunction pair[2] = {f, g};
  const GridFunction pair_star[2] = {fs, gs};
  const SupconvOptions so = supconv_options(options, pair, pair_star);
  GridFunction box = sup_convolve(pair, mean, combo, spec.source(), so);
  GridFunction box_star = sup_convolve(pair_star, mean, combo, spec.target(), so);
  r.add_term("int psi(f box g)", integrate(psi_apply(psi, box), leb));
  r.add_term("int psi(f* box g*)", integrate(psi_apply(psi, box_star), leb));
  if (std::holds_alternative<Identity>(psi)) {
    const double ints[2] = {int_f, int_g};
    r.add_term("(int f)^(1-t)(int g)^t", evaluate_mean(mean, ints));
  }
  set_tol(r, options.tolerance, h_of(spec.source(), spec.target()), r.scale());
  r.compare_chain();
  equimeasure_check(r, "f", int_f, integrate(fs, leb));
  equimeasure_check(r, "g", int_g, integrate(gs, leb));
  r.meta("t", t);
  r.meta("psi", describe(psi));
  r.meta("rearrangement", spec.describe());
  r.meta("ladder_f", static_cast<double>(lf));
  r.meta("ladder_g", static_cast<double>(lg));
  r.meta("method", method_name(so.method));
  r.runtime_seconds = clock.seconds();
  return r;
}

ChainReport bbl_chain(const GridFunction& f, const GridFunction& g, double t, ExtendedReal p,
                      const RearrangementSpec& spec, const ChainOptions& options) {
  Stopwatch clock;
  check_t(t, "bbl_chain");
  if (spec.kind() != RearrangementKind::ConvexBody) throw InvalidArgument("bbl_chain: needs a convex body rearrangement");
  check_on(f, spec.source(), "bbl_chain");
  check_on(g, spec.source(), "bbl_chain");
  const int d = spec.source().dim();
  ExtendedReal q;
  try {
    q = bbl_exponent(p, d);
  } catch (const DomainError& e) {
    throw PreconditionError("bbl_chain: p must be >= -1/n", "p=" + p.str() + " n=" + std::to_string(d));
  }
  ChainReport r("bbl");
  const MeasureSpec leb = MeasureSpec::lebesgue();
  double int_f = integrate(f, leb), int_g = integrate(g, leb);
  r.degenerate = int_f == 0.0 || int_g == 0.0;
  if (r.degenerate) r.notes.push_back("vanishing integral: chain holds trivially");
  std::size_t lf = 0, lg = 0;
  GridFunction fs = star_of(f, spec, options, lf);
  GridFunction gs = star_of(g, spec, options, lg);
  const MeanSpec mean = PMean{p, {1.0 - t, t}};
  const ComboMap combo{{1.0 - t, t}};
  const GridFunction pair[2] = {f, g};
  const GridFunction pair_star[2] = {fs, gs};
  const SupconvOptions so = supconv_options(options, pair, pair_star);
  GridFunction box = sup_convolve(pair, mean, combo, spec.source(), so);
  GridFunction box_star = sup_convolve(pair_star, mean, combo, spec.target(), so);
  r.add_term("int f box_p g", integrate(box, leb));
  r.add_term("int f* box_p g*", integrate(box_star, leb));
  const double ints[2] = {int_f, int_g};
  r.add_term("M^t_q(int f,int g)", evaluate_mean(PMean{q, {1.0 - t, t}}, ints));
  set_tol(r, options.tolerance, h_of(spec.source(), spec.target()), r.scale());
  r.compare_chain();
  equimeasure_check(r, "f", int_f, integrate(fs, leb));
  equimeasure_check(r, "g", int_g, integrate(gs, leb));
  r.meta("t", t);
  r.meta("p", p.str());
  r.meta("q", q.str());
  r.meta("rearrangement", spec.describe());
  r.runtime_seconds = clock.seconds();
  return r;
}

ChainReport ehrhard_functional_chain(std::span<const GridFunction> fs, std::span<const double> lambda,
                                     std::span<const std::size_t> concave, const Grid& target,
                                     const ChainOptions& options) {
  Stopwatch clock;
  const std::size_t n = fs.size();
  if (n < 2) throw InvalidArgument("ehrhard_functional_chain: need at least two functions");
  if (lambda.size() != n) throw InvalidArgument("ehrhard_functional_chain: need one weight per function");
  const Grid& source = fs[0].grid();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(fs[i].grid() == source)) throw GridMismatch("ehrhard_functional_chain: functions on different grids");
    if (!(lambda[i] > 0.0)) throw InvalidArgument("ehrhard_functional_chain: weights must be positive");
    check_unit_valued(fs[i], "ehrhard_functional_chain", i);
  }
  std::vector<bool> in_i(n, false);
  for (std::size_t i : concave) {
    if (i >= n) throw InvalidArgument("ehrhard_functional_chain: index in I out of range");
    in_i[i] = true;
  }
  double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  if (total < 1.0 - 1e-12) {
    throw PreconditionError("ehrhard_functional_chain: weights must satisfy sum lambda_i >= 1", "sum=" + num(total));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (in_i[j]) continue;
    double excess = lambda[j] - (total - lambda[j]);
    if (excess > 1.0 + 1e-12) {
      throw PreconditionError("ehrhard_functional_chain: lambda_j - sum_{i != j} lambda_i <= 1 fails for j outside I",
                              "j=" + std::to_string(j) + " value=" + num(excess));
    }
  }
  const double h = h_of(source, target);
  const double conc_tol = options.tolerance.c0 + options.tolerance.c1 * h;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_i[i]) continue;
    ConcavityResult c = discrete_phi_concavity(fs[i], conc_tol);
    if (!c.concave) {
      throw PreconditionError("ehrhard_functional_chain: Phi^{-1} o f_i is not concave for i in I",
                              "i=" + std::to_string(i) + " " + c.witness);
    }
  }
  ChainReport r("ehrhard");
  std::size_t count_i = static_cast<std::size_t>(std::count(in_i.begin(), in_i.end(), true));
  if (count_i > 0 && count_i < n) {
    r.advisory = true;
    r.notes.push_back("I is a proper subset: verdict advisory");
  }
  const MeasureSpec gauss = MeasureSpec::gaussian();
  RearrangementSpec spec = RearrangementSpec::gaussian_half_space(source, target);
  std::vector<double> ints(n);
  std::vector<GridFunction> stars;
  for (std::size_t i = 0; i < n; ++i) {
    ints[i] = integrate(fs[i], gauss);
    std::size_t levels = 0;
    stars.push_back(star_of(fs[i], spec, options, levels));
  }
  r.degenerate = std::any_of(ints.begin(), ints.end(), [](double v) { return v == 0.0; });
  if (r.degenerate) r.notes.push_back("vanishing integral: chain holds trivially");
  const MeanSpec mean = PhiMean{std::vector<double>(lambda.begin(), lambda.end()), true};
  const ComboMap combo{std::vector<double>(lambda.begin(), lambda.end())};
  const Grid out = enlarged(source, total);
  const Grid out_star = enlarged(target, total);
  const SupconvOptions so = supconv_options(options, fs, stars);
  GridFunction box = sup_convolve(fs, mean, combo, out, so);
  GridFunction box_star = sup_convolve(stars, mean, combo, out_star, so);
  std::vector<double> clamped(ints);
  for (double& v : clamped) v = std::min(v, 1.0);
  r.add_term("int box_Phi f dgamma_d", integrate(box, gauss));
  r.add_term("int box_Phi f* dgamma", integrate(box_star, gauss));
  r.add_term("M_Phi(int f_i)", evaluate_mean(mean, clamped));
  set_tol(r, options.tolerance, h, std::max(1e-300, r.scale()));
  r.compare_chain();
  for (std::size_t i = 0; i < n; ++i) {
    equimeasure_check(r, "f" + std::to_string(i + 1), ints[i], integrate(stars[i], gauss));
  }
  std::ostringstream w;
  for (std::size_t i = 0; i < n; ++i) w << (i ? "," : "") << num(lambda[i]);
  r.meta("lambda", w.str());
  r.meta("concave_indices", static_cast<double>(count_i));
  r.meta("output_grid", out.describe());
  r.runtime_seconds = clock.seconds();
  return r;
}

ChainReport polar_pli_chain(const GridFunction& f, const GridFunction& g, double t, double lambda,
                            const RearrangementSpec& spec, const ChainOptions& options) {
  Stopwatch clock;
  check_t(t, "polar_pli_chain");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("polar_pli_chain: lambda must lie in (0,1)");
  check_on(f, spec.source(), "polar_pli_chain");
  check_on(g, spec.source(), "polar_pli_chain");
  ChainReport r("polar");
  const MeasureSpec m = spec.source_measure();
  double int_f = integrate(f, m), int_g = integrate(g, m);
  r.degenerate = int_f == 0.0 || int_g == 0.0;
  if (r.degenerate) r.notes.push_back("vanishing integral: chain holds trivially");
  std::size_t lf = 0, lg = 0;
  GridFunction fs = star_of(f, spec, options, lf);
  GridFunction gs = star_of(g, spec, options, lg);
  const MeanSpec mean = PolarMin{t, lambda};
  const ComboMap combo{{1.0 - t, t}};
  const GridFunction pair[2] = {f, g};
  const GridFunction pair_star[2] = {fs, gs};
  const SupconvOptions so = supconv_options(options, pair, pair_star);
  GridFunction box = sup_convolve(pair, mean, combo, spec.source(), so);
  GridFunction box_star = sup_convolve(pair_star, mean, combo, spec.target(), so);
  r.add_term("int f box_M g dmu", integrate(box, m));
  r.add_term("int f* box_M g* dmu", integrate(box_star, m));
  const double ints[2] = {int_f, int_g};
  r.add_term("M^lambda_-1(int f,int g)", evaluate_mean(PMean{ExtendedReal::finite(-1.0), {1.0 - lambda, lambda}}, ints));
  set_tol(r, options.tolerance, h_of(spec.source(), spec.target()), r.scale());
  r.compare_chain();
  equimeasure_check(r, "f", int_f, integrate(fs, m));
  equimeasure_check(r, "g", int_g, integrate(gs, m));
  r.meta("t", t);
  r.meta("lambda", lambda);
  r.meta("measure", to_string(m.kind));
  r.meta("rearrangement", spec.describe());
  r.runtime_seconds = clock.seconds();
  return r;
}

ChainReport integrated_lsi_chain(const GridFunction& f, double lambda, const Grid& target,
                                 const ChainOptions& options) {
  Stopwatch clock;
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("integrated_lsi_chain: lambda must be positive");
  const Grid& source = f.grid();
  RearrangementSpec spec = RearrangementSpec::gaussian_half_space(source, target);
  const MeasureSpec gauss = MeasureSpec::gaussian();
  ChainReport r("lsi");
  r.degenerate = f.is_zero();
  if (r.degenerate) r.notes.push_back("f vanishes: chain holds trivially");
  std::size_t levels = 0;
  GridFunction fs = star_of(f, spec, options, levels);
  auto norm = [&](const GridFunction& u) {
    return std::pow(integrate(psi_apply(Power{1.0 + lambda}, u), gauss), 1.0 / (1.0 + lambda));
  };
  r.add_term("int Q f dgamma_d", integrate(q_lambda(f, lambda, source), gauss));
  r.add_term("int Q f* dgamma", integrate(q_lambda(fs, lambda, target), gauss));
  double nf = norm(f);
  r.add_term("||f||_(1+lambda)", nf);
  set_tol(r, options.tolerance, h_of(source, target), r.scale());
  r.compare_chain();
  r.add_check("norm_preserved", nf - norm(fs), r.tol, "||f*||_(1+lambda) = " + num(norm(fs)));
  equimeasure_check(r, "f", integrate(f, gauss), integrate(fs, gauss));
  r.meta("lambda", lambda);
  r.meta("ladder", static_cast<double>(levels));
  r.runtime_seconds = clock.seconds();
  return r;
}

ChainReport superlevel_dominance_check(const GridFunction& f, double lambda, std::span<const double> levels,
                                       const Grid& target, const ChainOptions& options) {
  Stopwatch clock;
  if (!(lambda > 0.0)) throw InvalidArgument("superlevel_dominance_check: lambda must be positive");
  if (levels.empty()) throw InvalidArgument("superlevel_dominance_check: no levels");
  const Grid& source = f.grid();
  RearrangementSpec spec = RearrangementSpec::gaussian_half_space(source, target);
  const MeasureSpec gauss = MeasureSpec::gaussian();
  ChainReport r("dominance");
  r.degenerate = f.is_zero();
  std::optional<ThresholdLadder> ladder;
  GridFunction fs(target);
  if (!f.is_zero()) {
    ladder = threshold_ladder(f, options.ladder, gauss);
    fs = rearrange_function(f, spec, *ladder);
  }
  GridFunction q = q_lambda(f, lambda, source);
  GridFunction qs = q_lambda(fs, lambda, target);
  std::vector<SetMask> d_sets;
  for (double s : levels) {
    if (!(s > 0.0)) throw InvalidArgument("superlevel_dominance_check: levels must be positive");
    d_sets.push_back(superlevel_set(q, s));
    r.add_term("gamma_d{Qf>" + num(s) + "}", volume(d_sets.back(), gauss));
    r.add_term("gamma{Qf*>" + num(s) + "}", volume(superlevel_set(qs, s), gauss));
  }
  set_tol(r, options.tolerance, h_of(source, target), std::max(r.scale(), 1e-300));
  for (std::size_t k = 0; k < levels.size(); ++k) r.compare(2 * k, 2 * k + 1);
  if (ladder && std::holds_alternative<AllValues>(options.ladder)) {
    for (std::size_t k = 0; k < levels.size(); ++k) {
      SetMask route = supconv_superlevel(f, lambda, levels[k], *ladder, source);
      std::size_t mismatch = symmetric_difference(route, d_sets[k]);
      std::size_t allowance = std::max(boundary_layer(route), boundary_layer(d_sets[k]));
      r.add_flag_check("levelset_route_s=" + num(levels[k]), mismatch <= allowance,
                       std::to_string(mismatch) + " cells differ, allowance " + std::to_string(allowance));
    }
  }
  r.meta("lambda", lambda);
  r.runtime_seconds = clock.seconds();
  return r;
}

GridFunction minimal_admissible_u(const GridFunction& v, const GridFunction& w, double t) {
  check_t(t, "minimal_admissible_u");
  if (!(v.grid() == w.grid())) throw GridMismatch("minimal_admissible_u: v and w on different grids");
  const Grid& g = v.grid();
  const double c = t * (1.0 - t) / 2.0;
  std::vector<std::size_t> sv, sw;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v[i] > 0.0) sv.push_back(i);
    if (w[i] > 0.0) sw.push_back(i);
  }
  std::vector<double> u(g.size(), 0.0);
  for (std::size_t i : sv) {
    Point x = g.center_of(i);
    double vx = std::pow(v[i], 1.0 - t);
    for (std::size_t j : sw) {
      Point y = g.center_of(j);
      double d2 = (x[0] - y[0]) * (x[0] - y[0]) + (g.dim() == 2 ? (x[1] - y[1]) * (x[1] - y[1]) : 0.0);
      int k0 = g.nearest(0, (1.0 - t) * x[0] + t * y[0]);
      int k1 = g.dim() == 2 ? g.nearest(1, (1.0 - t) * x[1] + t * y[1]) : 0;
      std::size_t z = g.flat(k0, k1);
      u[z] = std::max(u[z], std::exp(-c * d2) * vx * std::pow(w[j], t));
    }
  }
  return GridFunction(g, std::move(u));
}

ChainReport curved_pli_check(const std::optional<GridFunction>& u_in, const GridFunction& v, const GridFunction& w,
                             double t, const ChainOptions& options, std::size_t exhaustive_limit) {
  Stopwatch clock;
  check_t(t, "curved_pli_check");
  if (!(v.grid() == w.grid())) throw GridMismatch("curved_pli_check: v and w on different grids");
  const Grid& g = v.grid();
  GridFunction u = u_in ? *u_in : minimal_admissible_u(v, w, t);
  if (!(u.grid() == g)) throw GridMismatch("curved_pli_check: u on a different grid");
  const double c = t * (1.0 - t) / 2.0;

  auto check_pair = [&](std::size_t i, std::size_t j) {
    if (v[i] == 0.0 || w[j] == 0.0) return;
    Point x = g.center_of(i), y = g.center_of(j);
    double d2 = (x[0] - y[0]) * (x[0] - y[0]) + (g.dim() == 2 ? (x[1] - y[1]) * (x[1] - y[1]) : 0.0);
    int k0 = g.nearest(0, (1.0 - t) * x[0] + t * y[0]);
    int k1 = g.dim() == 2 ? g.nearest(1, (1.0 - t) * x[1] + t * y[1]) : 0;
    std::size_t z = g.flat(k0, k1);
    double rhs = std::exp(-c * d2) * std::pow(v[i], 1.0 - t) * std::pow(w[j], t);
    if (u[z] < rhs * (1.0 - 1e-12)) {
      throw PreconditionError("curved_pli_check: hypothesis u((1-t)x+ty) >= e^{-t(1-t)|x-y|^2/2} v^{1-t}(x) w^t(y) fails",
                              "x=" + cell_name(g, i) + " y=" + cell_name(g, j) + " u=" + num(u[z]) + " rhs=" + num(rhs));
    }
  };
  const std::size_t n = g.size();
  const bool exhaustive = n * n <= exhaustive_limit;
  if (exhaustive) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) check_pair(i, j);
    }
  } else {
    Rng rng(0x5eedULL);
    for (std::size_t k = 0; k < exhaustive_limit; ++k) {
      check_pair(static_cast<std::size_t>(rng.next() % n), static_cast<std::size_t>(rng.next() % n));
    }
  }
  const MeasureSpec gauss = MeasureSpec::gaussian();
  ChainReport r("curved");
  double iv = integrate(v, gauss), iw = integrate(w, gauss);
  r.degenerate = iv == 0.0 || iw == 0.0;
  r.add_term("int u dgamma", integrate(u, gauss));
  const double ints[2] = {iv, iw};
  r.add_term("(int v)^(1-t)(int w)^t", evaluate_mean(Geometric{{1.0 - t, t}}, ints));
  set_tol(r, options.tolerance, g.max_spacing(), r.scale());
  r.compare_chain();
  r.meta("t", t);
  r.meta("hypothesis_scan", exhaustive ? "exhaustive" : "sampled");
  r.meta("u", u_in ? "given" : "minimal admissible");
  r.runtime_seconds = clock.seconds();
  return r;
}

ConcavityResult discrete_phi_concavity(const GridFunction& f, double tol) {
  const Grid& g = f.grid();
  ConcavityResult result;
  std::vector<double> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f[i] > 1.0) {
      result.concave = false;
      result.witness = cell_name(g, i) + " value " + num(f[i]) + " exceeds 1";
      return result;
    }
    phi[i] = f[i] > 0.0 ? phi_inv_closed(f[i]) : -kInf;
  }
  std::vector<std::array<int, 2>> dirs = {{1, 0}};
  if (g.dim() == 2) dirs = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  auto inside = [&](int i0, int i1) { return i0 >= 0 && i0 < g.n(0) && i1 >= 0 && i1 < g.n(1); };
  auto fail = [&](double excess, std::string why) {
    if (result.concave || excess > result.worst) {
      result.worst = excess;
      result.witness = std::move(why);
    }
    result.concave = false;
  };
  for (auto d : dirs) {
    double len2 = d[0] * d[0] * g.spacing(0) * g.spacing(0) +
                  (g.dim() == 2 ? d[1] * d[1] * g.spacing(1) * g.spacing(1) : 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto idx = g.index_of(i);
      // Support contiguity: a positive cell after a gap on the same line.
      int p0 = idx[0] - d[0], p1 = idx[1] - d[1];
      if (phi[i] > -kInf && inside(p0, p1) && phi[g.flat(p0, p1)] == -kInf) {
        int q0 = p0 - d[0], q1 = p1 - d[1];
        while (inside(q0, q1)) {
          if (phi[g.flat(q0, q1)] > -kInf) {
            fail(kInf, "support of f is not convex along a grid line at " + cell_name(g, i));
            break;
          }
          q0 -= d[0];
          q1 -= d[1];
        }
      }
      int a0 = idx[0] - d[0], a1 = idx[1] - d[1];
      int b0 = idx[0] + d[0], b1 = idx[1] + d[1];
      if (!inside(a0, a1) || !inside(b0, b1)) continue;
      double pa = phi[g.flat(a0, a1)], pb = phi[g.flat(b0, b1)], pc = phi[i];
      if (pa == -kInf || pb == -kInf || pc == -kInf) continue;
      if (pc == kInf) continue;
      if (pa == kInf || pb == kInf) {
        fail(kInf, "Phi^{-1} o f jumps to +inf next to finite " + cell_name(g, i));
        continue;
      }
      double second = (pa + pb - 2.0 * pc) / len2;
      if (second > tol) {
        fail(second - tol, "second difference " + num(second) + " > " + num(tol) + " at " + cell_name(g, i));
      }
    }
  }
  return result;
}

ConcavityResult profile_phi_concavity(const RearrangedFunction& star, double spacing, double tol) {
  struct Corner {
    double c;
    double y;
  };
  std::vector<Corner> corners;
  const auto& images = star.images();
  const auto& ladder = star.ladder();
  for (std::size_t k = 0; k < images.size(); ++k) {
    const SetImage& im = images[k];
    if (!std::isfinite(im.scale) || im.clamped || ladder[k] >= 1.0) continue;
    corners.push_back({im.scale, gauss_phi_inv(ladder[k])});
  }
  std::sort(corners.begin(), corners.end(), [](const Corner& a, const Corner& b) { return a.c < b.c; });
  std::vector<Corner> kept;
  for (const Corner& p : corners) {
    if (kept.empty() || p.c - kept.back().c >= spacing) kept.push_back(p);
  }
  ConcavityResult result;
  for (std::size_t k = 1; k + 1 < kept.size(); ++k) {
    const Corner& a = kept[k - 1];
    const Corner& b = kept[k];
    const Corner& c = kept[k + 1];
    double s1 = (b.y - a.y) / (b.c - a.c);
    double s2 = (c.y - b.y) / (c.c - b.c);
    double interp = a.y + (c.y - a.y) * (b.c - a.c) / (c.c - a.c);
    double excess = interp - b.y;
    double allowed = tol * std::max({1.0, std::abs(s1), std::abs(s2)});
    if (excess > allowed && (!result.concave ? excess - allowed > result.worst : true)) {
      result.concave = false;
      result.worst = excess - allowed;
      result.witness = "profile corner c=" + num(b.c) + " lies " + num(excess) + " below its chord";
    }
  }
  return result;
}

ChainReport concavity_preservation_check(const GridFunction& f, const RearrangementSpec& spec,
                                         const ChainOptions& options) {
  Stopwatch clock;
  if (spec.kind() != RearrangementKind::GaussianHalfSpace) {
    throw InvalidArgument("concavity_preservation_check: needs the Gaussian half-space rearrangement");
  }
  check_on(f, spec.source(), "concavity_preservation_check");
  const double h = h_of(spec.source(), spec.target());
  const double tol = options.tolerance.c0 + options.tolerance.c1 * h;
  ConcavityResult source = discrete_phi_concavity(f, tol);
  if (!source.concave) {
    throw PreconditionError("concavity_preservation_check: Phi^{-1} o f is not discretely concave", source.witness);
  }
  ChainReport r("concavity");
  r.tol = tol;
  r.meta("h", h);
  r.degenerate = f.is_zero();
  if (!f.is_zero()) {
    ThresholdLadder ladder = threshold_ladder(f, options.ladder, MeasureSpec::gaussian());
    RearrangedFunction star = rearrange_function_detail(f, spec, ladder);
    // Corner positions carry an error of about one source cell.
    ConcavityResult target = profile_phi_concavity(star, h, options.tolerance.c0 + options.tolerance.c1 * h);
    r.add_check("source_phi_concave", source.worst, tol, source.witness);
    r.add_flag_check("target_phi_concave", target.concave, target.witness);
    r.meta("ladder", static_cast<double>(ladder.size()));
  }
  r.meta("rearrangement", spec.describe());
  r.runtime_seconds = clock.seconds();
  return r;
}

ConvergenceReport convergence_study(const std::function<ChainReport(int)>& chain, std::span<const int> resolutions,
                                    std::span<const std::optional<double>> limits, const ChainOptions& options,
                                    double required_ratio) {
  if (resolutions.size() < 2) throw InvalidArgument("convergence_study: need at least two resolutions");
  for (std::size_t k = 1; k < resolutions.size(); ++k) {
    if (resolutions[k] != 2 * resolutions[k - 1]) {
      throw InvalidArgument("convergence_study: resolutions must double");
    }
  }
  std::vector<ChainReport> reports(resolutions.size());
  parallel_for(resolutions.size(), [&](std::size_t k) { reports[k] = chain(resolutions[k]); });

  ConvergenceReport out;
  out.chain = reports.front().chain;
  out.required_ratio = required_ratio;
  const std::size_t gaps = reports.front().comparisons.size();
  for (auto& c : reports.front().comparisons) {
    out.gap_labels.push_back(reports.front().labels[c.lhs] + " - " + reports.front().labels[c.rhs]);
  }
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const ChainReport& r = reports[k];
    if (r.comparisons.size() != gaps) throw InvalidArgument("convergence_study: chain shape changed with resolution");
    ConvergenceRow row;
    row.n = resolutions[k];
    auto h_meta = std::find_if(r.metadata.begin(), r.metadata.end(), [](auto& m) { return m.first == "h"; });
    row.h = h_meta != r.metadata.end() ? std::stod(h_meta->second) : 0.0;
    row.tol = r.tol;
    row.worst_violation = r.worst_violation();
    for (auto& c : r.comparisons) {
      row.gaps.push_back(c.gap);
      row.tols.push_back(c.tol);
    }
    out.violations_ok = out.violations_ok && row.worst_violation <= row.tol && r.passed();
    out.rows.push_back(std::move(row));
  }
  if (!limits.empty() && limits.size() != gaps) throw InvalidArgument("convergence_study: need one limit per gap");
  const std::size_t m = out.rows.size();
  for (std::size_t j = 0; j < gaps; ++j) {
    std::optional<double> known = limits.empty() ? std::nullopt : limits[j];
    double limit;
    if (known) {
      limit = *known;
    } else {
      if (m < 3) throw InvalidArgument("convergence_study: an unknown limit needs three resolutions");
      double g1 = out.rows[m - 3].gaps[j], g2 = out.rows[m - 2].gaps[j], g3 = out.rows[m - 1].gaps[j];
      double d1 = g1 - g2, d2 = g2 - g3;
      double ratio = d2 != 0.0 ? d1 / d2 : kInf;
      limit = std::isfinite(ratio) && ratio > 1.0 ? g3 - d2 / (ratio - 1.0) : g3;
    }
    out.limits.push_back(limit);
    out.limit_known.push_back(known.has_value());
    double worst_ratio = kInf;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      double floor = options.tolerance.c0 * std::max(1.0, reports[k + 1].scale());
      double e0 = std::abs(out.rows[k].gaps[j] - limit);
      double e1 = std::abs(out.rows[k + 1].gaps[j] - limit);
      if (e1 <= floor) continue;
      worst_ratio = std::min(worst_ratio, e0 / e1);
    }
    out.min_ratio.push_back(worst_ratio);
    if (!(worst_ratio >= required_ratio)) out.rates_ok = false;
    if (!std::isfinite(worst_ratio)) out.notes.push_back("gap " + std::to_string(j) + " at rounding level at every refinement");
  }
  return out;
}

std::string to_json(const ConvergenceReport& r, int indent) {
  using nlohmann::ordered_json;
  auto number = [](double v) -> ordered_json {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : v > 0 ? "inf" : "-inf";
  };
  ordered_json j;
  j["chain"] = r.chain;
  j["passed"] = r.passed();
  j["violations_ok"] = r.violations_ok;
  j["rates_ok"] = r.rates_ok;
  j["required_ratio"] = r.required_ratio;
  ordered_json gaps = ordered_json::array();
  for (std::size_t k = 0; k < r.gap_labels.size(); ++k) {
    ordered_json g;
    g["label"] = r.gap_labels[k];
    g["limit"] = number(r.limits[k]);
    g["limit_known"] = static_cast<bool>(r.limit_known[k]);
    g["min_ratio"] = number(r.min_ratio[k]);
    gaps.push_back(g);
  }
  j["gaps"] = gaps;
  ordered_json rows = ordered_json::array();
  for (auto& row : r.rows) {
    ordered_json o;
    o["n"] = row.n;
    o["h"] = row.h;
    ordered_json values = ordered_json::array();
    for (double v : row.gaps) values.push_back(number(v));
    o["gaps"] = values;
    o["tol"] = row.tol;
    o["worst_violation"] = row.worst_violation;
    rows.push_back(o);
  }
  j["rows"] = rows;
  j["notes"] = r.notes;
  return j.dump(indent);
}

std::string to_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "chain,gap,n,h,value,limit,error,tol\n";
  for (std::size_t j = 0; j < r.gap_labels.size(); ++j) {
    for (auto& row : r.rows) {
      os << r.chain << ',' << r.gap_labels[j] << ',' << row.n << ',' << format_number(row.h) << ','
         << format_number(row.gaps[j]) << ',' << format_number(r.limits[j]) << ','
         << format_number(std::abs(row.gaps[j] - r.limits[j])) << ',' << format_number(row.tols[j]) << '\n';
    }
  }
  return os.str();
}

}  // namespace rpl
