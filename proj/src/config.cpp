#include "rpl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rpl/error.hpp"

namespace rpl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "missing");
  return *it;
}

const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(path, "expected a number");
}

double finite_number(const json& j, const std::string& path) {
  double v = number(j, path);
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  const json* v = optional_field(j, key);
  return v ? finite_number(*v, join(path, key)) : fallback;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) fail(path, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(finite_number(j[i], join(path, i)));
  return out;
}

Point point(const json& j, const std::string& path, int dim) {
  std::vector<double> v = numbers(j, path);
  if (static_cast<int>(v.size()) != dim) fail(path, "expected " + std::to_string(dim) + " coordinates");
  return {v[0], dim == 2 ? v[1] : 0.0};
}

Point point_or(const json& j, const std::string& path, const char* key, int dim, Point fallback) {
  const json* v = optional_field(j, key);
  return v ? point(*v, join(path, key), dim) : fallback;
}

GridSpec parse_grid(const json& j, const std::string& path) {
  GridSpec g;
  g.lo = numbers(require(j, path, "lo"), join(path, "lo"));
  g.hi = numbers(require(j, path, "hi"), join(path, "hi"));
  const json& n = require(j, path, "n");
  if (n.is_array()) {
    for (std::size_t i = 0; i < n.size(); ++i) g.n.push_back(integer(n[i], join(join(path, "n"), i)));
  } else {
    g.n.push_back(integer(n, join(path, "n")));
  }
  if (g.lo.empty() || g.lo.size() > 2) fail(join(path, "lo"), "grids have one or two axes");
  if (g.hi.size() != g.lo.size()) fail(join(path, "hi"), "length differs from lo");
  if (g.n.size() == 1 && g.lo.size() == 2) g.n.push_back(g.n[0]);
  if (g.n.size() != g.lo.size()) fail(join(path, "n"), "length differs from lo");
  try {
    (void)g.build();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return g;
}

ConvexBody parse_body(const json& j, const std::string& path, int dim) {
  std::string type = string(require(j, path, "type"), join(path, "type"));
  try {
    if (type == "ball") return ConvexBody::ball(number_or(j, path, "radius", 1.0), dim);
    if (type == "box") return ConvexBody::box(point_or(j, path, "halfwidths", dim, {1.0, 1.0}), dim);
    if (type == "polygon") {
      if (dim != 2) fail(join(path, "type"), "polygons need a 2-D grid");
      const json& v = require(j, path, "vertices");
      if (!v.is_array()) fail(join(path, "vertices"), "expected an array of points");
      std::vector<Point> vertices;
      for (std::size_t i = 0; i < v.size(); ++i) vertices.push_back(point(v[i], join(join(path, "vertices"), i), 2));
      return ConvexBody::polygon(std::move(vertices));
    }
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
  fail(join(path, "type"), "unknown body '" + type + "' (ball, box, polygon)");
}

Region parse_region(const json& j, const std::string& path, int dim) {
  if (!j.is_object() || j.size() != 1) fail(path, "expected one of {box, ball, half_space, body}");
  const std::string key = j.begin().key();
  const json& r = j.begin().value();
  const std::string sub = join(path, key);
  if (key == "box") return BoxRegion{point(require(r, sub, "lo"), join(sub, "lo"), dim), point(require(r, sub, "hi"), join(sub, "hi"), dim)};
  if (key == "ball") return BallRegion{point_or(r, sub, "center", dim, {0.0, 0.0}), number_or(r, sub, "radius", 1.0)};
  if (key == "half_space") {
    return HalfSpaceRegion{point_or(r, sub, "normal", dim, {1.0, 0.0}), number_or(r, sub, "offset", 0.0)};
  }
  if (key == "body") {
    return BodyRegion{parse_body(require(r, sub, "body"), join(sub, "body"), dim),
                      point_or(r, sub, "shift", dim, {0.0, 0.0}), number_or(r, sub, "scale", 1.0)};
  }
  fail(path, "unknown region '" + key + "'");
}

std::uint64_t seed_value(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

FunctionConfig parse_function(const json& j, const std::string& path, int dim, std::size_t index) {
  std::string family = string(require(j, path, "family"), join(path, "family"));
  FunctionConfig out;
  out.seed_offset = index;
  if (const json* s = optional_field(j, "seed_offset")) out.seed_offset = seed_value(*s, join(path, "seed_offset"));
  if (family == "gaussian_bump") {
    out.family = GaussianBump{point_or(j, path, "center", dim, {0.0, 0.0}), number_or(j, path, "sigma", 1.0),
                              number_or(j, path, "amplitude", 1.0)};
  } else if (family == "indicator") {
    Indicator ind;
    ind.value = number_or(j, path, "value", 1.0);
    const json& regions = require(j, path, "regions");
    if (!regions.is_array() || regions.empty()) fail(join(path, "regions"), "expected a non-empty array");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      ind.regions.push_back(parse_region(regions[i], join(join(path, "regions"), i), dim));
    }
    out.family = std::move(ind);
  } else if (family == "exp_linear") {
    ExpLinear e;
    e.slope = point_or(j, path, "slope", dim, {1.0, 0.0});
    if (const json* c = optional_field(j, "clip")) e.clip = number(*c, join(path, "clip"));
    out.family = e;
  } else if (family == "piecewise_random") {
    PiecewiseRandom p;
    if (const json* l = optional_field(j, "levels")) p.levels = integer(*l, join(path, "levels"));
    out.family = p;
  } else if (family == "log_concave_random") {
    out.family = LogConcaveRandom{};
  } else if (family == "phi_concave") {
    out.family = PhiConcave{number_or(j, path, "offset", 0.0), point_or(j, path, "slope", dim, {0.0, 0.0}),
                            number_or(j, path, "curvature", 0.0), point_or(j, path, "center", dim, {0.0, 0.0})};
  } else {
    fail(join(path, "family"),
         "unknown family '" + family +
             "' (gaussian_bump, indicator, exp_linear, piecewise_random, log_concave_random, phi_concave)");
  }
  return out;
}

PsiTransform parse_psi(const json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "identity") return Identity{};
  std::string kind = string(require(j, path, "kind"), join(path, "kind"));
  PsiTransform psi;
  if (kind == "identity") {
    psi = Identity{};
  } else if (kind == "power") {
    psi = Power{number_or(j, path, "q", 1.0)};
  } else if (kind == "clamp") {
    psi = Clamp{number_or(j, path, "c", 1.0)};
  } else if (kind == "piecewise") {
    psi = PiecewiseMonotone{numbers(require(j, path, "x"), join(path, "x")), numbers(require(j, path, "y"), join(path, "y"))};
  } else {
    fail(join(path, "kind"), "unknown psi '" + kind + "' (identity, power, clamp, piecewise)");
  }
  try {
    validate(psi);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return psi;
}

ChainConfig parse_chain(const json& j, const std::string& path) {
  ChainConfig c;
  if (!j.is_object()) fail(path, "expected an object");
  c.kind = string(require(j, path, "kind"), join(path, "kind"));
  static const std::vector<std::string> kinds = {"pli", "bbl", "ehrhard", "polar", "lsi", "curved",
                                                 "dominance", "bmi", "isoperimetry", "concavity"};
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) fail(join(path, "kind"), "unknown chain '" + c.kind + "'");
  c.t = number_or(j, path, "t", 0.5);
  c.lambda = number_or(j, path, "lambda", 0.5);
  c.radius = number_or(j, path, "radius", 1.0);
  if (const json* p = optional_field(j, "p")) c.p = ExtendedReal::from_double(number(*p, join(path, "p")));
  if (const json* w = optional_field(j, "weights")) c.weights = numbers(*w, join(path, "weights"));
  if (const json* l = optional_field(j, "levels")) c.levels = numbers(*l, join(path, "levels"));
  if (const json* i = optional_field(j, "I")) {
    if (!i->is_array()) fail(join(path, "I"), "expected an array of indices");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < i->size(); ++k) {
      int v = integer((*i)[k], join(join(path, "I"), k));
      if (v < 0) fail(join(join(path, "I"), k), "indices are non-negative");
      idx.push_back(static_cast<std::size_t>(v));
    }
    c.concave = std::move(idx);
  }
  if (const json* psi = optional_field(j, "psi")) c.psi = parse_psi(*psi, join(path, "psi"));
  return c;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

Grid GridSpec::build() const {
  return Grid::make(lo, hi, n);
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = line_of(text, byte);
    std::size_t start = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    std::size_t column = start == std::string_view::npos ? byte + 1 : byte - start;
    throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::vector<std::string> known = {"grid",   "target_grid", "measure",   "functions",   "rearrangement",
                                                 "ladder", "method",      "chain",     "tolerance",   "seed",
                                                 "convergence", "profile", "description"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) fail(it.key(), "unknown field");
  }

  ExperimentConfig c;
  c.grid = parse_grid(require(j, "", "grid"), "grid");
  const int dim = static_cast<int>(c.grid.lo.size());
  if (const json* t = optional_field(j, "target_grid")) c.target_grid = parse_grid(*t, "target_grid");

  if (const json* m = optional_field(j, "measure")) {
    std::string s = string(*m, "measure");
    if (s == "lebesgue") {
      c.measure = MeasureSpec::lebesgue();
    } else if (s == "gaussian") {
      c.measure = MeasureSpec::gaussian();
    } else {
      fail("measure", "expected 'lebesgue' or 'gaussian'");
    }
  }

  if (const json* s = optional_field(j, "seed")) c.seed = seed_value(*s, "seed");

  const json& fs = require(j, "", "functions");
  if (!fs.is_array() || fs.empty()) fail("functions", "expected a non-empty array");
  for (std::size_t i = 0; i < fs.size(); ++i) c.functions.push_back(parse_function(fs[i], join("functions", i), dim, i));

  if (const json* r = optional_field(j, "rearrangement")) {
    std::string kind = string(require(*r, "rearrangement", "kind"), "rearrangement.kind");
    if (kind == "convex_body") {
      c.rearrangement = RearrangementKind::ConvexBody;
      if (const json* b = optional_field(*r, "body")) c.body = parse_body(*b, "rearrangement.body", dim);
    } else if (kind == "gaussian_half_space") {
      c.rearrangement = RearrangementKind::GaussianHalfSpace;
    } else {
      fail("rearrangement.kind", "expected 'convex_body' or 'gaussian_half_space'");
    }
  } else if (c.measure.kind == MeasureKind::Gaussian) {
    c.rearrangement = RearrangementKind::GaussianHalfSpace;
  }

  if (const json* l = optional_field(j, "ladder")) {
    if (l->is_string() && l->get<std::string>() == "all") {
      c.ladder = AllValues{};
    } else if (l->is_object() && l->contains("quantile")) {
      int m = integer((*l)["quantile"], "ladder.quantile");
      if (m < 1) fail("ladder.quantile", "must be at least 1");
      c.ladder = Quantile{m};
    } else {
      fail("ladder", "expected \"all\" or {\"quantile\": m}");
    }
  }

  if (const json* m = optional_field(j, "method")) {
    std::string s = string(*m, "method");
    if (s == "auto") {
      c.method = SupconvMethod::Auto;
    } else if (s == "direct") {
      c.method = SupconvMethod::Direct;
    } else if (s == "levelset") {
      c.method = SupconvMethod::LevelSet;
    } else {
      fail("method", "expected 'auto', 'direct' or 'levelset'");
    }
  }

  if (const json* ch = optional_field(j, "chain")) c.chain = parse_chain(*ch, "chain");

  if (const json* t = optional_field(j, "tolerance")) {
    c.tolerance.c0 = number_or(*t, "tolerance", "c0", c.tolerance.c0);
    c.tolerance.c1 = number_or(*t, "tolerance", "c1", c.tolerance.c1);
    if (!(c.tolerance.c0 > 0.0)) fail("tolerance.c0", "must be positive");
    if (!(c.tolerance.c1 >= 0.0)) fail("tolerance.c1", "must be non-negative");
  }

  if (const json* cv = optional_field(j, "convergence")) {
    const json& res = require(*cv, "convergence", "resolutions");
    if (!res.is_array()) fail("convergence.resolutions", "expected an array of integers");
    for (std::size_t i = 0; i < res.size(); ++i) c.convergence.resolutions.push_back(integer(res[i], join("convergence.resolutions", i)));
    if (const json* lim = optional_field(*cv, "limits")) {
      if (!lim->is_array()) fail("convergence.limits", "expected an array of numbers or nulls");
      for (std::size_t i = 0; i < lim->size(); ++i) {
        if ((*lim)[i].is_null()) {
          c.convergence.limits.push_back(std::nullopt);
        } else {
          c.convergence.limits.push_back(finite_number((*lim)[i], join("convergence.limits", i)));
        }
      }
    }
    c.convergence.required_ratio = number_or(*cv, "convergence", "required_ratio", 1.7);
  }

  if (const json* p = optional_field(j, "profile")) {
    if (const json* cols = optional_field(*p, "columns")) {
      if (!cols->is_array()) fail("profile.columns", "expected an array of column names");
      c.profile.columns.clear();
      static const std::vector<std::string> names = {"x", "f", "fstar", "box", "q"};
      for (std::size_t i = 0; i < cols->size(); ++i) {
        std::string s = string((*cols)[i], join("profile.columns", i));
        if (std::find(names.begin(), names.end(), s) == names.end()) {
          fail(join("profile.columns", i), "unknown column '" + s + "' (x, f, fstar, box, q)");
        }
        c.profile.columns.push_back(s);
      }
    }
    c.profile.lambda = number_or(*p, "profile", "lambda", c.profile.lambda);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_resolution(ExperimentConfig& config, int n) {
  if (n < 2) throw ConfigError("resolution must be at least 2");
  for (int& v : config.grid.n) v = n;
  if (config.target_grid) {
    for (int& v : config.target_grid->n) v = n;
  }
}

Grid source_grid(const ExperimentConfig& config) { return config.grid.build(); }

Grid target_grid(const ExperimentConfig& config) {
  if (config.target_grid) return config.target_grid->build();
  if (config.rearrangement == RearrangementKind::GaussianHalfSpace) return Grid(-8.0, 8.0, config.grid.n[0]);
  return source_grid(config);
}

RearrangementSpec rearrangement_spec(const ExperimentConfig& config) {
  Grid source = source_grid(config);
  if (config.rearrangement == RearrangementKind::GaussianHalfSpace) {
    return RearrangementSpec::gaussian_half_space(source, target_grid(config));
  }
  ConvexBody body = config.body ? *config.body : ConvexBody::ball(1.0, source.dim());
  return RearrangementSpec::convex_body(body, source, target_grid(config));
}

std::vector<GridFunction> build_functions(const ExperimentConfig& config) {
  Grid grid = source_grid(config);
  std::vector<GridFunction> out;
  for (const FunctionConfig& fc : config.functions) {
    FamilySpec family = fc.family;
    if (auto* p = std::get_if<PiecewiseRandom>(&family)) p->seed = config.seed + fc.seed_offset;
    if (auto* p = std::get_if<LogConcaveRandom>(&family)) p->seed = config.seed + fc.seed_offset;
    out.push_back(make_function(family, grid));
  }
  return out;
}

ChainOptions chain_options(const ExperimentConfig& config) {
  return {config.tolerance, config.method, config.ladder};
}

}  // namespace rpl
