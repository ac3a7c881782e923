#include "rpl/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rpl/error.hpp"
#include "rpl/family.hpp"
#include "rpl/gauss.hpp"
#include "rpl/io.hpp"
#include "rpl/supconv.hpp"

namespace rpl {

namespace {

void need_functions(const ExperimentConfig& c, std::size_t lo, std::size_t hi) {
  std::size_t n = c.functions.size();
  if (n < lo || n > hi) {
    std::string want = lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi);
    throw ConfigError("config field 'functions': chain '" + c.chain.kind + "' takes " + want + " functions, got " +
                      std::to_string(n));
  }
}

SetMask indicator_mask(const ExperimentConfig& c, std::size_t i) {
  const auto* ind = std::get_if<Indicator>(&c.functions[i].family);
  if (!ind) throw ConfigError("config field 'functions[" + std::to_string(i) + "]': chain '" + c.chain.kind + "' needs an indicator");
  return make_mask(*ind, source_grid(c));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

void write_report(const ChainReport& r, const std::filesystem::path& out, std::ostream& log) {
  std::filesystem::create_directories(out);
  write_text(out / "report.json", to_json(r) + "\n");
  write_text(out / "report.csv", to_csv(r));
  log << r.chain << ": " << (r.passed() ? "pass" : "FAIL");
  if (r.degenerate) log << " (degenerate)";
  if (r.advisory) log << " (advisory)";
  log << ", worst violation " << format_number(r.worst_violation()) << ", tol " << format_number(r.tol) << "\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) log << "  " << r.labels[i] << " = " << format_number(r.values[i]) << "\n";
}

}  // namespace

ChainReport run_chain(const ExperimentConfig& c) {
  const std::string& kind = c.chain.kind;
  if (kind.empty()) throw ConfigError("config field 'chain': missing");
  const ChainOptions opts = chain_options(c);
  const ChainConfig& ch = c.chain;
  if (kind == "bmi") {
    need_functions(c, 2, 2);
    return bmi_check(indicator_mask(c, 0), indicator_mask(c, 1), ch.t, rearrangement_spec(c), opts);
  }
  if (kind == "isoperimetry") {
    need_functions(c, 1, 1);
    return gaussian_isoperimetry_check(indicator_mask(c, 0), ch.radius, opts);
  }
  std::vector<GridFunction> fs = build_functions(c);
  if (kind == "pli") {
    need_functions(c, 2, 2);
    return pli_chain(fs[0], fs[1], ch.t, rearrangement_spec(c), ch.psi, opts);
  }
  if (kind == "bbl") {
    need_functions(c, 2, 2);
    return bbl_chain(fs[0], fs[1], ch.t, ch.p, rearrangement_spec(c), opts);
  }
  if (kind == "ehrhard") {
    need_functions(c, 2, 64);
    std::vector<double> w = ch.weights;
    if (w.empty()) {
      if (fs.size() != 2) throw ConfigError("config field 'chain.weights': required for more than two functions");
      w = {1.0 - ch.t, ch.t};
    }
    std::vector<std::size_t> concave;
    if (ch.concave) {
      concave = *ch.concave;
    } else {
      for (std::size_t i = 0; i < fs.size(); ++i) concave.push_back(i);
    }
    return ehrhard_functional_chain(fs, w, concave, target_grid(c), opts);
  }
  if (kind == "polar") {
    need_functions(c, 2, 2);
    return polar_pli_chain(fs[0], fs[1], ch.t, ch.lambda, rearrangement_spec(c), opts);
  }
  if (kind == "lsi") {
    need_functions(c, 1, 1);
    return integrated_lsi_chain(fs[0], ch.lambda, target_grid(c), opts);
  }
  if (kind == "dominance") {
    need_functions(c, 1, 1);
    if (ch.levels.empty()) throw ConfigError("config field 'chain.levels': required for chain 'dominance'");
    return superlevel_dominance_check(fs[0], ch.lambda, ch.levels, target_grid(c), opts);
  }
  if (kind == "curved") {
    need_functions(c, 2, 3);
    if (fs.size() == 3) return curved_pli_check(fs[0], fs[1], fs[2], ch.t, opts);
    return curved_pli_check(std::nullopt, fs[0], fs[1], ch.t, opts);
  }
  if (kind == "concavity") {
    need_functions(c, 1, 1);
    ExperimentConfig half = c;
    half.rearrangement = RearrangementKind::GaussianHalfSpace;
    return concavity_preservation_check(fs[0], rearrangement_spec(half), opts);
  }
  throw ConfigError("config field 'chain.kind': unknown chain '" + kind + "'");
}

ChainReport equimeasurability_report(const GridFunction& f, const RearrangedFunction& star,
                                     const RearrangementSpec& spec, const ToleranceModel& tolerance) {
  ChainReport r("rearrange");
  const MeasureSpec m = spec.source_measure();
  const bool half = spec.kind() == RearrangementKind::GaussianHalfSpace;
  const double h = std::max(spec.source().max_spacing(), spec.target().max_spacing());
  const double tol = half ? tolerance.c0 : tolerance.c0 + tolerance.c1 * h;
  DistributionFunction dist = distribution_function(f, m);
  const ThresholdLadder& ladder = star.ladder();
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    double lambda = ladder.below(k);
    double source = dist(lambda);
    double target = star.measure_above(lambda);
    r.add_check("level_" + std::to_string(k), source - target, tol,
                "lambda " + format_number(lambda) + " source " + format_number(source) + " target " +
                    format_number(target));
  }
  r.add_term("int f dmu", integrate(f, m));
  r.add_term("int f* dalpha", integrate(star.function(), spec.target_measure()));
  r.tol = tol;
  r.meta("h", h);
  r.meta("levels", static_cast<double>(ladder.size()));
  r.meta("clamped", star.clamped() ? "yes" : "no");
  r.meta("rearrangement", spec.describe());
  return r;
}

ConvergenceReport run_convergence(const ExperimentConfig& c) {
  const auto& res = c.convergence.resolutions;
  if (res.size() < 2) throw ConfigError("config field 'convergence.resolutions': needs at least two resolutions");
  for (std::size_t i = 0; i < c.functions.size(); ++i) {
    if (!resampleable(c.functions[i].family)) {
      throw ConfigError("config field 'functions[" + std::to_string(i) + "]': family '" +
                        family_name(c.functions[i].family) + "' cannot be re-sampled at other resolutions");
    }
  }
  for (std::size_t k = 1; k < res.size(); ++k) {
    if (res[k] != 2 * res[k - 1]) throw ConfigError("config field 'convergence.resolutions': each resolution must double the previous one");
  }
  auto chain = [c](int n) {
    ExperimentConfig at = c;
    apply_resolution(at, n);
    return run_chain(at);
  };
  return convergence_study(chain, res, c.convergence.limits, chain_options(c), c.convergence.required_ratio);
}

std::string profile_csv(const ExperimentConfig& c) {
  const auto& cols = c.profile.columns;
  if (cols.empty()) throw ConfigError("config field 'profile.columns': no columns selected");
  Grid grid = source_grid(c);
  if (grid.dim() != 1) throw ConfigError("config field 'grid': profile needs a 1-D grid");
  if (c.functions.empty()) throw ConfigError("config field 'functions': profile needs a function");
  std::vector<GridFunction> fs = build_functions(c);
  const GridFunction& f = fs[0];
  auto wants = [&](const char* name) { return std::find(cols.begin(), cols.end(), name) != cols.end(); };
  std::optional<GridFunction> star, box, q;
  if (wants("fstar")) {
    ExperimentConfig same = c;
    if (!same.target_grid) same.target_grid = same.grid;
    if (!(target_grid(same) == grid)) throw ConfigError("config field 'target_grid': profile needs the target grid to equal the source grid");
    RearrangementSpec spec = rearrangement_spec(same);
    star = f.is_zero() ? GridFunction(grid) : rearrange_function(f, spec, threshold_ladder(f, c.ladder, spec.source_measure()));
  }
  if (wants("box")) {
    const GridFunction& g = fs.size() > 1 ? fs[1] : f;
    const GridFunction pair[2] = {f, g};
    const double t = c.chain.t;
    box = sup_convolve(pair, Geometric{{1.0 - t, t}}, ComboMap{{1.0 - t, t}}, grid, {c.method, c.ladder});
  }
  if (wants("q")) q = q_lambda(f, c.profile.lambda, grid);
  std::ostringstream os;
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::string& col = cols[k];
      double v = col == "x" ? grid.center(0, static_cast<int>(i))
                 : col == "f" ? f[i]
                 : col == "fstar" ? (*star)[i]
                 : col == "box" ? (*box)[i]
                                : (*q)[i];
      os << (k ? "," : "") << format_number(v);
    }
    os << "\n";
  }
  return os.str();
}

int cmd_rearrange(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  if (c.functions.empty()) throw ConfigError("config field 'functions': rearrange needs a function");
  GridFunction f = build_functions(c)[0];
  RearrangementSpec spec = rearrangement_spec(c);
  std::filesystem::create_directories(out);
  save_function((out / "f.txt").string(), f);
  if (f.is_zero()) {
    save_function((out / "fstar.txt").string(), GridFunction(spec.target()));
    log << "rearrange: f vanishes, f* = 0\n";
    return kExitPass;
  }
  RearrangedFunction star = rearrange_function_detail(f, spec, threshold_ladder(f, c.ladder, spec.source_measure()));
  save_function((out / "fstar.txt").string(), star.function());
  ChainReport r = equimeasurability_report(f, star, spec, c.tolerance);
  write_report(r, out, log);
  return r.passed() ? kExitPass : kExitViolation;
}

int cmd_chain(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  ChainReport r = run_chain(c);
  write_report(r, out, log);
  return r.passed() ? kExitPass : kExitViolation;
}

int cmd_convergence(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  ConvergenceReport r = run_convergence(c);
  std::filesystem::create_directories(out);
  write_text(out / "convergence.json", to_json(r) + "\n");
  write_text(out / "convergence.csv", to_csv(r));
  log << "convergence " << r.chain << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
  for (std::size_t j = 0; j < r.gap_labels.size(); ++j) {
    log << "  " << r.gap_labels[j] << ": limit " << format_number(r.limits[j]) << ", min ratio "
        << format_number(r.min_ratio[j]) << "\n";
  }
  return r.passed() ? kExitPass : kExitViolation;
}

int cmd_profile(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  std::string csv = profile_csv(c);
  std::filesystem::create_directories(out);
  write_text(out / "profile.csv", csv);
  log << "profile: wrote " << (out / "profile.csv").string() << "\n";
  return kExitPass;
}

int run_command(const CommandLine& cl, std::ostream& log, std::ostream& err) {
  try {
    ExperimentConfig c = load_config(cl.config);
    if (cl.seed_override) c.seed = *cl.seed_override;
    if (cl.resolution_override) apply_resolution(c, *cl.resolution_override);
    if (cl.command == "rearrange") return cmd_rearrange(c, cl.out, log);
    if (cl.command == "chain") return cmd_chain(c, cl.out, log);
    if (cl.command == "convergence") return cmd_convergence(c, cl.out, log);
    if (cl.command == "profile") return cmd_profile(c, cl.out, log);
    err << "error: unknown command '" << cl.command << "'\n";
    return kExitPrecondition;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitPrecondition;
}

}  // namespace rpl
