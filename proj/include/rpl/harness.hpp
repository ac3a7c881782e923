#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpl/grid.hpp"
#include "rpl/means.hpp"
#include "rpl/rearrange.hpp"
#include "rpl/report.hpp"
#include "rpl/supconv.hpp"

namespace rpl {

struct ChainOptions {
  ToleranceModel tolerance;
  SupconvMethod method = SupconvMethod::Auto;
  // Ladder used for rearrangements and for level-set sup-convolutions.
  LadderStrategy ladder = AllValues{};
};

// |(1-t)A + tB| >= |(1-t)A* + tB*| >= |A|^{1-t} |B|^t under Lebesgue measure.
ChainReport bmi_check(const SetMask& a, const SetMask& b, double t, const RearrangementSpec& spec,
                      const ChainOptions& options = {});

// gamma_d(A + rB_d) >= Phi(Phi^{-1}(gamma_d(A)) + r).
ChainReport gaussian_isoperimetry_check(const SetMask& a, double r, const ChainOptions& options = {});

// [int psi(f box g), int psi(f* box g*)] for the geometric mean with weights
// (1-t, t); with psi = identity the chain continues to (int f)^{1-t} (int g)^t.
ChainReport pli_chain(const GridFunction& f, const GridFunction& g, double t, const RearrangementSpec& spec,
                      const PsiTransform& psi = Identity{}, const ChainOptions& options = {});

// [int f box_p g, int f* box_p g*, M^t_{p/(dp+1)}(int f, int g)].
ChainReport bbl_chain(const GridFunction& f, const GridFunction& g, double t, ExtendedReal p,
                      const RearrangementSpec& spec, const ChainOptions& options = {});

// [int box_Phi f dgamma_d, int box_Phi f* dgamma, M_Phi(int f_1, ..., int f_n)]
// with the combination x -> sum lambda_i x_i. Functions take values in [0,1];
// indices in I must have Phi^{-1} o f_i discretely concave.
ChainReport ehrhard_functional_chain(std::span<const GridFunction> fs, std::span<const double> lambda,
                                     std::span<const std::size_t> concave, const Grid& target,
                                     const ChainOptions& options = {});

// [int f box_M g dmu, int f* box_M g* dmu, M^lambda_{-1}(int f, int g)] with
// M = PolarMin(t, lambda) and the measure of the rearrangement.
ChainReport polar_pli_chain(const GridFunction& f, const GridFunction& g, double t, double lambda,
                            const RearrangementSpec& spec, const ChainOptions& options = {});

// [int Q_lambda f dgamma_d, int Q_lambda f* dgamma, ||f||_{1+lambda}].
ChainReport integrated_lsi_chain(const GridFunction& f, double lambda, const Grid& target,
                                 const ChainOptions& options = {});

// gamma_d({Q_lambda f > s}) >= gamma({Q_lambda f* > s}) for each s.
ChainReport superlevel_dominance_check(const GridFunction& f, double lambda, std::span<const double> levels,
                                       const Grid& target, const ChainOptions& options = {});

// Smallest u on v's grid satisfying the curved hypothesis at every cell pair,
// with (1-t)x + ty snapped to its nearest cell.
GridFunction minimal_admissible_u(const GridFunction& v, const GridFunction& w, double t);

// int u dgamma >= (int v dgamma)^{1-t} (int w dgamma)^t after checking the
// hypothesis; u defaults to the minimal admissible one. Pairs are scanned
// exhaustively up to `exhaustive_limit`, otherwise a seeded sample of that
// size is checked.
ChainReport curved_pli_check(const std::optional<GridFunction>& u, const GridFunction& v, const GridFunction& w,
                             double t, const ChainOptions& options = {},
                             std::size_t exhaustive_limit = std::size_t{1} << 22);

struct ConcavityResult {
  bool concave = true;
  double worst = 0.0;  // largest excess over the slack
  std::string witness;
};

// Phi^{-1} o f concave on {f > 0}: every centred second difference along the
// axes and diagonals is at most tol (cells with f = 1 count as +inf), and
// {f > 0} meets every grid line in one run.
ConcavityResult discrete_phi_concavity(const GridFunction& f, double tol);

// Concavity of Phi^{-1} o f*, read from the level profile: the points
// (c_k, Phi^{-1}(lambda_k)) with c_k the end of the k-th half-line must lie
// on a concave curve within tol.
ConcavityResult profile_phi_concavity(const RearrangedFunction& star, double spacing, double tol);

// Throws PreconditionError when Phi^{-1} o f is not concave.
ChainReport concavity_preservation_check(const GridFunction& f, const RearrangementSpec& spec,
                                         const ChainOptions& options = {});

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  std::vector<double> gaps;
  std::vector<double> tols;
  double worst_violation = 0.0;
  double tol = 0.0;
};

struct ConvergenceReport {
  std::string chain;
  std::vector<std::string> gap_labels;
  std::vector<ConvergenceRow> rows;
  std::vector<double> limits;
  std::vector<bool> limit_known;
  // Per gap, min over doublings of |gap_n - limit| / |gap_2n - limit|.
  std::vector<double> min_ratio;
  double required_ratio = 1.7;
  std::vector<std::string> notes;
  bool violations_ok = true;
  bool rates_ok = true;
  bool passed() const noexcept { return violations_ok && rates_ok; }
};

// Runs the chain at each resolution. Gaps with an unknown limit use the
// Richardson estimate from the last three resolutions. Errors below
// c0 * scale count as converged.
ConvergenceReport convergence_study(const std::function<ChainReport(int)>& chain, std::span<const int> resolutions,
                                    std::span<const std::optional<double>> limits, const ChainOptions& options = {},
                                    double required_ratio = 1.7);

std::string to_json(const ConvergenceReport& report, int indent = 2);
std::string to_csv(const ConvergenceReport& report);

}  // namespace rpl
