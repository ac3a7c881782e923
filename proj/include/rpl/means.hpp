#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rpl/grid.hpp"

namespace rpl {

// Real number or one of +-infinity, kept as a tag rather than a float
// sentinel.
class ExtendedReal {
 public:
  enum class Kind { Finite, PosInf, NegInf };

  ExtendedReal() = default;
  static ExtendedReal finite(double v);
  static ExtendedReal pos_inf() { return ExtendedReal(Kind::PosInf, 0.0); }
  static ExtendedReal neg_inf() { return ExtendedReal(Kind::NegInf, 0.0); }
  // +-inf doubles map to the tagged infinities.
  static ExtendedReal from_double(double v);

  Kind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == Kind::Finite; }
  double value() const;  // finite only
  double to_double() const noexcept;
  std::string str() const;

  bool operator==(const ExtendedReal&) const = default;

 private:
  ExtendedReal(Kind kind, double v) : kind_(kind), value_(v) {}

  Kind kind_ = Kind::Finite;
  double value_ = 0.0;
};

// (sum t_i u_i^p)^{1/p}; p = 0 is the weighted geometric mean prod u_i^{t_i},
// p = -inf / +inf are min / max.
struct PMean {
  ExtendedReal p;
  std::vector<double> t;
};

struct Geometric {
  std::vector<double> t;
};

// Phi(sum lambda_i Phi^{-1}(u_i)) on [0,1)^n. With `closed` the domain
// extends to [0,1]: Phi^{-1}(1) = +inf and the value at any coordinate 1 is
// the supremum of the mean from below.
struct PhiMean {
  std::vector<double> lambda;
  bool closed = false;
};

// min{u^{(1-t)/(1-lambda)}, v^{t/lambda}}.
struct PolarMin {
  double t = 0.5;
  double lambda = 0.5;
};

using MeanSpec = std::variant<PMean, Geometric, PhiMean, PolarMin>;

void validate(const MeanSpec& spec);
std::size_t arity(const MeanSpec& spec);
std::string describe(const MeanSpec& spec);

// Every kind returns 0 when some coordinate is 0.
double evaluate_mean(const MeanSpec& spec, std::span<const double> u);

struct MonotonicityReport {
  std::size_t pairs = 0;
  std::size_t strict_failures = 0;
  std::size_t continuity_failures = 0;
  std::string first_witness;
  bool passed() const noexcept { return strict_failures == 0 && continuity_failures == 0; }
};

struct DominatedPair {
  std::vector<double> x;  // strictly dominates y componentwise
  std::vector<double> y;
};

// M(x) > M(y) for every pair, and M(y_k) -> M(x) within 1e-6 along
// y_k = x - 2^{-k} (x - y).
MonotonicityReport check_coordinate_increasing(const MeanSpec& spec, std::span<const DominatedPair> pairs);

struct Identity {};
struct Power {
  double q = 1.0;
};
struct Clamp {
  double c = 1.0;
};
// Piecewise-linear through (x_k, y_k), constant outside; x strictly
// increasing, y non-decreasing and >= 0.
struct PiecewiseMonotone {
  std::vector<double> x;
  std::vector<double> y;
};
using PsiTransform = std::variant<Identity, Power, Clamp, PiecewiseMonotone>;

void validate(const PsiTransform& psi);
std::string describe(const PsiTransform& psi);
double psi_apply(const PsiTransform& psi, double v);
GridFunction psi_apply(const PsiTransform& psi, const GridFunction& f);

// p / (np + 1) for p >= -1/n, with p = -1/n -> -inf and p = +inf -> 1/n.
ExtendedReal bbl_exponent(ExtendedReal p, int n);

}  // namespace rpl
