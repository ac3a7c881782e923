#include "rpl/means.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "overloaded.hpp"
#include "rpl/error.hpp"
#include "rpl/gauss.hpp"

namespace rpl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSmallP = 1e-5;

void check_weights(std::span<const double> t, const char* what) {
  if (t.size() < 1) throw InvalidArgument(std::string(what) + ": no weights");
  for (double w : t) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument(std::string(what) + ": weights must be positive");
  }
}

void check_inputs(std::span<const double> u, std::size_t n, const char* what) {
  if (u.size() != n) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(n) + " arguments, got " +
                          std::to_string(u.size()));
  }
  for (double v : u) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + ": arguments must be finite and >= 0");
  }
}

double geometric(std::span<const double> t, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += t[i] * std::log(u[i]);
  return std::exp(s);
}

double power_mean(double p, std::span<const double> t, std::span<const double> u) {
  if (p == 0.0) return geometric(t, u);
  if (std::abs(p) < kSmallP) {
    double total = std::accumulate(t.begin(), t.end(), 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += t[i] * std::expm1(p * std::log(u[i]));
    return std::exp((std::log(total) + std::log1p(s / total)) / p);
  }
  double m = p > 0.0 ? *std::max_element(u.begin(), u.end()) : *std::min_element(u.begin(), u.end());
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += t[i] * std::pow(u[i] / m, p);
  return m * std::pow(s, 1.0 / p);
}

}  // namespace

ExtendedReal ExtendedReal::finite(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("ExtendedReal::finite: value is not finite");
  return ExtendedReal(Kind::Finite, v);
}

ExtendedReal ExtendedReal::from_double(double v) {
  if (std::isnan(v)) throw InvalidArgument("ExtendedReal: NaN");
  if (v == kInf) return pos_inf();
  if (v == -kInf) return neg_inf();
  return finite(v);
}

double ExtendedReal::value() const {
  if (kind_ != Kind::Finite) throw InvalidArgument("ExtendedReal::value: infinite");
  return value_;
}

double ExtendedReal::to_double() const noexcept {
  switch (kind_) {
    case Kind::PosInf:
      return kInf;
    case Kind::NegInf:
      return -kInf;
    case Kind::Finite:
      break;
  }
  return value_;
}

std::string ExtendedReal::str() const {
  if (kind_ == Kind::PosInf) return "inf";
  if (kind_ == Kind::NegInf) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

void validate(const MeanSpec& spec) {
  std::visit(overloaded{
                 [](const PMean& m) { check_weights(m.t, "PMean"); },
                 [](const Geometric& m) { check_weights(m.t, "Geometric"); },
                 [](const PhiMean& m) { check_weights(m.lambda, "PhiMean"); },
                 [](const PolarMin& m) {
                   if (!(m.t > 0.0 && m.t < 1.0) || !(m.lambda > 0.0 && m.lambda < 1.0)) {
                     throw InvalidArgument("PolarMin: t and lambda must lie in (0,1)");
                   }
                 },
             },
             spec);
}

std::size_t arity(const MeanSpec& spec) {
  return std::visit(overloaded{
                        [](const PMean& m) { return m.t.size(); },
                        [](const Geometric& m) { return m.t.size(); },
                        [](const PhiMean& m) { return m.lambda.size(); },
                        [](const PolarMin&) { return std::size_t{2}; },
                    },
                    spec);
}

std::string describe(const MeanSpec& spec) {
  std::ostringstream os;
  os.precision(12);
  auto list = [&](const std::vector<double>& w) {
    os << '(';
    for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
    os << ')';
  };
  std::visit(overloaded{
                 [&](const PMean& m) {
                   os << "pmean p=" << m.p.str() << " t=";
                   list(m.t);
                 },
                 [&](const Geometric& m) {
                   os << "geometric t=";
                   list(m.t);
                 },
                 [&](const PhiMean& m) {
                   os << "phi_mean lambda=";
                   list(m.lambda);
                   if (m.closed) os << " closed";
                 },
                 [&](const PolarMin& m) { os << "polar_min t=" << m.t << " lambda=" << m.lambda; },
             },
             spec);
  return os.str();
}

double evaluate_mean(const MeanSpec& spec, std::span<const double> u) {
  return std::visit(
      overloaded{
          [&](const PMean& m) {
            check_inputs(u, m.t.size(), "PMean");
            if (std::any_of(u.begin(), u.end(), [](double v) { return v == 0.0; })) return 0.0;
            switch (m.p.kind()) {
              case ExtendedReal::Kind::PosInf:
                return *std::max_element(u.begin(), u.end());
              case ExtendedReal::Kind::NegInf:
                return *std::min_element(u.begin(), u.end());
              case ExtendedReal::Kind::Finite:
                break;
            }
            return power_mean(m.p.value(), m.t, u);
          },
          [&](const Geometric& m) {
            check_inputs(u, m.t.size(), "Geometric");
            if (std::any_of(u.begin(), u.end(), [](double v) { return v == 0.0; })) return 0.0;
            return geometric(m.t, u);
          },
          [&](const PhiMean& m) {
            check_inputs(u, m.lambda.size(), "PhiMean");
            for (double v : u) {
              if (v > 1.0 || (v == 1.0 && !m.closed)) {
                throw DomainError("PhiMean: argument " + std::to_string(v) + " outside [0,1)");
              }
            }
            if (std::any_of(u.begin(), u.end(), [](double v) { return v == 0.0; })) return 0.0;
            double s = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
              if (u[i] == 1.0) return 1.0;
              s += m.lambda[i] * gauss_phi_inv(u[i]);
            }
            return gauss_phi(s);
          },
          [&](const PolarMin& m) {
            check_inputs(u, 2, "PolarMin");
            if (u[0] == 0.0 || u[1] == 0.0) return 0.0;
            return std::min(std::pow(u[0], (1.0 - m.t) / (1.0 - m.lambda)), std::pow(u[1], m.t / m.lambda));
          },
      },
      spec);
}

MonotonicityReport check_coordinate_increasing(const MeanSpec& spec, std::span<const DominatedPair> pairs) {
  MonotonicityReport report;
  for (const DominatedPair& pair : pairs) {
    if (pair.x.size() != pair.y.size()) throw InvalidArgument("check_coordinate_increasing: size mismatch");
    for (std::size_t i = 0; i < pair.x.size(); ++i) {
      if (!(pair.y[i] > 0.0 && pair.x[i] > pair.y[i])) {
        throw InvalidArgument("check_coordinate_increasing: pair is not strictly dominated and positive");
      }
    }
    ++report.pairs;
    double mx = evaluate_mean(spec, pair.x);
    double my = evaluate_mean(spec, pair.y);
    auto witness = [&](const char* what) {
      if (!report.first_witness.empty()) return;
      std::ostringstream os;
      os.precision(17);
      os << what << " at x=(";
      for (std::size_t i = 0; i < pair.x.size(); ++i) os << (i ? "," : "") << pair.x[i];
      os << ") y=(";
      for (std::size_t i = 0; i < pair.y.size(); ++i) os << (i ? "," : "") << pair.y[i];
      os << ")";
      report.first_witness = os.str();
    };
    if (!(mx > my)) {
      ++report.strict_failures;
      witness("not strictly increasing");
    }
    std::vector<double> yk(pair.x.size());
    double previous = my;
    bool monotone = true;
    for (int k = 1; k <= 30; ++k) {
      double w = std::ldexp(1.0, -k);
      for (std::size_t i = 0; i < yk.size(); ++i) yk[i] = pair.x[i] - w * (pair.x[i] - pair.y[i]);
      double v = evaluate_mean(spec, yk);
      monotone = monotone && v >= previous;
      previous = v;
    }
    if (!monotone || std::abs(previous - mx) > 1e-6 * std::max(1.0, std::abs(mx))) {
      ++report.continuity_failures;
      witness("not continuous from below");
    }
  }
  return report;
}

void validate(const PsiTransform& psi) {
  std::visit(overloaded{
                 [](const Identity&) {},
                 [](const Power& p) {
                   if (!(p.q >= 0.0) || !std::isfinite(p.q)) throw InvalidArgument("Power: q must be >= 0");
                 },
                 [](const Clamp& c) {
                   if (!(c.c > 0.0)) throw InvalidArgument("Clamp: c must be positive");
                 },
                 [](const PiecewiseMonotone& p) {
                   if (p.x.empty() || p.x.size() != p.y.size()) {
                     throw InvalidArgument("PiecewiseMonotone: need matching non-empty breakpoints");
                   }
                   for (std::size_t k = 0; k < p.x.size(); ++k) {
                     if (!(p.y[k] >= 0.0)) throw InvalidArgument("PiecewiseMonotone: values must be >= 0");
                     if (k > 0 && !(p.x[k] > p.x[k - 1])) {
                       throw InvalidArgument("PiecewiseMonotone: breakpoints must increase");
                     }
                     if (k > 0 && !(p.y[k] >= p.y[k - 1])) {
                       throw InvalidArgument("PiecewiseMonotone: values must be non-decreasing");
                     }
                   }
                 },
             },
             psi);
}

std::string describe(const PsiTransform& psi) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Identity&) { os << "identity"; },
                 [&](const Power& p) { os << "power q=" << p.q; },
                 [&](const Clamp& c) { os << "clamp c=" << c.c; },
                 [&](const PiecewiseMonotone& p) { os << "piecewise " << p.x.size() << " breakpoints"; },
             },
             psi);
  return os.str();
}

double psi_apply(const PsiTransform& psi, double v) {
  return std::visit(overloaded{
                        [&](const Identity&) { return v; },
                        [&](const Power& p) {
                          if (p.q == 0.0) return v > 0.0 ? 1.0 : 0.0;
                          return std::pow(v, p.q);
                        },
                        [&](const Clamp& c) { return std::min(v, c.c); },
                        [&](const PiecewiseMonotone& p) {
                          if (v <= p.x.front()) return p.y.front();
                          if (v >= p.x.back()) return p.y.back();
                          auto it = std::upper_bound(p.x.begin(), p.x.end(), v);
                          std::size_t k = static_cast<std::size_t>(it - p.x.begin());
                          double w = (v - p.x[k - 1]) / (p.x[k] - p.x[k - 1]);
                          return p.y[k - 1] + w * (p.y[k] - p.y[k - 1]);
                        },
                    },
                    psi);
}

GridFunction psi_apply(const PsiTransform& psi, const GridFunction& f) {
  validate(psi);
  std::vector<double> values(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) values[i] = psi_apply(psi, f[i]);
  return GridFunction(f.grid(), std::move(values));
}

ExtendedReal bbl_exponent(ExtendedReal p, int n) {
  if (n < 1) throw InvalidArgument("bbl_exponent: n must be >= 1");
  const double bound = -1.0 / n;
  switch (p.kind()) {
    case ExtendedReal::Kind::PosInf:
      return ExtendedReal::finite(1.0 / n);
    case ExtendedReal::Kind::NegInf:
      throw DomainError("bbl_exponent: p = -inf is below -1/n");
    case ExtendedReal::Kind::Finite:
      break;
  }
  double v = p.value();
  if (std::abs(v - bound) <= 1e-12 * std::abs(bound)) return ExtendedReal::neg_inf();
  if (v < bound) {
    throw DomainError("bbl_exponent: p = " + p.str() + " is below -1/n = " + std::to_string(bound));
  }
  return ExtendedReal::finite(v / (n * v + 1.0));
}

}  // namespace rpl
