#include "rpl/gauss.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rpl/error.hpp"

namespace rpl {

namespace {

constexpr double kSqrtTwoPi = 2.50662827463100050241576528481;

// Lower-half inverse, p in (0, 0.5].
double lower_inverse(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  double e = gauss_phi(x) - p;
  double u = e * kSqrtTwoPi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

double gauss_phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double gauss_phi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("gauss_phi_inv: p = " + std::to_string(p) + " outside (0,1)");
  }
  if (p <= 0.5) return lower_inverse(p);
  return -lower_inverse(1.0 - p);
}

double gauss_phi_inv_extended(double p) {
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return gauss_phi_inv(p);
}

}  // namespace rpl
