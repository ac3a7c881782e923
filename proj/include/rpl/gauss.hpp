#pragma once

#include <cmath>

namespace rpl {

inline constexpr double kInvSqrtTwoPi = 0.398942280401432677939946059934;

// Standard normal distribution function.
double gauss_phi(double x);

// Inverse of gauss_phi on (0,1). Throws DomainError outside the open interval.
// Rational initial approximation followed by one Halley correction against
// gauss_phi; |gauss_phi(gauss_phi_inv(p)) - p| <= 1e-9 on [1e-12, 1-1e-12].
double gauss_phi_inv(double p);

// Same as gauss_phi_inv but total on [0,1]: -inf at 0 and +inf at 1.
double gauss_phi_inv_extended(double p);

// Standard one-dimensional Gaussian density.
inline double gauss_density(double x) { return kInvSqrtTwoPi * std::exp(-0.5 * x * x); }

}  // namespace rpl
