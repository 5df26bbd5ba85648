#pragma once

#include <functional>
#include <span>

// Independent numerical oracles used by the test suites. Everything here is
// built on GSL quadrature and elementary formulas, never on the library's
// own evaluation path.

namespace rkmix::testing {

/// Adaptive quadrature of f over [lo, hi] to ~1e-12 relative.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double epsrel = 1e-12);

/// Adaptive quadrature of f over [lo, infinity).
double integrate_to_inf(const std::function<double(double)>& f, double lo,
                        double epsrel = 1e-12);

/// K_nu(x) from the integral representation K_nu(x) = int_0^inf
/// exp(-x cosh t) cosh(nu t) dt, evaluated by adaptive quadrature.
double bessel_k_quadrature(double nu, double x, double epsrel = 1e-13);

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
double ks_statistic(std::span<const double> sample,
                    const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic KS critical value at significance level 1% for sample size n
/// (or effective size for the two-sample case).
double ks_critical_1pct(double effective_n);

}  // namespace rkmix::testing
