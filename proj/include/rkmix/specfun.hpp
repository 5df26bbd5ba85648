#pragma once

namespace rkmix::specfun {

/// ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

/// Modified Bessel function of the second kind K_nu(x), real order, x > 0.
/// Even in nu. Underflows to 0 for large x, overflows to +inf when the
/// true value exceeds the double range.
double bessel_k(double nu, double x);

/// Exponentially scaled form e^x * K_nu(x).
double bessel_k_scaled(double nu, double x);

/// ln(e^x * K_nu(x)) = ln K_nu(x) + x. Always finite for valid input;
/// this is the primitive the log-domain density code builds on.
double bessel_k_scaled_ln(double nu, double x);

}  // namespace rkmix::specfun
