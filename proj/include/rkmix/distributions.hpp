#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rkmix/rng.hpp"

namespace rkmix {

/// Log of a zero density. Log-domain code treats this sentinel as an exact
/// zero contribution (log-sum-exp skips it).
constexpr double log_zero = -std::numeric_limits<double>::infinity();

/// Rayleigh amplitude distribution, p(a) = 2a/lambda0 * exp(-a^2/lambda0).
struct RayleighParams {
    double lambda0;  // mean-square amplitude, relative units

    bool valid() const { return lambda0 > 0.0 && std::isfinite(lambda0); }
};

/// K amplitude distribution parameterized by mean intensity and shape.
/// The scale of the underlying Gamma texture is lambda = sigma / alpha.
struct KParams {
    double sigma;  // mean intensity E[a^2]
    double alpha;  // shape; small alpha = heavy tail

    double lambda() const { return sigma / alpha; }
    bool valid() const {
        return sigma > 0.0 && alpha > 0.0 && std::isfinite(sigma) && std::isfinite(alpha);
    }
};

double rayleigh_log_pdf(double a, const RayleighParams& p);
double rayleigh_pfa(double a, const RayleighParams& p);

double k_log_pdf(double a, const KParams& p);
double k_pfa(double a, const KParams& p);

/// Single draws sharing a caller-owned stream.
double rayleigh_draw(Rng& rng, const RayleighParams& p);
double k_draw(Rng& rng, const KParams& p);

std::vector<double> rayleigh_sample(const RayleighParams& p, std::size_t n, std::uint64_t seed);
std::vector<double> k_sample(const KParams& p, std::size_t n, std::uint64_t seed);

}  // namespace rkmix
