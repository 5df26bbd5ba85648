#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rkmix {

/// Deterministic random stream. Streams are split by (seed, stream) so
/// independent consumers never share generator state.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

    /// Uniform draw in the open interval (0, 1).
    double uniform() {
        for (;;) {
            const double u = (engine_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
    }

    /// Gamma(shape, scale) by Marsaglia-Tsang squeeze, with the standard
    /// power boost for shape < 1. Valid for any shape > 0.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
        }
    }

private:
    // splitmix64 finalizer, used to decorrelate nearby seeds.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace rkmix
