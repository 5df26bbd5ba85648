#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rkmix/distributions.hpp"
#include "rkmix/tiles.hpp"

namespace rkmix {

struct KComponent {
    double weight;
    KParams params;
};

/// Rayleigh + K mixture. Component 0 is always the Rayleigh term; the K
/// components are kept in canonical order of ascending mean intensity.
struct RKMixture {
    double w0 = 1.0;
    RayleighParams rayleigh{1.0};
    std::vector<KComponent> components;

    std::size_t component_count() const { return components.size() + 1; }

    /// Weight of component j in mixture order (0 = Rayleigh).
    double weight(std::size_t j) const { return j == 0 ? w0 : components[j - 1].weight; }

    /// Mean intensity of component j.
    double mean_intensity(std::size_t j) const {
        return j == 0 ? rayleigh.lambda0 : components[j - 1].params.sigma;
    }

    /// Throws std::invalid_argument on weight-sum or parameter violations.
    void validate() const;

    /// Sorts K components by ascending sigma.
    void canonicalize();
};

/// N x M responsibility matrix, row-major.
struct ResponsibilityMatrix {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> r;

    double operator()(std::size_t i, std::size_t j) const { return r[i * m + j]; }
    double& operator()(std::size_t i, std::size_t j) { return r[i * m + j]; }
};

double mixture_log_pdf(double a, const RKMixture& theta);
double mixture_pfa(double a, const RKMixture& theta);

/// E-step: r[n][j] = w_j p_j(a_n) / sum_i w_i p_i(a_n), via log-sum-exp.
/// Rows with zero density under every component come back uniform and are
/// listed in `degenerate_rows` for the caller to act on.
struct ResponsibilityResult {
    ResponsibilityMatrix resp;
    double loglik = 0.0;  // sum of mixture log densities, degenerate rows excluded
    std::vector<std::size_t> degenerate_rows;
};
ResponsibilityResult responsibilities(std::span<const double> data, const RKMixture& theta);

struct MixtureSample {
    std::vector<double> amplitudes;
    std::vector<int> labels;  // ground-truth component index per draw
};
MixtureSample sample_mixture(const RKMixture& theta, std::size_t n, std::uint64_t seed);

/// Per-pixel argmax responsibility; ties go to the lower component index.
/// Non-positive pixels fall through to component 0.
std::vector<int> segment(const ImageGrid& image, const RKMixture& theta);

}  // namespace rkmix
