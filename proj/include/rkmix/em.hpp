#pragma once

#include <span>
#include <vector>

#include "rkmix/mixture.hpp"

namespace rkmix {

struct EmConfig {
    double tol = 1e-8;        // relative log-likelihood change for convergence
    int max_iter = 500;
    double weight_floor = 1e-6;
    double alpha_min = 0.05;
    double alpha_max = 500.0;
};

struct FitResult {
    RKMixture theta;
    double loglik = 0.0;
    std::vector<double> loglik_trace;  // one entry per iteration, plus the final value
    int iterations = 0;
    bool converged = false;
    std::size_t n_samples = 0;
    /// K-component indices whose weight sat at the floor for more than 10
    /// consecutive iterations. Reported, not fatal.
    std::vector<int> degenerate_components;
};

/// Parameter count of an M-component model: 1 for the pure-Rayleigh model,
/// otherwise all M weights plus lambda0 plus (sigma, alpha) per K component.
int fit_param_count(int m);

/// Generalized-EM fit of an M-component R-K mixture. Deterministic given
/// (data, M, config); the log-likelihood trace never decreases beyond
/// round-off. Throws InsufficientData and NonFiniteLikelihood.
FitResult em_fit(std::span<const double> data, int m, const EmConfig& config = {});

}  // namespace rkmix
