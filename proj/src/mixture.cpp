#include "rkmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rkmix {

namespace {

// Per-sample component log densities (weight included), reused by the
// pdf, responsibilities, and segmentation paths.
void component_log_terms(double a, const RKMixture& theta, std::vector<double>& out) {
    out.resize(theta.component_count());
    out[0] = theta.w0 > 0.0 ? std::log(theta.w0) + rayleigh_log_pdf(a, theta.rayleigh) : log_zero;
    for (std::size_t m = 0; m < theta.components.size(); ++m) {
        const auto& c = theta.components[m];
        out[m + 1] = (c.weight > 0.0 && a > 0.0) ? std::log(c.weight) + k_log_pdf(a, c.params)
                                                 : log_zero;
    }
}

double log_sum_exp(const std::vector<double>& terms) {
    double hi = log_zero;
    for (const double t : terms) hi = std::max(hi, t);
    if (hi == log_zero) return log_zero;
    double sum = 0.0;
    for (const double t : terms)
        if (t != log_zero) sum += std::exp(t - hi);
    return hi + std::log(sum);
}

}  // namespace

void RKMixture::validate() const {
    if (!(w0 >= 0.0) || !rayleigh.valid())
        throw std::invalid_argument("invalid Rayleigh component");
    double weight_sum = w0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0) || !c.params.valid())
            throw std::invalid_argument("invalid K component");
        weight_sum += c.weight;
    }
    if (std::fabs(weight_sum - 1.0) > 1e-12)
        throw std::invalid_argument("mixture weights must sum to 1");
}

void RKMixture::canonicalize() {
    std::stable_sort(components.begin(), components.end(),
                     [](const KComponent& a, const KComponent& b) {
                         return a.params.sigma < b.params.sigma;
                     });
}

double mixture_log_pdf(double a, const RKMixture& theta) {
    if (a < 0.0 || std::isnan(a)) throw std::domain_error("amplitude must be non-negative");
    std::vector<double> terms;
    component_log_terms(a, theta, terms);
    return log_sum_exp(terms);
}

double mixture_pfa(double a, const RKMixture& theta) {
    if (a < 0.0 || std::isnan(a)) throw std::domain_error("amplitude must be non-negative");
    if (a == 0.0) return 1.0;  // exact even when the weight sum carries round-off
    double pfa = theta.w0 * rayleigh_pfa(a, theta.rayleigh);
    for (const auto& c : theta.components) pfa += c.weight * k_pfa(a, c.params);
    return std::min(pfa, 1.0);
}

ResponsibilityResult responsibilities(std::span<const double> data, const RKMixture& theta) {
    const std::size_t m = theta.component_count();
    ResponsibilityResult res;
    res.resp.n = data.size();
    res.resp.m = m;
    res.resp.r.resize(data.size() * m);

    std::vector<double> terms;
    for (std::size_t i = 0; i < data.size(); ++i) {
        component_log_terms(data[i], theta, terms);
        const double lse = log_sum_exp(terms);
        if (lse == log_zero || !std::isfinite(lse)) {
            for (std::size_t j = 0; j < m; ++j) res.resp(i, j) = 1.0 / static_cast<double>(m);
            res.degenerate_rows.push_back(i);
            continue;
        }
        res.loglik += lse;
        for (std::size_t j = 0; j < m; ++j)
            res.resp(i, j) = terms[j] == log_zero ? 0.0 : std::exp(terms[j] - lse);
    }
    return res;
}

MixtureSample sample_mixture(const RKMixture& theta, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_mixture: n must be >= 1");
    theta.validate();
    Rng rng(seed);
    MixtureSample out;
    out.amplitudes.resize(n);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double cum = theta.w0;
        std::size_t j = 0;
        while (u > cum && j < theta.components.size()) cum += theta.components[j++].weight;
        out.labels[i] = static_cast<int>(j);
        out.amplitudes[i] = j == 0 ? rayleigh_draw(rng, theta.rayleigh)
                                   : k_draw(rng, theta.components[j - 1].params);
    }
    return out;
}

std::vector<int> segment(const ImageGrid& image, const RKMixture& theta) {
    theta.validate();
    std::vector<int> labels(image.values.size(), 0);
    std::vector<double> terms;
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        const double v = image.values[i];
        const double a = image.quantity == Quantity::Intensity ? std::sqrt(v > 0.0 ? v : 0.0) : v;
        if (!(a > 0.0)) continue;
        component_log_terms(a, theta, terms);
        std::size_t best = 0;
        for (std::size_t j = 1; j < terms.size(); ++j)
            if (terms[j] > terms[best]) best = j;
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace rkmix
