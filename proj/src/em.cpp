#include "rkmix/em.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rkmix/errors.hpp"
#include "rkmix/specfun.hpp"

namespace rkmix {

namespace {

constexpr double kLn4 = 1.38629436111989061883;

struct Bounds {
    double sigma_lo, sigma_hi;
    double alpha_lo, alpha_hi;
};

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Responsibility-weighted K-component log-likelihood at fixed sigma, as a
// function of alpha. This is the 1-D inner objective of the generalized
// M-step; the Bessel sum dominates its cost.
class KComponentObjective {
public:
    KComponentObjective(std::span<const double> a, std::span<const double> resp_col,
                        double r_sum, double r_ln_a_sum, double sigma)
        : a_(a), r_(resp_col), r_sum_(r_sum), r_ln_a_sum_(r_ln_a_sum), sigma_(sigma) {}

    double operator()(double alpha) const {
        const double lambda = sigma_ / alpha;
        const double ln_sqrt_lambda = 0.5 * std::log(lambda);
        const double scale = 2.0 / std::sqrt(lambda);
        double q = r_sum_ * (kLn4 - ln_sqrt_lambda - specfun::log_gamma(alpha) -
                             alpha * ln_sqrt_lambda) +
                   alpha * r_ln_a_sum_;
        const double nu = alpha - 1.0;
        for (std::size_t n = 0; n < a_.size(); ++n) {
            // Responsibilities this small cannot move the objective at the
            // monotonicity tolerance; skipping them saves most Bessel calls
            // once the components separate.
            if (r_[n] < 1e-14) continue;
            const double z = scale * a_[n];
            q += r_[n] * (specfun::bessel_k_scaled_ln(nu, z) - z);
        }
        return q;
    }

private:
    std::span<const double> a_;
    std::span<const double> r_;
    double r_sum_;
    double r_ln_a_sum_;
    double sigma_;
};

// Maximizes f(exp(t)) over t in [lo, hi] by golden section, returning the
// best point actually evaluated.
template <typename F>
std::pair<double, double> golden_max_ln(const F& f, double lo, double hi, int iters) {
    constexpr double kInvPhi = 0.61803398874989484820;
    double best_t = lo, best_v = f(std::exp(lo));
    const double v_hi = f(std::exp(hi));
    if (v_hi > best_v) {
        best_v = v_hi;
        best_t = hi;
    }
    double t1 = hi - kInvPhi * (hi - lo);
    double t2 = lo + kInvPhi * (hi - lo);
    double v1 = f(std::exp(t1));
    double v2 = f(std::exp(t2));
    for (int i = 0; i < iters; ++i) {
        if (v1 < v2) {
            lo = t1;
            t1 = t2;
            v1 = v2;
            t2 = lo + kInvPhi * (hi - lo);
            v2 = f(std::exp(t2));
        } else {
            hi = t2;
            t2 = t1;
            v2 = v1;
            t1 = hi - kInvPhi * (hi - lo);
            v1 = f(std::exp(t1));
        }
        const double v = std::max(v1, v2);
        if (v > best_v) {
            best_v = v;
            best_t = v1 >= v2 ? t1 : t2;
        }
    }
    return {std::exp(best_t), best_v};
}

// One local refinement of alpha around its current value.
template <typename F>
std::pair<double, double> refine_alpha(const F& f, double alpha, const Bounds& b, bool global) {
    if (global) {
        // Coarse scan across the full admissible range, then polish.
        const double lo = std::log(b.alpha_lo), hi = std::log(b.alpha_hi);
        double best_t = std::log(alpha), best_v = f(alpha);
        constexpr int kScan = 12;
        for (int i = 0; i <= kScan; ++i) {
            const double t = lo + (hi - lo) * i / kScan;
            const double v = f(std::exp(t));
            if (v > best_v) {
                best_v = v;
                best_t = t;
            }
        }
        const double width = (hi - lo) / kScan;
        auto [a2, v2] = golden_max_ln(f, std::max(lo, best_t - width), std::min(hi, best_t + width), 10);
        return v2 > best_v ? std::make_pair(a2, v2) : std::make_pair(std::exp(best_t), best_v);
    }
    const double t0 = std::log(alpha);
    const double lo = std::max(std::log(b.alpha_lo), t0 - kLn4);
    const double hi = std::min(std::log(b.alpha_hi), t0 + kLn4);
    return golden_max_ln(f, lo, hi, 9);
}

RKMixture initialize(std::span<const double> data, int m, const Bounds& b) {
    std::vector<double> intensity(data.size());
    std::transform(data.begin(), data.end(), intensity.begin(),
                   [](double a) { return a * a; });
    std::sort(intensity.begin(), intensity.end());

    const std::size_t n = intensity.size();
    auto group_stats = [&](int g, double& mean, double& var) {
        const std::size_t i0 = n * g / m;
        const std::size_t i1 = n * (g + 1) / m;
        mean = 0.0;
        for (std::size_t i = i0; i < i1; ++i) mean += intensity[i];
        mean /= static_cast<double>(i1 - i0);
        var = 0.0;
        for (std::size_t i = i0; i < i1; ++i) {
            const double d = intensity[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(i1 - i0);
    };

    RKMixture theta;
    theta.w0 = 1.0 / m;
    double mean, var;
    group_stats(0, mean, var);
    theta.rayleigh.lambda0 = clamp(mean, b.sigma_lo, b.sigma_hi);
    for (int g = 1; g < m; ++g) {
        group_stats(g, mean, var);
        const double sigma = clamp(mean, b.sigma_lo, b.sigma_hi);
        double alpha = var > sigma * sigma ? 2.0 * sigma * sigma / (var - sigma * sigma)
                                           : b.alpha_hi;
        alpha = clamp(alpha, b.alpha_lo, b.alpha_hi);
        theta.components.push_back({1.0 / m, {sigma, alpha}});
    }
    return theta;
}

}  // namespace

int fit_param_count(int m) {
    if (m < 1) throw std::invalid_argument("component count must be >= 1");
    return m == 1 ? 1 : 3 * m - 1;
}

FitResult em_fit(std::span<const double> data, int m, const EmConfig& config) {
    const std::size_t n = data.size();
    if (m < 1) throw std::invalid_argument("em_fit: component count must be >= 1");
    if (n < static_cast<std::size_t>(10 * fit_param_count(m)))
        throw InsufficientData("em_fit: " + std::to_string(n) + " samples is too few for M=" +
                               std::to_string(m));
    for (const double a : data)
        if (!(a > 0.0) || !std::isfinite(a))
            throw std::invalid_argument("em_fit: samples must be strictly positive and finite");

    std::vector<double> intensity(n), ln_a(n);
    double mean_intensity = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        intensity[i] = data[i] * data[i];
        ln_a[i] = std::log(data[i]);
        mean_intensity += intensity[i];
    }
    mean_intensity /= static_cast<double>(n);

    const Bounds bounds{1e-12 * mean_intensity, 1e6 * mean_intensity, config.alpha_min,
                        config.alpha_max};

    RKMixture theta = initialize(data, m, bounds);
    FitResult fit;
    fit.n_samples = n;

    const int n_k = m - 1;
    std::vector<int> floor_streak(m, 0);
    std::vector<bool> flagged(m, false);
    std::vector<double> resp_col(n);

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        fit.iterations = iter;
        const ResponsibilityResult e = responsibilities(data, theta);
        if (!e.degenerate_rows.empty() || !std::isfinite(e.loglik))
            throw NonFiniteLikelihood("em_fit: sample with zero density under every component");
        fit.loglik_trace.push_back(e.loglik);
        if (iter > 1) {
            const double prev = fit.loglik_trace[iter - 2];
            if (std::fabs(e.loglik - prev) < config.tol * std::fabs(e.loglik)) {
                fit.converged = true;
                break;
            }
        }

        // Weight update (exact M-step), floored and renormalized.
        std::vector<double> col_sum(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) col_sum[j] += e.resp(i, j);
        double w_total = 0.0;
        std::vector<double> w(m);
        for (int j = 0; j < m; ++j) {
            const double raw = col_sum[j] / static_cast<double>(n);
            w[j] = std::max(raw, config.weight_floor);
            w_total += w[j];
            if (raw < config.weight_floor) {
                if (++floor_streak[j] > 10 && !flagged[j]) {
                    flagged[j] = true;
                    fit.degenerate_components.push_back(j);
                }
            } else {
                floor_streak[j] = 0;
            }
        }
        for (int j = 0; j < m; ++j) w[j] /= w_total;
        theta.w0 = w[0];
        for (int k = 0; k < n_k; ++k) theta.components[k].weight = w[k + 1];

        // Rayleigh scale: exact weighted ML update.
        if (col_sum[0] > 0.0) {
            double num = 0.0;
            for (std::size_t i = 0; i < n; ++i) num += e.resp(i, 0) * intensity[i];
            theta.rayleigh.lambda0 = clamp(num / col_sum[0], bounds.sigma_lo, bounds.sigma_hi);
        }

        // K components: moment update for sigma, bracketed 1-D search for
        // alpha, accepted only when the component objective does not drop.
        for (int k = 0; k < n_k; ++k) {
            const int j = k + 1;
            if (col_sum[j] <= 0.0) continue;
            double r_i_sum = 0.0, r_ln_a_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                resp_col[i] = e.resp(i, j);
                r_i_sum += resp_col[i] * intensity[i];
                r_ln_a_sum += resp_col[i] * ln_a[i];
            }
            KParams& p = theta.components[k].params;
            const KComponentObjective q_old_fn(data, resp_col, col_sum[j], r_ln_a_sum, p.sigma);
            const double q_old = q_old_fn(p.alpha);

            const double sigma_new = clamp(r_i_sum / col_sum[j], bounds.sigma_lo, bounds.sigma_hi);
            const KComponentObjective q_new_fn(data, resp_col, col_sum[j], r_ln_a_sum, sigma_new);
            auto [alpha_new, q_new] = refine_alpha(q_new_fn, p.alpha, bounds, iter == 1);
            if (q_new >= q_old) {
                p.sigma = sigma_new;
                p.alpha = alpha_new;
            } else {
                // Fall back to improving alpha at the current scale.
                auto [alpha_alt, q_alt] = refine_alpha(q_old_fn, p.alpha, bounds, false);
                if (q_alt > q_old) p.alpha = alpha_alt;
            }
        }
    }

    // Final log-likelihood, recomputed from the parameters actually returned.
    const ResponsibilityResult final_e = responsibilities(data, theta);
    if (!std::isfinite(final_e.loglik))
        throw NonFiniteLikelihood("em_fit: non-finite final log-likelihood");
    fit.loglik = final_e.loglik;
    if (!fit.converged) fit.loglik_trace.push_back(fit.loglik);
    theta.canonicalize();
    fit.theta = theta;
    return fit;
}

}  // namespace rkmix
