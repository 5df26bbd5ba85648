#include "rkmix/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "rkmix/errors.hpp"

namespace rkmix {

std::string to_string(KConvention c) {
    return c == KConvention::AllWeights ? "3M-1" : "3M-2";
}

KConvention k_convention_from_string(const std::string& s) {
    if (s == "3M-1") return KConvention::AllWeights;
    if (s == "3M-2") return KConvention::FreeWeights;
    throw std::invalid_argument("unknown parameter-count convention '" + s + "'");
}

int param_count(int m, KConvention convention) {
    if (m < 1) throw std::invalid_argument("component count must be >= 1");
    if (m == 1) return 1;
    return convention == KConvention::AllWeights ? 3 * m - 1 : 3 * m - 2;
}

double loglik(std::span<const double> data, const RKMixture& theta) {
    if (data.empty()) throw std::invalid_argument("loglik: empty population");
    double ll = 0.0;
    for (const double a : data) {
        const double lp = mixture_log_pdf(a, theta);
        if (!std::isfinite(lp))
            throw NonFiniteLikelihood("loglik: sample with zero density under every component");
        ll += lp;
    }
    return ll;
}

double aic(double loglik, int k) {
    if (k < 1) throw std::invalid_argument("aic: k must be >= 1");
    return -2.0 * loglik + 2.0 * k;
}

double bic(double loglik, int k, std::size_t n) {
    if (k < 1) throw std::invalid_argument("bic: k must be >= 1");
    if (n < 2) throw std::invalid_argument("bic: n must be >= 2");
    return -2.0 * loglik + std::log(static_cast<double>(n)) * k;
}

std::string model_name(int m) {
    return m == 1 ? "R" : "R-K" + std::to_string(m - 1);
}

void select_models(SelectionReport& report) {
    // Criterion ties within 1e-9 go to the smaller M; rows are stored in
    // ascending M, so strict improvement is the only way to displace a pick.
    constexpr double kTieTol = 1e-9;
    const ModelRow* best_aic = nullptr;
    const ModelRow* best_bic = nullptr;
    const ModelRow* best_ll = nullptr;
    for (const ModelRow& row : report.rows) {
        if (row.failed) continue;
        if (!best_aic || row.aic < best_aic->aic - kTieTol) best_aic = &row;
        if (!best_bic || row.bic < best_bic->bic - kTieTol) best_bic = &row;
        if (!best_ll || row.loglik > best_ll->loglik + kTieTol) best_ll = &row;
    }
    report.selected_by_aic = best_aic ? std::optional<int>(best_aic->m) : std::nullopt;
    report.selected_by_bic = best_bic ? std::optional<int>(best_bic->m) : std::nullopt;
    report.selected_by_ll = best_ll ? std::optional<int>(best_ll->m) : std::nullopt;
}

SelectionReport sweep(std::span<const double> data, int m_min, int m_max, const EmConfig& config,
                      int jobs, KConvention convention) {
    if (m_min < 1 || m_max < m_min) throw std::invalid_argument("sweep: bad component range");
    SelectionReport report;
    report.n_samples = data.size();
    report.convention = convention;
    report.rows.resize(m_max - m_min + 1);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= static_cast<int>(report.rows.size())) return;
            const int m = m_min + idx;
            ModelRow& row = report.rows[idx];
            row.m = m;
            row.name = model_name(m);
            row.k = param_count(m, convention);
            try {
                row.fit = em_fit(data, m, config);
                row.loglik = row.fit.loglik;
                row.aic = aic(row.loglik, row.k);
                row.bic = bic(row.loglik, row.k, data.size());
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(report.rows.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    select_models(report);
    return report;
}

std::string render_table(const SelectionReport& report) {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-8s %8s %8s %8s\n", "Model", "LL", "AIC", "BIC");
    out << line;
    for (const ModelRow& row : report.rows) {
        if (row.failed) {
            std::snprintf(line, sizeof line, "%-8s %8s %8s %8s  (%s)\n", row.name.c_str(), "-",
                          "-", "-", row.error.c_str());
        } else {
            std::snprintf(line, sizeof line, "%-8s %8.0f %8.0f %8.0f\n", row.name.c_str(),
                          row.loglik, row.aic, row.bic);
        }
        out << line;
    }
    return out.str();
}

PfaCurve empirical_pfa(std::span<const double> data, std::span<const double> thresholds) {
    if (data.empty()) throw std::invalid_argument("empirical_pfa: empty population");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            throw std::invalid_argument("empirical_pfa: thresholds must be ascending");

    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());

    PfaCurve curve;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    curve.empirical.reserve(thresholds.size());
    for (const double t : thresholds) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        curve.empirical.push_back(static_cast<double>(above) /
                                  static_cast<double>(sorted.size()));
    }
    return curve;
}

}  // namespace rkmix
