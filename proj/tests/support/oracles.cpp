#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace rkmix::testing {

namespace {

double call_target(double x, void* params) {
    return (*static_cast<const std::function<double(double)>*>(params))(x);
}

struct Workspace {
    gsl_integration_workspace* w;
    Workspace() : w(gsl_integration_workspace_alloc(10000)) {}
    ~Workspace() { gsl_integration_workspace_free(w); }
};

// Quadrature failures should surface as test failures, not aborts.
struct ErrorHandlerGuard {
    gsl_error_handler_t* old;
    ErrorHandlerGuard() : old(gsl_set_error_handler_off()) {}
    ~ErrorHandlerGuard() { gsl_set_error_handler(old); }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi, double epsrel) {
    ErrorHandlerGuard guard;
    Workspace ws;
    gsl_function target{&call_target, const_cast<std::function<double(double)>*>(&f)};
    double result = 0.0, abserr = 0.0;
    const int status =
        gsl_integration_qags(&target, lo, hi, 0.0, epsrel, 10000, ws.w, &result, &abserr);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw std::runtime_error("quadrature failed: " + std::string(gsl_strerror(status)));
    return result;
}

double integrate_to_inf(const std::function<double(double)>& f, double lo, double epsrel) {
    ErrorHandlerGuard guard;
    Workspace ws;
    gsl_function target{&call_target, const_cast<std::function<double(double)>*>(&f)};
    double result = 0.0, abserr = 0.0;
    const int status =
        gsl_integration_qagiu(&target, lo, 0.0, epsrel, 10000, ws.w, &result, &abserr);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw std::runtime_error("quadrature failed: " + std::string(gsl_strerror(status)));
    return result;
}

double bessel_k_quadrature(double nu, double x, double epsrel) {
    nu = std::fabs(nu);
    const auto integrand = [nu, x](double t) {
        // exp(-x cosh t) cosh(nu t), written as an exponent difference so the
        // cosh factor cannot overflow before the damping kicks in.
        const double damp = -x * std::cosh(t);
        return 0.5 * (std::exp(damp + nu * t) + std::exp(damp - nu * t));
    };
    return integrate_to_inf(integrand, 0.0, epsrel);
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < sa.size() && j < sb.size()) {
        if (sa[i] <= sb[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / sa.size() -
                                  static_cast<double>(j) / sb.size()));
    }
    return d;
}

double ks_critical_1pct(double effective_n) {
    return 1.6276 / std::sqrt(effective_n);
}

}  // namespace rkmix::testing
