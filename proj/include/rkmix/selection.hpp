#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rkmix/em.hpp"

namespace rkmix {

/// How the parameter count k of an M-component model is taken: counting all
/// M weights (k = 3M-1) or only the M-1 free ones (k = 3M-2).
enum class KConvention { AllWeights, FreeWeights };

std::string to_string(KConvention c);
KConvention k_convention_from_string(const std::string& s);

int param_count(int m, KConvention convention = KConvention::AllWeights);

/// Sum of mixture log densities over the population (the log-likelihood).
/// Throws NonFiniteLikelihood if any sample has zero density everywhere.
double loglik(std::span<const double> data, const RKMixture& theta);

double aic(double loglik, int k);
double bic(double loglik, int k, std::size_t n);

/// "R" for the pure-Rayleigh model, otherwise "R-K<M-1>".
std::string model_name(int m);

struct ModelRow {
    int m = 0;
    std::string name;
    int k = 0;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    bool failed = false;
    std::string error;
    FitResult fit;  // valid only when !failed
};

struct SelectionReport {
    std::vector<ModelRow> rows;  // ascending M
    std::size_t n_samples = 0;
    KConvention convention = KConvention::AllWeights;
    // Selected component counts; empty when every row failed. Ties break
    // toward the smaller M.
    std::optional<int> selected_by_aic;
    std::optional<int> selected_by_bic;
    std::optional<int> selected_by_ll;
};

/// Fits every M in [m_min, m_max] and assembles the criterion table.
/// Per-M failures are recorded in their row without aborting the sweep.
/// `jobs` > 1 runs the fits concurrently; the result is order-independent.
SelectionReport sweep(std::span<const double> data, int m_min, int m_max,
                      const EmConfig& config = {}, int jobs = 1,
                      KConvention convention = KConvention::AllWeights);

/// Recomputes the argmin/argmax selections from the rows.
void select_models(SelectionReport& report);

/// Aligned text table in the order Model | LL | AIC | BIC, integer-rounded.
std::string render_table(const SelectionReport& report);

struct PfaCurve {
    std::vector<double> thresholds;  // ascending
    std::vector<double> empirical;
    std::vector<double> model;  // empty unless filled from a fitted mixture
};

/// Exceedance fractions (count of a_n > t) / N on the given threshold grid.
PfaCurve empirical_pfa(std::span<const double> data, std::span<const double> thresholds);

}  // namespace rkmix
