#pragma once

#include <cstddef>
#include <span>

namespace forestmap {

// Goodness-of-fit formulas. Residuals are observed minus predicted, so a
// positive bias means the model underpredicts. RMSE deliberately divides the
// squared-error sum by n-1.

// 1 - SSE/TSS; may be negative (worse than predicting the mean).
// Throws when lengths differ, n < 2, or y is constant (zero TSS).
double r_squared(std::span<const double> y, std::span<const double> yhat);

// sqrt(SSE / (n-1)); throws when lengths differ or n < 2.
double rmse(std::span<const double> y, std::span<const double> yhat);

// mean(y - yhat); throws when lengths differ or empty.
double mean_bias(std::span<const double> y, std::span<const double> yhat);

struct FitMetrics {
    double r2 = 0.0;
    double rmse = 0.0; // m²/ha
    double bias = 0.0; // m²/ha
    std::size_t n = 0;

    // Percent of the observed mean, as plotted against sampling intensity.
    double rmse_pct(double y_mean) const { return 100.0 * rmse / y_mean; }
    double bias_pct(double y_mean) const { return 100.0 * bias / y_mean; }
};

FitMetrics compute_metrics(std::span<const double> y, std::span<const double> yhat);

} // namespace forestmap
