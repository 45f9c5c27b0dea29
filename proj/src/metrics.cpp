#include "forestmap/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "forestmap/standardize.hpp"

namespace forestmap {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat, std::size_t min_n) {
    if (y.size() != yhat.size()) throw std::invalid_argument("observed/predicted lengths differ");
    if (y.size() < min_n) {
        throw std::invalid_argument("need at least " + std::to_string(min_n) + " tested plots");
    }
}

double sse(std::span<const double> y, std::span<const double> yhat) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        s += d * d;
    }
    return s;
}

} // namespace

double r_squared(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat, 2);
    const double ybar = mean_of(y);
    double tss = 0.0;
    for (double v : y) {
        const double d = v - ybar;
        tss += d * d;
    }
    if (tss == 0.0) throw std::invalid_argument("r_squared undefined: observed values are constant");
    return 1.0 - sse(y, yhat) / tss;
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat, 2);
    return std::sqrt(sse(y, yhat) / static_cast<double>(y.size() - 1));
}

double mean_bias(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] - yhat[i];
    return s / static_cast<double>(y.size());
}

FitMetrics compute_metrics(std::span<const double> y, std::span<const double> yhat) {
    FitMetrics m;
    m.r2 = r_squared(y, yhat);
    m.rmse = rmse(y, yhat);
    m.bias = mean_bias(y, yhat);
    m.n = y.size();
    return m;
}

} // namespace forestmap
