#pragma once

#include <span>
#include <string>
#include <vector>

#include "forestmap/plot.hpp"

namespace forestmap {

// Per-predictor affine map x -> (x - mean) / sd fitted on a reference table.
// Standard deviations use the n-1 denominator; zero-variance predictors are
// rejected at fit time.
class Standardizer {
public:
    Standardizer() = default;

    static Standardizer fit(const PlotTable& table, const std::vector<std::string>& predictors);
    static Standardizer fit_columns(std::vector<std::string> names,
                                    const std::vector<std::vector<double>>& columns);
    static Standardizer identity(std::vector<std::string> names);

    std::vector<double> apply(std::span<const double> raw) const;
    void apply_inplace(std::span<double> values) const;
    std::vector<double> invert(std::span<const double> standardized) const;

    std::size_t dim() const { return means_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& sds() const { return sds_; }

    Standardizer(std::vector<std::string> names, std::vector<double> means, std::vector<double> sds);

private:
    std::vector<std::string> names_;
    std::vector<double> means_;
    std::vector<double> sds_;
};

// Mean and n-1 standard deviation of a value sequence.
double mean_of(std::span<const double> values);
double sd_of(std::span<const double> values);

} // namespace forestmap
