#include "forestmap/standardize.hpp"

#include <cmath>
#include <stdexcept>

namespace forestmap {

double mean_of(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of empty sequence");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sd_of(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("sd needs at least 2 values");
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) {
        const double d = v - m;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

Standardizer::Standardizer(std::vector<std::string> names, std::vector<double> means,
                           std::vector<double> sds)
    : names_(std::move(names)), means_(std::move(means)), sds_(std::move(sds)) {
    if (names_.size() != means_.size() || means_.size() != sds_.size()) {
        throw std::invalid_argument("standardizer field lengths differ");
    }
    for (std::size_t j = 0; j < sds_.size(); ++j) {
        if (!(sds_[j] > 0.0) || !std::isfinite(sds_[j])) {
            throw std::invalid_argument("standardizer sd for '" + names_[j] + "' must be > 0");
        }
    }
}

Standardizer Standardizer::fit_columns(std::vector<std::string> names,
                                       const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw std::invalid_argument("names/columns length mismatch");
    std::vector<double> means, sds;
    means.reserve(columns.size());
    sds.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const double m = mean_of(columns[j]);
        const double s = sd_of(columns[j]);
        if (!(s > 0.0)) {
            throw std::invalid_argument("predictor '" + names[j] + "' has zero variance on the reference set");
        }
        means.push_back(m);
        sds.push_back(s);
    }
    return Standardizer(std::move(names), std::move(means), std::move(sds));
}

Standardizer Standardizer::fit(const PlotTable& table, const std::vector<std::string>& predictors) {
    std::vector<std::vector<double>> columns(predictors.size());
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        const std::size_t idx = table.feature_index(predictors[j]);
        columns[j].reserve(table.size());
        for (const Plot& p : table.plots()) columns[j].push_back(p.features[idx]);
    }
    return fit_columns(predictors, columns);
}

Standardizer Standardizer::identity(std::vector<std::string> names) {
    const std::size_t d = names.size();
    return Standardizer(std::move(names), std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
}

std::vector<double> Standardizer::apply(std::span<const double> raw) const {
    std::vector<double> out(raw.begin(), raw.end());
    apply_inplace(out);
    return out;
}

void Standardizer::apply_inplace(std::span<double> values) const {
    if (values.size() != dim()) throw std::invalid_argument("standardizer dimension mismatch");
    for (std::size_t j = 0; j < values.size(); ++j) values[j] = (values[j] - means_[j]) / sds_[j];
}

std::vector<double> Standardizer::invert(std::span<const double> standardized) const {
    if (standardized.size() != dim()) throw std::invalid_argument("standardizer dimension mismatch");
    std::vector<double> out(standardized.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = standardized[j] * sds_[j] + means_[j];
    return out;
}

} // namespace forestmap
