#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "forestmap/plot.hpp"

namespace forestmap {

inline constexpr std::array<const char*, 3> kTypeIndicatorNames = {
    "is_broadleaves", "is_mixed", "is_conifers"};

bool is_type_indicator(const std::string& column);

// Row-major numeric design matrix with named columns.
struct DesignMatrix {
    std::vector<std::string> columns;
    std::size_t rows = 0;
    std::vector<double> values;

    std::size_t cols() const { return columns.size(); }
    double operator()(std::size_t r, std::size_t c) const { return values[r * columns.size() + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values[r * columns.size() + c]; }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * columns.size(), columns.size()};
    }
    std::span<double> row(std::size_t r) {
        return {values.data() + r * columns.size(), columns.size()};
    }
};

// Fills the three indicator slots for a forest type (exactly one equals 1).
void write_type_indicators(ForestType t, std::span<double> out3);

// All schema predictors followed by the three forest-type indicators.
DesignMatrix one_hot_encode(const PlotTable& table);

// Selected continuous predictors (in the given order), optionally followed by
// the forest-type indicator block.
DesignMatrix build_design(const PlotTable& table, const std::vector<std::string>& predictors,
                          bool include_type_indicators);

// Maps a source schema onto a target column list once, then assembles rows.
// Target columns may mix source predictors and type indicators. Construction
// throws naming every missing predictor.
class FeatureAssembler {
public:
    FeatureAssembler(const std::vector<std::string>& source_schema,
                     const std::vector<std::string>& target_columns);

    std::size_t size() const { return slots_.size(); }
    void assemble(std::span<const double> source_features, ForestType t, std::span<double> out) const;
    std::vector<double> assemble(const Plot& p) const;

private:
    // >= 0: source feature index; -1/-2/-3: indicator for type code 1/2/3.
    std::vector<int> slots_;
};

} // namespace forestmap
