#include "forestmap/design.hpp"

#include <algorithm>
#include <stdexcept>

namespace forestmap {

bool is_type_indicator(const std::string& column) {
    for (const char* name : kTypeIndicatorNames) {
        if (column == name) return true;
    }
    return false;
}

void write_type_indicators(ForestType t, std::span<double> out3) {
    out3[0] = t == ForestType::Broadleaves ? 1.0 : 0.0;
    out3[1] = t == ForestType::Mixed ? 1.0 : 0.0;
    out3[2] = t == ForestType::Conifers ? 1.0 : 0.0;
}

DesignMatrix one_hot_encode(const PlotTable& table) {
    if (table.empty()) throw std::invalid_argument("one_hot_encode: table is empty");
    return build_design(table, table.schema(), true);
}

DesignMatrix build_design(const PlotTable& table, const std::vector<std::string>& predictors,
                          bool include_type_indicators) {
    DesignMatrix m;
    m.columns = predictors;
    if (include_type_indicators) {
        for (const char* name : kTypeIndicatorNames) m.columns.emplace_back(name);
    }
    m.rows = table.size();
    m.values.assign(m.rows * m.columns.size(), 0.0);

    std::vector<std::size_t> src(predictors.size());
    for (std::size_t j = 0; j < predictors.size(); ++j) src[j] = table.feature_index(predictors[j]);

    for (std::size_t r = 0; r < m.rows; ++r) {
        const Plot& p = table[r];
        auto row = m.row(r);
        for (std::size_t j = 0; j < src.size(); ++j) row[j] = p.features[src[j]];
        if (include_type_indicators) {
            write_type_indicators(p.forest_type, row.subspan(predictors.size(), 3));
        }
    }
    return m;
}

FeatureAssembler::FeatureAssembler(const std::vector<std::string>& source_schema,
                                   const std::vector<std::string>& target_columns) {
    slots_.reserve(target_columns.size());
    std::vector<std::string> missing;
    for (const std::string& col : target_columns) {
        if (col == kTypeIndicatorNames[0]) {
            slots_.push_back(-1);
        } else if (col == kTypeIndicatorNames[1]) {
            slots_.push_back(-2);
        } else if (col == kTypeIndicatorNames[2]) {
            slots_.push_back(-3);
        } else {
            const auto it = std::find(source_schema.begin(), source_schema.end(), col);
            if (it == source_schema.end()) {
                missing.push_back(col);
            } else {
                slots_.push_back(static_cast<int>(it - source_schema.begin()));
            }
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing predictors:";
        for (const std::string& name : missing) msg += " " + name;
        throw std::invalid_argument(msg);
    }
}

void FeatureAssembler::assemble(std::span<const double> source_features, ForestType t,
                                std::span<double> out) const {
    for (std::size_t j = 0; j < slots_.size(); ++j) {
        const int s = slots_[j];
        if (s >= 0) {
            out[j] = source_features[static_cast<std::size_t>(s)];
        } else {
            out[j] = static_cast<int>(t) == -s ? 1.0 : 0.0;
        }
    }
}

std::vector<double> FeatureAssembler::assemble(const Plot& p) const {
    std::vector<double> out(slots_.size());
    assemble(p.features, p.forest_type, out);
    return out;
}

} // namespace forestmap
