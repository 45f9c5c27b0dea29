#include "forestmap/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace forestmap {

const char* to_string(ForestType t) {
    switch (t) {
        case ForestType::Broadleaves: return "Broadleaves";
        case ForestType::Mixed: return "Mixed";
        case ForestType::Conifers: return "Conifers";
    }
    return "?";
}

ForestType forest_type_from_string(const std::string& s) {
    std::string lower(s.size(), '\0');
    std::transform(s.begin(), s.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "broadleaves") return ForestType::Broadleaves;
    if (lower == "mixed") return ForestType::Mixed;
    if (lower == "conifers") return ForestType::Conifers;
    throw std::invalid_argument("unknown forest type '" + s + "'");
}

ForestType forest_type_from_code(int code) {
    if (code < 1 || code > 3) {
        throw std::invalid_argument("forest type code must be 1, 2 or 3, got " + std::to_string(code));
    }
    return static_cast<ForestType>(code);
}

PlotTable::PlotTable(std::string name, std::vector<std::string> schema)
    : name_(std::move(name)), schema_(std::move(schema)) {
    if (schema_.empty()) {
        throw std::invalid_argument("plot table '" + name_ + "': schema must name at least one predictor");
    }
}

void PlotTable::add(Plot p) {
    if (p.features.size() != schema_.size()) {
        throw std::invalid_argument("plot '" + p.id + "': expected " + std::to_string(schema_.size()) +
                                    " feature values, got " + std::to_string(p.features.size()));
    }
    for (double v : p.features) {
        if (!std::isfinite(v)) throw std::invalid_argument("plot '" + p.id + "': non-finite feature value");
    }
    if (!std::isfinite(p.ba) || p.ba < 0.0) {
        throw std::invalid_argument("plot '" + p.id + "': basal area must be finite and >= 0");
    }
    if (!id_index_.emplace(p.id, plots_.size()).second) {
        throw std::invalid_argument("duplicate plot id '" + p.id + "'");
    }
    plots_.push_back(std::move(p));
}

std::size_t PlotTable::feature_index(const std::string& predictor) const {
    const auto it = std::find(schema_.begin(), schema_.end(), predictor);
    if (it == schema_.end()) {
        throw std::invalid_argument("table '" + name_ + "' has no predictor '" + predictor + "'");
    }
    return static_cast<std::size_t>(it - schema_.begin());
}

std::vector<std::size_t> PlotTable::order_by_id() const {
    std::vector<std::size_t> order(plots_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [this](std::size_t a, std::size_t b) { return plots_[a].id < plots_[b].id; });
    return order;
}

PlotTable PlotTable::subset(std::span<const std::size_t> rows, std::string name) const {
    PlotTable out(std::move(name), schema_);
    out.reserve(rows.size());
    for (std::size_t r : rows) out.add(plots_.at(r));
    return out;
}

std::vector<double> PlotTable::responses() const {
    std::vector<double> y;
    y.reserve(plots_.size());
    for (const Plot& p : plots_) y.push_back(p.ba);
    return y;
}

} // namespace forestmap
