#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace forestmap {

enum class ForestType : int { Broadleaves = 1, Mixed = 2, Conifers = 3 };

const char* to_string(ForestType t);
// Case-insensitive; throws std::invalid_argument on unknown names.
ForestType forest_type_from_string(const std::string& s);
// Raster codes 1/2/3; throws std::invalid_argument otherwise.
ForestType forest_type_from_code(int code);

struct Plot {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    double ba = 0.0; // basal area, m²/ha
    std::vector<double> features;
    ForestType forest_type = ForestType::Broadleaves;
};

// A named table of plots sharing one predictor schema. Invariants (unique
// ids, finite features of schema length, ba >= 0) are enforced on add().
class PlotTable {
public:
    PlotTable() = default;
    PlotTable(std::string name, std::vector<std::string> schema);

    void add(Plot p);
    void reserve(std::size_t n) { plots_.reserve(n); }

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }
    const std::vector<std::string>& schema() const { return schema_; }
    const std::vector<Plot>& plots() const { return plots_; }
    std::size_t size() const { return plots_.size(); }
    bool empty() const { return plots_.empty(); }
    const Plot& operator[](std::size_t i) const { return plots_[i]; }

    // Index of a predictor in the schema; throws naming the predictor if absent.
    std::size_t feature_index(const std::string& predictor) const;

    // Row indices ordered by plot id. Sampling operations traverse tables in
    // this order so their output does not depend on file row order.
    std::vector<std::size_t> order_by_id() const;

    PlotTable subset(std::span<const std::size_t> rows, std::string name) const;

    std::vector<double> responses() const;

private:
    std::string name_;
    std::vector<std::string> schema_;
    std::vector<Plot> plots_;
    std::unordered_map<std::string, std::size_t> id_index_;
};

} // namespace forestmap
