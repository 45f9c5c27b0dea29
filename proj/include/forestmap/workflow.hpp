#pragma once

#include <filesystem>
#include <string>

#include "forestmap/envelope.hpp"
#include "forestmap/forest.hpp"
#include "forestmap/metrics.hpp"
#include "forestmap/select.hpp"
#include "forestmap/split.hpp"

namespace forestmap {

// One dataset taken through the full calibration chain: split, variable
// selection on the calibration set, forest fit on the calibration set,
// calibration envelope over the retained continuous predictors, and a
// validation-set evaluation.
struct CalibratedModel {
    std::string label;
    DatasetSplit split;
    SelectionResult selection;
    Forest forest;
    CalibrationEnvelope envelope;
    FitMetrics validation;
};

struct CalibrationOptions {
    SplitSpec split;
    SelectOptions select;
    ForestHyperparams hp;
    int threads = 0;
};

CalibratedModel calibrate_model(const PlotTable& dataset, const CalibrationOptions& opts);

// Forest fit on an arbitrary table with the given predictors + type
// indicators, keyed on plot ids.
Forest fit_forest_on_table(const PlotTable& table, const std::vector<std::string>& predictors,
                           const ForestHyperparams& hp, int threads = 0);

void save_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

} // namespace forestmap
