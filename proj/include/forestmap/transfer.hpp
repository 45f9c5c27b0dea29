#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forestmap/forest.hpp"
#include "forestmap/metrics.hpp"
#include "forestmap/plot.hpp"

namespace forestmap {

struct LabeledModel {
    std::string label;
    const Forest* forest = nullptr;
};

// All-pairs evaluation grid: entry (dataset d, model m) holds the metrics of
// model m on test table d. A cell is unset when the metrics are undefined
// (constant observed response). Diagonal entries are the local evaluations
// when labels match.
struct TransferMatrix {
    std::vector<std::string> model_labels;
    std::vector<std::string> dataset_labels;
    std::vector<std::vector<std::optional<FitMetrics>>> cells; // [dataset][model]

    const std::optional<FitMetrics>& at(const std::string& dataset, const std::string& model) const;
    // Simple (unweighted) mean over datasets with defined cells.
    std::optional<FitMetrics> column_mean(std::size_t model_index) const;
};

std::vector<double> predict_table(const Forest& forest, const PlotTable& table);

TransferMatrix transfer_matrix(const std::vector<LabeledModel>& models,
                               const std::vector<const PlotTable*>& tests, int threads = 0);

// Table layout: one row per dataset, a (r2, rmse, bias) column triple per
// model, then a simple-mean row. Values are rounded to 2 decimals; undefined
// cells print NA.
void write_transfer_csv(const TransferMatrix& matrix, const std::filesystem::path& path);

} // namespace forestmap
