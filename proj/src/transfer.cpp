#include "forestmap/transfer.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "forestmap/design.hpp"
#include "forestmap/parallel.hpp"

namespace forestmap {

std::vector<double> predict_table(const Forest& forest, const PlotTable& table) {
    FeatureAssembler assembler(table.schema(), forest.schema());
    std::vector<double> out;
    out.reserve(table.size());
    std::vector<double> row(forest.schema().size());
    for (const Plot& p : table.plots()) {
        assembler.assemble(p.features, p.forest_type, row);
        out.push_back(forest.predict(row));
    }
    return out;
}

const std::optional<FitMetrics>& TransferMatrix::at(const std::string& dataset,
                                                    const std::string& model) const {
    for (std::size_t d = 0; d < dataset_labels.size(); ++d) {
        if (dataset_labels[d] != dataset) continue;
        for (std::size_t m = 0; m < model_labels.size(); ++m) {
            if (model_labels[m] == model) return cells[d][m];
        }
    }
    throw std::invalid_argument("transfer matrix has no cell (" + dataset + ", " + model + ")");
}

std::optional<FitMetrics> TransferMatrix::column_mean(std::size_t model_index) const {
    FitMetrics mean;
    std::size_t defined = 0;
    for (const auto& row : cells) {
        const auto& cell = row[model_index];
        if (!cell) continue;
        mean.r2 += cell->r2;
        mean.rmse += cell->rmse;
        mean.bias += cell->bias;
        mean.n += cell->n;
        ++defined;
    }
    if (defined == 0) return std::nullopt;
    mean.r2 /= static_cast<double>(defined);
    mean.rmse /= static_cast<double>(defined);
    mean.bias /= static_cast<double>(defined);
    return mean;
}

TransferMatrix transfer_matrix(const std::vector<LabeledModel>& models,
                               const std::vector<const PlotTable*>& tests, int threads) {
    if (models.empty() || tests.empty()) throw std::invalid_argument("transfer_matrix: empty inputs");
    TransferMatrix matrix;
    for (const auto& m : models) matrix.model_labels.push_back(m.label);
    for (const auto* t : tests) matrix.dataset_labels.push_back(t->name());
    matrix.cells.assign(tests.size(),
                        std::vector<std::optional<FitMetrics>>(models.size(), std::nullopt));

    // Schema checks up front so missing predictors fail before any work.
    for (const auto& m : models) {
        for (const auto* t : tests) FeatureAssembler(t->schema(), m.forest->schema());
    }

    const std::size_t total = models.size() * tests.size();
    parallel_for(total, threads, [&](std::size_t k) {
        const std::size_t d = k / models.size();
        const std::size_t m = k % models.size();
        const std::vector<double> y = tests[d]->responses();
        const std::vector<double> yhat = predict_table(*models[m].forest, *tests[d]);
        try {
            matrix.cells[d][m] = compute_metrics(y, yhat);
        } catch (const std::invalid_argument&) {
            matrix.cells[d][m] = std::nullopt; // constant response: undefined cell
        }
    });
    return matrix;
}

namespace {

std::string round2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void write_cell(std::ofstream& out, const std::optional<FitMetrics>& cell) {
    if (cell) {
        out << ',' << round2(cell->r2) << ',' << round2(cell->rmse) << ',' << round2(cell->bias);
    } else {
        out << ",NA,NA,NA";
    }
}

} // namespace

void write_transfer_csv(const TransferMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write transfer matrix '" + path.string() + "'");
    out << "dataset";
    for (const auto& label : matrix.model_labels) {
        out << ',' << label << "_r2," << label << "_rmse," << label << "_bias";
    }
    out << '\n';
    for (std::size_t d = 0; d < matrix.dataset_labels.size(); ++d) {
        out << matrix.dataset_labels[d];
        for (std::size_t m = 0; m < matrix.model_labels.size(); ++m) write_cell(out, matrix.cells[d][m]);
        out << '\n';
    }
    out << "mean";
    for (std::size_t m = 0; m < matrix.model_labels.size(); ++m) write_cell(out, matrix.column_mean(m));
    out << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace forestmap
