#include "forestmap/workflow.hpp"

#include <fstream>

#include "forestmap/design.hpp"
#include "forestmap/rng.hpp"
#include "forestmap/transfer.hpp"

namespace forestmap {

Forest fit_forest_on_table(const PlotTable& table, const std::vector<std::string>& predictors,
                           const ForestHyperparams& hp, int threads) {
    const DesignMatrix design = build_design(table, predictors, true);
    std::vector<std::string> keys;
    keys.reserve(table.size());
    for (const Plot& p : table.plots()) keys.push_back(p.id);
    return fit_forest(design, table.responses(), hp, &keys, threads);
}

CalibratedModel calibrate_model(const PlotTable& dataset, const CalibrationOptions& opts) {
    DatasetSplit split = split_dataset(dataset, opts.split);

    SelectOptions select = opts.select;
    select.seed = derive_seed(opts.select.seed, {0xCA11u});
    SelectionResult selection = select_predictors(split.calib, select, opts.threads);

    Forest forest = fit_forest_on_table(split.calib, selection.retained, opts.hp, opts.threads);
    {
        const DesignMatrix design = build_design(split.calib, selection.retained, true);
        const std::vector<double> scores = permutation_importance(
            forest, design, split.calib.responses(), derive_seed(opts.hp.seed, {0x1111u}), opts.threads);
        std::map<std::string, double> importance;
        for (std::size_t j = 0; j < design.columns.size(); ++j) importance[design.columns[j]] = scores[j];
        forest.set_importance(std::move(importance));
    }

    CalibrationEnvelope envelope = CalibrationEnvelope::build(split.calib, selection.retained);

    const std::vector<double> y = split.valid.responses();
    const std::vector<double> yhat = predict_table(forest, split.valid);
    const FitMetrics validation = compute_metrics(y, yhat);
    return CalibratedModel{dataset.name(), std::move(split),   std::move(selection),
                           std::move(forest), std::move(envelope), validation};
}

void save_json(const nlohmann::json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << doc.dump(1, '\t') << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return nlohmann::json::parse(in);
}

} // namespace forestmap
