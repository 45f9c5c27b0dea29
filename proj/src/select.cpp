#include "forestmap/select.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "forestmap/design.hpp"
#include "forestmap/forest.hpp"
#include "forestmap/rng.hpp"

namespace forestmap {

SelectionResult select_predictors(const PlotTable& table, const SelectOptions& opts, int threads) {
    const LassoPath path = cv_lasso(table, opts.cv_folds, opts.seed);
    const std::size_t p_cont = table.schema().size();

    SelectionResult result;
    result.lambda_min = path.lambda_min;
    result.lambda_1se = path.lambda_1se;
    std::size_t index = opts.use_lambda_min ? path.index_min : path.index_1se;
    result.lambda = path.lambdas[index];

    auto nonzero_continuous = [&](std::size_t li) {
        std::vector<std::string> names;
        for (std::size_t j = 0; j < p_cont; ++j) {
            if (path.coefs[li][j] != 0.0) names.push_back(table.schema()[j]);
        }
        return names;
    };

    result.retained = nonzero_continuous(index);
    if (result.retained.empty() && !opts.use_lambda_min) {
        // Null model at lambda_1se; fall back to lambda_min so the result
        // always names at least one predictor.
        index = path.index_min;
        result.lambda = path.lambda_min;
        result.retained = nonzero_continuous(index);
    }
    if (result.retained.empty()) {
        // Even lambda_min kept nothing: retain the single predictor with the
        // largest absolute coefficient anywhere on the path.
        std::size_t best_j = 0;
        double best = -1.0;
        for (std::size_t li = 0; li < path.lambdas.size(); ++li) {
            for (std::size_t j = 0; j < p_cont; ++j) {
                if (std::abs(path.coefs[li][j]) > best) {
                    best = std::abs(path.coefs[li][j]);
                    best_j = j;
                }
            }
        }
        result.retained = {table.schema()[best_j]};
    }

    // Importance of the surviving predictors from a forest on the candidate
    // design (retained continuous + type indicators).
    const DesignMatrix design = build_design(table, result.retained, true);
    ForestHyperparams hp;
    hp.seed = derive_seed(opts.seed, {0x5E1Eu});
    std::vector<std::string> keys;
    keys.reserve(table.size());
    for (const Plot& p : table.plots()) keys.push_back(p.id);
    const Forest forest = fit_forest(design, table.responses(), hp, &keys, threads);
    const std::vector<double> scores =
        permutation_importance(forest, design, table.responses(), derive_seed(opts.seed, {0x1712u}), threads);
    for (std::size_t j = 0; j < result.retained.size(); ++j) {
        result.importance[result.retained[j]] = scores[j];
    }

    if (result.retained.size() > opts.cap) {
        result.cap_applied = true;
        std::vector<std::string> ranked = result.retained;
        std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
            return result.importance.at(a) > result.importance.at(b);
        });
        ranked.resize(opts.cap);
        // Keep schema order among the survivors.
        std::vector<std::string> kept;
        for (const std::string& name : result.retained) {
            if (std::find(ranked.begin(), ranked.end(), name) != ranked.end()) kept.push_back(name);
        }
        result.retained = std::move(kept);
        for (auto it = result.importance.begin(); it != result.importance.end();) {
            if (std::find(result.retained.begin(), result.retained.end(), it->first) ==
                result.retained.end()) {
                it = result.importance.erase(it);
            } else {
                ++it;
            }
        }
    }
    return result;
}

nlohmann::json SelectionResult::to_json() const {
    nlohmann::json doc;
    doc["format"] = "forestmap.selection";
    doc["version"] = 1;
    doc["retained"] = retained;
    doc["lambda"] = lambda;
    doc["lambda_min"] = lambda_min;
    doc["lambda_1se"] = lambda_1se;
    doc["importance"] = importance;
    doc["cap_applied"] = cap_applied;
    return doc;
}

SelectionResult SelectionResult::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "forestmap.selection") {
        throw std::runtime_error("not a forestmap selection document");
    }
    SelectionResult r;
    r.retained = doc.at("retained").get<std::vector<std::string>>();
    r.lambda = doc.at("lambda").get<double>();
    r.lambda_min = doc.at("lambda_min").get<double>();
    r.lambda_1se = doc.at("lambda_1se").get<double>();
    r.importance = doc.at("importance").get<std::map<std::string, double>>();
    r.cap_applied = doc.at("cap_applied").get<bool>();
    if (r.retained.empty()) throw std::runtime_error("selection document retains no predictors");
    return r;
}

} // namespace forestmap
