#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "forestmap/lasso.hpp"
#include "forestmap/plot.hpp"

namespace forestmap {

struct SelectOptions {
    int cv_folds = 10;
    std::uint64_t seed = 0;
    std::size_t cap = 5;          // max retained continuous predictors
    bool use_lambda_min = false;  // default rule is lambda_1se
};

struct SelectionResult {
    std::vector<std::string> retained; // continuous predictors, schema order
    double lambda = 0.0;               // the lambda the retention used
    double lambda_min = 0.0;
    double lambda_1se = 0.0;
    std::map<std::string, double> importance; // permutation importance of retained
    bool cap_applied = false;

    nlohmann::json to_json() const;
    static SelectionResult from_json(const nlohmann::json& doc);
};

// Retains the continuous predictors with nonzero lasso coefficients at the
// selection lambda; when more than `cap` survive, keeps the cap highest by RF
// permutation importance. Forest-type indicators never participate: models
// always append them after selection.
SelectionResult select_predictors(const PlotTable& table, const SelectOptions& opts, int threads = 0);

} // namespace forestmap
