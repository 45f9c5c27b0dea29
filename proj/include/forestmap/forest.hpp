#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "forestmap/design.hpp"

namespace forestmap {

struct ForestHyperparams {
    std::size_t n_trees = 500;
    std::size_t mtry = 0; // 0 -> max(1, floor(p/3))
    std::size_t min_node_size = 5;
    std::uint64_t seed = 0;
    bool bootstrap = true;

    std::size_t resolve_mtry(std::size_t p) const;
};

// Flattened regression tree. feature[i] == -1 marks a leaf holding value[i];
// internal nodes route x[feature] < threshold to left, else right.
struct Tree {
    std::vector<std::int32_t> feature;
    std::vector<double> threshold;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> right;
    std::vector<double> value;

    double predict(std::span<const double> x) const;
    std::size_t node_count() const { return feature.size(); }
};

// Bagged CART ensemble. Immutable after fit; prediction is the mean of the
// per-tree leaf values and therefore always lies in [y_min, y_max] of the
// training responses.
class Forest {
public:
    double predict(std::span<const double> x) const;

    const std::vector<std::string>& schema() const { return schema_; }
    const ForestHyperparams& hyperparams() const { return hp_; }
    const std::vector<Tree>& trees() const { return trees_; }
    double y_min() const { return y_min_; }
    double y_max() const { return y_max_; }

    // Mean OOB prediction per training row (caller row order); count 0 means
    // the row was in-bag for every tree.
    const std::vector<double>& oob_predictions() const { return oob_predictions_; }
    const std::vector<std::uint32_t>& oob_counts() const { return oob_counts_; }

    const std::map<std::string, double>& importance() const { return importance_; }
    void set_importance(std::map<std::string, double> imp) { importance_ = std::move(imp); }

    // Canonical fit order: caller row index per canonical position. Bootstrap
    // draws address canonical positions, so fits keyed on plot ids do not
    // depend on table row order.
    const std::vector<std::uint32_t>& fit_row_order() const { return fit_row_order_; }

    nlohmann::json to_json() const;
    static Forest from_json(const nlohmann::json& doc);

    friend Forest fit_forest(const DesignMatrix& X, const std::vector<double>& y,
                             const ForestHyperparams& hp, const std::vector<std::string>* row_keys,
                             int threads);

private:
    std::vector<std::string> schema_;
    ForestHyperparams hp_;
    std::vector<Tree> trees_;
    double y_min_ = 0.0;
    double y_max_ = 0.0;
    std::vector<double> oob_predictions_;
    std::vector<std::uint32_t> oob_counts_;
    std::vector<std::uint32_t> fit_row_order_;
    std::map<std::string, double> importance_;
};

// Grows hp.n_trees trees on bootstrap samples (n draws with replacement per
// tree, seeded per tree). At each node, mtry features are sampled without
// replacement and the split minimizing the summed child squared deviations is
// taken; ties go to the lowest feature index, then the lowest threshold.
// Nodes with fewer than 2*min_node_size samples or zero response variance
// become leaves. Deterministic given hp.seed, for any thread count.
Forest fit_forest(const DesignMatrix& X, const std::vector<double>& y, const ForestHyperparams& hp,
                  const std::vector<std::string>* row_keys = nullptr, int threads = 0);

// Regenerates each tree's bootstrap to find its OOB rows, then reports
// score_j = mean over trees of (OOB MSE with column j permuted - OOB MSE).
std::vector<double> permutation_importance(const Forest& forest, const DesignMatrix& X,
                                           const std::vector<double>& y, std::uint64_t seed,
                                           int threads = 0);

struct OobError {
    double rmse = 0.0;
    double r2 = 0.0;
};

// Metrics on the OOB predictions; throws if any row was never OOB (use more
// trees).
OobError oob_error(const Forest& forest, const std::vector<double>& y);

} // namespace forestmap
