#include "forestmap/forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "forestmap/metrics.hpp"
#include "forestmap/parallel.hpp"
#include "forestmap/rng.hpp"

namespace forestmap {

std::size_t ForestHyperparams::resolve_mtry(std::size_t p) const {
    if (mtry == 0) return std::max<std::size_t>(1, p / 3);
    return mtry;
}

double Tree::predict(std::span<const double> x) const {
    std::int32_t node = 0;
    while (feature[static_cast<std::size_t>(node)] >= 0) {
        const auto i = static_cast<std::size_t>(node);
        node = x[static_cast<std::size_t>(feature[i])] < threshold[i] ? left[i] : right[i];
    }
    return value[static_cast<std::size_t>(node)];
}

double Forest::predict(std::span<const double> x) const {
    if (x.size() != schema_.size()) {
        throw std::invalid_argument("predict: expected " + std::to_string(schema_.size()) +
                                    " features, got " + std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const Tree& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
}

namespace {

// Per-tree growth context over the canonical row order.
struct TreeGrower {
    const DesignMatrix& X;
    const std::vector<double>& y;
    std::size_t mtry;
    std::size_t min_node_size;
    Rng rng;
    Tree tree;

    // Scratch reused across nodes.
    std::vector<std::size_t> feature_pool;
    std::vector<std::pair<double, double>> sorted_vy; // (feature value, response)

    TreeGrower(const DesignMatrix& x_, const std::vector<double>& y_, std::size_t mtry_,
               std::size_t min_node_, std::uint64_t seed)
        : X(x_), y(y_), mtry(mtry_), min_node_size(min_node_), rng(seed) {
        feature_pool.resize(X.cols());
        for (std::size_t j = 0; j < feature_pool.size(); ++j) feature_pool[j] = j;
    }

    std::int32_t add_leaf(double mean) {
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.value.push_back(mean);
        return static_cast<std::int32_t>(tree.feature.size() - 1);
    }

    // rows: canonical row indices with multiplicity, ascending.
    std::int32_t grow(std::vector<std::size_t>& rows) {
        const auto m = static_cast<double>(rows.size());
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t r : rows) {
            sum += y[r];
            sum2 += y[r] * y[r];
        }
        const double mean = sum / m;
        const double node_sse = sum2 - sum * sum / m;
        if (rows.size() < 2 * min_node_size || node_sse <= 0.0) return add_leaf(mean);

        // mtry candidate features, evaluated in ascending index order.
        for (std::size_t j = 0; j < mtry; ++j) {
            const std::size_t pick = j + static_cast<std::size_t>(rng.uniform_int(feature_pool.size() - j));
            std::swap(feature_pool[j], feature_pool[pick]);
        }
        std::sort(feature_pool.begin(), feature_pool.begin() + static_cast<std::ptrdiff_t>(mtry));

        double best_sse = std::numeric_limits<double>::infinity();
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        for (std::size_t j = 0; j < mtry; ++j) {
            const std::size_t f = feature_pool[j];
            sorted_vy.clear();
            sorted_vy.reserve(rows.size());
            for (std::size_t r : rows) sorted_vy.emplace_back(X(r, f), y[r]);
            std::sort(sorted_vy.begin(), sorted_vy.end());

            double left_sum = 0.0, left_sum2 = 0.0;
            double left_n = 0.0;
            for (std::size_t i = 0; i + 1 < sorted_vy.size(); ++i) {
                left_sum += sorted_vy[i].second;
                left_sum2 += sorted_vy[i].second * sorted_vy[i].second;
                left_n += 1.0;
                const double v = sorted_vy[i].first;
                const double v_next = sorted_vy[i + 1].first;
                if (v == v_next) continue;
                const double right_n = m - left_n;
                const double right_sum = sum - left_sum;
                const double right_sum2 = sum2 - left_sum2;
                const double sse = (left_sum2 - left_sum * left_sum / left_n) +
                                   (right_sum2 - right_sum * right_sum / right_n);
                if (sse < best_sse) {
                    double thr = v + (v_next - v) / 2.0;
                    if (!(v < thr)) thr = v_next; // midpoint rounded down to v
                    best_sse = sse;
                    best_feature = f;
                    best_threshold = thr;
                }
            }
        }
        if (!std::isfinite(best_sse)) return add_leaf(mean); // no splittable candidate

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (std::size_t r : rows) {
            (X(r, best_feature) < best_threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        tree.feature.push_back(static_cast<std::int32_t>(best_feature));
        tree.threshold.push_back(best_threshold);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.value.push_back(mean);
        const auto node = static_cast<std::int32_t>(tree.feature.size() - 1);
        tree.left[static_cast<std::size_t>(node)] = grow(left_rows);
        tree.right[static_cast<std::size_t>(node)] = grow(right_rows);
        return node;
    }
};

// Bootstrap draw for one tree: n canonical positions, ascending. Pure
// function of (seed, tree_index, n).
std::vector<std::size_t> bootstrap_rows(std::uint64_t forest_seed, std::size_t tree_index,
                                        std::size_t n) {
    Rng rng(derive_seed(forest_seed, {0xB007u, tree_index}));
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::size_t>(rng.uniform_int(n));
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t tree_index) {
    return derive_seed(forest_seed, {0x52EEu, tree_index});
}

std::vector<std::size_t> oob_rows_of(const std::vector<std::size_t>& inbag_sorted, std::size_t n) {
    std::vector<std::size_t> oob;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k < inbag_sorted.size() && inbag_sorted[k] < i) ++k;
        if (k == inbag_sorted.size() || inbag_sorted[k] != i) oob.push_back(i);
    }
    return oob;
}

void check_matrix(const DesignMatrix& X, const std::vector<double>& y) {
    if (X.rows == 0 || X.cols() == 0) throw std::invalid_argument("fit_forest: empty design matrix");
    if (X.rows != y.size()) throw std::invalid_argument("fit_forest: design/response row mismatch");
    for (double v : X.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("fit_forest: non-finite design value");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw std::invalid_argument("fit_forest: non-finite response value");
    }
}

} // namespace

Forest fit_forest(const DesignMatrix& X, const std::vector<double>& y, const ForestHyperparams& hp,
                  const std::vector<std::string>* row_keys, int threads) {
    check_matrix(X, y);
    if (hp.n_trees == 0) throw std::invalid_argument("fit_forest: n_trees must be >= 1");
    if (X.rows < hp.min_node_size) throw std::invalid_argument("fit_forest: fewer rows than min_node_size");
    const std::size_t p = X.cols();
    if (hp.resolve_mtry(p) > p) throw std::invalid_argument("fit_forest: mtry exceeds feature count");

    const std::size_t n = X.rows;
    Forest forest;
    forest.schema_ = X.columns;
    forest.hp_ = hp;
    forest.y_min_ = *std::min_element(y.begin(), y.end());
    forest.y_max_ = *std::max_element(y.begin(), y.end());

    // Canonical row order: ascending row keys (plot ids) when given.
    forest.fit_row_order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) forest.fit_row_order_[i] = static_cast<std::uint32_t>(i);
    if (row_keys) {
        if (row_keys->size() != n) throw std::invalid_argument("fit_forest: row key count mismatch");
        std::sort(forest.fit_row_order_.begin(), forest.fit_row_order_.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return (*row_keys)[a] < (*row_keys)[b]; });
    }

    // Canonical copies so tree growth sees the same data for any input order.
    DesignMatrix Xc;
    Xc.columns = X.columns;
    Xc.rows = n;
    Xc.values.resize(n * p);
    std::vector<double> yc(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = forest.fit_row_order_[i];
        std::copy_n(X.values.begin() + static_cast<std::ptrdiff_t>(src * p), p,
                    Xc.values.begin() + static_cast<std::ptrdiff_t>(i * p));
        yc[i] = y[src];
    }

    const std::size_t mtry = hp.resolve_mtry(p);
    forest.trees_.resize(hp.n_trees);
    std::vector<std::vector<std::size_t>> oob_per_tree(hp.n_trees);
    parallel_for(hp.n_trees, threads, [&](std::size_t t) {
        std::vector<std::size_t> rows;
        if (hp.bootstrap) {
            rows = bootstrap_rows(hp.seed, t, n);
            oob_per_tree[t] = oob_rows_of(rows, n);
        } else {
            rows.resize(n);
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }
        TreeGrower grower(Xc, yc, mtry, hp.min_node_size, tree_seed(hp.seed, t));
        grower.grow(rows);
        forest.trees_[t] = std::move(grower.tree);
    });

    // OOB aggregation in tree order, mapped back to caller rows.
    forest.oob_predictions_.assign(n, 0.0);
    forest.oob_counts_.assign(n, 0);
    for (std::size_t t = 0; t < hp.n_trees; ++t) {
        for (std::size_t i : oob_per_tree[t]) {
            const std::size_t caller_row = forest.fit_row_order_[i];
            forest.oob_predictions_[caller_row] += forest.trees_[t].predict(Xc.row(i));
            forest.oob_counts_[caller_row] += 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (forest.oob_counts_[i] > 0) {
            forest.oob_predictions_[i] /= static_cast<double>(forest.oob_counts_[i]);
        }
    }
    return forest;
}

std::vector<double> permutation_importance(const Forest& forest, const DesignMatrix& X,
                                           const std::vector<double>& y, std::uint64_t seed,
                                           int threads) {
    check_matrix(X, y);
    if (X.columns != forest.schema()) throw std::invalid_argument("permutation_importance: schema mismatch");
    if (!forest.hyperparams().bootstrap) {
        throw std::invalid_argument("permutation_importance: forest was fit without bootstrap, no OOB rows");
    }
    const std::size_t n = X.rows;
    const std::size_t p = X.cols();
    const auto& order = forest.fit_row_order();
    if (order.size() != n) throw std::invalid_argument("permutation_importance: row count differs from fit");

    const std::size_t n_trees = forest.trees().size();
    std::vector<std::vector<double>> per_tree(n_trees, std::vector<double>(p, 0.0));
    std::vector<char> has_oob(n_trees, 0);

    parallel_for(n_trees, threads, [&](std::size_t t) {
        const auto inbag = bootstrap_rows(forest.hyperparams().seed, t, n);
        const auto oob = oob_rows_of(inbag, n);
        if (oob.empty()) return;
        has_oob[t] = 1;
        const Tree& tree = forest.trees()[t];

        std::vector<std::vector<double>> rows(oob.size());
        std::vector<double> truth(oob.size());
        double mse0 = 0.0;
        for (std::size_t i = 0; i < oob.size(); ++i) {
            const std::size_t caller_row = order[oob[i]];
            const auto row = X.row(caller_row);
            rows[i].assign(row.begin(), row.end());
            truth[i] = y[caller_row];
            const double d = truth[i] - tree.predict(rows[i]);
            mse0 += d * d;
        }
        mse0 /= static_cast<double>(oob.size());

        std::vector<std::size_t> perm(oob.size());
        std::vector<double> saved(oob.size());
        for (std::size_t j = 0; j < p; ++j) {
            Rng rng(derive_seed(seed, {0x1337u, t, j}));
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
            rng.shuffle(perm);
            for (std::size_t i = 0; i < rows.size(); ++i) saved[i] = rows[i][j];
            double mse = 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                rows[i][j] = saved[perm[i]];
                const double d = truth[i] - tree.predict(rows[i]);
                mse += d * d;
            }
            mse /= static_cast<double>(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i][j] = saved[i];
            per_tree[t][j] = mse - mse0;
        }
    });

    std::vector<double> scores(p, 0.0);
    std::size_t used = 0;
    for (std::size_t t = 0; t < n_trees; ++t) {
        if (!has_oob[t]) continue;
        ++used;
        for (std::size_t j = 0; j < p; ++j) scores[j] += per_tree[t][j];
    }
    if (used == 0) throw std::runtime_error("permutation_importance: no tree had OOB rows");
    for (double& s : scores) s /= static_cast<double>(used);
    return scores;
}

OobError oob_error(const Forest& forest, const std::vector<double>& y) {
    const auto& counts = forest.oob_counts();
    if (counts.size() != y.size()) throw std::invalid_argument("oob_error: response length differs from fit");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) {
            throw std::runtime_error("oob_error: row " + std::to_string(i) +
                                     " was never out-of-bag; increase n_trees");
        }
    }
    OobError e;
    e.rmse = rmse(y, forest.oob_predictions());
    e.r2 = r_squared(y, forest.oob_predictions());
    return e;
}

nlohmann::json Forest::to_json() const {
    nlohmann::json doc;
    doc["format"] = "forestmap.model";
    doc["version"] = 1;
    doc["schema"] = schema_;
    doc["hyperparameters"] = {{"n_trees", hp_.n_trees},
                              {"mtry", hp_.mtry},
                              {"min_node_size", hp_.min_node_size},
                              {"seed", hp_.seed},
                              {"bootstrap", hp_.bootstrap}};
    doc["y_min"] = y_min_;
    doc["y_max"] = y_max_;
    doc["fit_row_order"] = fit_row_order_;
    doc["oob_predictions"] = oob_predictions_;
    doc["oob_counts"] = oob_counts_;
    if (!importance_.empty()) doc["importance"] = importance_;
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& t : trees_) {
        trees.push_back({{"feature", t.feature},
                         {"threshold", t.threshold},
                         {"left", t.left},
                         {"right", t.right},
                         {"value", t.value}});
    }
    doc["trees"] = std::move(trees);
    return doc;
}

Forest Forest::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "forestmap.model") {
        throw std::runtime_error("not a forestmap model document");
    }
    if (doc.value("version", 0) != 1) {
        throw std::runtime_error("unsupported model version");
    }
    Forest f;
    f.schema_ = doc.at("schema").get<std::vector<std::string>>();
    const auto& hp = doc.at("hyperparameters");
    f.hp_.n_trees = hp.at("n_trees").get<std::size_t>();
    f.hp_.mtry = hp.at("mtry").get<std::size_t>();
    f.hp_.min_node_size = hp.at("min_node_size").get<std::size_t>();
    f.hp_.seed = hp.at("seed").get<std::uint64_t>();
    f.hp_.bootstrap = hp.at("bootstrap").get<bool>();
    f.y_min_ = doc.at("y_min").get<double>();
    f.y_max_ = doc.at("y_max").get<double>();
    f.fit_row_order_ = doc.at("fit_row_order").get<std::vector<std::uint32_t>>();
    f.oob_predictions_ = doc.at("oob_predictions").get<std::vector<double>>();
    f.oob_counts_ = doc.at("oob_counts").get<std::vector<std::uint32_t>>();
    if (doc.contains("importance")) {
        f.importance_ = doc.at("importance").get<std::map<std::string, double>>();
    }
    for (const auto& entry : doc.at("trees")) {
        Tree t;
        t.feature = entry.at("feature").get<std::vector<std::int32_t>>();
        t.threshold = entry.at("threshold").get<std::vector<double>>();
        t.left = entry.at("left").get<std::vector<std::int32_t>>();
        t.right = entry.at("right").get<std::vector<std::int32_t>>();
        t.value = entry.at("value").get<std::vector<double>>();
        if (t.feature.empty()) throw std::runtime_error("model document holds an empty tree");
        f.trees_.push_back(std::move(t));
    }
    if (f.trees_.empty()) throw std::runtime_error("model document holds no trees");
    return f;
}

} // namespace forestmap
