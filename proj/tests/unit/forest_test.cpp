#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "forestmap/forest.hpp"
#include "forestmap/metrics.hpp"
#include "forestmap/standardize.hpp"
#include "forestmap/rng.hpp"
#include "forestmap/synth.hpp"
#include "test_util.hpp"

using namespace forestmap;

namespace {

DesignMatrix random_design(std::size_t n, std::size_t p, std::uint64_t seed) {
    DesignMatrix m;
    for (std::size_t j = 0; j < p; ++j) m.columns.push_back("f" + std::to_string(j + 1));
    m.rows = n;
    m.values.resize(n * p);
    Rng rng(seed);
    for (double& v : m.values) v = rng.uniform(-1.0, 1.0);
    return m;
}

} // namespace

TEST_CASE("constant response gives exactly constant predictions") {
    const DesignMatrix X = random_design(50, 3, 1);
    const std::vector<double> y(50, 25.0);
    ForestHyperparams hp;
    hp.n_trees = 30;
    hp.seed = 2;
    const Forest f = fit_forest(X, y, hp);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                                       rng.uniform(-2.0, 2.0)};
        CHECK(f.predict(x) == 25.0);
    }
}

TEST_CASE("noiseless step function is recovered (OOB RMSE < 1)") {
    const std::size_t n = 200;
    DesignMatrix X = random_design(n, 3, 4);
    // Keep the step feature clear of the threshold so the split is
    // recoverable from any bootstrap draw.
    Rng rng(400);
    for (std::size_t i = 0; i < n; ++i) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        X(i, 0) = sign * rng.uniform(0.05, 1.0);
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = X(i, 0) < 0.0 ? 10.0 : 30.0;
    ForestHyperparams hp;
    hp.n_trees = 200;
    hp.mtry = 3;
    hp.seed = 5;
    const Forest f = fit_forest(X, y, hp);
    const OobError e = oob_error(f, y);
    CHECK(e.rmse < 1.0);
    CHECK(e.r2 > 0.99);
}

TEST_CASE("same seed gives bit-identical predictions; different seed differs") {
    const DesignMatrix X = random_design(120, 4, 6);
    std::vector<double> y(120);
    for (std::size_t i = 0; i < 120; ++i) y[i] = 20.0 + 5.0 * X(i, 1) + 2.0 * X(i, 2) * X(i, 3);
    ForestHyperparams hp;
    hp.n_trees = 50;
    hp.seed = 7;
    const Forest a = fit_forest(X, y, hp);
    const Forest b = fit_forest(X, y, hp);
    ForestHyperparams hp2 = hp;
    hp2.seed = 8;
    const Forest c = fit_forest(X, y, hp2);

    Rng rng(9);
    bool any_diff = false;
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                       rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        CHECK(a.predict(x) == b.predict(x));
        any_diff = any_diff || a.predict(x) != c.predict(x);
    }
    CHECK(any_diff);
}

TEST_CASE("thread count does not change the fit") {
    const DesignMatrix X = random_design(100, 4, 60);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) y[i] = 20.0 + 5.0 * X(i, 0);
    ForestHyperparams hp;
    hp.n_trees = 40;
    hp.seed = 61;
    const Forest single = fit_forest(X, y, hp, nullptr, 1);
    const Forest quad = fit_forest(X, y, hp, nullptr, 4);
    Rng rng(62);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                                       rng.uniform(-1, 1)};
        CHECK(single.predict(x) == quad.predict(x));
    }
    CHECK(single.oob_predictions() == quad.oob_predictions());
}

TEST_CASE("predictions stay inside the training response range") {
    const DesignMatrix X = random_design(150, 5, 10);
    std::vector<double> y(150);
    Rng noise(11);
    for (std::size_t i = 0; i < 150; ++i) y[i] = 25.0 + 10.0 * X(i, 0) + noise.normal(0.0, 2.0);
    ForestHyperparams hp;
    hp.n_trees = 100;
    hp.seed = 12;
    const Forest f = fit_forest(X, y, hp);
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> x(5);
        for (double& v : x) v = rng.uniform(-10.0, 10.0); // probes far outside training space
        const double pred = f.predict(x);
        CHECK(pred >= f.y_min());
        CHECK(pred <= f.y_max());
    }
}

TEST_CASE("a tree that never splits predicts the training mean") {
    const DesignMatrix X = random_design(30, 2, 14);
    std::vector<double> y(30);
    Rng rng(15);
    for (double& v : y) v = rng.uniform(10.0, 40.0);
    ForestHyperparams hp;
    hp.n_trees = 1;
    hp.min_node_size = 30; // 2*min_node_size > n: the root is a leaf
    hp.seed = 16;
    hp.bootstrap = false;
    const Forest f = fit_forest(X, y, hp);
    CHECK(f.trees()[0].node_count() == 1);
    CHECK(f.predict(std::vector<double>{0.0, 0.0}) == doctest::Approx(mean_of(y)).epsilon(1e-15));
}

TEST_CASE("fully grown single tree reproduces training responses exactly") {
    const DesignMatrix X = random_design(60, 3, 17);
    std::vector<double> y(60);
    Rng rng(18);
    for (double& v : y) v = rng.uniform(5.0, 45.0);
    ForestHyperparams hp;
    hp.n_trees = 1;
    hp.mtry = 3;
    hp.min_node_size = 1;
    hp.bootstrap = false;
    hp.seed = 19;
    const Forest f = fit_forest(X, y, hp);
    for (std::size_t i = 0; i < X.rows; ++i) {
        CHECK(f.predict(X.row(i)) == y[i]);
    }
}

TEST_CASE("permutation importance separates the informative feature") {
    const std::size_t n = 300;
    DesignMatrix X = random_design(n, 5, 20);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 20.0 + 12.0 * X(i, 0);
    ForestHyperparams hp;
    hp.n_trees = 150;
    hp.seed = 21;
    const Forest f = fit_forest(X, y, hp);
    const auto scores = permutation_importance(f, X, y, 22);
    REQUIRE(scores.size() == 5);
    for (std::size_t j = 1; j < 5; ++j) {
        CHECK(scores[0] > 5.0 * std::abs(scores[j]));
    }
}

TEST_CASE("pure-noise importances stay below the permutation-null 95th percentile") {
    const std::size_t n = 120;
    const DesignMatrix X = random_design(n, 4, 23);
    std::vector<double> y(n);
    Rng rng(24);
    for (double& v : y) v = 25.0 + rng.normal(0.0, 5.0);
    ForestHyperparams hp;
    hp.n_trees = 60;
    hp.seed = 25;
    const Forest f = fit_forest(X, y, hp);
    const auto scores = permutation_importance(f, X, y, 26);

    // Null distribution: refit on response permutations and collect the max
    // absolute importance of each null fit.
    std::vector<double> null_max;
    std::vector<double> y_perm = y;
    for (int rep = 0; rep < 20; ++rep) {
        Rng perm_rng(300 + static_cast<std::uint64_t>(rep));
        perm_rng.shuffle(y_perm);
        ForestHyperparams nhp = hp;
        nhp.seed = 400 + static_cast<std::uint64_t>(rep);
        const Forest nf = fit_forest(X, y_perm, nhp);
        const auto nscores = permutation_importance(nf, X, y_perm, 500 + static_cast<std::uint64_t>(rep));
        double mx = 0.0;
        for (double s : nscores) mx = std::max(mx, std::abs(s));
        null_max.push_back(mx);
    }
    std::sort(null_max.begin(), null_max.end());
    const double q95 = null_max[18]; // 95th percentile of 20 reps
    for (double s : scores) CHECK(std::abs(s) <= q95);
}

TEST_CASE("duplicated informative feature dilutes importance across the pair") {
    const std::size_t n = 250;
    DesignMatrix X = random_design(n, 4, 27);
    // Column 1 duplicates column 0.
    for (std::size_t i = 0; i < n; ++i) X(i, 1) = X(i, 0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 20.0 + 10.0 * X(i, 0);
    ForestHyperparams hp;
    hp.n_trees = 150;
    hp.seed = 28;
    const Forest dup = fit_forest(X, y, hp);
    const auto dup_scores = permutation_importance(dup, X, y, 29);

    // Reference fit without the duplicate.
    DesignMatrix X3;
    X3.columns = {"f1", "f3", "f4"};
    X3.rows = n;
    X3.values.resize(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        X3(i, 0) = X(i, 0);
        X3(i, 1) = X(i, 2);
        X3(i, 2) = X(i, 3);
    }
    const Forest solo = fit_forest(X3, y, hp);
    const auto solo_scores = permutation_importance(solo, X3, y, 29);

    // Each copy matters less than the undiluted feature, but the pair
    // together still carries the signal.
    CHECK(dup_scores[0] < solo_scores[0]);
    CHECK(dup_scores[1] < solo_scores[0]);
    CHECK(dup_scores[0] + dup_scores[1] > 0.5 * solo_scores[0]);
}

TEST_CASE("oob error: learnable signal vs pure noise, and the never-OOB error") {
    // Learnable: smooth signal, n = 500.
    {
        const std::size_t n = 500;
        DesignMatrix X = random_design(n, 4, 30);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = 25.0 + 12.0 * X(i, 0) - 6.0 * X(i, 1);
        ForestHyperparams hp;
        hp.n_trees = 200;
        hp.seed = 31;
        const Forest f = fit_forest(X, y, hp);
        CHECK(oob_error(f, y).r2 > 0.8);
    }
    // Pure noise.
    {
        const std::size_t n = 300;
        const DesignMatrix X = random_design(n, 4, 32);
        std::vector<double> y(n);
        Rng rng(33);
        for (double& v : y) v = 25.0 + rng.normal(0.0, 5.0);
        ForestHyperparams hp;
        hp.n_trees = 200;
        hp.seed = 34;
        const Forest f = fit_forest(X, y, hp);
        CHECK(oob_error(f, y).r2 <= 0.05);
    }
    // One tree leaves most rows in-bag only.
    {
        const DesignMatrix X = random_design(40, 2, 35);
        std::vector<double> y(40);
        Rng rng(36);
        for (double& v : y) v = rng.uniform(10.0, 30.0);
        ForestHyperparams hp;
        hp.n_trees = 1;
        hp.seed = 37;
        const Forest f = fit_forest(X, y, hp);
        CHECK_THROWS_WITH_AS(static_cast<void>(oob_error(f, y)), doctest::Contains("n_trees"),
                             std::runtime_error);
    }
}

TEST_CASE("bagging keyed on plot ids is invariant to row order") {
    const std::size_t n = 90;
    DesignMatrix X = random_design(n, 3, 38);
    std::vector<double> y(n);
    std::vector<std::string> keys(n);
    Rng rng(39);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = 20.0 + 6.0 * X(i, 0) + rng.normal(0.0, 1.0);
        keys[i] = "plot_" + std::to_string(1000 + i);
    }
    ForestHyperparams hp;
    hp.n_trees = 60;
    hp.seed = 40;
    const Forest original = fit_forest(X, y, hp, &keys);

    // Reverse the row order.
    DesignMatrix Xr = X;
    std::vector<double> yr(n);
    std::vector<std::string> keys_r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = n - 1 - i;
        for (std::size_t j = 0; j < 3; ++j) Xr(i, j) = X(src, j);
        yr[i] = y[src];
        keys_r[i] = keys[src];
    }
    const Forest reversed = fit_forest(Xr, yr, hp, &keys_r);

    Rng probe(41);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x = {probe.uniform(-1, 1), probe.uniform(-1, 1), probe.uniform(-1, 1)};
        CHECK(original.predict(x) == reversed.predict(x));
    }
    // OOB predictions line up once mapped through the permutation.
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(original.oob_predictions()[i] == reversed.oob_predictions()[n - 1 - i]);
    }
}

TEST_CASE("model json round trip preserves predictions bit-exactly") {
    const DesignMatrix X = random_design(80, 4, 42);
    std::vector<double> y(80);
    Rng rng(43);
    for (std::size_t i = 0; i < 80; ++i) y[i] = 22.0 + 8.0 * X(i, 1) + rng.normal(0.0, 2.0);
    ForestHyperparams hp;
    hp.n_trees = 50;
    hp.seed = 44;
    Forest f = fit_forest(X, y, hp);
    f.set_importance({{"f2", 1.25}});

    const std::string text = f.to_json().dump();
    const Forest g = Forest::from_json(nlohmann::json::parse(text));
    CHECK(g.schema() == f.schema());
    CHECK(g.hyperparams().seed == hp.seed);
    CHECK(g.importance() == f.importance());
    Rng probe(45);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> x(4);
        for (double& v : x) v = probe.uniform(-2.0, 2.0);
        CHECK(f.predict(x) == g.predict(x));
    }

    CHECK_THROWS(Forest::from_json(nlohmann::json{{"format", "something_else"}}));
}

TEST_CASE("fit input validation") {
    DesignMatrix empty;
    CHECK_THROWS(fit_forest(empty, {}, ForestHyperparams{}));

    DesignMatrix X = random_design(20, 2, 46);
    std::vector<double> y(20, 1.0);
    X.values[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS(fit_forest(X, y, ForestHyperparams{}));

    X.values[3] = 0.0;
    ForestHyperparams hp;
    hp.mtry = 5; // > p
    CHECK_THROWS(fit_forest(X, y, hp));

    const Forest f = fit_forest(X, y, ForestHyperparams{.n_trees = 5, .seed = 47});
    CHECK_THROWS(f.predict(std::vector<double>{1.0})); // wrong length
}

TEST_CASE("OOB RMSE is stable between 100 and 500 trees on synthetic data") {
    forestmap::SynthConfig cfg;
    cfg.aoi_width_km = 24;
    cfg.aoi_height_km = 24;
    cfg.cellsize_m = 250;
    cfg.plots_per_subforest = 200;
    cfg.seed = 48;
    const auto ds = forestmap::synth_generate(cfg);
    const auto& table = ds.local_tables[0];
    const DesignMatrix design = build_design(table, table.schema(), true);

    ForestHyperparams hp;
    hp.seed = 49;
    hp.n_trees = 100;
    const double rmse100 = oob_error(fit_forest(design, table.responses(), hp), table.responses()).rmse;
    hp.n_trees = 500;
    const double rmse500 = oob_error(fit_forest(design, table.responses(), hp), table.responses()).rmse;
    CHECK(std::abs(rmse100 - rmse500) / rmse500 < 0.05);
}
