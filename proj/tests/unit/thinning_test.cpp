#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "forestmap/thinning.hpp"
#include "test_util.hpp"

using namespace forestmap;

namespace {

PlotTable grid_plots(const std::vector<std::pair<double, double>>& coords) {
    PlotTable t("net", {"f1"});
    for (std::size_t i = 0; i < coords.size(); ++i) {
        Plot p;
        p.id = "p" + std::to_string(i);
        p.x = coords[i].first;
        p.y = coords[i].second;
        p.ba = 25.0;
        p.features = {static_cast<double>(i)};
        t.add(p);
    }
    return t;
}

} // namespace

TEST_CASE("grid cell counts, including partial cells and degenerate AOIs") {
    CHECK(grid_cells({0, 0, 20000, 20000}, 10).cell_count() == 4);
    CHECK(grid_cells({0, 0, 25000, 20000}, 10).cell_count() == 6);
    CHECK(grid_cells({0, 0, 5000, 5000}, 10).cell_count() == 1);
    CHECK_THROWS(grid_cells({0, 0, -1, 10}, 10));
    CHECK_THROWS(grid_cells({0, 0, 10, 10}, 0.0));
}

TEST_CASE("one plot per cell returns the table unchanged") {
    // 2x2 grid of 10 km cells, one plot centered in each.
    const auto table = grid_plots({{5000, 5000}, {15000, 5000}, {5000, 15000}, {15000, 15000}});
    const auto grid = grid_cells({0, 0, 20000, 20000}, 10);
    const PlotTable thinned = thin_sample(table, grid, 99);
    CHECK(thinned.size() == 4);
}

TEST_CASE("thinning is deterministic per seed and always a subset") {
    std::vector<std::pair<double, double>> coords;
    Rng rng(101);
    for (int i = 0; i < 200; ++i) coords.emplace_back(rng.uniform(0.0, 20000.0), rng.uniform(0.0, 20000.0));
    const auto table = grid_plots(coords);
    const auto grid = grid_cells({0, 0, 20000, 20000}, 4);

    const PlotTable a = thin_sample(table, grid, 7);
    const PlotTable b = thin_sample(table, grid, 7);
    REQUIRE(a.size() == b.size());
    std::set<std::string> ids_a, ids_b, all;
    for (const Plot& p : a.plots()) ids_a.insert(p.id);
    for (const Plot& p : b.plots()) ids_b.insert(p.id);
    for (const Plot& p : table.plots()) all.insert(p.id);
    CHECK(ids_a == ids_b);
    for (const auto& id : ids_a) CHECK(all.count(id) == 1);

    // At most one plot per cell.
    std::set<std::size_t> cells;
    for (const Plot& p : a.plots()) {
        CHECK(cells.insert(grid.cell_of(p.x, p.y)).second);
    }
}

TEST_CASE("within-cell selection is uniform across seeds") {
    const auto table = grid_plots({{100, 100}, {200, 200}, {300, 300}}); // one cell, 3 plots
    const auto grid = grid_cells({0, 0, 1000, 1000}, 1);
    REQUIRE(grid.cell_count() == 1);

    std::map<std::string, int> hits;
    const int trials = 10000;
    for (int s = 0; s < trials; ++s) {
        const PlotTable picked = thin_sample(table, grid, static_cast<std::uint64_t>(s));
        REQUIRE(picked.size() == 1);
        hits[picked[0].id] += 1;
    }
    const double expected = trials / 3.0;
    const double sigma = std::sqrt(trials * (1.0 / 3.0) * (2.0 / 3.0));
    for (const auto& [id, count] : hits) {
        CHECK(std::abs(count - expected) < 3.0 * sigma);
    }
}

TEST_CASE("plan validation") {
    ThinningPlan plan;
    CHECK_NOTHROW(plan.validate());
    plan.resolutions_km = {2, 2};
    plan.iterations = {1, 1};
    CHECK_THROWS(plan.validate()); // not strictly increasing
    plan.resolutions_km = {2, 4};
    plan.iterations = {1};
    CHECK_THROWS(plan.validate()); // length mismatch
}

TEST_CASE("effort experiment: accounting identities and undefined points") {
    // Network of 150 plots on a 20x20 km AOI with a 2-predictor signal.
    Rng rng(103);
    PlotTable net("net", {"f1", "f2"});
    for (int i = 0; i < 150; ++i) {
        Plot p;
        p.id = "n" + std::to_string(i);
        p.x = rng.uniform(0.0, 20000.0);
        p.y = rng.uniform(0.0, 20000.0);
        p.features = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        p.ba = std::max(0.0, 25.0 + 8.0 * p.features[0] + rng.normal(0.0, 1.0));
        p.forest_type = static_cast<ForestType>(1 + rng.uniform_int(3));
        net.add(p);
    }
    const PlotTable test = testutil::make_table(
        40, 2, 104, [](const std::vector<double>& f, ForestType, Rng& r2) {
            return std::max(0.0, 25.0 + 8.0 * f[0] + r2.normal(0.0, 1.0));
        });
    std::vector<std::vector<double>> queries;
    for (int i = 0; i < 100; ++i) queries.push_back({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});

    ThinningPlan plan;
    plan.resolutions_km = {4, 25};
    plan.iterations = {2, 2};
    plan.seed = 105;
    ModelRecipe recipe;
    recipe.predictors = {"f1", "f2"};
    recipe.hp.n_trees = 50;
    recipe.hp.seed = 106;

    const AoiExtent extent{0, 0, 20000, 20000};
    const auto points = effort_experiment(net, extent, plan, recipe, test, queries);
    REQUIRE(points.size() == 4);

    for (const auto& pt : points) {
        if (pt.resolution_km == 25.0) {
            // one cell -> one plot -> undefined
            CHECK(pt.n_plots == 1);
            CHECK(!pt.defined);
        } else {
            // n equals the number of nonempty cells at that resolution
            const auto grid = grid_cells(extent, pt.resolution_km);
            const PlotTable thinned =
                thin_sample(net, grid, derive_seed(plan.seed, {0, pt.iteration}));
            CHECK(pt.n_plots == thinned.size());
            CHECK(pt.defined);
            CHECK(pt.proportion_exterior >= pt.proportion_far);
            CHECK(pt.rmse_pct > 0.0);
        }
    }

    // Same plan twice: identical output (derived seeds, no shared state).
    const auto again = effort_experiment(net, extent, plan, recipe, test, queries);
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(points[i].n_plots == again[i].n_plots);
        CHECK(points[i].rmse_pct == again[i].rmse_pct);
        CHECK(points[i].proportion_far == again[i].proportion_far);
    }

    const auto csv = std::filesystem::temp_directory_path() / "forestmap_effort_test.csv";
    write_effort_csv(points, csv);
    CHECK(std::filesystem::file_size(csv) > 0);
}

TEST_CASE("a thinned envelope can only shrink: inside-thinned implies inside-full") {
    // Network over one AOI with 3 predictors; envelopes standardize by their
    // own calibration sets, so this exercises the affine-invariance of hull
    // membership end to end.
    Rng rng(107);
    PlotTable net("net", {"a", "b", "c"});
    for (int i = 0; i < 250; ++i) {
        Plot p;
        p.id = "q" + std::to_string(i);
        p.x = rng.uniform(0.0, 30000.0);
        p.y = rng.uniform(0.0, 30000.0);
        p.features = {rng.normal(0.0, 2.0), rng.normal(5.0, 1.0), rng.normal(-3.0, 4.0)};
        p.ba = 25.0;
        net.add(p);
    }
    const auto grid = grid_cells({0, 0, 30000, 30000}, 5);
    const PlotTable thinned = thin_sample(net, grid, 108);
    REQUIRE(thinned.size() >= 10);

    const auto full_env = CalibrationEnvelope::build(net, {"a", "b", "c"});
    const auto thin_env = CalibrationEnvelope::build(thinned, {"a", "b", "c"});

    // Convex combinations of thinned plots are inside the thinned hull by
    // construction and must stay inside the full hull.
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<double> w(thinned.size());
        double sum = 0.0;
        for (double& v : w) {
            v = rng.uniform();
            sum += v;
        }
        std::vector<double> q(3, 0.0);
        for (std::size_t i = 0; i < thinned.size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) q[k] += w[i] / sum * thinned[i].features[k];
        }
        CHECK(thin_env.in_hull(q));
        CHECK(full_env.in_hull(q));
    }
}

TEST_CASE("effort experiment rejects plots outside the AOI extent") {
    PlotTable net("net", {"a"});
    for (int i = 0; i < 12; ++i) {
        Plot p;
        p.id = "p" + std::to_string(i);
        p.x = 100.0 * i;
        p.y = 50.0;
        p.features = {static_cast<double>(i)};
        p.ba = 20.0;
        net.add(p);
    }
    ThinningPlan plan;
    plan.resolutions_km = {1};
    plan.iterations = {1};
    ModelRecipe recipe;
    recipe.predictors = {"a"};
    const std::vector<std::vector<double>> queries = {{0.5}};
    const AoiExtent tiny{0, 0, 500, 500}; // plots 6..11 fall outside
    CHECK_THROWS_WITH_AS(static_cast<void>(effort_experiment(net, tiny, plan, recipe, net, queries)),
                         doctest::Contains("outside the AOI"), std::invalid_argument);
}
