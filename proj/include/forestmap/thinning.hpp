#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "forestmap/envelope.hpp"
#include "forestmap/forest.hpp"
#include "forestmap/plot.hpp"

namespace forestmap {

struct AoiExtent {
    double xmin = 0.0;
    double ymin = 0.0;
    double width = 0.0;  // meters
    double height = 0.0; // meters
};

// Axis-aligned sampling grid anchored at the AOI lower-left corner; partial
// cells at the top/right edges are included.
struct SampleGrid {
    AoiExtent extent;
    double resolution_m = 0.0;
    std::size_t ncx = 0;
    std::size_t ncy = 0;

    std::size_t cell_count() const { return ncx * ncy; }
    // Cell of a point inside the AOI; points on the top/right boundary fall
    // into the last partial cell.
    std::size_t cell_of(double x, double y) const;
};

SampleGrid grid_cells(const AoiExtent& extent, double resolution_km);

// At most one plot per cell, chosen uniformly among the cell's plots; empty
// cells contribute nothing. Deterministic per seed and independent of table
// row order.
PlotTable thin_sample(const PlotTable& table, const SampleGrid& grid, std::uint64_t seed);

struct ThinningPlan {
    std::vector<double> resolutions_km = {2, 4, 6, 10, 20};
    std::vector<std::size_t> iterations = {4, 4, 5, 6, 7};
    std::uint64_t seed = 0;

    void validate() const;
};

struct EffortCurvePoint {
    double resolution_km = 0.0;
    std::size_t iteration = 0;
    std::size_t n_plots = 0;
    bool defined = false; // false when the thinned sample was too small to refit
    double rmse_pct = 0.0;
    double bias_pct = 0.0;
    double proportion_exterior = 0.0; // hull-exterior (Near + Far)
    double proportion_far = 0.0;
    std::optional<double> mean_extrapolation_distance;
};

struct ModelRecipe {
    std::vector<std::string> predictors; // retained continuous predictors
    ForestHyperparams hp;
};

// For every (resolution, iteration): thin the network, refit the forest on
// the thinned plots, evaluate on the fixed test table (rmse/bias as % of the
// test mean Ba), rebuild the envelope on the thinned plots and classify the
// fixed query sample. Runs fewer than 10 plots are recorded undefined. The
// per-run seed derives from (plan.seed, resolution index, iteration index).
std::vector<EffortCurvePoint> effort_experiment(const PlotTable& network, const AoiExtent& extent,
                                                const ThinningPlan& plan, const ModelRecipe& recipe,
                                                const PlotTable& test_table,
                                                const std::vector<std::vector<double>>& raw_queries,
                                                int threads = 0);

// One row per (resolution, iteration); undefined metrics print NA.
void write_effort_csv(const std::vector<EffortCurvePoint>& points, const std::filesystem::path& path);

} // namespace forestmap
