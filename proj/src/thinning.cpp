#include "forestmap/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "forestmap/design.hpp"
#include "forestmap/metrics.hpp"
#include "forestmap/parallel.hpp"
#include "forestmap/rng.hpp"
#include "forestmap/standardize.hpp"
#include "forestmap/transfer.hpp"

namespace forestmap {

std::size_t SampleGrid::cell_of(double x, double y) const {
    const double fx = (x - extent.xmin) / resolution_m;
    const double fy = (y - extent.ymin) / resolution_m;
    if (fx < 0.0 || fy < 0.0 || x > extent.xmin + extent.width || y > extent.ymin + extent.height) {
        throw std::invalid_argument("thin_sample: plot outside the AOI extent");
    }
    const std::size_t cx = std::min(static_cast<std::size_t>(fx), ncx - 1);
    const std::size_t cy = std::min(static_cast<std::size_t>(fy), ncy - 1);
    return cy * ncx + cx;
}

SampleGrid grid_cells(const AoiExtent& extent, double resolution_km) {
    if (!(extent.width > 0.0) || !(extent.height > 0.0)) {
        throw std::invalid_argument("grid_cells: AOI extent must be positive");
    }
    if (!(resolution_km > 0.0)) throw std::invalid_argument("grid_cells: resolution must be positive");
    SampleGrid grid;
    grid.extent = extent;
    grid.resolution_m = resolution_km * 1000.0;
    grid.ncx = static_cast<std::size_t>(std::ceil(extent.width / grid.resolution_m));
    grid.ncy = static_cast<std::size_t>(std::ceil(extent.height / grid.resolution_m));
    grid.ncx = std::max<std::size_t>(1, grid.ncx);
    grid.ncy = std::max<std::size_t>(1, grid.ncy);
    return grid;
}

PlotTable thin_sample(const PlotTable& table, const SampleGrid& grid, std::uint64_t seed) {
    // Bucket rows per cell in id order, then draw one row per nonempty cell.
    std::vector<std::vector<std::size_t>> members(grid.cell_count());
    for (std::size_t r : table.order_by_id()) {
        members[grid.cell_of(table[r].x, table[r].y)].push_back(r);
    }
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    for (const auto& cell : members) {
        if (cell.empty()) continue;
        chosen.push_back(cell[static_cast<std::size_t>(rng.uniform_int(cell.size()))]);
    }
    return table.subset(chosen, table.name());
}

void ThinningPlan::validate() const {
    if (resolutions_km.empty() || resolutions_km.size() != iterations.size()) {
        throw std::invalid_argument("thinning plan: resolutions and iterations must have equal nonzero length");
    }
    for (std::size_t i = 0; i < resolutions_km.size(); ++i) {
        if (!(resolutions_km[i] > 0.0)) throw std::invalid_argument("thinning plan: resolutions must be positive");
        if (i > 0 && !(resolutions_km[i] > resolutions_km[i - 1])) {
            throw std::invalid_argument("thinning plan: resolutions must be strictly increasing");
        }
        if (iterations[i] == 0) throw std::invalid_argument("thinning plan: iteration counts must be positive");
    }
}

std::vector<EffortCurvePoint> effort_experiment(const PlotTable& network, const AoiExtent& extent,
                                                const ThinningPlan& plan, const ModelRecipe& recipe,
                                                const PlotTable& test_table,
                                                const std::vector<std::vector<double>>& raw_queries,
                                                int threads) {
    plan.validate();
    if (raw_queries.empty()) throw std::invalid_argument("effort_experiment: no envelope queries");
    for (const Plot& p : network.plots()) {
        if (p.x < extent.xmin || p.x > extent.xmin + extent.width || p.y < extent.ymin ||
            p.y > extent.ymin + extent.height) {
            throw std::invalid_argument("effort_experiment: plot '" + p.id + "' lies outside the AOI extent");
        }
    }
    const double test_mean = mean_of(test_table.responses());

    struct Run {
        std::size_t res_index;
        std::size_t iteration;
    };
    std::vector<Run> runs;
    for (std::size_t ri = 0; ri < plan.resolutions_km.size(); ++ri) {
        for (std::size_t it = 0; it < plan.iterations[ri]; ++it) runs.push_back({ri, it});
    }

    std::vector<EffortCurvePoint> points(runs.size());
    parallel_for(runs.size(), threads, [&](std::size_t k) {
        const auto [ri, it] = runs[k];
        EffortCurvePoint& point = points[k];
        point.resolution_km = plan.resolutions_km[ri];
        point.iteration = it;

        const SampleGrid grid = grid_cells(extent, plan.resolutions_km[ri]);
        const std::uint64_t run_seed = derive_seed(plan.seed, {ri, it});
        const PlotTable thinned = thin_sample(network, grid, run_seed);
        point.n_plots = thinned.size();
        if (thinned.size() < 10) return; // undefined point

        try {
            const DesignMatrix design = build_design(thinned, recipe.predictors, true);
            std::vector<std::string> keys;
            keys.reserve(thinned.size());
            for (const Plot& p : thinned.plots()) keys.push_back(p.id);
            const Forest forest = fit_forest(design, thinned.responses(), recipe.hp, &keys, 1);

            const std::vector<double> y = test_table.responses();
            const std::vector<double> yhat = predict_table(forest, test_table);
            const FitMetrics metrics = compute_metrics(y, yhat);
            point.rmse_pct = metrics.rmse_pct(test_mean);
            point.bias_pct = metrics.bias_pct(test_mean);

            const CalibrationEnvelope env = CalibrationEnvelope::build(thinned, recipe.predictors);
            const ExtrapolationSummary s = extrapolation_summary(env, raw_queries, 1);
            point.proportion_exterior = s.proportion_near + s.proportion_far;
            point.proportion_far = s.proportion_far;
            point.mean_extrapolation_distance = s.mean_extrapolation_distance;
            point.defined = true;
        } catch (const std::invalid_argument&) {
            // Degenerate thinned sample (for instance a zero-variance
            // predictor): leave the point undefined.
            point.defined = false;
        }
    });
    return points;
}

void write_effort_csv(const std::vector<EffortCurvePoint>& points, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write effort curves '" + path.string() + "'");
    out << "resolution_km,iteration,n_plots,rmse_pct,bias_pct,proportion_exterior,proportion_far,"
           "mean_extrapolation_distance\n";
    char buf[64];
    const auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    for (const auto& p : points) {
        out << num(p.resolution_km) << ',' << p.iteration << ',' << p.n_plots;
        if (p.defined) {
            out << ',' << num(p.rmse_pct) << ',' << num(p.bias_pct) << ',' << num(p.proportion_exterior)
                << ',' << num(p.proportion_far) << ',';
            out << (p.mean_extrapolation_distance ? num(*p.mean_extrapolation_distance) : "NA");
        } else {
            out << ",NA,NA,NA,NA,NA";
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace forestmap
