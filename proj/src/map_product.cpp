#include "forestmap/map_product.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "forestmap/design.hpp"
#include "forestmap/parallel.hpp"

namespace forestmap {

MapBundle predict_raster(const RasterStack& stack, const Forest& forest,
                         const CalibrationEnvelope& env, int threads) {
    stack.validate();

    // Throws naming every predictor the stack cannot supply.
    const FeatureAssembler model_assembler(stack.band_names, forest.schema());
    const FeatureAssembler env_assembler(stack.band_names, env.predictors());

    const RasterGrid& type_band = stack.forest_type;
    MapBundle bundle;
    bundle.ba_map = RasterGrid::filled(type_band.ncols, type_band.nrows, type_band.xllcorner,
                                       type_band.yllcorner, type_band.cellsize, 0.0);
    bundle.risk_map = bundle.ba_map;

    std::vector<double> dist_sum_per_row(type_band.nrows, 0.0);
    std::vector<std::array<std::uint64_t, 3>> counts_per_row(type_band.nrows, {0, 0, 0});

    parallel_for(type_band.nrows, threads, [&](std::size_t r) {
        std::vector<double> band_values(stack.bands.size());
        std::vector<double> model_row(forest.schema().size());
        std::vector<double> env_row(env.predictors().size());
        for (std::size_t c = 0; c < type_band.ncols; ++c) {
            const std::size_t i = r * type_band.ncols + c;
            bool valid = !type_band.is_nodata(type_band.values[i]);
            for (std::size_t b = 0; b < stack.bands.size() && valid; ++b) {
                band_values[b] = stack.bands[b].values[i];
                if (stack.bands[b].is_nodata(band_values[b])) valid = false;
            }
            if (!valid) {
                bundle.ba_map.values[i] = bundle.ba_map.nodata_value;
                bundle.risk_map.values[i] = bundle.risk_map.nodata_value;
                continue;
            }
            const ForestType type = forest_type_from_code(static_cast<int>(type_band.values[i]));
            model_assembler.assemble(band_values, type, model_row);
            env_assembler.assemble(band_values, type, env_row);

            bundle.ba_map.values[i] = forest.predict(model_row);
            const ExtrapolationClass cls = env.classify(env_row);
            bundle.risk_map.values[i] = static_cast<double>(static_cast<int>(cls.risk));
            counts_per_row[r][static_cast<std::size_t>(cls.risk)] += 1;
            if (cls.distance) dist_sum_per_row[r] += *cls.distance;
        }
    });

    std::array<std::uint64_t, 3> counts = {0, 0, 0};
    for (std::size_t r = 0; r < type_band.nrows; ++r) {
        for (std::size_t k = 0; k < 3; ++k) counts[k] += counts_per_row[r][k];
    }
    const std::uint64_t valid = counts[0] + counts[1] + counts[2];
    bundle.proportions.n = valid;
    if (valid > 0) {
        bundle.proportions.proportion_inside = static_cast<double>(counts[0]) / static_cast<double>(valid);
        bundle.proportions.proportion_near = static_cast<double>(counts[1]) / static_cast<double>(valid);
        bundle.proportions.proportion_far = static_cast<double>(counts[2]) / static_cast<double>(valid);
        const std::uint64_t exterior = counts[1] + counts[2];
        if (exterior > 0) {
            double dist_sum = 0.0;
            for (double v : dist_sum_per_row) dist_sum += v;
            bundle.proportions.mean_extrapolation_distance = dist_sum / static_cast<double>(exterior);
        }
    }
    return bundle;
}

void write_pgm_preview(const RasterGrid& grid, const std::filesystem::path& path) {
    grid.validate();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : grid.values) {
        if (grid.is_nodata(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) throw std::invalid_argument("write_pgm_preview: grid holds no data");
    const double span = hi > lo ? hi - lo : 1.0;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write preview '" + path.string() + "'");
    out << "P2\n" << grid.ncols << ' ' << grid.nrows << "\n256\n";
    for (std::size_t r = 0; r < grid.nrows; ++r) {
        for (std::size_t c = 0; c < grid.ncols; ++c) {
            if (c) out << ' ';
            const double v = grid.at(r, c);
            if (grid.is_nodata(v)) {
                out << 256; // reserved nodata sample
            } else {
                out << static_cast<int>(std::lround((v - lo) / span * 255.0));
            }
        }
        out << '\n';
    }
}

void write_ppm_risk_preview(const RasterGrid& risk, const std::filesystem::path& path) {
    risk.validate();
    // Inside green, Near orange, Far dark blue, nodata white.
    static constexpr int palette[4][3] = {
        {44, 162, 95}, {254, 178, 76}, {8, 48, 107}, {255, 255, 255}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write preview '" + path.string() + "'");
    out << "P3\n" << risk.ncols << ' ' << risk.nrows << "\n255\n";
    for (std::size_t r = 0; r < risk.nrows; ++r) {
        for (std::size_t c = 0; c < risk.ncols; ++c) {
            const double v = risk.at(r, c);
            int idx = 3;
            if (!risk.is_nodata(v)) {
                if (v != 0.0 && v != 1.0 && v != 2.0) {
                    throw std::invalid_argument("risk preview: invalid class code");
                }
                idx = static_cast<int>(v);
            }
            if (c) out << ' ';
            out << palette[idx][0] << ' ' << palette[idx][1] << ' ' << palette[idx][2];
        }
        out << '\n';
    }
}

nlohmann::json map_manifest(const MapBundle& bundle, const nlohmann::json& cli_args) {
    nlohmann::json doc;
    doc["format"] = "forestmap.map_manifest";
    doc["version"] = 1;
    doc["model"] = bundle.model_label;
    doc["envelope"] = bundle.envelope_label;
    doc["valid_pixels"] = bundle.proportions.n;
    doc["proportion_inside"] = bundle.proportions.proportion_inside;
    doc["proportion_near"] = bundle.proportions.proportion_near;
    doc["proportion_far"] = bundle.proportions.proportion_far;
    if (bundle.proportions.mean_extrapolation_distance) {
        doc["mean_extrapolation_distance"] = *bundle.proportions.mean_extrapolation_distance;
    }
    doc["args"] = cli_args;
    return doc;
}

} // namespace forestmap
