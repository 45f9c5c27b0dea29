#pragma once

#include <cstdint>
#include <vector>

#include "forestmap/plot.hpp"
#include "forestmap/raster_stack.hpp"

namespace forestmap {

// Synthetic study area standing in for proprietary inventory data at desk
// scale: smooth predictor fields over an AOI, disjoint sub-forest blocks with
// shifted predictor distributions, a known monotone response, and plot
// networks sampled from the rasters.
struct SynthConfig {
    double aoi_width_km = 64.0;
    double aoi_height_km = 64.0;
    std::size_t plots_per_subforest = 200;
    std::size_t n_subforests = 5;
    // Scales the per-block predictor shifts (1 = default strength).
    double covariate_shift = 1.0;
    double noise_sd = 3.0; // m²/ha
    double cellsize_m = 125.0;
    std::uint64_t seed = 42;

    void validate() const;
};

struct SynthDataset {
    std::vector<PlotTable> local_tables; // one per sub-forest
    PlotTable regional_table;            // spread over the whole AOI
    RasterStack stack;
    RasterGrid truth; // noiseless Ba
};

// Deterministic per seed. Plot features equal the stack band values at the
// plot's cell; noiseless plot Ba equals the truth raster value at that cell.
// All raster and plot values are quantized to 9 significant digits so that
// CSV output reproduces them exactly.
SynthDataset synth_generate(const SynthConfig& cfg);

// Sub-forest block layout: near-square grid of disjoint AOI blocks.
struct BlockLayout {
    std::size_t nbx = 0, nby = 0;
    double block_w = 0.0, block_h = 0.0;

    static BlockLayout make(double aoi_w_m, double aoi_h_m, std::size_t n_blocks);
    // Index in [0, nbx*nby) of the block containing (x, y).
    std::size_t block_of(double x, double y) const;
};

} // namespace forestmap
