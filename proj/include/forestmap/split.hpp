#pragma once

#include <cstdint>

#include "forestmap/plot.hpp"

namespace forestmap {

struct SplitSpec {
    double train_fraction = 0.8;
    double calib_fraction = 0.8; // fraction of the training set kept for calibration
    std::uint64_t seed = 0;
    bool stratify_by_type = false;
};

struct DatasetSplit {
    PlotTable train;
    PlotTable test;
    PlotTable calib;
    PlotTable valid;
};

// train/test split of the table, then calib/valid split of train. Sizes use
// round-half-up on fraction*n. Rows are shuffled by seed over the id-sorted
// order, so the split depends only on table content, not row order.
// Throws if the table has fewer than 10 plots, a fraction is outside (0,1),
// or any of the four parts would be empty.
DatasetSplit split_dataset(const PlotTable& table, const SplitSpec& spec);

std::size_t round_half_up(double v);

} // namespace forestmap
