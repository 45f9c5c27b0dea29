#pragma once

#include <filesystem>

#include "forestmap/plot.hpp"

namespace forestmap {

// Plot CSV: header `id,x,y,ba,forest_type,<pred1>,...`, UTF-8, '.' decimal
// separator. Every column after the reserved five is a predictor. Malformed
// rows are reported with their line number.
PlotTable read_plots_csv(const std::filesystem::path& path);

// Floats are written at 9 significant digits.
void write_plots_csv(const PlotTable& table, const std::filesystem::path& path);

} // namespace forestmap
