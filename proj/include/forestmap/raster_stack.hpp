#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forestmap/ascii_grid.hpp"
#include "forestmap/plot.hpp"

namespace forestmap {

// Aligned predictor bands plus a forest-type band (codes 1=Broadleaves,
// 2=Mixed, 3=Conifers) over one AOI.
struct RasterStack {
    std::vector<std::string> band_names;
    std::vector<RasterGrid> bands;
    RasterGrid forest_type;

    const RasterGrid& band(const std::string& name) const;
    bool has_band(const std::string& name) const;

    // All bands share georeferencing; type codes are 1/2/3 or nodata.
    void validate() const;

    std::size_t ncols() const { return forest_type.ncols; }
    std::size_t nrows() const { return forest_type.nrows; }
};

// Directory layout: one `<band>.asc` per predictor plus `forest_type.asc`.
// Band names are the file stems, loaded in sorted order.
RasterStack read_raster_stack(const std::filesystem::path& dir);
void write_raster_stack(const RasterStack& stack, const std::filesystem::path& dir);

// Cell-aligned crop of the stack to the cells intersecting the given planar
// rectangle.
RasterGrid crop_grid(const RasterGrid& grid, double xmin, double ymin, double xmax, double ymax);
RasterStack crop_stack(const RasterStack& stack, double xmin, double ymin, double xmax, double ymax);

} // namespace forestmap
