#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace forestmap {

// Single-band raster in ESRI ASCII grid layout. values is row-major with row
// 0 the northernmost line, matching file order; yllcorner refers to the grid
// lower-left corner as in the format.
struct RasterGrid {
    std::size_t ncols = 0;
    std::size_t nrows = 0;
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    double cellsize = 0.0; // meters
    double nodata_value = -9999.0;
    std::vector<double> values;

    static RasterGrid filled(std::size_t ncols, std::size_t nrows, double xll, double yll,
                             double cellsize, double fill, double nodata = -9999.0);

    double at(std::size_t row, std::size_t col) const { return values[row * ncols + col]; }
    double& at(std::size_t row, std::size_t col) { return values[row * ncols + col]; }
    bool is_nodata(double v) const { return v == nodata_value; }

    double width() const { return cellsize * static_cast<double>(ncols); }
    double height() const { return cellsize * static_cast<double>(nrows); }

    // Index of the cell containing planar point (x, y); points on the top or
    // right edge fall into the last row/column. nullopt outside the extent.
    std::optional<std::size_t> cell_index(double x, double y) const;

    bool same_georeference(const RasterGrid& other) const;
    void validate() const;
};

// ESRI ASCII grid IO. Header keys are accepted case-insensitively; reading a
// written grid reproduces every value bit-exactly (values are printed with
// shortest round-trip formatting).
RasterGrid read_ascii_grid(const std::filesystem::path& path);
void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path);

} // namespace forestmap
