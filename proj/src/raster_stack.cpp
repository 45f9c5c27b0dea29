#include "forestmap/raster_stack.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>

namespace forestmap {

const RasterGrid& RasterStack::band(const std::string& name) const {
    for (std::size_t i = 0; i < band_names.size(); ++i) {
        if (band_names[i] == name) return bands[i];
    }
    throw std::invalid_argument("raster stack has no band '" + name + "'");
}

bool RasterStack::has_band(const std::string& name) const {
    return std::find(band_names.begin(), band_names.end(), name) != band_names.end();
}

void RasterStack::validate() const {
    if (band_names.size() != bands.size()) throw std::invalid_argument("band name/grid count mismatch");
    forest_type.validate();
    for (std::size_t i = 0; i < bands.size(); ++i) {
        bands[i].validate();
        if (!bands[i].same_georeference(forest_type)) {
            throw std::invalid_argument("band '" + band_names[i] + "' georeference differs from the forest-type band");
        }
    }
    for (double v : forest_type.values) {
        if (forest_type.is_nodata(v)) continue;
        if (v != 1.0 && v != 2.0 && v != 3.0) {
            throw std::invalid_argument("forest-type band holds invalid code " + std::to_string(v));
        }
    }
}

RasterStack read_raster_stack(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("raster stack directory '" + dir.string() + "' does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".asc") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    RasterStack stack;
    bool have_type = false;
    for (const auto& file : files) {
        if (file.stem() == "forest_type") {
            stack.forest_type = read_ascii_grid(file);
            have_type = true;
        } else {
            stack.band_names.push_back(file.stem().string());
            stack.bands.push_back(read_ascii_grid(file));
        }
    }
    if (!have_type) throw std::runtime_error("raster stack '" + dir.string() + "' lacks forest_type.asc");
    if (stack.bands.empty()) throw std::runtime_error("raster stack '" + dir.string() + "' has no predictor bands");
    stack.validate();
    return stack;
}

void write_raster_stack(const RasterStack& stack, const std::filesystem::path& dir) {
    stack.validate();
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < stack.bands.size(); ++i) {
        write_ascii_grid(stack.bands[i], dir / (stack.band_names[i] + ".asc"));
    }
    write_ascii_grid(stack.forest_type, dir / "forest_type.asc");
}

RasterGrid crop_grid(const RasterGrid& grid, double xmin, double ymin, double xmax, double ymax) {
    grid.validate();
    if (!(xmin < xmax) || !(ymin < ymax)) throw std::invalid_argument("crop_grid: empty rectangle");
    if (xmin >= grid.xllcorner + grid.width() || xmax <= grid.xllcorner ||
        ymin >= grid.yllcorner + grid.height() || ymax <= grid.yllcorner) {
        throw std::invalid_argument("crop_grid: rectangle misses the grid");
    }
    const auto clamp_cell = [](double f, std::size_t n) {
        if (f < 0.0) return std::size_t{0};
        return std::min(static_cast<std::size_t>(f), n);
    };
    const std::size_t col0 = clamp_cell(std::floor((xmin - grid.xllcorner) / grid.cellsize), grid.ncols - 1);
    const std::size_t col1 = clamp_cell(std::ceil((xmax - grid.xllcorner) / grid.cellsize), grid.ncols);
    const std::size_t rfb0 = clamp_cell(std::floor((ymin - grid.yllcorner) / grid.cellsize), grid.nrows - 1);
    const std::size_t rfb1 = clamp_cell(std::ceil((ymax - grid.yllcorner) / grid.cellsize), grid.nrows);
    if (col1 <= col0 || rfb1 <= rfb0) throw std::invalid_argument("crop_grid: rectangle misses the grid");

    RasterGrid out;
    out.ncols = col1 - col0;
    out.nrows = rfb1 - rfb0;
    out.cellsize = grid.cellsize;
    out.nodata_value = grid.nodata_value;
    out.xllcorner = grid.xllcorner + static_cast<double>(col0) * grid.cellsize;
    out.yllcorner = grid.yllcorner + static_cast<double>(rfb0) * grid.cellsize;
    out.values.resize(out.ncols * out.nrows);
    for (std::size_t r = 0; r < out.nrows; ++r) {
        // Row r from the top of the crop corresponds to a source row offset.
        const std::size_t src_row = grid.nrows - rfb1 + r;
        for (std::size_t c = 0; c < out.ncols; ++c) {
            out.at(r, c) = grid.at(src_row, col0 + c);
        }
    }
    return out;
}

RasterStack crop_stack(const RasterStack& stack, double xmin, double ymin, double xmax, double ymax) {
    RasterStack out;
    out.band_names = stack.band_names;
    for (const auto& band : stack.bands) out.bands.push_back(crop_grid(band, xmin, ymin, xmax, ymax));
    out.forest_type = crop_grid(stack.forest_type, xmin, ymin, xmax, ymax);
    out.validate();
    return out;
}

} // namespace forestmap
