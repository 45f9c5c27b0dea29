#include "forestmap/ascii_grid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "forestmap/num_format.hpp"

namespace forestmap {

RasterGrid RasterGrid::filled(std::size_t ncols, std::size_t nrows, double xll, double yll,
                              double cellsize, double fill, double nodata) {
    RasterGrid g;
    g.ncols = ncols;
    g.nrows = nrows;
    g.xllcorner = xll;
    g.yllcorner = yll;
    g.cellsize = cellsize;
    g.nodata_value = nodata;
    g.values.assign(ncols * nrows, fill);
    g.validate();
    return g;
}

void RasterGrid::validate() const {
    if (ncols == 0 || nrows == 0) throw std::invalid_argument("raster dimensions must be positive");
    if (!(cellsize > 0.0)) throw std::invalid_argument("raster cellsize must be > 0");
    if (values.size() != ncols * nrows) {
        throw std::invalid_argument("raster value count " + std::to_string(values.size()) +
                                    " does not match ncols*nrows");
    }
}

std::optional<std::size_t> RasterGrid::cell_index(double x, double y) const {
    const double fx = (x - xllcorner) / cellsize;
    const double fy = (y - yllcorner) / cellsize;
    if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(ncols) || fy > static_cast<double>(nrows)) {
        return std::nullopt;
    }
    std::size_t col = std::min(static_cast<std::size_t>(fx), ncols - 1);
    std::size_t row_from_bottom = std::min(static_cast<std::size_t>(fy), nrows - 1);
    return (nrows - 1 - row_from_bottom) * ncols + col;
}

bool RasterGrid::same_georeference(const RasterGrid& other) const {
    return ncols == other.ncols && nrows == other.nrows && xllcorner == other.xllcorner &&
           yllcorner == other.yllcorner && cellsize == other.cellsize;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_token(const std::string& token, const std::filesystem::path& path, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw std::runtime_error(path.string() + ": cannot parse number '" + token + "' (" + where + ")");
    }
    return v;
}

} // namespace

RasterGrid read_ascii_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open raster '" + path.string() + "'");

    RasterGrid g;
    bool have_ncols = false, have_nrows = false, have_xll = false, have_yll = false,
         have_cell = false, have_nodata = false;

    std::string line;
    std::string pending_data_line;
    std::size_t header_lines = 0;
    while (header_lines < 6 && std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key, value;
        if (!(ls >> key)) continue;
        // First data row ends the header; anything numeric is data.
        double probe = 0.0;
        const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), probe);
        if (ec == std::errc{} && ptr == key.data() + key.size()) {
            pending_data_line = line;
            break;
        }
        if (!(ls >> value)) {
            throw std::runtime_error(path.string() + ": malformed header line '" + line + "'");
        }
        const std::string k = lower(key);
        if (k == "ncols") {
            g.ncols = static_cast<std::size_t>(parse_token(value, path, "ncols"));
            have_ncols = true;
        } else if (k == "nrows") {
            g.nrows = static_cast<std::size_t>(parse_token(value, path, "nrows"));
            have_nrows = true;
        } else if (k == "xllcorner") {
            g.xllcorner = parse_token(value, path, "xllcorner");
            have_xll = true;
        } else if (k == "yllcorner") {
            g.yllcorner = parse_token(value, path, "yllcorner");
            have_yll = true;
        } else if (k == "cellsize") {
            g.cellsize = parse_token(value, path, "cellsize");
            have_cell = true;
        } else if (k == "nodata_value") {
            g.nodata_value = parse_token(value, path, "nodata_value");
            have_nodata = true;
        } else {
            throw std::runtime_error(path.string() + ": unknown header key '" + key + "'");
        }
        ++header_lines;
    }
    if (!(have_ncols && have_nrows && have_xll && have_yll && have_cell && have_nodata)) {
        std::string missing;
        if (!have_ncols) missing += " ncols";
        if (!have_nrows) missing += " nrows";
        if (!have_xll) missing += " xllcorner";
        if (!have_yll) missing += " yllcorner";
        if (!have_cell) missing += " cellsize";
        if (!have_nodata) missing += " nodata_value";
        throw std::runtime_error(path.string() + ": header keys missing:" + missing);
    }

    g.values.reserve(g.ncols * g.nrows);
    std::size_t row = 0;
    const auto consume_row = [&](const std::string& text) {
        if (text.find_first_not_of(" \t\r") == std::string::npos) return;
        std::istringstream ls(text);
        std::string token;
        std::size_t count = 0;
        while (ls >> token) {
            if (count < g.ncols) {
                g.values.push_back(parse_token(token, path, "row " + std::to_string(row)));
            }
            ++count;
        }
        if (count != g.ncols) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + " has " +
                                     std::to_string(count) + " tokens, expected " + std::to_string(g.ncols));
        }
        ++row;
    };
    if (!pending_data_line.empty()) consume_row(pending_data_line);
    while (row < g.nrows && std::getline(in, line)) consume_row(line);
    if (row != g.nrows) {
        throw std::runtime_error(path.string() + ": expected " + std::to_string(g.nrows) +
                                 " data rows, got " + std::to_string(row));
    }
    g.validate();
    return g;
}

void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path) {
    grid.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write raster '" + path.string() + "'");
    out << "ncols " << grid.ncols << '\n';
    out << "nrows " << grid.nrows << '\n';
    out << "xllcorner " << format_double_exact(grid.xllcorner) << '\n';
    out << "yllcorner " << format_double_exact(grid.yllcorner) << '\n';
    out << "cellsize " << format_double_exact(grid.cellsize) << '\n';
    out << "NODATA_value " << format_double_exact(grid.nodata_value) << '\n';
    for (std::size_t r = 0; r < grid.nrows; ++r) {
        for (std::size_t c = 0; c < grid.ncols; ++c) {
            if (c) out << ' ';
            out << format_double_exact(grid.at(r, c));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace forestmap
