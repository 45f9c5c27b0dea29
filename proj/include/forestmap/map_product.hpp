#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "forestmap/envelope.hpp"
#include "forestmap/forest.hpp"
#include "forestmap/raster_stack.hpp"

namespace forestmap {

// Wall-to-wall prediction plus extrapolation-risk classification. risk_map
// codes: 0 = Inside, 1 = Near, 2 = Far; any nodata input band makes both
// outputs nodata at that pixel.
struct MapBundle {
    RasterGrid ba_map;
    RasterGrid risk_map;
    std::string model_label;
    std::string envelope_label;
    ExtrapolationSummary proportions; // over valid pixels
};

MapBundle predict_raster(const RasterStack& stack, const Forest& forest,
                         const CalibrationEnvelope& env, int threads = 0);

// Plain-text PGM preview: values scale linearly to gray 0..255 between the
// grid min and max; nodata uses the reserved sample 256 (maxval is 256).
void write_pgm_preview(const RasterGrid& grid, const std::filesystem::path& path);

// Plain-text PPM preview for risk codes: fixed 3-color palette plus a
// reserved nodata color.
void write_ppm_risk_preview(const RasterGrid& risk, const std::filesystem::path& path);

// Sidecar provenance manifest (deterministic: no wall-clock fields).
nlohmann::json map_manifest(const MapBundle& bundle, const nlohmann::json& cli_args);

} // namespace forestmap
