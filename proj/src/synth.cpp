#include "forestmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "forestmap/num_format.hpp"
#include "forestmap/standardize.hpp"
#include "forestmap/parallel.hpp"
#include "forestmap/rng.hpp"

namespace forestmap {

void SynthConfig::validate() const {
    if (!(aoi_width_km > 0.0) || !(aoi_height_km > 0.0)) throw std::invalid_argument("AOI extent must be positive");
    if (plots_per_subforest == 0) throw std::invalid_argument("plots_per_subforest must be positive");
    if (n_subforests == 0) throw std::invalid_argument("n_subforests must be positive");
    if (!(cellsize_m > 0.0)) throw std::invalid_argument("cellsize must be positive");
    if (noise_sd < 0.0) throw std::invalid_argument("noise sd must be >= 0");
    if (covariate_shift < 0.0) throw std::invalid_argument("covariate shift must be >= 0");
}

BlockLayout BlockLayout::make(double aoi_w_m, double aoi_h_m, std::size_t n_blocks) {
    BlockLayout layout;
    layout.nbx = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_blocks))));
    layout.nby = (n_blocks + layout.nbx - 1) / layout.nbx;
    layout.block_w = aoi_w_m / static_cast<double>(layout.nbx);
    layout.block_h = aoi_h_m / static_cast<double>(layout.nby);
    return layout;
}

std::size_t BlockLayout::block_of(double x, double y) const {
    const std::size_t bx = std::min(static_cast<std::size_t>(x / block_w), nbx - 1);
    const std::size_t by = std::min(static_cast<std::size_t>(y / block_h), nby - 1);
    return by * nbx + bx;
}

namespace {

struct Bump {
    double cx, cy, sigma, amp;
};

// One smooth field: Gaussian bump sum rescaled to an exact AOI mean and
// standard deviation, plus a per-block additive shift that creates the
// covariate differences between sub-forests. The empirical normalization pins
// the response distribution for every seed.
struct Field {
    double base = 0.0;
    double sd_target = 1.0;
    double raw_mean = 0.0;
    double raw_sd = 1.0;
    std::vector<Bump> bumps;
    std::vector<double> block_shift; // one entry per layout block

    double raw(double x, double y) const {
        double v = 0.0;
        for (const Bump& b : bumps) {
            const double dx = x - b.cx;
            const double dy = y - b.cy;
            v += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
        }
        return v;
    }

    double finalize(double raw_value, std::size_t block) const {
        return base + sd_target * (raw_value - raw_mean) / raw_sd + block_shift[block];
    }
};

struct PredictorSpec {
    const char* name;
    double base;
    double sd;       // AOI-wide standard deviation after normalization
    bool unit_clamp; // clamp to [0,1] (ratio-like predictors)
};

// Default predictor set, loosely modelled on canopy-metric and SWIR-band
// value ranges.
constexpr PredictorSpec kPredictors[] = {
    {"vol_in", 150.0, 45.0, false},  {"gap_ratio", 0.42, 0.13, true},
    {"z_mean", 17.0, 4.0, false},    {"zq5", 2.5, 0.8, false},
    {"zq30", 9.0, 2.5, false},       {"b11", 1350.0, 200.0, false},
    {"b12", 900.0, 150.0, false},    {"canopy_cover", 0.70, 0.12, true},
};
constexpr std::size_t kNumPredictors = sizeof(kPredictors) / sizeof(kPredictors[0]);
constexpr std::size_t kBumpsPerField = 10;
// Block shifts in units of the predictor's AOI standard deviation.
constexpr double kShiftFraction = 0.9;

// Response surface: monotone increasing in vol_in, decreasing in gap_ratio,
// plus a forest-type offset. Coefficients tuned so default-config plot Ba
// means land in [20, 32] m²/ha with sd in [8, 14].
constexpr double kBaIntercept = 11.0;
constexpr double kBaVolCoef = 0.16;
constexpr double kBaGapCoef = -22.0;
constexpr double kTypeOffset[3] = {-3.5, 0.0, 4.5}; // Broadleaves, Mixed, Conifers

double truth_ba(double vol_in, double gap_ratio, int type_code) {
    const double v = kBaIntercept + kBaVolCoef * vol_in + kBaGapCoef * gap_ratio +
                     kTypeOffset[type_code - 1];
    return std::max(0.0, v);
}

Field make_field(Rng& rng, const PredictorSpec& spec, double aoi_w, double aoi_h,
                 const BlockLayout& layout, std::size_t n_subforests, double shift_scale) {
    Field f;
    f.base = spec.base;
    f.sd_target = spec.sd;
    const double sigma_lo = 0.04 * std::min(aoi_w, aoi_h);
    const double sigma_hi = 0.18 * std::min(aoi_w, aoi_h);
    for (std::size_t b = 0; b < kBumpsPerField; ++b) {
        Bump bump;
        bump.cx = rng.uniform(0.0, aoi_w);
        bump.cy = rng.uniform(0.0, aoi_h);
        bump.sigma = rng.uniform(sigma_lo, sigma_hi);
        bump.amp = rng.uniform(-1.0, 1.0);
        f.bumps.push_back(bump);
    }
    // Shifts have a guaranteed minimum magnitude so sub-forests always occupy
    // noticeably different parts of the predictor space.
    f.block_shift.assign(layout.nbx * layout.nby, 0.0);
    for (std::size_t s = 0; s < f.block_shift.size(); ++s) {
        if (s >= n_subforests) continue; // background block: unshifted
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double magnitude = rng.uniform(0.6, 1.0);
        f.block_shift[s] = shift_scale * kShiftFraction * spec.sd * sign * magnitude;
    }
    return f;
}

} // namespace

SynthDataset synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    const double aoi_w = cfg.aoi_width_km * 1000.0;
    const double aoi_h = cfg.aoi_height_km * 1000.0;
    const auto ncols = static_cast<std::size_t>(std::ceil(aoi_w / cfg.cellsize_m));
    const auto nrows = static_cast<std::size_t>(std::ceil(aoi_h / cfg.cellsize_m));
    const BlockLayout layout = BlockLayout::make(aoi_w, aoi_h, cfg.n_subforests);

    // Independent streams per concern so adding plots never perturbs rasters.
    Rng field_rng(derive_seed(cfg.seed, {1}));
    std::vector<Field> fields;
    fields.reserve(kNumPredictors);
    for (std::size_t p = 0; p < kNumPredictors; ++p) {
        fields.push_back(make_field(field_rng, kPredictors[p], aoi_w, aoi_h, layout,
                                    cfg.n_subforests, cfg.covariate_shift));
    }
    // Forest-type field: unshifted bumps, thresholded into three classes.
    Field type_field;
    {
        Rng type_rng(derive_seed(cfg.seed, {2}));
        PredictorSpec spec{"type", 0.0, 1.0, false};
        type_field = make_field(type_rng, spec, aoi_w, aoi_h, layout, 0, 0.0);
    }

    SynthDataset out;
    out.stack.band_names.reserve(kNumPredictors);
    out.stack.bands.reserve(kNumPredictors);
    for (std::size_t p = 0; p < kNumPredictors; ++p) {
        out.stack.band_names.emplace_back(kPredictors[p].name);
        out.stack.bands.push_back(RasterGrid::filled(ncols, nrows, 0.0, 0.0, cfg.cellsize_m, 0.0));
    }
    out.stack.forest_type = RasterGrid::filled(ncols, nrows, 0.0, 0.0, cfg.cellsize_m, 0.0);
    out.truth = RasterGrid::filled(ncols, nrows, 0.0, 0.0, cfg.cellsize_m, 0.0);

    const auto cell_xy = [&](std::size_t r, std::size_t c) {
        return std::pair<double, double>{(static_cast<double>(c) + 0.5) * cfg.cellsize_m,
                                         (static_cast<double>(nrows - 1 - r) + 0.5) * cfg.cellsize_m};
    };

    // Pass 1: raw bump sums per band; pass 2: normalize to the target AOI
    // mean and sd, add block shift, clamp, quantize.
    for (std::size_t p = 0; p < kNumPredictors; ++p) {
        RasterGrid& grid = out.stack.bands[p];
        parallel_for(nrows, 0, [&](std::size_t r) {
            for (std::size_t c = 0; c < ncols; ++c) {
                const auto [x, y] = cell_xy(r, c);
                grid.at(r, c) = fields[p].raw(x, y);
            }
        });
        fields[p].raw_mean = mean_of(grid.values);
        fields[p].raw_sd = std::max(sd_of(grid.values), 1e-12);
        parallel_for(nrows, 0, [&](std::size_t r) {
            for (std::size_t c = 0; c < ncols; ++c) {
                const auto [x, y] = cell_xy(r, c);
                double v = fields[p].finalize(grid.at(r, c), layout.block_of(x, y));
                if (kPredictors[p].unit_clamp) v = std::clamp(v, 0.0, 1.0);
                grid.at(r, c) = quantize_sig9(v);
            }
        });
    }

    // Raw type-field values, thresholded at its empirical terciles below.
    std::vector<double> type_raw(ncols * nrows);
    parallel_for(nrows, 0, [&](std::size_t r) {
        for (std::size_t c = 0; c < ncols; ++c) {
            const auto [x, y] = cell_xy(r, c);
            type_raw[r * ncols + c] = type_field.raw(x, y);
        }
    });

    std::vector<double> sorted_type = type_raw;
    std::sort(sorted_type.begin(), sorted_type.end());
    const double t1 = sorted_type[sorted_type.size() / 3];
    const double t2 = sorted_type[(2 * sorted_type.size()) / 3];
    const std::size_t vol_band = 0, gap_band = 1;
    for (std::size_t i = 0; i < type_raw.size(); ++i) {
        const int code = type_raw[i] < t1 ? 1 : (type_raw[i] < t2 ? 2 : 3);
        out.stack.forest_type.values[i] = static_cast<double>(code);
        out.truth.values[i] = quantize_sig9(
            truth_ba(out.stack.bands[vol_band].values[i], out.stack.bands[gap_band].values[i], code));
    }

    // Plot networks: features and noiseless Ba are sampled from the rasters,
    // so tables and maps are exactly consistent.
    const std::vector<std::string> schema(out.stack.band_names.begin(), out.stack.band_names.end());
    const auto sample_plot = [&](Rng& rng, const std::string& id, double x0, double y0, double w,
                                 double h) {
        Plot p;
        p.id = id;
        p.x = quantize_sig9(x0 + rng.uniform() * w);
        p.y = quantize_sig9(y0 + rng.uniform() * h);
        const std::size_t cell = *out.truth.cell_index(p.x, p.y);
        p.features.reserve(kNumPredictors);
        for (std::size_t b = 0; b < kNumPredictors; ++b) p.features.push_back(out.stack.bands[b].values[cell]);
        p.forest_type = forest_type_from_code(static_cast<int>(out.stack.forest_type.values[cell]));
        const double noise = cfg.noise_sd > 0.0 ? rng.normal(0.0, cfg.noise_sd) : 0.0;
        p.ba = quantize_sig9(std::max(0.0, out.truth.values[cell] + noise));
        return p;
    };

    char idbuf[32];
    for (std::size_t s = 0; s < cfg.n_subforests; ++s) {
        Rng rng(derive_seed(cfg.seed, {3, s}));
        PlotTable table("forest" + std::to_string(s + 1), schema);
        table.reserve(cfg.plots_per_subforest);
        const double x0 = static_cast<double>(s % layout.nbx) * layout.block_w;
        const double y0 = static_cast<double>(s / layout.nbx) * layout.block_h;
        for (std::size_t i = 0; i < cfg.plots_per_subforest; ++i) {
            std::snprintf(idbuf, sizeof(idbuf), "F%zu-%04zu", s + 1, i);
            table.add(sample_plot(rng, idbuf, x0, y0, layout.block_w, layout.block_h));
        }
        out.local_tables.push_back(std::move(table));
    }
    {
        Rng rng(derive_seed(cfg.seed, {4}));
        const std::size_t n_regional = cfg.plots_per_subforest * cfg.n_subforests;
        PlotTable table("regional", schema);
        table.reserve(n_regional);
        for (std::size_t i = 0; i < n_regional; ++i) {
            std::snprintf(idbuf, sizeof(idbuf), "R-%04zu", i);
            table.add(sample_plot(rng, idbuf, 0.0, 0.0, aoi_w, aoi_h));
        }
        out.regional_table = std::move(table);
    }
    out.stack.validate();
    return out;
}

} // namespace forestmap
