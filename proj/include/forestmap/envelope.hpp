#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "forestmap/kdtree.hpp"
#include "forestmap/plot.hpp"
#include "forestmap/standardize.hpp"

namespace forestmap {

enum class RiskClass : int { Inside = 0, Near = 1, Far = 2 };

const char* to_string(RiskClass c);

// Hull-exterior queries carry their distance to the nearest calibration plot.
struct ExtrapolationClass {
    RiskClass risk = RiskClass::Inside;
    std::optional<double> distance; // standardized space; set for Near/Far only
};

// Calibration domain of one model: the convex hull of the calibration plots
// in standardized predictor space, the mean calibration distance (MCD, mean
// pairwise distance), and the Near/Far rule for hull-exterior queries.
// Immutable after construction; classification is pure and thread-safe.
class CalibrationEnvelope {
public:
    // Standardizes the named predictors by the calibration set itself.
    static CalibrationEnvelope build(const PlotTable& calib, const std::vector<std::string>& predictors);

    // Points are raw predictor vectors; they are standardized on entry.
    CalibrationEnvelope(Standardizer standardizer, std::vector<std::vector<double>> raw_points);

    std::size_t dim() const { return standardizer_.dim(); }
    std::size_t point_count() const { return points_.size(); }
    const std::vector<std::string>& predictors() const { return standardizer_.names(); }
    const Standardizer& standardizer() const { return standardizer_; }
    const std::vector<std::vector<double>>& points() const { return points_; }
    double mcd() const { return mcd_; }
    bool hull_degenerate() const { return degenerate_; }
    std::size_t affine_rank() const { return rank_; }

    // True iff the standardized query lies in the hull (boundary within the
    // geometry tolerance counts as inside).
    bool in_hull(std::span<const double> raw) const;

    // Euclidean distance in standardized space to the nearest calibration plot.
    double nearest_calib_distance(std::span<const double> raw) const;

    ExtrapolationClass classify(std::span<const double> raw) const;

    nlohmann::json to_json() const;
    static CalibrationEnvelope from_json(const nlohmann::json& doc);

    // Single epsilon for feasibility, rank, and affine-membership decisions.
    static constexpr double kGeometryEps = 1e-9;

private:
    CalibrationEnvelope() = default; // deserialization path
    void finalize();
    std::vector<double> standardized(std::span<const double> raw) const;

    Standardizer standardizer_;
    std::vector<std::vector<double>> points_; // standardized
    double mcd_ = 0.0;
    bool degenerate_ = false;
    std::size_t rank_ = 0;

    // Affine frame of the point cloud: centroid + orthonormal basis of the
    // spanned subspace (columns). Used only when the hull is degenerate.
    std::vector<double> centroid_;
    std::vector<std::vector<double>> basis_; // rank_ vectors of length dim
    std::vector<std::vector<double>> reduced_points_; // rank_-dim coordinates

    std::vector<double> bbox_min_, bbox_max_;
    KdTree nn_index_;
};

struct ExtrapolationSummary {
    std::size_t n = 0;
    double proportion_inside = 0.0;
    double proportion_near = 0.0;
    double proportion_far = 0.0;
    // Mean nearest-calibration distance over hull-exterior queries; unset
    // when every query is inside.
    std::optional<double> mean_extrapolation_distance;
};

ExtrapolationSummary extrapolation_summary(const CalibrationEnvelope& env,
                                           const std::vector<std::vector<double>>& raw_queries,
                                           int threads = 0);

} // namespace forestmap
