#include "forestmap/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "forestmap/hull_lp.hpp"
#include "forestmap/parallel.hpp"

namespace forestmap {

const char* to_string(RiskClass c) {
    switch (c) {
        case RiskClass::Inside: return "Inside";
        case RiskClass::Near: return "Near";
        case RiskClass::Far: return "Far";
    }
    return "?";
}

namespace {

// Orthonormal basis of span{vectors} by modified Gram-Schmidt with pivoting
// and one reorthogonalization pass. Vectors whose residual norm falls below
// tol * (largest input norm) are treated as dependent, which resolves rank at
// the geometry tolerance directly on the centered points.
std::vector<std::vector<double>> orthonormal_basis(std::vector<std::vector<double>> vectors,
                                                   double tol) {
    const auto norm_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    double max_norm = 0.0;
    for (const auto& v : vectors) max_norm = std::max(max_norm, norm_of(v));
    std::vector<std::vector<double>> basis;
    if (max_norm == 0.0) return basis;
    const double threshold = tol * max_norm;

    while (true) {
        // Pivot: the remaining vector with the largest residual norm; ties go
        // to the earliest, keeping the result deterministic.
        std::size_t pivot = vectors.size();
        double best = threshold;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const double n = norm_of(vectors[i]);
            if (n > best) {
                best = n;
                pivot = i;
            }
        }
        if (pivot == vectors.size()) break;
        std::vector<double> q = vectors[pivot];
        const double n = norm_of(q);
        for (double& x : q) x /= n;
        basis.push_back(q);
        for (auto& v : vectors) {
            for (int pass = 0; pass < 2; ++pass) {
                double dot = 0.0;
                for (std::size_t k = 0; k < v.size(); ++k) dot += v[k] * q[k];
                for (std::size_t k = 0; k < v.size(); ++k) v[k] -= dot * q[k];
            }
        }
    }
    return basis;
}

double dist(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::sqrt(d2);
}

} // namespace

CalibrationEnvelope CalibrationEnvelope::build(const PlotTable& calib,
                                               const std::vector<std::string>& predictors) {
    if (calib.size() < 2) throw std::invalid_argument("build_envelope: need at least 2 calibration plots");
    const Standardizer standardizer = Standardizer::fit(calib, predictors);
    std::vector<std::vector<double>> raw(calib.size());
    std::vector<std::size_t> indices(predictors.size());
    for (std::size_t j = 0; j < predictors.size(); ++j) indices[j] = calib.feature_index(predictors[j]);
    for (std::size_t i = 0; i < calib.size(); ++i) {
        raw[i].reserve(predictors.size());
        for (std::size_t idx : indices) raw[i].push_back(calib[i].features[idx]);
    }
    return CalibrationEnvelope(standardizer, std::move(raw));
}

CalibrationEnvelope::CalibrationEnvelope(Standardizer standardizer,
                                         std::vector<std::vector<double>> raw_points)
    : standardizer_(std::move(standardizer)), points_(std::move(raw_points)) {
    if (points_.size() < 2) throw std::invalid_argument("envelope: need at least 2 calibration points");
    for (auto& p : points_) {
        if (p.size() != standardizer_.dim()) throw std::invalid_argument("envelope: point dimension mismatch");
        standardizer_.apply_inplace(p);
    }
    finalize();
}

void CalibrationEnvelope::finalize() {
    const std::size_t n = points_.size();
    const std::size_t d = dim();

    // MCD: mean Euclidean distance over all unordered point pairs.
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) sum += dist(points_[i], points_[j]);
    }
    mcd_ = sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);

    centroid_.assign(d, 0.0);
    for (const auto& p : points_) {
        for (std::size_t a = 0; a < d; ++a) centroid_[a] += p[a];
    }
    for (double& c : centroid_) c /= static_cast<double>(n);

    // Rank and affine frame from the centered points themselves; deviations
    // below kGeometryEps relative to the widest spread count as zero.
    std::vector<std::vector<double>> centered(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) centered[i][a] = points_[i][a] - centroid_[a];
    }
    basis_ = orthonormal_basis(std::move(centered), kGeometryEps);
    rank_ = basis_.size();
    degenerate_ = rank_ < d;

    if (degenerate_) {
        reduced_points_.assign(n, std::vector<double>(rank_, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < rank_; ++k) {
                double dot = 0.0;
                for (std::size_t a = 0; a < d; ++a) dot += (points_[i][a] - centroid_[a]) * basis_[k][a];
                reduced_points_[i][k] = dot;
            }
        }
    } else {
        basis_.clear(); // full rank: the frame is only used for degenerate hulls
    }

    bbox_min_ = points_[0];
    bbox_max_ = points_[0];
    for (const auto& p : points_) {
        for (std::size_t a = 0; a < d; ++a) {
            bbox_min_[a] = std::min(bbox_min_[a], p[a]);
            bbox_max_[a] = std::max(bbox_max_[a], p[a]);
        }
    }
    nn_index_ = KdTree(points_);
}

std::vector<double> CalibrationEnvelope::standardized(std::span<const double> raw) const {
    if (raw.size() != dim()) {
        throw std::invalid_argument("envelope: query has " + std::to_string(raw.size()) +
                                    " values, expected " + std::to_string(dim()));
    }
    return standardizer_.apply(raw);
}

bool CalibrationEnvelope::in_hull(std::span<const double> raw) const {
    const std::vector<double> q = standardized(raw);

    for (std::size_t a = 0; a < q.size(); ++a) {
        if (q[a] < bbox_min_[a] - kGeometryEps || q[a] > bbox_max_[a] + kGeometryEps) return false;
    }

    if (!degenerate_) return in_convex_hull_lp(points_, q, kGeometryEps);

    // Degenerate cloud: a query belongs to the hull only if it lies in the
    // affine span (within tolerance); membership is then decided in the
    // reduced coordinates. rank 0 collapses to a point, handled by the bbox
    // test above.
    std::vector<double> reduced(rank_, 0.0);
    double residual2 = 0.0;
    std::vector<double> offset(q.size());
    for (std::size_t a = 0; a < q.size(); ++a) offset[a] = q[a] - centroid_[a];
    std::vector<double> projection(q.size(), 0.0);
    for (std::size_t k = 0; k < rank_; ++k) {
        double dot = 0.0;
        for (std::size_t a = 0; a < q.size(); ++a) dot += offset[a] * basis_[k][a];
        reduced[k] = dot;
        for (std::size_t a = 0; a < q.size(); ++a) projection[a] += dot * basis_[k][a];
    }
    for (std::size_t a = 0; a < q.size(); ++a) {
        const double r = offset[a] - projection[a];
        residual2 += r * r;
    }
    if (std::sqrt(residual2) > kGeometryEps) return false;
    if (rank_ == 0) return true;
    return in_convex_hull_lp(reduced_points_, reduced, kGeometryEps);
}

double CalibrationEnvelope::nearest_calib_distance(std::span<const double> raw) const {
    return nn_index_.nearest_dist(standardized(raw));
}

ExtrapolationClass CalibrationEnvelope::classify(std::span<const double> raw) const {
    ExtrapolationClass out;
    if (in_hull(raw)) {
        out.risk = RiskClass::Inside;
        return out;
    }
    const double d = nearest_calib_distance(raw);
    out.distance = d;
    out.risk = d <= mcd_ ? RiskClass::Near : RiskClass::Far;
    return out;
}

ExtrapolationSummary extrapolation_summary(const CalibrationEnvelope& env,
                                           const std::vector<std::vector<double>>& raw_queries,
                                           int threads) {
    if (raw_queries.empty()) throw std::invalid_argument("extrapolation_summary: no queries");
    const std::size_t n = raw_queries.size();
    std::vector<ExtrapolationClass> classes(n);
    parallel_for(n, threads, [&](std::size_t i) { classes[i] = env.classify(raw_queries[i]); });

    ExtrapolationSummary s;
    s.n = n;
    std::size_t inside = 0, near = 0, far = 0;
    double dist_sum = 0.0;
    for (const auto& c : classes) {
        switch (c.risk) {
            case RiskClass::Inside: ++inside; break;
            case RiskClass::Near: ++near; break;
            case RiskClass::Far: ++far; break;
        }
        if (c.distance) dist_sum += *c.distance;
    }
    s.proportion_inside = static_cast<double>(inside) / static_cast<double>(n);
    s.proportion_near = static_cast<double>(near) / static_cast<double>(n);
    s.proportion_far = static_cast<double>(far) / static_cast<double>(n);
    if (near + far > 0) {
        s.mean_extrapolation_distance = dist_sum / static_cast<double>(near + far);
    }
    return s;
}

nlohmann::json CalibrationEnvelope::to_json() const {
    nlohmann::json doc;
    doc["format"] = "forestmap.envelope";
    doc["version"] = 1;
    doc["predictors"] = standardizer_.names();
    doc["means"] = standardizer_.means();
    doc["sds"] = standardizer_.sds();
    doc["points"] = points_; // standardized
    doc["mcd"] = mcd_;
    doc["hull_degenerate"] = degenerate_;
    return doc;
}

CalibrationEnvelope CalibrationEnvelope::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "forestmap.envelope") {
        throw std::runtime_error("not a forestmap envelope document");
    }
    if (doc.value("version", 0) != 1) {
        throw std::runtime_error("unsupported envelope version");
    }
    CalibrationEnvelope env;
    env.standardizer_ = Standardizer(doc.at("predictors").get<std::vector<std::string>>(),
                                     doc.at("means").get<std::vector<double>>(),
                                     doc.at("sds").get<std::vector<double>>());
    env.points_ = doc.at("points").get<std::vector<std::vector<double>>>();
    if (env.points_.size() < 2) throw std::runtime_error("envelope document holds fewer than 2 points");
    for (const auto& p : env.points_) {
        if (p.size() != env.standardizer_.dim()) {
            throw std::runtime_error("envelope document point dimension mismatch");
        }
    }
    env.finalize();
    return env;
}

} // namespace forestmap
