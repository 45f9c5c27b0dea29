#include <doctest.h>

#include <cmath>

#include "forestmap/envelope.hpp"
#include "forestmap/hull_lp.hpp"
#include "forestmap/kdtree.hpp"
#include "forestmap/rng.hpp"
#include "test_util.hpp"

using namespace forestmap;

namespace {

CalibrationEnvelope raw_envelope(std::vector<std::vector<double>> points) {
    const std::size_t d = points.at(0).size();
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("v" + std::to_string(j + 1));
    return CalibrationEnvelope(Standardizer::identity(names), std::move(points));
}

} // namespace

TEST_CASE("MCD hand instances") {
    // 3-4-5 triangle: pairwise distances 3, 4, 5.
    const auto env = raw_envelope({{0, 0}, {3, 0}, {0, 4}});
    CHECK(env.mcd() == 4.0);
    CHECK(!env.hull_degenerate());

    const auto two = raw_envelope({{0, 0}, {3, 4}});
    CHECK(two.mcd() == 5.0);
    CHECK(two.hull_degenerate()); // rank 1 < 2

    const auto collinear = raw_envelope({{0, 0}, {1, 1}, {2, 2}});
    CHECK(collinear.hull_degenerate());
    CHECK(collinear.affine_rank() == 1);
}

TEST_CASE("triangle membership: interior, exterior, vertex") {
    const auto env = raw_envelope({{0, 0}, {1, 0}, {0, 1}});
    CHECK(env.in_hull(std::vector<double>{0.25, 0.25}));
    CHECK(!env.in_hull(std::vector<double>{1.0, 1.0}));
    CHECK(env.in_hull(std::vector<double>{0.0, 0.0})); // boundary counts as inside
    CHECK(env.in_hull(std::vector<double>{0.5, 0.5})); // edge midpoint
    CHECK_THROWS(env.in_hull(std::vector<double>{0.5}));
}

TEST_CASE("nearest calibration distance, brute force and kd tree agree") {
    const auto env = raw_envelope({{0, 0}, {10, 0}});
    CHECK(env.nearest_calib_distance(std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK(env.nearest_calib_distance(std::vector<double>{4.0, 3.0}) == 5.0);

    Rng rng(51);
    std::vector<std::vector<double>> points(200, std::vector<double>(4));
    for (auto& p : points) {
        for (double& v : p) v = rng.normal(0.0, 2.0);
    }
    const KdTree tree(points);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> q(4);
        for (double& v : q) v = rng.uniform(-6.0, 6.0);
        CHECK(tree.nearest_dist(q) == doctest::Approx(testutil::brute_force_nearest(points, q)).epsilon(1e-12));
    }
}

TEST_CASE("classify: inside, near at exactly MCD, far") {
    const auto env = raw_envelope({{0, 0}, {3, 0}, {0, 4}});
    REQUIRE(env.mcd() == 4.0);

    CHECK(env.classify(std::vector<double>{0.5, 0.5}).risk == RiskClass::Inside);
    CHECK(!env.classify(std::vector<double>{0.5, 0.5}).distance.has_value());

    // (-4, 0): outside, nearest vertex (0,0) at distance exactly MCD.
    const auto near = env.classify(std::vector<double>{-4.0, 0.0});
    CHECK(near.risk == RiskClass::Near);
    CHECK(*near.distance == 4.0);

    const auto far = env.classify(std::vector<double>{-40.0, 0.0});
    CHECK(far.risk == RiskClass::Far);
    CHECK(*far.distance == 40.0);
}

TEST_CASE("LP agrees with the exact 2D polygon oracle") {
    Rng rng(52);
    std::size_t checked = 0;
    for (int instance = 0; instance < 200; ++instance) {
        const std::size_t n = 3 + rng.uniform_int(6);
        std::vector<std::vector<double>> pts(n, std::vector<double>(2));
        std::vector<std::pair<double, double>> pts2d;
        for (auto& p : pts) {
            p[0] = rng.uniform(-2.0, 2.0);
            p[1] = rng.uniform(-2.0, 2.0);
            pts2d.emplace_back(p[0], p[1]);
        }
        const auto hull = testutil::convex_hull_2d(pts2d);
        for (int q = 0; q < 10; ++q) {
            const double x = rng.uniform(-3.0, 3.0);
            const double y = rng.uniform(-3.0, 3.0);
            const bool oracle = testutil::point_in_polygon_2d(hull, x, y);
            const bool lp = in_convex_hull_lp(pts, std::vector<double>{x, y});
            CHECK(lp == oracle);
            ++checked;
        }
    }
    CHECK(checked == 2000);
}

TEST_CASE("membership certificates in 4D: convex combinations in, displaced out") {
    Rng rng(53);
    std::vector<std::vector<double>> pts(40, std::vector<double>(4));
    std::vector<double> centroid(4, 0.0);
    for (auto& p : pts) {
        for (std::size_t j = 0; j < 4; ++j) {
            p[j] = rng.normal(0.0, 1.5);
            centroid[j] += p[j] / 40.0;
        }
    }
    double radius = 0.0;
    for (const auto& p : pts) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < 4; ++j) d2 += (p[j] - centroid[j]) * (p[j] - centroid[j]);
        radius = std::max(radius, std::sqrt(d2));
    }
    for (int rep = 0; rep < 100; ++rep) {
        // Random convex combination.
        std::vector<double> w(pts.size());
        double sum = 0.0;
        for (double& v : w) {
            v = -std::log(1.0 - rng.uniform());
            sum += v;
        }
        std::vector<double> q(4, 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = 0; j < 4; ++j) q[j] += w[i] / sum * pts[i][j];
        }
        CHECK(in_convex_hull_lp(pts, q));

        // Displacement beyond the farthest vertex.
        std::vector<double> dir(4);
        double norm = 0.0;
        for (double& v : dir) {
            v = rng.normal(0.0, 1.0);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        std::vector<double> far(4);
        for (std::size_t j = 0; j < 4; ++j) far[j] = centroid[j] + dir[j] / norm * (radius + 0.5);
        CHECK(!in_convex_hull_lp(pts, far));
    }
}

TEST_CASE("hull membership is invariant under affine maps") {
    Rng rng(54);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::vector<double>> pts(8, std::vector<double>(2));
        for (auto& p : pts) {
            p[0] = rng.uniform(-1.0, 1.0);
            p[1] = rng.uniform(-1.0, 1.0);
        }
        // Random well-conditioned 2x2 map (determinant bounded away from 0).
        double a, b, c, d;
        do {
            a = rng.uniform(-2.0, 2.0);
            b = rng.uniform(-2.0, 2.0);
            c = rng.uniform(-2.0, 2.0);
            d = rng.uniform(-2.0, 2.0);
        } while (std::abs(a * d - b * c) < 0.2);
        const double tx = rng.uniform(-5.0, 5.0), ty = rng.uniform(-5.0, 5.0);

        auto apply = [&](const std::vector<double>& p) {
            return std::vector<double>{a * p[0] + b * p[1] + tx, c * p[0] + d * p[1] + ty};
        };
        std::vector<std::vector<double>> mapped;
        for (const auto& p : pts) mapped.push_back(apply(p));

        for (int q = 0; q < 10; ++q) {
            const std::vector<double> query = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
            CHECK(in_convex_hull_lp(pts, query) == in_convex_hull_lp(mapped, apply(query)));
        }
    }
}

TEST_CASE("hull contains its generators and their midpoints") {
    Rng rng(55);
    std::vector<std::vector<double>> pts(15, std::vector<double>(3));
    for (auto& p : pts) {
        for (double& v : p) v = rng.normal(0.0, 1.0);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(in_convex_hull_lp(pts, pts[i]));
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            std::vector<double> mid(3);
            for (std::size_t k = 0; k < 3; ++k) mid[k] = (pts[i][k] + pts[j][k]) / 2.0;
            CHECK(in_convex_hull_lp(pts, mid));
        }
    }
}

TEST_CASE("classification is monotone along outward face normals") {
    // Unit square with boundary + interior points.
    std::vector<std::vector<double>> pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    Rng rng(56);
    for (int i = 0; i < 20; ++i) pts.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    const auto env = raw_envelope(pts);

    const std::vector<std::pair<std::vector<double>, std::vector<double>>> rays = {
        {{0.5, 1.0}, {0.0, 1.0}},  // top edge, outward +y
        {{1.0, 0.5}, {1.0, 0.0}},  // right edge, outward +x
        {{0.5, 0.0}, {0.0, -1.0}}, // bottom edge
        {{0.0, 0.5}, {-1.0, 0.0}}, // left edge
    };
    for (const auto& [origin, normal] : rays) {
        bool seen_far = false;
        for (double t = 0.05; t < 30.0; t *= 1.6) {
            const std::vector<double> q = {origin[0] + t * normal[0], origin[1] + t * normal[1]};
            const auto cls = env.classify(q);
            CHECK(cls.risk != RiskClass::Inside);
            if (seen_far) CHECK(cls.risk == RiskClass::Far);
            seen_far = seen_far || cls.risk == RiskClass::Far;
        }
        CHECK(seen_far);
    }
}

TEST_CASE("degenerate envelopes classify through the affine subspace") {
    // Points on the line y = x; envelope is rank 1.
    const auto env = raw_envelope({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    REQUIRE(env.hull_degenerate());

    // In the affine span and within the segment: inside.
    CHECK(env.classify(std::vector<double>{1.5, 1.5}).risk == RiskClass::Inside);
    // In the affine span but beyond the segment: exterior, distance rule.
    const auto beyond = env.classify(std::vector<double>{4.0, 4.0});
    CHECK(beyond.risk != RiskClass::Inside);
    CHECK(*beyond.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // Off the line: exterior even though between endpoints.
    const auto off = env.classify(std::vector<double>{1.6, 1.4});
    CHECK(off.risk != RiskClass::Inside);
}

TEST_CASE("extrapolation summary: proportions and geometric oracle") {
    // Dense cloud on the unit square, corners included: the hull is the square.
    std::vector<std::vector<double>> pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    Rng rng(57);
    for (int i = 0; i < 60; ++i) pts.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    const auto env = raw_envelope(pts);

    // Queries equal to the calibration points themselves: all inside.
    const auto self_summary = extrapolation_summary(env, pts);
    CHECK(self_summary.proportion_inside == 1.0);
    CHECK(self_summary.proportion_far == 0.0);
    CHECK(!self_summary.mean_extrapolation_distance.has_value());

    // Uniform queries on [-1,2]^2: agreement with the square-membership oracle
    // per query, proportions summing to one.
    std::vector<std::vector<double>> queries;
    std::size_t oracle_exterior = 0;
    for (int i = 0; i < 3000; ++i) {
        const double x = rng.uniform(-1.0, 2.0);
        const double y = rng.uniform(-1.0, 2.0);
        queries.push_back({x, y});
        if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) ++oracle_exterior;
    }
    const auto summary = extrapolation_summary(env, queries);
    const double exterior = summary.proportion_near + summary.proportion_far;
    CHECK(summary.proportion_inside + exterior == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exterior ==
          doctest::Approx(static_cast<double>(oracle_exterior) / 3000.0).epsilon(0.0).scale(1.0).epsilon(1e-12));
    // And the MC estimate itself sits near the analytic 8/9.
    CHECK(std::abs(exterior - 8.0 / 9.0) < 0.02);
    CHECK(summary.mean_extrapolation_distance.has_value());
}

TEST_CASE("thinning a cloud can only shrink the hull; adding points only grows it") {
    Rng rng(58);
    std::vector<std::vector<double>> full(40, std::vector<double>(3));
    for (auto& p : full) {
        for (double& v : p) v = rng.normal(0.0, 1.0);
    }
    std::vector<std::vector<double>> thinned(full.begin(), full.begin() + 15);

    for (int rep = 0; rep < 200; ++rep) {
        // Random convex combination of the thinned subset.
        std::vector<double> w(thinned.size());
        double sum = 0.0;
        for (double& v : w) {
            v = rng.uniform();
            sum += v;
        }
        std::vector<double> q(3, 0.0);
        for (std::size_t i = 0; i < thinned.size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) q[k] += w[i] / sum * thinned[i][k];
        }
        CHECK(in_convex_hull_lp(thinned, q));
        CHECK(in_convex_hull_lp(full, q)); // superset contains the subset hull
    }
}

TEST_CASE("envelope json round trip preserves classification bit-exactly") {
    const auto table = testutil::make_table(
        60, 4, 59, [](const std::vector<double>& f, ForestType, Rng&) { return 25.0 + f[0]; });
    const auto env = CalibrationEnvelope::build(table, {"f1", "f2", "f3"});
    const std::string text = env.to_json().dump();
    const auto back = CalibrationEnvelope::from_json(nlohmann::json::parse(text));

    CHECK(back.mcd() == env.mcd());
    CHECK(back.predictors() == env.predictors());
    Rng rng(60);
    for (int i = 0; i < 500; ++i) {
        const std::vector<double> q = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto a = env.classify(q);
        const auto b = back.classify(q);
        CHECK(a.risk == b.risk);
        CHECK(a.distance.has_value() == b.distance.has_value());
        if (a.distance) CHECK(*a.distance == *b.distance);
    }
}

TEST_CASE("build_envelope validates inputs") {
    const auto table = testutil::make_table(
        20, 3, 61, [](const std::vector<double>&, ForestType, Rng& rng) { return rng.uniform(10.0, 30.0); });
    CHECK_THROWS(CalibrationEnvelope::build(table, {"f1", "nope"}));

    PlotTable single("s", {"a"});
    Plot p;
    p.id = "only";
    p.features = {1.0};
    single.add(p);
    CHECK_THROWS(CalibrationEnvelope::build(single, {"a"}));
}

TEST_CASE("LP matches the 2D oracle on clustered and collinear-heavy clouds") {
    Rng rng(62);
    for (int instance = 0; instance < 150; ++instance) {
        // Clustered points with deliberate duplicates and near-collinear runs.
        const std::size_t n = 4 + rng.uniform_int(20);
        std::vector<std::vector<double>> pts;
        std::vector<std::pair<double, double>> pts2d;
        const double cx = rng.uniform(-1.0, 1.0), cy = rng.uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            double x, y;
            const double kind = rng.uniform();
            if (kind < 0.3 && !pts.empty()) {
                x = pts.back()[0]; // exact duplicate
                y = pts.back()[1];
            } else if (kind < 0.6) {
                const double t = rng.uniform(-1.0, 1.0);
                x = cx + t; // points along a line
                y = cy + 0.5 * t;
            } else {
                x = cx + rng.normal(0.0, 0.3);
                y = cy + rng.normal(0.0, 0.3);
            }
            pts.push_back({x, y});
            pts2d.emplace_back(x, y);
        }
        const auto hull = testutil::convex_hull_2d(pts2d);
        if (hull.size() < 3) continue; // oracle handles only full-dimensional hulls robustly
        for (int q = 0; q < 12; ++q) {
            const double x = cx + rng.uniform(-2.0, 2.0);
            const double y = cy + rng.uniform(-2.0, 2.0);
            CHECK(in_convex_hull_lp(pts, std::vector<double>{x, y}) ==
                  testutil::point_in_polygon_2d(hull, x, y));
        }
    }
}

TEST_CASE("fewer points than dimensions still classifies sensibly") {
    // 3 points in 5D span at most a plane: degenerate envelope.
    Rng rng(63);
    std::vector<std::vector<double>> pts(3, std::vector<double>(5));
    for (auto& p : pts) {
        for (double& v : p) v = rng.normal(0.0, 1.0);
    }
    std::vector<std::string> names;
    for (int j = 0; j < 5; ++j) names.push_back("v" + std::to_string(j));
    const CalibrationEnvelope env(Standardizer::identity(names), pts);
    CHECK(env.hull_degenerate());
    CHECK(env.affine_rank() <= 2);

    // The generators themselves are inside; their centroid too.
    std::vector<double> centroid(5, 0.0);
    for (const auto& p : pts) {
        CHECK(env.classify(p).risk == RiskClass::Inside);
        for (int j = 0; j < 5; ++j) centroid[static_cast<std::size_t>(j)] += p[static_cast<std::size_t>(j)] / 3.0;
    }
    CHECK(env.classify(centroid).risk == RiskClass::Inside);

    // A point off the affine span is exterior with a positive distance.
    std::vector<double> off = centroid;
    off[4] += 10.0;
    const auto cls = env.classify(off);
    CHECK(cls.risk != RiskClass::Inside);
    CHECK(*cls.distance > 0.0);
}
