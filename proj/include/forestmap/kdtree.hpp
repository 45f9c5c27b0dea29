#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace forestmap {

// Exact nearest-neighbour index over a fixed point set. Splits on the axis of
// widest spread at the median, with (coordinate, index) ordering so the
// structure is deterministic. Queries prune on squared axis distance and
// return exactly the brute-force minimum.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(const std::vector<std::vector<double>>& points) {
        if (points.empty()) throw std::invalid_argument("KdTree: empty point set");
        dim_ = points[0].size();
        points_ = points;
        for (const auto& p : points_) {
            if (p.size() != dim_) throw std::invalid_argument("KdTree: ragged point set");
        }
        std::vector<std::size_t> idx(points_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        nodes_.reserve(2 * points_.size());
        root_ = build(idx, 0, idx.size());
    }

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return dim_; }

    // Squared distance to the closest indexed point.
    double nearest_dist2(std::span<const double> query) const {
        if (query.size() != dim_) throw std::invalid_argument("KdTree: query dimension mismatch");
        double best = std::numeric_limits<double>::infinity();
        search(root_, query, best);
        return best;
    }

    double nearest_dist(std::span<const double> query) const { return std::sqrt(nearest_dist2(query)); }

private:
    struct Node {
        int left = -1;
        int right = -1;
        std::size_t axis = 0;
        double split = 0.0;
        // leaf payload: range in order_
        std::size_t begin = 0;
        std::size_t end = 0;
    };

    static constexpr std::size_t kLeafSize = 8;

    int build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
        Node node;
        if (end - begin <= kLeafSize) {
            node.begin = order_.size();
            for (std::size_t i = begin; i < end; ++i) order_.push_back(idx[i]);
            node.end = order_.size();
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size() - 1);
        }
        // Widest-spread axis; ties resolve to the lowest axis.
        std::size_t axis = 0;
        double best_spread = -1.0;
        for (std::size_t a = 0; a < dim_; ++a) {
            double lo = points_[idx[begin]][a], hi = lo;
            for (std::size_t i = begin; i < end; ++i) {
                lo = std::min(lo, points_[idx[i]][a]);
                hi = std::max(hi, points_[idx[i]][a]);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                axis = a;
            }
        }
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                         idx.begin() + static_cast<std::ptrdiff_t>(mid),
                         idx.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t a, std::size_t b) {
                             const double va = points_[a][axis], vb = points_[b][axis];
                             return va < vb || (va == vb && a < b);
                         });
        node.axis = axis;
        node.split = points_[idx[mid]][axis];
        nodes_.push_back(node);
        const auto self = static_cast<int>(nodes_.size() - 1);
        const int left = build(idx, begin, mid);
        const int right = build(idx, mid, end);
        nodes_[static_cast<std::size_t>(self)].left = left;
        nodes_[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    void search(int node_id, std::span<const double> q, double& best) const {
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        if (node.left < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const auto& p = points_[order_[i]];
                double d2 = 0.0;
                for (std::size_t a = 0; a < dim_; ++a) {
                    const double d = q[a] - p[a];
                    d2 += d * d;
                }
                best = std::min(best, d2);
            }
            return;
        }
        const double diff = q[node.axis] - node.split;
        const int near = diff < 0.0 ? node.left : node.right;
        const int far = diff < 0.0 ? node.right : node.left;
        search(near, q, best);
        if (diff * diff < best) search(far, q, best);
    }

    std::size_t dim_ = 0;
    std::vector<std::vector<double>> points_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> order_;
    int root_ = -1;
};

} // namespace forestmap
