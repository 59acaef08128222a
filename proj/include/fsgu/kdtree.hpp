#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fsgu/point_cloud.hpp"

namespace fsgu {

/// Exact nearest-neighbor index over a fixed point set. Matches a brute-force
/// scan bit for bit: squared distances use the same expression, equal
/// distances resolve to the lowest point index, and subtrees whose bound ties
/// the current best are still visited so an equal-distance lower index can
/// never be pruned away.
class KdTree3 {
public:
    struct Hit {
        std::size_t index = 0;
        double sq_dist = 0.0;
    };

    explicit KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
        if (points_.empty()) throw std::invalid_argument("KdTree3: empty point set");
        order_.resize(points_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        nodes_.reserve(2 * points_.size() / kLeafSize + 2);
        root_ = build(0, points_.size());
    }

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

    Hit nearest(const Vec3& query) const {
        Hit best{points_.size(), 0.0};
        search(root_, query, best);
        return best;
    }

    /// The k best hits ordered by (squared distance, index). k is clamped to
    /// the tree size.
    std::vector<Hit> knearest(const Vec3& query, std::size_t k) const {
        k = std::min(k, points_.size());
        std::vector<Hit> best;
        best.reserve(k + 1);
        search_k(root_, query, k, best);
        return best;
    }

    static double squared_distance(const Vec3& a, const Vec3& b) {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        const double dz = a.z - b.z;
        return dx * dx + dy * dy + dz * dz;
    }

private:
    static constexpr std::size_t kLeafSize = 8;

    struct Node {
        int axis = -1;              // -1 marks a leaf
        double split = 0.0;
        std::size_t begin = 0, end = 0;
        int left = -1, right = -1;
    };

    int build(std::size_t begin, std::size_t end) {
        Node node;
        node.begin = begin;
        node.end = end;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        if (end - begin <= kLeafSize) return id;

        Vec3 lo = points_[order_[begin]];
        Vec3 hi = lo;
        for (std::size_t i = begin; i < end; ++i) {
            const Vec3& p = points_[order_[i]];
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], p[a]);
                hi[a] = std::max(hi[a], p[a]);
            }
        }
        int axis = 0;
        double extent = hi.x - lo.x;
        if (hi.y - lo.y > extent) {
            axis = 1;
            extent = hi.y - lo.y;
        }
        if (hi.z - lo.z > extent) axis = 2;

        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t a, std::size_t b) {
                             const double ca = points_[a][axis];
                             const double cb = points_[b][axis];
                             if (ca != cb) return ca < cb;
                             return a < b;
                         });
        nodes_[static_cast<std::size_t>(id)].axis = axis;
        nodes_[static_cast<std::size_t>(id)].split = points_[order_[mid]][axis];
        const int left = build(begin, mid);
        const int right = build(mid, end);
        nodes_[static_cast<std::size_t>(id)].left = left;
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    static bool improves(double sq, std::size_t idx, const Hit& best, std::size_t n) {
        if (best.index == n) return true;
        return sq < best.sq_dist || (sq == best.sq_dist && idx < best.index);
    }

    void search(int id, const Vec3& query, Hit& best) const {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t idx = order_[i];
                const double sq = squared_distance(query, points_[idx]);
                if (improves(sq, idx, best, points_.size())) best = {idx, sq};
            }
            return;
        }
        const double diff = query[node.axis] - node.split;
        const int near = diff < 0.0 ? node.left : node.right;
        const int far = diff < 0.0 ? node.right : node.left;
        search(near, query, best);
        if (best.index == points_.size() || diff * diff <= best.sq_dist) search(far, query, best);
    }

    void search_k(int id, const Vec3& query, std::size_t k, std::vector<Hit>& best) const {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        auto hit_less = [](const Hit& a, const Hit& b) {
            if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
            return a.index < b.index;
        };
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t idx = order_[i];
                const Hit h{idx, squared_distance(query, points_[idx])};
                if (best.size() < k) {
                    best.insert(std::upper_bound(best.begin(), best.end(), h, hit_less), h);
                } else if (hit_less(h, best.back())) {
                    best.insert(std::upper_bound(best.begin(), best.end(), h, hit_less), h);
                    best.pop_back();
                }
            }
            return;
        }
        const double diff = query[node.axis] - node.split;
        const int near = diff < 0.0 ? node.left : node.right;
        const int far = diff < 0.0 ? node.right : node.left;
        search_k(near, query, k, best);
        if (best.size() < k || diff * diff <= best.back().sq_dist) search_k(far, query, k, best);
    }

    std::vector<Vec3> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    int root_ = 0;
};

}  // namespace fsgu
