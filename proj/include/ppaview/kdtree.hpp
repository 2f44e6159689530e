#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "ppaview/geometry.hpp"

namespace ppaview {

/// Exact 3-D k-d tree over a fixed point set (indices refer to the input
/// vector, which must outlive the tree).
class KdTree {
public:
    struct Neighbor {
        std::size_t index{0};
        double squared_distance{std::numeric_limits<double>::infinity()};
    };

    explicit KdTree(const std::vector<Vec3>& points);

    bool empty() const { return order_.empty(); }
    /// Ties on distance resolve to the lower input index.
    Neighbor nearest(const Vec3& query) const;
    /// Indices of all points within `radius` (inclusive), ascending.
    std::vector<std::size_t> radius_search(const Vec3& query, double radius) const;
    /// Indices of all points inside the axis-aligned box, ascending.
    std::vector<std::size_t> box_search(const Vec3& lo, const Vec3& hi) const;

private:
    struct Node {
        std::size_t begin, end;  // range into order_
        int axis{-1};            // -1 for leaves
        double split{0};
        int left{-1}, right{-1};
        Vec3 lo, hi;
    };

    int build(std::size_t begin, std::size_t end);
    void nearest_impl(int node, const Vec3& q, Neighbor& best) const;
    void box_impl(int node, const Vec3& lo, const Vec3& hi, std::vector<std::size_t>& out) const;

    const std::vector<Vec3>* points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace ppaview
