#include "ppaview/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace ppaview {

namespace {
constexpr std::size_t kLeafSize = 12;

double box_distance_sq(const Vec3& q, const Vec3& lo, const Vec3& hi) {
    double d = 0;
    for (int k = 0; k < 3; ++k) {
        const double e = std::max({lo[k] - q[k], 0.0, q[k] - hi[k]});
        d += e * e;
    }
    return d;
}
}  // namespace

KdTree::KdTree(const std::vector<Vec3>& points) : points_(&points), order_(points.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!order_.empty()) {
        nodes_.reserve(2 * points.size() / kLeafSize + 2);
        build(0, order_.size());
    }
}

int KdTree::build(std::size_t begin, std::size_t end) {
    const auto& pts = *points_;
    Node node{begin, end, -1, 0.0, -1, -1, Vec3::Constant(std::numeric_limits<double>::infinity()),
              Vec3::Constant(-std::numeric_limits<double>::infinity())};
    for (std::size_t i = begin; i < end; ++i) {
        node.lo = node.lo.cwiseMin(pts[order_[i]]);
        node.hi = node.hi.cwiseMax(pts[order_[i]]);
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
    std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                         const double va = pts[a][axis], vb = pts[b][axis];
                         return va < vb || (va == vb && a < b);
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].axis = axis;
    nodes_[static_cast<std::size_t>(id)].split = pts[order_[mid]][axis];
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
    Neighbor best;
    if (!empty()) nearest_impl(0, query, best);
    return best;
}

void KdTree::nearest_impl(int id, const Vec3& q, Neighbor& best) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (box_distance_sq(q, n.lo, n.hi) > best.squared_distance) return;
    if (n.axis < 0) {
        for (std::size_t i = n.begin; i < n.end; ++i) {
            const std::size_t idx = order_[i];
            const double d = ((*points_)[idx] - q).squaredNorm();
            if (d < best.squared_distance || (d == best.squared_distance && idx < best.index)) {
                best = {idx, d};
            }
        }
        return;
    }
    const bool go_left = q[n.axis] < n.split;
    nearest_impl(go_left ? n.left : n.right, q, best);
    nearest_impl(go_left ? n.right : n.left, q, best);
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query, double radius) const {
    const Vec3 r = Vec3::Constant(radius);
    std::vector<std::size_t> candidates = box_search(query - r, query + r);
    std::vector<std::size_t> out;
    const double r2 = radius * radius;
    for (std::size_t idx : candidates) {
        if (((*points_)[idx] - query).squaredNorm() <= r2) out.push_back(idx);
    }
    return out;
}

std::vector<std::size_t> KdTree::box_search(const Vec3& lo, const Vec3& hi) const {
    std::vector<std::size_t> out;
    if (!empty()) box_impl(0, lo, hi, out);
    std::sort(out.begin(), out.end());
    return out;
}

void KdTree::box_impl(int id, const Vec3& lo, const Vec3& hi, std::vector<std::size_t>& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if ((n.hi.array() < lo.array()).any() || (n.lo.array() > hi.array()).any()) return;
    if (n.axis < 0) {
        for (std::size_t i = n.begin; i < n.end; ++i) {
            const Vec3& p = (*points_)[order_[i]];
            if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) out.push_back(order_[i]);
        }
        return;
    }
    box_impl(n.left, lo, hi, out);
    box_impl(n.right, lo, hi, out);
}

}  // namespace ppaview
