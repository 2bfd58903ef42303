#include "trigcm/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "trigcm/error.hpp"

namespace trigcm {

namespace {

constexpr std::size_t kLeafSize = 8;
// Below this many reference points a linear scan beats building a tree.
constexpr std::size_t kBruteForceBelow = 32;

bool better(double d, std::size_t idx, const Neighbor& best) {
    return d < best.distance_sq || (d == best.distance_sq && idx < best.index);
}

}  // namespace

KdTree::KdTree(const Points& points) : points_(points), order_(points.size()) {
    if (points.empty()) throw DomainError("kd-tree: empty point set");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * points.size() / kLeafSize + 2);
    build(0, points.size());
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end, -1, 0.0, 0, 0});
    if (end - begin <= kLeafSize) return id;

    Vec3 lo = points_[order_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
        const Vec3& p = points_[order_[i]];
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    int axis = 0;
    for (int k = 1; k < 3; ++k)
        if (hi[k] - lo[k] > hi[axis] - lo[axis]) axis = k;
    if (hi[axis] == lo[axis]) return id;  // all points coincide

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(std::size_t node_id, const Vec3& q, Neighbor& best) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (std::size_t i = node.begin; i < node.end; ++i) {
            const std::size_t idx = order_[i];
            const double d = squared_distance(q, points_[idx]);
            if (better(d, idx, best)) best = {idx, d};
        }
        return;
    }
    // Left holds coordinates <= split, right holds >= split.
    const double diff = q[node.axis] - node.split;
    const std::size_t near = diff <= 0.0 ? node.left : node.right;
    const std::size_t far = diff <= 0.0 ? node.right : node.left;
    search(near, q, best);
    // Equality still visits the far side so index ties resolve exactly.
    if (diff * diff <= best.distance_sq) search(far, q, best);
}

Neighbor KdTree::nearest(const Vec3& query) const {
    Neighbor best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
    search(0, query, best);
    return best;
}

std::vector<Neighbor> nearest_neighbors_brute_force(const Points& queries, const Points& reference) {
    if (reference.empty()) throw DomainError("nearest_neighbors: empty reference set");
    std::vector<Neighbor> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        Neighbor best{0, squared_distance(queries[i], reference[0])};
        for (std::size_t j = 1; j < reference.size(); ++j) {
            const double d = squared_distance(queries[i], reference[j]);
            if (d < best.distance_sq) best = {j, d};
        }
        out[i] = best;
    }
    return out;
}

std::vector<Neighbor> nearest_neighbors(const Points& queries, const Points& reference) {
    if (reference.size() < kBruteForceBelow) return nearest_neighbors_brute_force(queries, reference);
    KdTree tree(reference);
    std::vector<Neighbor> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = tree.nearest(queries[i]);
    return out;
}

}  // namespace trigcm
