#pragma once

#include <cstddef>
#include <vector>

#include "trigcm/pointcloud.hpp"

namespace trigcm {

struct Neighbor {
    std::size_t index;
    double distance_sq;
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

// Exact nearest-neighbor search over a fixed point set. Among equidistant
// points the lowest index wins, matching a linear scan.
class KdTree {
   public:
    explicit KdTree(const Points& points);

    Neighbor nearest(const Vec3& query) const;

   private:
    struct Node {
        std::size_t begin, end;  // range in order_
        int axis;                // -1 for leaves
        double split;
        std::size_t left, right;
    };
    std::size_t build(std::size_t begin, std::size_t end);
    void search(std::size_t node, const Vec3& q, Neighbor& best) const;

    const Points& points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

// Nearest neighbor in `reference` for every query point.
std::vector<Neighbor> nearest_neighbors(const Points& queries, const Points& reference);
std::vector<Neighbor> nearest_neighbors_brute_force(const Points& queries, const Points& reference);

}  // namespace trigcm
