#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "trigcm/pointcloud.hpp"

namespace trigcm {

enum class ShapeKind { sphere, torus, box, plane_cross };

std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view text);

// Intrinsic dimensions of one shape instance.
//   sphere       radius a
//   torus        major radius a, minor radius b (b < a)
//   box          half extents a, b, c
//   plane_cross  wing z = 0 with |x| <= a, |y| <= b; fin x = 0 with |y| <= b, |z| <= c
struct ShapeParams {
    double a = 1.0;
    double b = 0.3;
    double c = 0.3;
};

struct ShapeFamily {
    ShapeKind kind = ShapeKind::torus;
    ShapeParams params = default_params(ShapeKind::torus);
    double jitter = 0.0;         // std of the offset along the surface normal
    double perturbation = 0.2;   // per-cloud relative spread of every parameter
    std::size_t points = 2048;
    std::uint64_t seed = 0;
    std::string label;           // defaults to the kind name

    static ShapeParams default_params(ShapeKind kind);
    static ShapeFamily of(ShapeKind kind);
    // Throws DomainError on non-positive dimensions, a torus with b >= a,
    // jitter < 0, perturbation outside [0, 1) or points < 8.
    void validate() const;
};

// Parameters of cloud `index` after its seeded perturbation.
ShapeParams instance_params(const ShapeFamily& family, std::uint64_t index);

// Unsigned distance from `p` to the surface described by (kind, params).
double surface_residual(ShapeKind kind, const ShapeParams& params, const Vec3& p);

// Cloud `index`: area-uniform surface points, each pushed along its normal
// by a Gaussian offset truncated at 3 * jitter.
PointCloud generate_shape(const ShapeFamily& family, std::uint64_t index);

Dataset generate(const ShapeFamily& family, std::size_t count);

// Counts by largest remainder; the sequence interleaves families by
// running deficit, and family i contributes its clouds 0, 1, 2, ...
// in order. Proportions must be non-negative and sum to 1.
Dataset mixture(const std::vector<ShapeFamily>& families, const std::vector<double>& proportions, std::size_t count);

}  // namespace trigcm
