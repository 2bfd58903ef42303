#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trigcm {

using Vec3 = std::array<double, 3>;
using Points = std::vector<Vec3>;

// Per-axis affine map y = (x - offset) / scale, used to undo normalization.
struct AffineMap {
    Vec3 offset{0.0, 0.0, 0.0};
    Vec3 scale{1.0, 1.0, 1.0};

    Vec3 apply(const Vec3& x) const;
    Vec3 invert(const Vec3& y) const;
};

// Unordered set of 3D points. `normalization` records how `points` were
// produced from raw coordinates, when known.
struct PointCloud {
    Points points;
    std::string label;
    std::optional<AffineMap> normalization;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

enum class NormalizationMode { unit_radius, global_minmax, per_shape_minmax };
enum class Split { train, test };

std::string_view to_string(NormalizationMode mode);
NormalizationMode parse_normalization_mode(std::string_view text);

struct Dataset {
    std::vector<PointCloud> clouds;
    std::optional<NormalizationMode> normalization_mode;
    Split split = Split::train;

    std::size_t size() const { return clouds.size(); }
};

// Throws DomainError when the cloud is empty or holds a non-finite value.
void validate(const PointCloud& pc);

// Centroid to the origin, farthest point at radius 1.
PointCloud normalize_unit(const PointCloud& pc);
PointCloud denormalize(const PointCloud& pc);

// Maps clouds into [-1, 1]^3 per axis: one bounding box over the whole
// dataset (global) or one box per cloud (per_shape).
Dataset normalize_minmax(const Dataset& ds, NormalizationMode mode);
Dataset normalize_unit(const Dataset& ds);
Dataset normalize(const Dataset& ds, NormalizationMode mode);

// Exactly `target` points. Subsamples without replacement when the cloud
// is large enough, otherwise draws with replacement.
PointCloud resample(const PointCloud& pc, std::size_t target, std::uint64_t seed);

// Axis-aligned bounding box {min, max}.
std::pair<Vec3, Vec3> bounding_box(const Points& points);
Vec3 centroid(const Points& points);

// ASCII XYZ: one "x y z" line per point, '#' comment lines. A leading
// "# label: <name>" comment is read back into PointCloud::label.
PointCloud read_xyz(const std::filesystem::path& path);
PointCloud parse_xyz(std::string_view text);
void write_xyz(const std::filesystem::path& path, const PointCloud& pc);
std::string format_xyz(const PointCloud& pc);

// Dataset directory: one .xyz per shape plus train.txt / test.txt listing
// relative paths.
void save_dataset(const std::filesystem::path& dir, const Dataset& train, const Dataset& test);
Dataset load_split(const std::filesystem::path& dir, Split split);
// All *.xyz files in a directory, sorted by file name.
Dataset load_directory(const std::filesystem::path& dir);

}  // namespace trigcm
