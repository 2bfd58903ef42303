#include "trigcm/pointcloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "trigcm/error.hpp"
#include "trigcm/random.hpp"

namespace trigcm {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kLabelPrefix = "# label:";

// Composition: raw -> inner -> outer.
AffineMap compose(const AffineMap& inner, const AffineMap& outer) {
    AffineMap out;
    for (int k = 0; k < 3; ++k) {
        out.offset[k] = inner.offset[k] + inner.scale[k] * outer.offset[k];
        out.scale[k] = inner.scale[k] * outer.scale[k];
    }
    return out;
}

PointCloud apply_map(const PointCloud& pc, const AffineMap& map) {
    PointCloud out;
    out.label = pc.label;
    out.points.reserve(pc.size());
    for (const auto& p : pc.points) out.points.push_back(map.apply(p));
    out.normalization = pc.normalization ? compose(*pc.normalization, map) : map;
    return out;
}

AffineMap minmax_map(const Vec3& lo, const Vec3& hi, const std::string& what) {
    AffineMap map;
    for (int k = 0; k < 3; ++k) {
        const double half = 0.5 * (hi[k] - lo[k]);
        if (!(half > 0.0)) {
            throw DomainError("normalize_minmax: zero extent along axis " + std::to_string(k) +
                              " (" + what + ")");
        }
        map.offset[k] = 0.5 * (hi[k] + lo[k]);
        map.scale[k] = half;
    }
    return map;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

Vec3 AffineMap::apply(const Vec3& x) const {
    return {(x[0] - offset[0]) / scale[0], (x[1] - offset[1]) / scale[1], (x[2] - offset[2]) / scale[2]};
}

Vec3 AffineMap::invert(const Vec3& y) const {
    return {y[0] * scale[0] + offset[0], y[1] * scale[1] + offset[1], y[2] * scale[2] + offset[2]};
}

std::string_view to_string(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::unit_radius: return "unit_radius";
        case NormalizationMode::global_minmax: return "global_minmax";
        case NormalizationMode::per_shape_minmax: return "per_shape_minmax";
    }
    return "?";
}

NormalizationMode parse_normalization_mode(std::string_view text) {
    if (text == "unit_radius") return NormalizationMode::unit_radius;
    if (text == "global_minmax" || text == "global") return NormalizationMode::global_minmax;
    if (text == "per_shape_minmax" || text == "per_shape") return NormalizationMode::per_shape_minmax;
    throw DomainError("unknown normalization mode '" + std::string(text) + "'");
}

void validate(const PointCloud& pc) {
    if (pc.empty()) throw DomainError("point cloud is empty");
    for (std::size_t i = 0; i < pc.size(); ++i) {
        for (double v : pc.points[i]) {
            if (!std::isfinite(v)) throw DomainError("point " + std::to_string(i) + " is not finite");
        }
    }
}

Vec3 centroid(const Points& points) {
    Vec3 c{0.0, 0.0, 0.0};
    for (const auto& p : points)
        for (int k = 0; k < 3; ++k) c[k] += p[k];
    const double n = static_cast<double>(points.size());
    for (double& v : c) v /= n;
    return c;
}

std::pair<Vec3, Vec3> bounding_box(const Points& points) {
    Vec3 lo = points.at(0), hi = points.at(0);
    for (const auto& p : points) {
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    return {lo, hi};
}

PointCloud normalize_unit(const PointCloud& pc) {
    validate(pc);
    const Vec3 c = centroid(pc.points);
    double radius = 0.0;
    for (const auto& p : pc.points) {
        const double dx = p[0] - c[0], dy = p[1] - c[1], dz = p[2] - c[2];
        radius = std::max(radius, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    if (!(radius > 0.0)) throw DomainError("normalize_unit: degenerate cloud (all points identical)");
    return apply_map(pc, AffineMap{c, {radius, radius, radius}});
}

PointCloud denormalize(const PointCloud& pc) {
    if (!pc.normalization) return pc;
    PointCloud out;
    out.label = pc.label;
    out.points.reserve(pc.size());
    for (const auto& p : pc.points) out.points.push_back(pc.normalization->invert(p));
    return out;
}

Dataset normalize_minmax(const Dataset& ds, NormalizationMode mode) {
    if (mode == NormalizationMode::unit_radius) return normalize_unit(ds);
    Dataset out;
    out.split = ds.split;
    out.normalization_mode = mode;
    out.clouds.reserve(ds.size());
    if (mode == NormalizationMode::global_minmax) {
        Points all;
        for (const auto& pc : ds.clouds) {
            validate(pc);
            all.insert(all.end(), pc.points.begin(), pc.points.end());
        }
        if (all.empty()) throw DomainError("normalize_minmax: empty dataset");
        const auto [lo, hi] = bounding_box(all);
        const AffineMap map = minmax_map(lo, hi, "dataset");
        for (const auto& pc : ds.clouds) out.clouds.push_back(apply_map(pc, map));
    } else {
        for (std::size_t i = 0; i < ds.size(); ++i) {
            validate(ds.clouds[i]);
            const auto [lo, hi] = bounding_box(ds.clouds[i].points);
            out.clouds.push_back(apply_map(ds.clouds[i], minmax_map(lo, hi, "cloud " + std::to_string(i))));
        }
    }
    return out;
}

Dataset normalize_unit(const Dataset& ds) {
    Dataset out;
    out.split = ds.split;
    out.normalization_mode = NormalizationMode::unit_radius;
    out.clouds.reserve(ds.size());
    for (const auto& pc : ds.clouds) out.clouds.push_back(normalize_unit(pc));
    return out;
}

Dataset normalize(const Dataset& ds, NormalizationMode mode) {
    return mode == NormalizationMode::unit_radius ? normalize_unit(ds) : normalize_minmax(ds, mode);
}

PointCloud resample(const PointCloud& pc, std::size_t target, std::uint64_t seed) {
    if (target == 0) throw DomainError("resample: target point count must be positive");
    validate(pc);
    Rng rng(seed, stream_id("resample"));
    PointCloud out;
    out.label = pc.label;
    out.normalization = pc.normalization;
    out.points.reserve(target);
    const std::size_t m = pc.size();
    if (m >= target) {
        // Partial Fisher-Yates: the first `target` slots are a uniform draw
        // without replacement.
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < target; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
            std::swap(idx[i], idx[j]);
            out.points.push_back(pc.points[idx[i]]);
        }
    } else {
        for (std::size_t i = 0; i < target; ++i) out.points.push_back(pc.points[rng.below(m)]);
    }
    return out;
}

PointCloud parse_xyz(std::string_view text) {
    PointCloud pc;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.starts_with(kLabelPrefix) && pc.label.empty()) {
                pc.label = std::string(trim(line.substr(kLabelPrefix.size())));
            }
            continue;
        }

        Vec3 p{};
        std::size_t fields = 0;
        std::string_view rest = line;
        while (true) {
            rest = trim(rest);
            if (rest.empty()) break;
            const auto end = rest.find_first_of(" \t");
            const std::string_view tok = rest.substr(0, end);
            if (fields == 3) throw IoError("xyz line " + std::to_string(line_no) + ": more than 3 values", line_no);
            double v = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
                throw IoError("xyz line " + std::to_string(line_no) + ": malformed number '" +
                                  std::string(tok) + "'",
                              line_no);
            }
            p[fields++] = v;
            if (end == std::string_view::npos) break;
            rest = rest.substr(end);
        }
        if (fields != 3) {
            throw IoError("xyz line " + std::to_string(line_no) + ": expected 3 values, got " +
                              std::to_string(fields),
                          line_no);
        }
        pc.points.push_back(p);
    }
    return pc;
}

PointCloud read_xyz(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_xyz(buf.str());
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what(), e.line());
    }
}

std::string format_xyz(const PointCloud& pc) {
    std::string out;
    if (!pc.label.empty()) out += std::string(kLabelPrefix) + " " + pc.label + "\n";
    char buf[96];
    for (const auto& p : pc.points) {
        const int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

void write_xyz(const fs::path& path, const PointCloud& pc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << format_xyz(pc);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void save_dataset(const fs::path& dir, const Dataset& train, const Dataset& test) {
    fs::create_directories(dir / "shapes");
    auto write_split = [&](const Dataset& ds, const char* prefix, const char* list_name) {
        std::ofstream list(dir / list_name, std::ios::trunc);
        if (!list) throw IoError("cannot write '" + (dir / list_name).string() + "'");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "shapes/%s_%05zu.xyz", prefix, i);
            write_xyz(dir / name, ds.clouds[i]);
            list << name << '\n';
        }
    };
    write_split(train, "train", "train.txt");
    write_split(test, "test", "test.txt");
}

Dataset load_split(const fs::path& dir, Split split) {
    const fs::path list_path = dir / (split == Split::train ? "train.txt" : "test.txt");
    std::ifstream list(list_path);
    if (!list) throw IoError("cannot open split list '" + list_path.string() + "'");
    Dataset ds;
    ds.split = split;
    std::string line;
    while (std::getline(list, line)) {
        const auto rel = trim(line);
        if (rel.empty() || rel.front() == '#') continue;
        ds.clouds.push_back(read_xyz(dir / fs::path(std::string(rel))));
    }
    return ds;
}

Dataset load_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xyz") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Dataset ds;
    for (const auto& f : files) ds.clouds.push_back(read_xyz(f));
    return ds;
}

}  // namespace trigcm
