#include "trigcm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "trigcm/error.hpp"
#include "trigcm/random.hpp"

namespace trigcm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double truncated_normal(Rng& rng, double sd) {
    if (sd == 0.0) return 0.0;
    while (true) {
        const double n = rng.normal();
        if (std::abs(n) <= 3.0) return n * sd;
    }
}

struct SurfacePoint {
    Vec3 p;
    Vec3 n;  // unit normal
};

SurfacePoint sample_sphere(Rng& rng, const ShapeParams& s) {
    Vec3 d;
    double len = 0.0;
    do {
        d = {rng.normal(), rng.normal(), rng.normal()};
        len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    } while (len < 1e-12);
    const Vec3 n{d[0] / len, d[1] / len, d[2] / len};
    return {{s.a * n[0], s.a * n[1], s.a * n[2]}, n};
}

SurfacePoint sample_torus(Rng& rng, const ShapeParams& s) {
    const double u = rng.uniform(0.0, kTwoPi);
    double v = 0.0;
    // The area element is proportional to (R + r cos v); reject against it.
    do {
        v = rng.uniform(0.0, kTwoPi);
    } while (rng.uniform() * (s.a + s.b) > s.a + s.b * std::cos(v));
    const double ring = s.a + s.b * std::cos(v);
    return {{ring * std::cos(u), ring * std::sin(u), s.b * std::sin(v)},
            {std::cos(v) * std::cos(u), std::cos(v) * std::sin(u), std::sin(v)}};
}

SurfacePoint sample_box(Rng& rng, const ShapeParams& s) {
    const double h[3] = {s.a, s.b, s.c};
    // Faces normal to axis k have area 4 * h[(k+1)%3] * h[(k+2)%3] each.
    const double w[3] = {h[1] * h[2], h[0] * h[2], h[0] * h[1]};
    const double pick = rng.uniform() * (w[0] + w[1] + w[2]);
    const int axis = pick < w[0] ? 0 : (pick < w[0] + w[1] ? 1 : 2);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    SurfacePoint out{};
    for (int k = 0; k < 3; ++k) out.p[k] = k == axis ? sign * h[k] : rng.uniform(-h[k], h[k]);
    out.n = {0.0, 0.0, 0.0};
    out.n[axis] = sign;
    return out;
}

SurfacePoint sample_plane_cross(Rng& rng, const ShapeParams& s) {
    const double wing = s.a * s.b;
    const double fin = s.b * s.c;
    const bool on_wing = rng.uniform() * (wing + fin) < wing;
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    if (on_wing) return {{rng.uniform(-s.a, s.a), rng.uniform(-s.b, s.b), 0.0}, {0.0, 0.0, side}};
    return {{0.0, rng.uniform(-s.b, s.b), rng.uniform(-s.c, s.c)}, {side, 0.0, 0.0}};
}

void check_params(ShapeKind kind, const ShapeParams& s) {
    if (!(s.a > 0.0) || !(s.b > 0.0) || !(s.c > 0.0)) throw DomainError("datagen: dimensions must be positive");
    if (kind == ShapeKind::torus && !(s.b < s.a)) throw DomainError("datagen: torus minor radius must be below major");
}

}  // namespace

std::string_view to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::sphere: return "sphere";
        case ShapeKind::torus: return "torus";
        case ShapeKind::box: return "box";
        case ShapeKind::plane_cross: return "plane_cross";
    }
    return "?";
}

ShapeKind parse_shape_kind(std::string_view text) {
    if (text == "sphere") return ShapeKind::sphere;
    if (text == "torus") return ShapeKind::torus;
    if (text == "box") return ShapeKind::box;
    if (text == "plane_cross") return ShapeKind::plane_cross;
    throw DomainError("unknown shape family '" + std::string(text) + "'");
}

ShapeParams ShapeFamily::default_params(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::sphere: return {1.0, 1.0, 1.0};
        case ShapeKind::torus: return {1.0, 0.35, 0.35};
        case ShapeKind::box: return {1.0, 0.6, 0.4};
        case ShapeKind::plane_cross: return {1.0, 0.25, 0.5};
    }
    return {};
}

ShapeFamily ShapeFamily::of(ShapeKind kind) {
    ShapeFamily f;
    f.kind = kind;
    f.params = default_params(kind);
    return f;
}

void ShapeFamily::validate() const {
    check_params(kind, params);
    if (!(jitter >= 0.0)) throw DomainError("datagen: jitter must be non-negative");
    if (!(perturbation >= 0.0 && perturbation < 1.0)) throw DomainError("datagen: perturbation must lie in [0, 1)");
    if (points < 8) throw DomainError("datagen: need at least 8 points per cloud");
    if (kind == ShapeKind::torus && params.b * (1.0 + perturbation) >= params.a * (1.0 - perturbation)) {
        throw DomainError("datagen: perturbed torus radii may cross");
    }
}

ShapeParams instance_params(const ShapeFamily& family, std::uint64_t index) {
    Rng rng(family.seed, stream_id("shape.params", {static_cast<std::uint64_t>(family.kind), index}));
    ShapeParams p = family.params;
    for (double* v : {&p.a, &p.b, &p.c}) *v *= 1.0 + family.perturbation * rng.uniform(-1.0, 1.0);
    return p;
}

double surface_residual(ShapeKind kind, const ShapeParams& s, const Vec3& p) {
    switch (kind) {
        case ShapeKind::sphere: return std::abs(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - s.a);
        case ShapeKind::torus: {
            const double q = std::sqrt(p[0] * p[0] + p[1] * p[1]) - s.a;
            return std::abs(std::sqrt(q * q + p[2] * p[2]) - s.b);
        }
        case ShapeKind::box: {
            const double h[3] = {s.a, s.b, s.c};
            double outside = 0.0, inside = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 3; ++k) {
                const double e = std::abs(p[k]) - h[k];
                outside += std::max(e, 0.0) * std::max(e, 0.0);
                inside = std::min(inside, -e);
            }
            return outside > 0.0 ? std::sqrt(outside) : inside;
        }
        case ShapeKind::plane_cross: {
            auto rect = [](double u, double hu, double v, double hv, double w) {
                const double du = std::max(std::abs(u) - hu, 0.0);
                const double dv = std::max(std::abs(v) - hv, 0.0);
                return std::sqrt(du * du + dv * dv + w * w);
            };
            return std::min(rect(p[0], s.a, p[1], s.b, p[2]), rect(p[1], s.b, p[2], s.c, p[0]));
        }
    }
    return 0.0;
}

PointCloud generate_shape(const ShapeFamily& family, std::uint64_t index) {
    family.validate();
    const ShapeParams params = instance_params(family, index);
    Rng rng(family.seed, stream_id("shape.points", {static_cast<std::uint64_t>(family.kind), index}));
    PointCloud pc;
    pc.label = family.label.empty() ? std::string(to_string(family.kind)) : family.label;
    pc.points.resize(family.points);
    for (auto& out : pc.points) {
        SurfacePoint sp{};
        switch (family.kind) {
            case ShapeKind::sphere: sp = sample_sphere(rng, params); break;
            case ShapeKind::torus: sp = sample_torus(rng, params); break;
            case ShapeKind::box: sp = sample_box(rng, params); break;
            case ShapeKind::plane_cross: sp = sample_plane_cross(rng, params); break;
        }
        const double offset = truncated_normal(rng, family.jitter);
        for (int k = 0; k < 3; ++k) out[k] = sp.p[k] + offset * sp.n[k];
    }
    return pc;
}

Dataset generate(const ShapeFamily& family, std::size_t count) {
    if (count == 0) throw DomainError("datagen: count must be at least 1");
    family.validate();
    Dataset ds;
    for (std::size_t i = 0; i < count; ++i) ds.clouds.push_back(generate_shape(family, i));
    return ds;
}

Dataset mixture(const std::vector<ShapeFamily>& families, const std::vector<double>& proportions, std::size_t count) {
    if (families.empty() || families.size() != proportions.size()) {
        throw DomainError("mixture: need one proportion per family");
    }
    if (count == 0) throw DomainError("mixture: count must be at least 1");
    double sum = 0.0;
    for (double p : proportions) {
        if (!(p >= 0.0)) throw DomainError("mixture: proportions must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("mixture: proportions sum to " + std::to_string(sum));
    for (const auto& f : families) {
        f.validate();
        if (f.points != families.front().points) throw DomainError("mixture: families must share the point count");
    }

    const std::size_t k = families.size();
    std::vector<std::size_t> quota(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double exact = proportions[i] * static_cast<double>(count);
        quota[i] = static_cast<std::size_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(quota[i]);
        assigned += quota[i];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
    for (std::size_t j = 0; assigned < count; ++j, ++assigned) ++quota[order[j % k]];

    Dataset ds;
    std::vector<std::size_t> used(k, 0);
    for (std::size_t pos = 0; pos < count; ++pos) {
        std::size_t pick = k;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i) {
            if (used[i] == quota[i]) continue;
            const double deficit = static_cast<double>(quota[i]) * static_cast<double>(pos + 1) / static_cast<double>(count) -
                                   static_cast<double>(used[i]);
            if (deficit > best) {
                best = deficit;
                pick = i;
            }
        }
        ds.clouds.push_back(generate_shape(families[pick], used[pick]++));
    }
    return ds;
}

}  // namespace trigcm
