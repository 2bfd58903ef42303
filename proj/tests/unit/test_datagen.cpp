#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "test_support.hpp"
#include "trigcm/datagen.hpp"
#include "trigcm/error.hpp"

using namespace trigcm;

namespace {

ShapeFamily family(ShapeKind kind, double jitter = 0.0, std::size_t points = 512, std::uint64_t seed = 1) {
    ShapeFamily f = ShapeFamily::of(kind);
    f.jitter = jitter;
    f.points = points;
    f.seed = seed;
    return f;
}

}  // namespace

TEST(Datagen, SphereWithoutJitterLiesOnSphere) {
    ShapeFamily f = family(ShapeKind::sphere);
    f.perturbation = 0.0;
    const auto pc = generate_shape(f, 0);
    ASSERT_EQ(pc.size(), 512u);
    for (const auto& p : pc.points) EXPECT_NEAR(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]), 1.0, 1e-12);
}

TEST(Datagen, TorusSatisfiesImplicitEquation) {
    const auto f = family(ShapeKind::torus);
    for (std::uint64_t i = 0; i < 5; ++i) {
        const auto params = instance_params(f, i);
        for (const auto& p : generate_shape(f, i).points) {
            const double q = std::sqrt(p[0] * p[0] + p[1] * p[1]) - params.a;
            EXPECT_NEAR(q * q + p[2] * p[2], params.b * params.b, 1e-9);
        }
    }
}

TEST(Datagen, ResidualWithinThreeSigmaForEveryKind) {
    for (auto kind : {ShapeKind::sphere, ShapeKind::torus, ShapeKind::box, ShapeKind::plane_cross}) {
        for (double sigma : {0.0, 0.01, 0.03}) {
            const auto f = family(kind, sigma, 400, 7);
            for (std::uint64_t i = 0; i < 3; ++i) {
                const auto params = instance_params(f, i);
                for (const auto& p : generate_shape(f, i).points)
                    ASSERT_LE(surface_residual(kind, params, p), 3 * sigma + 1e-9) << to_string(kind);
            }
        }
    }
}

TEST(Datagen, SphereOctantsAreBalanced) {
    ShapeFamily f = family(ShapeKind::sphere, 0.0, 2048, 3);
    const auto pc = generate_shape(f, 0);
    std::array<int, 8> counts{};
    for (const auto& p : pc.points) ++counts[(p[0] > 0) + 2 * (p[1] > 0) + 4 * (p[2] > 0)];
    for (int c : counts) {
        EXPECT_GE(c, 0.8 * 256);
        EXPECT_LE(c, 1.2 * 256);
    }
}

// Area-correct torus sampling puts more points on the outer equator than
// on the inner one, in the ratio (R + r) / (R - r).
TEST(Datagen, TorusSamplingIsAreaWeighted) {
    ShapeFamily f = family(ShapeKind::torus, 0.0, 20000, 4);
    f.perturbation = 0.0;
    const auto pc = generate_shape(f, 0);
    const double R = f.params.a;
    int outer = 0, inner = 0;
    for (const auto& p : pc.points) {
        const double rho = std::sqrt(p[0] * p[0] + p[1] * p[1]);
        if (rho > R) ++outer;
        else ++inner;
    }
    // Half-tube areas: outer ∝ (pi R + 2 r), inner ∝ (pi R - 2 r).
    const double r = f.params.b, pi = 3.14159265358979323846;
    EXPECT_NEAR(static_cast<double>(outer) / inner, (pi * R + 2 * r) / (pi * R - 2 * r), 0.05);
}

TEST(Datagen, DeterministicAndIndexDependent) {
    const auto f = family(ShapeKind::box, 0.01);
    EXPECT_EQ(generate(f, 3).clouds[2].points, generate(f, 3).clouds[2].points);
    EXPECT_NE(generate_shape(f, 0).points, generate_shape(f, 1).points);
    auto g = f;
    g.seed = 2;
    EXPECT_NE(generate_shape(f, 0).points, generate_shape(g, 0).points);
}

TEST(Datagen, ParametersPerturbedWithinRange) {
    const auto f = family(ShapeKind::torus);
    bool varied = false;
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto p = instance_params(f, i);
        EXPECT_GE(p.a, f.params.a * 0.8);
        EXPECT_LE(p.a, f.params.a * 1.2);
        EXPECT_GE(p.b, f.params.b * 0.8);
        EXPECT_LE(p.b, f.params.b * 1.2);
        varied |= p.a != f.params.a;
    }
    EXPECT_TRUE(varied);
}

TEST(Datagen, CloudsPassNormalizationPreconditions) {
    for (auto kind : {ShapeKind::sphere, ShapeKind::torus, ShapeKind::box, ShapeKind::plane_cross}) {
        const auto ds = generate(family(kind, 0.02, 64), 4);
        for (const auto& pc : ds.clouds) {
            EXPECT_NO_THROW(normalize_unit(pc));
            EXPECT_EQ(pc.label, std::string(to_string(kind)));
        }
    }
}

TEST(Datagen, InvalidParametersThrow) {
    auto f = family(ShapeKind::torus);
    f.points = 7;
    EXPECT_THROW(f.validate(), DomainError);
    f = family(ShapeKind::torus);
    f.params.b = 1.5;
    EXPECT_THROW(generate(f, 1), DomainError);
    f = family(ShapeKind::sphere);
    f.jitter = -0.1;
    EXPECT_THROW(generate(f, 1), DomainError);
    EXPECT_THROW(generate(family(ShapeKind::sphere), 0), DomainError);
    EXPECT_THROW(parse_shape_kind("cone"), DomainError);
}

TEST(Mixture, SingleFamilyMatchesGenerate) {
    const auto f = family(ShapeKind::torus, 0.0, 32);
    const auto a = mixture({f}, {1.0}, 5), b = generate(f, 5);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.clouds[i].points, b.clouds[i].points);
}

TEST(Mixture, FiftyFiftyIsExactAndInterleaved) {
    const auto ds = mixture({family(ShapeKind::sphere, 0, 32), family(ShapeKind::torus, 0, 32)}, {0.5, 0.5}, 100);
    std::map<std::string, int> counts;
    for (const auto& pc : ds.clouds) ++counts[pc.label];
    EXPECT_EQ(counts["sphere"], 50);
    EXPECT_EQ(counts["torus"], 50);
    EXPECT_NE(ds.clouds[0].label, ds.clouds[1].label);
}

TEST(Mixture, QuotasUseLargestRemainder) {
    const auto ds = mixture({family(ShapeKind::sphere, 0, 16), family(ShapeKind::box, 0, 16),
                             family(ShapeKind::torus, 0, 16)},
                            {0.5, 0.3, 0.2}, 7);
    std::map<std::string, int> counts;
    for (const auto& pc : ds.clouds) ++counts[pc.label];
    // 3.5, 2.1, 1.4 -> floors 3, 2, 1; the spare goes to the largest remainder (sphere).
    EXPECT_EQ(counts["sphere"], 4);
    EXPECT_EQ(counts["box"], 2);
    EXPECT_EQ(counts["torus"], 1);
}

TEST(Mixture, BadProportionsThrow) {
    const auto a = family(ShapeKind::sphere, 0, 16), b = family(ShapeKind::torus, 0, 16);
    EXPECT_THROW(mixture({a, b}, {0.5, 0.6}, 10), DomainError);
    EXPECT_THROW(mixture({a, b}, {1.0}, 10), DomainError);
    EXPECT_THROW(mixture({a, b}, {1.5, -0.5}, 10), DomainError);
    EXPECT_THROW(mixture({a, family(ShapeKind::torus, 0, 32)}, {0.5, 0.5}, 10), DomainError);
}

TEST(Mixture, LabelsRoundTripThroughDatasetFiles) {
    trigcm::testing::TempDir dir("mixture");
    const auto ds = mixture({family(ShapeKind::plane_cross, 0, 16), family(ShapeKind::box, 0, 16)}, {0.5, 0.5}, 6);
    save_dataset(dir.path(), ds, Dataset{});
    const auto back = load_split(dir.path(), Split::train);
    ASSERT_EQ(back.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(back.clouds[i].label, ds.clouds[i].label);
        EXPECT_EQ(back.clouds[i].points, ds.clouds[i].points);
    }
}
