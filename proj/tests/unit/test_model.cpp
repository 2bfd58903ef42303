#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "test_support.hpp"
#include "trigcm/error.hpp"
#include "trigcm/model.hpp"
#include "trigcm/predictor.hpp"

using namespace trigcm;
using trigcm::testing::random_points;

namespace {

ModelConfig small_config(bool zero_output) {
    ModelConfig c;
    c.point_widths = {16, 16};
    c.time_dim = 8;
    c.head_widths = {16};
    c.zero_output = zero_output;
    return c;
}

}  // namespace

TEST(TimeEmbedding, ZeroTime) {
    const auto e = time_embedding(0.0, 8);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(e[k], 0.0);
        EXPECT_EQ(e[4 + k], 1.0);
    }
}

TEST(TimeEmbedding, HandValues) {
    const double t = std::numbers::pi / 2;
    const auto e = time_embedding(t, 4);
    EXPECT_DOUBLE_EQ(e[0], 1.0);                        // sin(t * 1)
    EXPECT_DOUBLE_EQ(e[1], std::sin(t / 100.0));        // w_1 = 10000^(-1/2)
    EXPECT_NEAR(e[2], 0.0, 1e-16);                      // cos(t * 1)
    EXPECT_DOUBLE_EQ(e[3], std::cos(t / 100.0));
    EXPECT_EQ(time_embedding(0.3, 64), time_embedding(0.3, 64));
    EXPECT_THROW(time_embedding(0.1, 7), DomainError);
}

TEST(VelocityModel, ParameterLayout) {
    const auto m = VelocityModel::init(1, small_config(true));
    std::vector<std::string> names;
    for (const auto& p : m.parameters()) names.push_back(p.name);
    const std::vector<std::string> expected = {
        "point.0.weight", "point.0.bias", "point.1.weight", "point.1.bias", "time.0.weight", "time.0.bias",
        "time.1.weight", "time.1.bias", "head.0.point_weight", "head.0.global_weight", "head.0.bias",
        "out.weight", "out.bias"};
    EXPECT_EQ(names, expected);
    // 3*16+16 + 16*16+16 + 8*16+16 + 16*16+16 + 16*16+16*16+16 + 16*3+3
    EXPECT_EQ(m.parameter_count(), 64u + 272u + 144u + 272u + 528u + 51u);
}

TEST(VelocityModel, InitIsSeededAndFanInScaled) {
    const auto a = VelocityModel::init(7, {});
    const auto b = VelocityModel::init(7, {});
    const auto c = VelocityModel::init(8, {});
    bool any_diff = false;
    for (std::size_t k = 0; k < a.parameters().size(); ++k) {
        const auto da = a.parameters()[k].tensor.data();
        const auto db = b.parameters()[k].tensor.data();
        const auto dc = c.parameters()[k].tensor.data();
        EXPECT_TRUE(std::equal(da.begin(), da.end(), db.begin()));
        any_diff |= !std::equal(da.begin(), da.end(), dc.begin());
    }
    EXPECT_TRUE(any_diff);
    const auto& w = a.parameters()[2].tensor;  // point.1.weight, fan-in 64
    const double bound = std::sqrt(6.0 / 64.0);
    for (double v : w.data()) EXPECT_LE(std::abs(v), bound);
    for (double v : a.parameters().back().tensor.data()) EXPECT_EQ(v, 0.0);
}

TEST(VelocityModel, ZeroOutputGivesZeroVelocity) {
    const auto m = VelocityModel::init(3, {});
    const auto v = m.evaluate(random_points(40, 1), 0.9);
    for (const auto& p : v)
        for (double c : p) EXPECT_EQ(c, 0.0);
}

TEST(VelocityModel, ZeroOutputPredictorShrinks) {
    const auto m = VelocityModel::init(3, {});
    const auto x = random_points(30, 2);
    const double t = 0.6;
    const auto out = predict(Schedule(), m, x, t);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int k = 0; k < 3; ++k) EXPECT_EQ(out.x_hat.points[i][k], std::cos(t) * x[i][k]);
}

TEST(VelocityModel, PermutationEquivariantExactly) {
    const auto m = VelocityModel::init(4, small_config(false));
    const auto x = random_points(50, 3);
    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(9);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    Points xp(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[perm[i]];
    const auto v = m.evaluate(x, 0.4);
    const auto vp = m.evaluate(xp, 0.4);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(vp[i], v[perm[i]]);
}

TEST(VelocityModel, OutputShapeMatchesInput) {
    const auto m = VelocityModel::init(5, small_config(false));
    EXPECT_EQ(m.evaluate(random_points(13, 4), 0.1).size(), 13u);
    EXPECT_EQ(m.evaluate(random_points(1, 4), 0.1).size(), 1u);
}

TEST(VelocityModel, NonFiniteInputIsRejected) {
    const auto m = VelocityModel::init(5, small_config(false));
    auto x = random_points(4, 5);
    x[2][1] = INFINITY;
    EXPECT_THROW(m.evaluate(x, 0.1), DomainError);
}

TEST(VelocityModel, CopiesAreDeep) {
    auto a = VelocityModel::init(6, small_config(false));
    VelocityModel b = a;
    b.parameters()[0].tensor.mutable_data()[0] += 1.0;
    EXPECT_NE(a.parameters()[0].tensor.at(0), b.parameters()[0].tensor.at(0));
}

TEST(VelocityModel, LoadParametersChecksNamesAndShapes) {
    auto a = VelocityModel::init(6, small_config(false));
    const auto b = VelocityModel::init(7, small_config(false));
    a.load_parameters(b.parameters());
    const auto x = random_points(10, 6);
    EXPECT_EQ(a.evaluate(x, 0.3), b.evaluate(x, 0.3));
    const auto other = VelocityModel::init(7, {});
    EXPECT_THROW(a.load_parameters(other.parameters()), ShapeError);
}

TEST(VelocityModel, GradientOfSquaredOutputMatchesFiniteDifferences) {
    auto m = VelocityModel::init(11, small_config(false));
    const auto x = random_points(6, 7);
    const auto r = trigcm::testing::grad_check(m, [&] { return ops::sum_squares(m.forward(x, 0.8)); });
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
    EXPECT_EQ(r.checked, m.parameter_count());
}
