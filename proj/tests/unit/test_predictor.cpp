#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "trigcm/error.hpp"
#include "trigcm/objective.hpp"
#include "trigcm/predictor.hpp"

using namespace trigcm;
using trigcm::testing::frobenius;
using trigcm::testing::max_abs_diff;
using trigcm::testing::random_points;

namespace {

constexpr double kPi = std::numbers::pi;

// Field returning a fixed velocity (already divided by sigma_d).
VelocityField constant_field(Points v) {
    return [v = std::move(v)](const Points&, double) { return v; };
}

}  // namespace

TEST(Predict, IdentityAtTimeZero) {
    const auto m = VelocityModel::init(1, ModelConfig{{16}, 8, {16}, false});
    const auto x = random_points(20, 1);
    EXPECT_EQ(predict(Schedule(), m, x, 0.0).x_hat.points, x);
}

TEST(Predict, OracleHandExample) {
    Schedule s;
    const double t = kPi / 4;
    const Points x0{{1, 0, 0}}, z{{0, 1, 0}};
    const auto out = predict(s, constant_field(analytic_velocity(s, x0, z, t)), perturb(s, x0, z, t), t);
    EXPECT_NEAR(out.x_hat.points[0][0], 1.0, 1e-15);
    EXPECT_NEAR(out.x_hat.points[0][1], 0.0, 1e-15);
    EXPECT_EQ(out.x_hat.points[0][2], 0.0);
}

TEST(Predict, PerturbedOracleDeviatesBySinT) {
    Schedule s;
    const auto x0 = random_points(12, 2), z = random_points(12, 3), eps = random_points(12, 4, 0.1);
    for (double t : {0.1, 0.7, 1.3, kPi / 2}) {
        auto v = analytic_velocity(s, x0, z, t);
        for (std::size_t i = 0; i < v.size(); ++i)
            for (int k = 0; k < 3; ++k) v[i][k] += eps[i][k];
        const auto x_hat = predict(s, constant_field(v), perturb(s, x0, z, t), t).x_hat.points;
        for (std::size_t i = 0; i < x0.size(); ++i)
            for (int k = 0; k < 3; ++k) EXPECT_NEAR(x_hat[i][k], x0[i][k] - std::sin(t) * eps[i][k], 1e-14);
    }
}

TEST(PredictWithOracle, RecoversCleanSampleOnDenseGrid) {
    Schedule s;
    const auto x0 = random_points(2048, 5), z = random_points(2048, 6);
    for (int k = 0; k < 100; ++k) {
        const double t = (kPi / 2) * (k / 99.0);
        EXPECT_LT(max_abs_diff(predict_with_oracle(s, x0, z, t), x0), 1e-9) << "t=" << t;
    }
}

TEST(PredictWithOracle, NonUnitDataScale) {
    Schedule s(ScheduleKind::trigflow, 0.5);
    const auto x0 = random_points(64, 7), z = random_points(64, 8, 0.5);
    for (double t : {0.0, 0.4, 1.1, kPi / 2}) EXPECT_LT(max_abs_diff(predict_with_oracle(s, x0, z, t), x0), 1e-12);
}

TEST(Predict, RefusesOtherSchedules) {
    const auto x = random_points(4, 9);
    EXPECT_THROW(predict(Schedule(ScheduleKind::linear_fm), constant_field(x), x, 0.5), DomainError);
    EXPECT_THROW(predict_with_oracle(Schedule(ScheduleKind::cosine_ddpm), x, x, 0.5), DomainError);
}

TEST(Predict, FieldRowCountIsChecked) {
    const auto x = random_points(4, 10);
    EXPECT_THROW(predict(Schedule(), constant_field(random_points(3, 1)), x, 0.5), ShapeError);
}

TEST(ReconstructClean, OracleRecoveryOnAblationSchedules) {
    const auto x0 = random_points(32, 11), z = random_points(32, 12);
    for (auto k : {ScheduleKind::linear_fm, ScheduleKind::cosine_ddpm, ScheduleKind::trigflow}) {
        Schedule s(k);
        for (double frac : {0.0, 0.25, 0.5, 0.9, 1.0}) {
            const double t = frac * s.t_max();
            const auto v = analytic_velocity(s, x0, z, t);
            const auto rec = reconstruct_clean(s, perturb(s, x0, z, t), v, t);
            EXPECT_LT(max_abs_diff(rec, x0), 1e-12) << to_string(k) << " t=" << t;
        }
    }
}

TEST(ReconstructClean, MatchesPredictorOnTrigflow) {
    Schedule s;
    const auto x = random_points(16, 13), v = random_points(16, 14);
    const double t = 0.9;
    EXPECT_EQ(reconstruct_clean(s, x, v, t), predict(s, constant_field(v), x, t).x_hat.points);
}

// Gradients of Chamfer(predict, x0) reach every model parameter.
TEST(PredictTensor, ChamferThroughPredictorPassesGradientCheck) {
    Schedule s;
    auto m = VelocityModel::init(21, ModelConfig{{16, 16}, 8, {16}, false});
    const auto x0 = random_points(8, 15), z = random_points(8, 16);
    const double t = 0.9;
    const auto x_t = perturb(s, x0, z, t);
    const auto r = trigcm::testing::grad_check(m, [&] { return chamfer_tensor(predict_tensor(s, x_t, m.forward(x_t, t), t), x0); });
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(PredictWithOracle, ErrorNormScalesWithSinT) {
    Schedule s;
    const auto x0 = random_points(50, 17), z = random_points(50, 18), eps = random_points(50, 19);
    for (double t : {0.2, 0.8, 1.5}) {
        auto v = analytic_velocity(s, x0, z, t);
        for (std::size_t i = 0; i < v.size(); ++i)
            for (int k = 0; k < 3; ++k) v[i][k] += eps[i][k];
        auto x_hat = predict(s, constant_field(v), perturb(s, x0, z, t), t).x_hat.points;
        for (std::size_t i = 0; i < x_hat.size(); ++i)
            for (int k = 0; k < 3; ++k) x_hat[i][k] -= x0[i][k];
        EXPECT_NEAR(frobenius(x_hat) / (std::sin(t) * frobenius(eps)), 1.0, 1e-12);
    }
}
