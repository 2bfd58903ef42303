#include "trigcm/predictor.hpp"

#include <string>

#include "trigcm/error.hpp"

namespace trigcm {

namespace {

void require_trigflow(const Schedule& s) {
    if (s.kind() != ScheduleKind::trigflow) {
        throw DomainError("predict: unsupported schedule '" + std::string(to_string(s.kind())) +
                          "', the closed-form predictor is defined on trigflow only");
    }
}

// a * x + b * v, elementwise.
Tensor affine(double a, const Points& x, double b, const Tensor& v) {
    if (v.rank() != 2 || v.dim(0) != x.size() || v.dim(1) != 3) {
        throw ShapeError("predict: velocity " + shape_to_string(v.shape()) + " does not match [" +
                         std::to_string(x.size()) + ",3]");
    }
    Points scaled(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int k = 0; k < 3; ++k) scaled[i][k] = a * x[i][k];
    return ops::add(points_to_tensor(scaled), ops::scale(v, b));
}

}  // namespace

VelocityField model_field(const VelocityModel& model) {
    return [&model](const Points& x_scaled, double t) { return model.evaluate(x_scaled, t); };
}

PredictorOutput predict(const Schedule& s, const VelocityField& field, const Points& x_t, double t) {
    require_trigflow(s);
    const auto c = s.at(t);
    const double sd = s.sigma_d();
    Points scaled(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i)
        for (int k = 0; k < 3; ++k) scaled[i][k] = x_t[i][k] / sd;
    PredictorOutput out;
    out.v = field(scaled, t);
    if (out.v.size() != x_t.size()) {
        throw ShapeError("predict: field returned " + std::to_string(out.v.size()) + " rows for " +
                         std::to_string(x_t.size()) + " points");
    }
    out.x_hat.points.resize(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i)
        for (int k = 0; k < 3; ++k) out.x_hat.points[i][k] = c.alpha * x_t[i][k] - c.sigma * sd * out.v[i][k];
    return out;
}

PredictorOutput predict(const Schedule& s, const VelocityModel& model, const Points& x_t, double t) {
    return predict(s, model_field(model), x_t, t);
}

Tensor predict_tensor(const Schedule& s, const Points& x_t, const Tensor& velocity, double t) {
    require_trigflow(s);
    const auto c = s.at(t);
    return affine(c.alpha, x_t, -c.sigma * s.sigma_d(), velocity);
}

Points predict_with_oracle(const Schedule& s, const Points& x0, const Points& z, double t) {
    const Points target = analytic_velocity(s, x0, z, t);
    const Points x_t = perturb(s, x0, z, t);
    const double sd = s.sigma_d();
    // F = target / sigma_d makes sigma_d * F reproduce the analytic velocity.
    auto oracle = [&](const Points&, double) {
        Points v = target;
        for (auto& p : v)
            for (double& c : p) c /= sd;
        return v;
    };
    return predict(s, oracle, x_t, t).x_hat.points;
}

Tensor reconstruct_clean_tensor(const Schedule& s, const Points& x_t, const Tensor& velocity, double t) {
    if (s.kind() == ScheduleKind::trigflow) return predict_tensor(s, x_t, velocity, t);
    const auto c = s.at(t);
    const double det = c.d_sigma * c.alpha - c.sigma * c.d_alpha;
    return affine(c.d_sigma / det, x_t, -c.sigma * s.sigma_d() / det, velocity);
}

Points reconstruct_clean(const Schedule& s, const Points& x_t, const Points& velocity, double t) {
    NoGradScope no_grad;
    return tensor_to_points(reconstruct_clean_tensor(s, x_t, points_to_tensor(velocity), t));
}

}  // namespace trigcm
