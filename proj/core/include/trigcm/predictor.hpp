#pragma once

#include <functional>

#include "trigcm/model.hpp"
#include "trigcm/pointcloud.hpp"
#include "trigcm/schedule.hpp"
#include "trigcm/tensor.hpp"

namespace trigcm {

// F(x_scaled, t): the raw network output, before multiplication by sigma_d.
using VelocityField = std::function<Points(const Points& x_scaled, double t)>;

VelocityField model_field(const VelocityModel& model);

struct PredictorOutput {
    PointCloud x_hat;
    Points v;  // network velocity F(x_t / sigma_d, t)
};

// Closed-form consistency predictor on the TrigFlow path:
//   x_hat = cos t * x_t - sin t * sigma_d * F(x_t / sigma_d, t).
// Throws DomainError for any other schedule.
PredictorOutput predict(const Schedule& s, const VelocityField& field, const Points& x_t, double t);
PredictorOutput predict(const Schedule& s, const VelocityModel& model, const Points& x_t, double t);

// Same map on the tape: `velocity` is F's output as a tensor.
Tensor predict_tensor(const Schedule& s, const Points& x_t, const Tensor& velocity, double t);

// Substitutes the analytic velocity for the network, so the result is x0
// up to rounding for every t.
Points predict_with_oracle(const Schedule& s, const Points& x0, const Points& z, double t);

// Clean-sample estimate for a general schedule, obtained by solving
//   x_t = alpha x0 + sigma z,  v = alpha' x0 + sigma' z
// for x0 with v = sigma_d * F. Used by the schedule ablation only; on
// TrigFlow it coincides with `predict_tensor`.
Tensor reconstruct_clean_tensor(const Schedule& s, const Points& x_t, const Tensor& velocity, double t);
Points reconstruct_clean(const Schedule& s, const Points& x_t, const Points& velocity, double t);

}  // namespace trigcm
