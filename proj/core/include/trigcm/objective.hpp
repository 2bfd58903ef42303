#pragma once

#include <string_view>

#include "trigcm/model.hpp"
#include "trigcm/pointcloud.hpp"
#include "trigcm/schedule.hpp"
#include "trigcm/tensor.hpp"

namespace trigcm {

enum class LossMode { fm_chamfer, fm_only, chamfer_only };
enum class LambdaMode { linear_ramp, fixed };
enum class FmNormalization { per_point, raw };

std::string_view to_string(LossMode mode);
std::string_view to_string(LambdaMode mode);
std::string_view to_string(FmNormalization mode);
LossMode parse_loss_mode(std::string_view text);
LambdaMode parse_lambda_mode(std::string_view text);
FmNormalization parse_fm_normalization(std::string_view text);

struct ObjectiveConfig {
    LossMode loss_mode = LossMode::fm_chamfer;
    LambdaMode lambda_mode = LambdaMode::linear_ramp;
    double lambda_fixed = 0.3;
    double lambda_min = 0.1;
    double lambda_max = 0.3;
    FmNormalization fm_normalization = FmNormalization::per_point;
};

// l_total = fm_weight * l_fm + lambda_cd * l_cd. fm_weight is 1 except in
// chamfer_only mode, where it is 0 and lambda_cd is 1.
struct LossBreakdown {
    double fm_weight = 1.0;
    double l_fm = 0.0;
    double l_cd = 0.0;
    double lambda_cd = 0.0;
    double l_total = 0.0;
    Tensor total;  // differentiable l_total
};

// Chamfer weight at time t. linear_ramp: lambda_min + (lambda_max - lambda_min) t / t_max.
double lambda_schedule(double t, double t_max, const ObjectiveConfig& cfg = {});

// |sigma_d v_pred - (cos t z - sin t x0)|^2, divided by M under per_point
// normalization. The target generalizes to alpha' x0 + sigma' z.
double fm_loss(const Schedule& s, const Points& v_pred, const Points& x0, const Points& z, double t,
               FmNormalization norm = FmNormalization::per_point);
Tensor fm_loss_tensor(const Schedule& s, const Tensor& v_pred, const Points& x0, const Points& z, double t,
                      FmNormalization norm = FmNormalization::per_point);

// Symmetric squared Chamfer distance, each direction averaged over its
// own point count.
double chamfer(const Points& a, const Points& b);
double chamfer(const PointCloud& a, const PointCloud& b);
double chamfer_brute_force(const Points& a, const Points& b);

// Chamfer(pred, target) on the tape; gradients flow to `pred` through the
// selected nearest neighbors only.
Tensor chamfer_tensor(const Tensor& pred, const Points& target);

// Losses from an already computed network velocity F(x_t / sigma_d, t).
LossBreakdown evaluate_losses(const Schedule& s, const Tensor& velocity, const Points& x0, const Points& z,
                              double t, const ObjectiveConfig& cfg = {});

// perturb -> forward -> predict -> losses, recorded on the active tape.
LossBreakdown total_loss(const Schedule& s, const VelocityModel& model, const Points& x0, const Points& z,
                         double t, const ObjectiveConfig& cfg = {});

}  // namespace trigcm
