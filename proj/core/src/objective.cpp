#include "trigcm/objective.hpp"

#include <string>

#include "trigcm/error.hpp"
#include "trigcm/predictor.hpp"
#include "trigcm/spatial_index.hpp"

namespace trigcm {

namespace {

double directed_mean(const std::vector<Neighbor>& nn) {
    double s = 0.0;
    for (const auto& n : nn) s += n.distance_sq;
    return s / static_cast<double>(nn.size());
}

void require_nonempty(const Points& a, const Points& b) {
    if (a.empty() || b.empty()) throw DomainError("chamfer: empty point cloud");
}

}  // namespace

std::string_view to_string(LossMode mode) {
    switch (mode) {
        case LossMode::fm_chamfer: return "fm_chamfer";
        case LossMode::fm_only: return "fm_only";
        case LossMode::chamfer_only: return "chamfer_only";
    }
    return "?";
}

std::string_view to_string(LambdaMode mode) {
    return mode == LambdaMode::fixed ? "fixed" : "linear_ramp";
}

std::string_view to_string(FmNormalization mode) {
    return mode == FmNormalization::raw ? "raw" : "per_point";
}

LossMode parse_loss_mode(std::string_view text) {
    if (text == "fm_chamfer") return LossMode::fm_chamfer;
    if (text == "fm_only") return LossMode::fm_only;
    if (text == "chamfer_only") return LossMode::chamfer_only;
    throw DomainError("unknown loss mode '" + std::string(text) + "'");
}

LambdaMode parse_lambda_mode(std::string_view text) {
    if (text == "linear_ramp") return LambdaMode::linear_ramp;
    if (text == "fixed") return LambdaMode::fixed;
    throw DomainError("unknown lambda mode '" + std::string(text) + "'");
}

FmNormalization parse_fm_normalization(std::string_view text) {
    if (text == "per_point") return FmNormalization::per_point;
    if (text == "raw") return FmNormalization::raw;
    throw DomainError("unknown fm normalization '" + std::string(text) + "'");
}

double lambda_schedule(double t, double t_max, const ObjectiveConfig& cfg) {
    if (!(t >= 0.0 && t <= t_max)) {
        throw DomainError("lambda_schedule: t=" + std::to_string(t) + " outside [0, " + std::to_string(t_max) + "]");
    }
    if (cfg.lambda_mode == LambdaMode::fixed) return cfg.lambda_fixed;
    return cfg.lambda_min + (cfg.lambda_max - cfg.lambda_min) * (t / t_max);
}

Tensor fm_loss_tensor(const Schedule& s, const Tensor& v_pred, const Points& x0, const Points& z, double t,
                      FmNormalization norm) {
    const Points target = analytic_velocity(s, x0, z, t);
    if (v_pred.rank() != 2 || v_pred.dim(0) != x0.size() || v_pred.dim(1) != 3) {
        throw ShapeError("fm_loss: prediction " + shape_to_string(v_pred.shape()) + " vs target [" +
                         std::to_string(x0.size()) + ",3]");
    }
    Tensor sq = ops::sum_squares(ops::sub(ops::scale(v_pred, s.sigma_d()), points_to_tensor(target)));
    if (norm == FmNormalization::per_point) sq = ops::scale(sq, 1.0 / static_cast<double>(x0.size()));
    return sq;
}

double fm_loss(const Schedule& s, const Points& v_pred, const Points& x0, const Points& z, double t,
               FmNormalization norm) {
    NoGradScope no_grad;
    return fm_loss_tensor(s, points_to_tensor(v_pred), x0, z, t, norm).item();
}

double chamfer(const Points& a, const Points& b) {
    require_nonempty(a, b);
    return directed_mean(nearest_neighbors(a, b)) + directed_mean(nearest_neighbors(b, a));
}

double chamfer(const PointCloud& a, const PointCloud& b) { return chamfer(a.points, b.points); }

double chamfer_brute_force(const Points& a, const Points& b) {
    require_nonempty(a, b);
    return directed_mean(nearest_neighbors_brute_force(a, b)) +
           directed_mean(nearest_neighbors_brute_force(b, a));
}

Tensor chamfer_tensor(const Tensor& pred, const Points& target) {
    const Points p = tensor_to_points(pred);
    require_nonempty(p, target);
    auto fwd = nearest_neighbors(p, target);  // pred -> target
    auto bwd = nearest_neighbors(target, p);  // target -> pred
    const double value = directed_mean(fwd) + directed_mean(bwd);
    return make_op({pred}, {}, {value},
                   [p, target, fwd = std::move(fwd), bwd = std::move(bwd)](
                       std::span<const double> g, std::vector<std::span<double>>& in) {
                       const double ca = 2.0 * g[0] / static_cast<double>(p.size());
                       const double cb = 2.0 * g[0] / static_cast<double>(target.size());
                       for (std::size_t i = 0; i < p.size(); ++i) {
                           const Vec3& q = target[fwd[i].index];
                           for (int k = 0; k < 3; ++k) in[0][3 * i + k] += ca * (p[i][k] - q[k]);
                       }
                       for (std::size_t j = 0; j < target.size(); ++j) {
                           const std::size_t i = bwd[j].index;
                           for (int k = 0; k < 3; ++k) in[0][3 * i + k] += cb * (p[i][k] - target[j][k]);
                       }
                   });
}

LossBreakdown evaluate_losses(const Schedule& s, const Tensor& velocity, const Points& x0, const Points& z,
                              double t, const ObjectiveConfig& cfg) {
    const Points x_t = perturb(s, x0, z, t);
    Tensor fm = fm_loss_tensor(s, velocity, x0, z, t, cfg.fm_normalization);
    Tensor x_hat = reconstruct_clean_tensor(s, x_t, velocity, t);

    LossBreakdown out;
    out.l_fm = fm.item();
    switch (cfg.loss_mode) {
        case LossMode::fm_chamfer: {
            out.lambda_cd = lambda_schedule(t, s.t_max(), cfg);
            Tensor cd = chamfer_tensor(x_hat, x0);
            out.l_cd = cd.item();
            out.total = ops::add(fm, ops::scale(cd, out.lambda_cd));
            break;
        }
        case LossMode::fm_only:
            out.lambda_cd = 0.0;
            out.l_cd = chamfer(tensor_to_points(x_hat), x0);
            out.total = fm;
            break;
        case LossMode::chamfer_only: {
            out.fm_weight = 0.0;
            out.lambda_cd = 1.0;
            Tensor cd = chamfer_tensor(x_hat, x0);
            out.l_cd = cd.item();
            out.total = cd;
            break;
        }
    }
    out.l_total = out.total.item();
    return out;
}

LossBreakdown total_loss(const Schedule& s, const VelocityModel& model, const Points& x0, const Points& z,
                         double t, const ObjectiveConfig& cfg) {
    const Points x_t = perturb(s, x0, z, t);
    Points scaled = x_t;
    for (auto& p : scaled)
        for (double& c : p) c /= s.sigma_d();
    return evaluate_losses(s, model.forward(scaled, t), x0, z, t, cfg);
}

}  // namespace trigcm
