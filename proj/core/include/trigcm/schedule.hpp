#pragma once

#include <string_view>

#include "trigcm/pointcloud.hpp"

namespace trigcm {

enum class ScheduleKind { trigflow, linear_fm, cosine_ddpm };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view text);

// alpha_t, sigma_t and their time derivatives.
struct ScheduleCoefficients {
    double alpha;
    double sigma;
    double d_alpha;
    double d_sigma;
};

// Forward noising path x_t = alpha_t x0 + sigma_t z, z ~ N(0, sigma_d^2 I).
//
//   trigflow     alpha = cos t,        sigma = sin t,        t in [0, pi/2]
//   linear_fm    alpha = 1 - t,        sigma = t,            t in [0, 1]
//   cosine_ddpm  alpha = cos(pi t / 2), sigma = sin(pi t / 2), t in [0, 1]
class Schedule {
   public:
    explicit Schedule(ScheduleKind kind = ScheduleKind::trigflow, double sigma_d = 1.0);

    ScheduleKind kind() const { return kind_; }
    double sigma_d() const { return sigma_d_; }
    double t_max() const;

    // Throws DomainError when t lies outside [0, t_max].
    ScheduleCoefficients at(double t) const;

    // Loss weight w(t). The training objective uses w(t) = 1 for every kind.
    double weight(double /*t*/) const { return 1.0; }

   private:
    ScheduleKind kind_;
    double sigma_d_;
};

// x_t = alpha_t x0 + sigma_t z.
Points perturb(const Schedule& s, const Points& x0, const Points& z, double t);

// d x_t / dt = alpha'_t x0 + sigma'_t z. For trigflow this is
// cos t z - sin t x0, the flow-matching regression target.
Points analytic_velocity(const Schedule& s, const Points& x0, const Points& z, double t);

}  // namespace trigcm
