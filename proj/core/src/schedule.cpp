#include "trigcm/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "trigcm/error.hpp"

namespace trigcm {

namespace {

void require_same_size(const Points& a, const Points& b, const char* op) {
    if (a.size() != b.size()) {
        throw ShapeError(std::string(op) + ": shape mismatch [" + std::to_string(a.size()) + ",3] vs [" +
                         std::to_string(b.size()) + ",3]");
    }
}

Points combine(double ca, const Points& a, double cb, const Points& b) {
    Points out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int k = 0; k < 3; ++k) out[i][k] = ca * a[i][k] + cb * b[i][k];
    return out;
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::trigflow: return "trigflow";
        case ScheduleKind::linear_fm: return "linear_fm";
        case ScheduleKind::cosine_ddpm: return "cosine_ddpm";
    }
    return "?";
}

ScheduleKind parse_schedule_kind(std::string_view text) {
    if (text == "trigflow") return ScheduleKind::trigflow;
    if (text == "linear_fm" || text == "linear") return ScheduleKind::linear_fm;
    if (text == "cosine_ddpm" || text == "cosine") return ScheduleKind::cosine_ddpm;
    throw DomainError("unknown schedule '" + std::string(text) + "'");
}

Schedule::Schedule(ScheduleKind kind, double sigma_d) : kind_(kind), sigma_d_(sigma_d) {
    if (!(sigma_d > 0.0) || !std::isfinite(sigma_d)) {
        throw DomainError("schedule: sigma_d must be positive, got " + std::to_string(sigma_d));
    }
}

double Schedule::t_max() const { return kind_ == ScheduleKind::trigflow ? std::numbers::pi / 2.0 : 1.0; }

ScheduleCoefficients Schedule::at(double t) const {
    if (!(t >= 0.0 && t <= t_max())) {
        throw DomainError("schedule " + std::string(to_string(kind_)) + ": t=" + std::to_string(t) +
                          " outside [0, " + std::to_string(t_max()) + "]");
    }
    // cos(pi/2) evaluates to 6e-17 in double; pin the pure-noise endpoint.
    const bool endpoint = t == t_max() && kind_ != ScheduleKind::linear_fm;
    switch (kind_) {
        case ScheduleKind::trigflow: {
            if (endpoint) return {0.0, 1.0, -1.0, 0.0};
            const double c = std::cos(t), s = std::sin(t);
            return {c, s, -s, c};
        }
        case ScheduleKind::linear_fm:
            return {1.0 - t, t, -1.0, 1.0};
        case ScheduleKind::cosine_ddpm: {
            constexpr double w = std::numbers::pi / 2.0;
            if (endpoint) return {0.0, 1.0, -w, 0.0};
            const double c = std::cos(w * t), s = std::sin(w * t);
            return {c, s, -w * s, w * c};
        }
    }
    return {1.0, 0.0, 0.0, 0.0};
}

Points perturb(const Schedule& s, const Points& x0, const Points& z, double t) {
    require_same_size(x0, z, "perturb");
    const auto c = s.at(t);
    return combine(c.alpha, x0, c.sigma, z);
}

Points analytic_velocity(const Schedule& s, const Points& x0, const Points& z, double t) {
    require_same_size(x0, z, "analytic_velocity");
    const auto c = s.at(t);
    return combine(c.d_alpha, x0, c.d_sigma, z);
}

}  // namespace trigcm
