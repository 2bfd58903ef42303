#include "trigcm/sampler.hpp"

#include <cmath>
#include <string>

#include "trigcm/error.hpp"
#include "trigcm/random.hpp"

namespace trigcm {

namespace {

Points velocity(const Schedule& s, const VelocityField& field, const Points& x, double t) {
    const double sd = s.sigma_d();
    Points scaled(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int k = 0; k < 3; ++k) scaled[i][k] = x[i][k] / sd;
    Points v = field(scaled, t);
    if (v.size() != x.size()) {
        throw ShapeError("sampler: field returned " + std::to_string(v.size()) + " rows for " +
                         std::to_string(x.size()) + " points");
    }
    for (auto& p : v)
        for (double& c : p) c *= sd;
    return v;
}

// x + h * v
Points axpy(const Points& x, double h, const Points& v) {
    Points out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int k = 0; k < 3; ++k) out[i][k] = x[i][k] + h * v[i][k];
    return out;
}

double distance(const Points& a, const Points& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int k = 0; k < 3; ++k) sq += (a[i][k] - b[i][k]) * (a[i][k] - b[i][k]);
    return std::sqrt(sq);
}

double grid_time(const Schedule& s, std::size_t k, std::size_t steps) {
    return s.t_max() * static_cast<double>(steps - k) / static_cast<double>(steps);
}

Points clean_estimate(const Schedule& s, const VelocityField& field, const Points& x, double t) {
    Points v = velocity(s, field, x, t);
    for (auto& p : v)
        for (double& c : p) c /= s.sigma_d();
    return reconstruct_clean(s, x, v, t);
}

void require_steps(const SampleConfig& cfg) {
    if (cfg.steps == 0) throw DomainError("sampler: steps must be at least 1");
}

}  // namespace

std::string_view to_string(SampleMethod method) {
    switch (method) {
        case SampleMethod::single_step: return "single";
        case SampleMethod::euler: return "euler";
        case SampleMethod::heun: return "heun";
    }
    return "?";
}

SampleMethod parse_sample_method(std::string_view text) {
    if (text == "single" || text == "single_step") return SampleMethod::single_step;
    if (text == "euler") return SampleMethod::euler;
    if (text == "heun") return SampleMethod::heun;
    throw DomainError("unknown sampling method '" + std::string(text) + "'");
}

void SampleConfig::validate() const {
    require_steps(*this);
    if (points == 0) throw DomainError("sampler: points must be positive");
}

Points draw_noise(std::uint64_t seed, std::uint64_t index, std::size_t points, double sigma_d) {
    Rng rng(seed, stream_id("sample", {index}));
    Points z(points);
    for (auto& p : z)
        for (double& c : p) c = rng.normal(0.0, sigma_d);
    return z;
}

SampleResult sample_single(const Schedule& s, const VelocityField& field, const Points& x_T) {
    SampleResult out;
    out.cloud.points = clean_estimate(s, field, x_T, s.t_max());
    out.evaluations = 1;
    return out;
}

SampleResult sample_euler(const Schedule& s, const VelocityField& field, const Points& x_T,
                          const SampleConfig& cfg) {
    require_steps(cfg);
    const double dt = s.t_max() / static_cast<double>(cfg.steps);
    SampleResult out;
    Points x = x_T;
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const double t = grid_time(s, k, cfg.steps);
        ++out.evaluations;
        if (cfg.final_predictor && k + 1 == cfg.steps) {
            x = clean_estimate(s, field, x, t);
        } else {
            x = axpy(x, -dt, velocity(s, field, x, t));
        }
    }
    out.cloud.points = std::move(x);
    return out;
}

SampleResult sample_heun(const Schedule& s, const VelocityField& field, const Points& x_T,
                         const SampleConfig& cfg) {
    require_steps(cfg);
    const double dt = s.t_max() / static_cast<double>(cfg.steps);
    SampleResult out;
    Points x = x_T;
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const double t = grid_time(s, k, cfg.steps);
        const double t_next = grid_time(s, k + 1, cfg.steps);
        const Points v1 = velocity(s, field, x, t);
        const Points euler = axpy(x, -dt, v1);
        const Points v2 = velocity(s, field, euler, t_next);
        out.evaluations += 2;
        Points trial(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            for (int c = 0; c < 3; ++c) trial[i][c] = x[i][c] - 0.5 * dt * (v1[i][c] + v2[i][c]);
        out.local_errors.push_back(distance(trial, euler));

        if (cfg.final_predictor && k + 1 == cfg.steps) {
            x = clean_estimate(s, field, x, t);
            ++out.evaluations;
        } else {
            x = cfg.heun_advance ? std::move(trial) : euler;
        }
    }
    out.cloud.points = std::move(x);
    return out;
}

SampleResult run_sampler(const Schedule& s, const VelocityField& field, const Points& x_T,
                         const SampleConfig& cfg) {
    switch (cfg.method) {
        case SampleMethod::single_step: return sample_single(s, field, x_T);
        case SampleMethod::euler: return sample_euler(s, field, x_T, cfg);
        case SampleMethod::heun: return sample_heun(s, field, x_T, cfg);
    }
    throw DomainError("sampler: unknown method");
}

SampleResult generate_sample(const Schedule& s, const VelocityField& field, const SampleConfig& cfg,
                             std::uint64_t index) {
    cfg.validate();
    return run_sampler(s, field, draw_noise(cfg.seed, index, cfg.points, s.sigma_d()), cfg);
}

std::vector<PointCloud> interpolate(const Schedule& s, const VelocityField& field, const Points& z1,
                                    const Points& z2, std::size_t count) {
    if (count < 2) throw DomainError("interpolate: need at least 2 frames");
    if (z1.size() != z2.size()) {
        throw ShapeError("interpolate: noise sizes " + std::to_string(z1.size()) + " and " +
                         std::to_string(z2.size()) + " differ");
    }
    std::vector<PointCloud> frames;
    for (std::size_t k = 0; k < count; ++k) {
        const double a = static_cast<double>(k) / static_cast<double>(count - 1);
        Points z(z1.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            for (int c = 0; c < 3; ++c) z[i][c] = (1.0 - a) * z1[i][c] + a * z2[i][c];
        frames.push_back(sample_single(s, field, z).cloud);
    }
    return frames;
}

}  // namespace trigcm
