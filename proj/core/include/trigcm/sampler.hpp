#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "trigcm/pointcloud.hpp"
#include "trigcm/predictor.hpp"
#include "trigcm/schedule.hpp"

namespace trigcm {

enum class SampleMethod { single_step, euler, heun };

std::string_view to_string(SampleMethod method);
// Accepts "single" as well as "single_step".
SampleMethod parse_sample_method(std::string_view text);

struct SampleConfig {
    std::size_t steps = 1;
    SampleMethod method = SampleMethod::single_step;
    std::uint64_t seed = 0;
    std::size_t points = 2048;
    // Heun: advance along the averaged-slope trial instead of the Euler step.
    bool heun_advance = false;
    // Euler/Heun: replace the last step (from t = dt to 0) by the
    // closed-form predictor at t = dt.
    bool final_predictor = false;

    void validate() const;
};

struct SampleResult {
    PointCloud cloud;
    std::size_t evaluations = 0;     // calls to the velocity field
    std::vector<double> local_errors;  // Heun only: |trial - euler| per step
};

// x_T ~ N(0, sigma_d^2 I) for sample `index`, from its own counter stream.
Points draw_noise(std::uint64_t seed, std::uint64_t index, std::size_t points, double sigma_d);

// x0_hat = f(x_T, t_max). On trigflow this is -sigma_d F(x_T / sigma_d, pi/2).
SampleResult sample_single(const Schedule& s, const VelocityField& field, const Points& x_T);

// Explicit Euler on dx/dt = sigma_d F(x / sigma_d, t) over the uniform grid
// t_k = t_max (S - k) / S, ending exactly at t = 0.
SampleResult sample_euler(const Schedule& s, const VelocityField& field, const Points& x_T,
                          const SampleConfig& cfg);

// Per step: Euler proposal, slope at the proposal, averaged-slope trial.
// |trial - euler| is reported as the local error; the state follows the
// Euler proposal unless cfg.heun_advance is set.
SampleResult sample_heun(const Schedule& s, const VelocityField& field, const Points& x_T,
                         const SampleConfig& cfg);

// Dispatch on cfg.method with noise draw_noise(cfg.seed, index, ...).
SampleResult generate_sample(const Schedule& s, const VelocityField& field, const SampleConfig& cfg,
                             std::uint64_t index);
SampleResult run_sampler(const Schedule& s, const VelocityField& field, const Points& x_T,
                         const SampleConfig& cfg);

// Single-step samples along z_a = (1 - a) z1 + a z2 for a = k / (K - 1).
std::vector<PointCloud> interpolate(const Schedule& s, const VelocityField& field, const Points& z1,
                                    const Points& z2, std::size_t count);

}  // namespace trigcm
