#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trigcm/pointcloud.hpp"
#include "trigcm/tensor.hpp"

namespace trigcm {

struct ModelConfig {
    std::vector<std::size_t> point_widths{64, 128};  // shared per-point MLP after the 3-d input
    std::size_t time_dim = 64;                       // sinusoidal embedding width (even)
    std::vector<std::size_t> head_widths{128};       // hidden layers before the 3-d output
    bool zero_output = true;                         // zero-initialize the final layer
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Concatenation [sin(t w_k)..., cos(t w_k)...] with w_k = 10000^(-2k/dim).
std::vector<double> time_embedding(double t, std::size_t dim);

// Permutation-equivariant velocity network F(x_scaled, t).
//
// A shared per-point MLP produces point features; a max over points gives a
// global feature, to which a two-layer map of the time embedding is added.
// The head sees every point feature together with the conditioned global
// feature and emits three channels per point.
class VelocityModel {
   public:
    VelocityModel() = default;
    // Copies own fresh parameter storage.
    VelocityModel(const VelocityModel& other);
    VelocityModel& operator=(const VelocityModel& other);
    VelocityModel(VelocityModel&&) noexcept = default;
    VelocityModel& operator=(VelocityModel&&) noexcept = default;

    static VelocityModel init(std::uint64_t seed, const ModelConfig& config);

    const ModelConfig& config() const { return config_; }

    // Records on the active tape. Throws DomainError on non-finite input.
    Tensor forward(const Tensor& x_scaled, double t) const;
    Tensor forward(const Points& x_scaled, double t) const;

    // Tape-free evaluation.
    Points evaluate(const Points& x_scaled, double t) const;

    std::vector<NamedTensor>& parameters() { return params_; }
    const std::vector<NamedTensor>& parameters() const { return params_; }
    std::size_t parameter_count() const;

    void zero_grad();

    // Copies values from a list with identical names and shapes.
    void load_parameters(const std::vector<NamedTensor>& values);

   private:
    ModelConfig config_;
    // Fixed order: point.{i}.{weight,bias}, time.{0,1}.{weight,bias},
    // head.0.{point_weight,global_weight,bias}, head.{i}.{weight,bias},
    // out.{weight,bias}. Weights are [in, out].
    std::vector<NamedTensor> params_;
};

Tensor points_to_tensor(const Points& points);
Points tensor_to_points(const Tensor& t);

}  // namespace trigcm
