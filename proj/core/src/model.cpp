#include "trigcm/model.hpp"

#include <cmath>

#include "trigcm/error.hpp"
#include "trigcm/random.hpp"

namespace trigcm {

namespace {

void check_config(const ModelConfig& c) {
    if (c.point_widths.empty() || c.head_widths.empty()) {
        throw DomainError("model: point_widths and head_widths must be non-empty");
    }
    for (auto w : c.point_widths)
        if (w == 0) throw DomainError("model: point width must be positive");
    for (auto w : c.head_widths)
        if (w == 0) throw DomainError("model: head width must be positive");
    if (c.time_dim == 0 || c.time_dim % 2 != 0) {
        throw DomainError("model: time_dim must be positive and even, got " + std::to_string(c.time_dim));
    }
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return ops::add_row(ops::matmul(x, w), b); }

}  // namespace

std::vector<double> time_embedding(double t, std::size_t dim) {
    if (dim == 0 || dim % 2 != 0) {
        throw DomainError("time_embedding: dimension must be positive and even, got " + std::to_string(dim));
    }
    const std::size_t half = dim / 2;
    std::vector<double> out(dim);
    for (std::size_t k = 0; k < half; ++k) {
        const double freq = std::pow(10000.0, -2.0 * static_cast<double>(k) / static_cast<double>(dim));
        out[k] = std::sin(t * freq);
        out[half + k] = std::cos(t * freq);
    }
    return out;
}

Tensor points_to_tensor(const Points& points) {
    std::vector<double> data;
    data.reserve(points.size() * 3);
    for (const auto& p : points) data.insert(data.end(), p.begin(), p.end());
    return Tensor({points.size(), 3}, std::move(data));
}

Points tensor_to_points(const Tensor& t) {
    if (t.rank() != 2 || t.dim(1) != 3) {
        throw ShapeError("expected a [M,3] tensor, got " + shape_to_string(t.shape()));
    }
    Points out(t.dim(0));
    auto d = t.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
    return out;
}

VelocityModel::VelocityModel(const VelocityModel& other) : config_(other.config_) {
    params_.reserve(other.params_.size());
    for (const auto& p : other.params_) {
        params_.push_back({p.name, Tensor::parameter(p.tensor.shape(),
                                                     std::vector<double>(p.tensor.data().begin(),
                                                                         p.tensor.data().end()))});
    }
}

VelocityModel& VelocityModel::operator=(const VelocityModel& other) {
    if (this != &other) *this = VelocityModel(other);
    return *this;
}

VelocityModel VelocityModel::init(std::uint64_t seed, const ModelConfig& config) {
    check_config(config);
    VelocityModel m;
    m.config_ = config;

    auto add = [&](const std::string& name, std::size_t in, std::size_t out, bool zero) {
        const std::uint64_t index = m.params_.size();
        std::vector<double> w(in * out, 0.0);
        if (!zero) {
            // He-uniform: variance 2 / fan_in.
            const double bound = std::sqrt(6.0 / static_cast<double>(in));
            Rng rng(seed, stream_id("init", {index}));
            for (double& v : w) v = rng.uniform(-bound, bound);
        }
        m.params_.push_back({name, Tensor::parameter({in, out}, std::move(w))});
    };
    auto add_bias = [&](const std::string& name, std::size_t out) {
        m.params_.push_back({name, Tensor::parameter({out}, std::vector<double>(out, 0.0))});
    };

    std::size_t width = 3;
    for (std::size_t i = 0; i < config.point_widths.size(); ++i) {
        const std::string p = "point." + std::to_string(i) + ".";
        add(p + "weight", width, config.point_widths[i], false);
        add_bias(p + "bias", config.point_widths[i]);
        width = config.point_widths[i];
    }
    const std::size_t global = width;
    add("time.0.weight", config.time_dim, global, false);
    add_bias("time.0.bias", global);
    add("time.1.weight", global, global, false);
    add_bias("time.1.bias", global);

    const std::size_t h0 = config.head_widths[0];
    add("head.0.point_weight", global, h0, false);
    add("head.0.global_weight", global, h0, false);
    add_bias("head.0.bias", h0);
    width = h0;
    for (std::size_t i = 1; i < config.head_widths.size(); ++i) {
        const std::string p = "head." + std::to_string(i) + ".";
        add(p + "weight", width, config.head_widths[i], false);
        add_bias(p + "bias", config.head_widths[i]);
        width = config.head_widths[i];
    }
    add("out.weight", width, 3, config.zero_output);
    add_bias("out.bias", 3);
    return m;
}

Tensor VelocityModel::forward(const Tensor& x_scaled, double t) const {
    if (params_.empty()) throw DomainError("model: forward on an uninitialized model");
    if (x_scaled.rank() != 2 || x_scaled.dim(1) != 3 || x_scaled.dim(0) == 0) {
        throw ShapeError("model: expected input [M,3] with M >= 1, got " + shape_to_string(x_scaled.shape()));
    }
    for (double v : x_scaled.data()) {
        if (!std::isfinite(v)) throw DomainError("model: non-finite input coordinate");
    }
    if (!std::isfinite(t)) throw DomainError("model: non-finite time");

    std::size_t k = 0;
    auto next = [&]() -> const Tensor& { return params_[k++].tensor; };

    Tensor h = x_scaled;
    for (std::size_t i = 0; i < config_.point_widths.size(); ++i) {
        const Tensor& w = next();
        const Tensor& b = next();
        h = ops::silu(linear(h, w, b));
    }
    const std::size_t global = h.dim(1);
    Tensor pooled = ops::reshape(ops::max(h, 0).values, {1, global});

    Tensor emb({1, config_.time_dim}, time_embedding(t, config_.time_dim));
    const Tensor& tw0 = next();
    const Tensor& tb0 = next();
    const Tensor& tw1 = next();
    const Tensor& tb1 = next();
    Tensor temb = linear(ops::silu(linear(emb, tw0, tb0)), tw1, tb1);
    Tensor conditioned = ops::add(pooled, temb);

    // [h | broadcast(g)] W == h W_point + broadcast(g W_global)
    const Tensor& hw_point = next();
    const Tensor& hw_global = next();
    const Tensor& hb = next();
    Tensor global_term = ops::add(ops::reshape(ops::matmul(conditioned, hw_global), {hb.numel()}), hb);
    Tensor f = ops::silu(ops::add_row(ops::matmul(h, hw_point), global_term));
    for (std::size_t i = 1; i < config_.head_widths.size(); ++i) {
        const Tensor& w = next();
        const Tensor& b = next();
        f = ops::silu(linear(f, w, b));
    }
    const Tensor& ow = next();
    const Tensor& ob = next();
    return linear(f, ow, ob);
}

Tensor VelocityModel::forward(const Points& x_scaled, double t) const {
    return forward(points_to_tensor(x_scaled), t);
}

Points VelocityModel::evaluate(const Points& x_scaled, double t) const {
    NoGradScope no_grad;
    return tensor_to_points(forward(x_scaled, t));
}

std::size_t VelocityModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
}

void VelocityModel::zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
}

void VelocityModel::load_parameters(const std::vector<NamedTensor>& values) {
    if (values.size() != params_.size()) {
        throw ShapeError("model: expected " + std::to_string(params_.size()) + " parameter tensors, got " +
                         std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].name != params_[i].name || values[i].tensor.shape() != params_[i].tensor.shape()) {
            throw ShapeError("model: parameter '" + values[i].name + "' " +
                             shape_to_string(values[i].tensor.shape()) + " does not match '" + params_[i].name +
                             "' " + shape_to_string(params_[i].tensor.shape()));
        }
        auto src = values[i].tensor.data();
        auto dst = params_[i].tensor.mutable_data();
        std::copy(src.begin(), src.end(), dst.begin());
    }
}

}  // namespace trigcm
