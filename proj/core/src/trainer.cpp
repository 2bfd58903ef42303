#include "trigcm/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "trigcm/error.hpp"
#include "trigcm/random.hpp"

namespace trigcm {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string("train config: ") + name + " must be positive");
    }
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed, stream_id("shuffle", {epoch}));
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

}  // namespace

void TrainConfig::validate() const {
    require_positive(lr, "lr");
    require_positive(clip_norm, "clip_norm");
    require_positive(sigma_d, "sigma_d");
    require_positive(eps, "adam_eps");
    if (batch_size == 0) throw DomainError("train config: batch_size must be positive");
    if (epochs == 0) throw DomainError("train config: epochs must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw DomainError("train config: Adam betas must lie in [0, 1)");
    }
    if (model.time_dim == 0 || model.time_dim % 2 != 0) {
        throw DomainError("train config: time_dim must be a positive even number");
    }
    if (model.point_widths.empty()) throw DomainError("train config: point_widths must not be empty");
}

const std::vector<std::string>& TrainConfig::keys() {
    static const std::vector<std::string> k{
        "lr",          "batch_size",  "epochs",       "clip_norm",    "sigma_d",          "seed",
        "schedule",    "loss_mode",   "lambda_mode",  "lambda_fixed", "lambda_min",       "lambda_max",
        "fm_normalization", "point_widths", "time_dim", "head_widths", "zero_output", "adam_beta1",
        "adam_beta2",  "adam_eps"};
    return k;
}

KeyValueConfig TrainConfig::to_config() const {
    KeyValueConfig c;
    c.set("lr", lr);
    c.set("batch_size", static_cast<std::uint64_t>(batch_size));
    c.set("epochs", static_cast<std::uint64_t>(epochs));
    c.set("clip_norm", clip_norm);
    c.set("sigma_d", sigma_d);
    c.set("seed", seed);
    c.set("schedule", std::string(to_string(schedule)));
    c.set("loss_mode", std::string(to_string(objective.loss_mode)));
    c.set("lambda_mode", std::string(to_string(objective.lambda_mode)));
    c.set("lambda_fixed", objective.lambda_fixed);
    c.set("lambda_min", objective.lambda_min);
    c.set("lambda_max", objective.lambda_max);
    c.set("fm_normalization", std::string(to_string(objective.fm_normalization)));
    c.set("point_widths", model.point_widths);
    c.set("time_dim", static_cast<std::uint64_t>(model.time_dim));
    c.set("head_widths", model.head_widths);
    c.set("zero_output", model.zero_output);
    c.set("adam_beta1", beta1);
    c.set("adam_beta2", beta2);
    c.set("adam_eps", eps);
    return c;
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& c) {
    TrainConfig t;
    t.lr = c.get_double("lr", t.lr);
    t.batch_size = c.get_uint("batch_size", t.batch_size);
    t.epochs = c.get_uint("epochs", t.epochs);
    t.clip_norm = c.get_double("clip_norm", t.clip_norm);
    t.sigma_d = c.get_double("sigma_d", t.sigma_d);
    t.seed = c.get_uint("seed", t.seed);
    if (auto s = c.get("schedule")) t.schedule = parse_schedule_kind(*s);
    if (auto s = c.get("loss_mode")) t.objective.loss_mode = parse_loss_mode(*s);
    if (auto s = c.get("lambda_mode")) t.objective.lambda_mode = parse_lambda_mode(*s);
    t.objective.lambda_fixed = c.get_double("lambda_fixed", t.objective.lambda_fixed);
    t.objective.lambda_min = c.get_double("lambda_min", t.objective.lambda_min);
    t.objective.lambda_max = c.get_double("lambda_max", t.objective.lambda_max);
    if (auto s = c.get("fm_normalization")) t.objective.fm_normalization = parse_fm_normalization(*s);
    t.model.point_widths = c.get_sizes("point_widths", t.model.point_widths);
    t.model.time_dim = c.get_uint("time_dim", t.model.time_dim);
    t.model.head_widths = c.get_sizes("head_widths", t.model.head_widths);
    t.model.zero_output = c.get_bool("zero_output", t.model.zero_output);
    t.beta1 = c.get_double("adam_beta1", t.beta1);
    t.beta2 = c.get_double("adam_beta2", t.beta2);
    t.eps = c.get_double("adam_eps", t.eps);
    return t;
}

AdamState AdamState::zeros_like(const VelocityModel& model) {
    AdamState s;
    for (const auto& p : model.parameters()) {
        s.m.emplace_back(p.tensor.numel(), 0.0);
        s.v.emplace_back(p.tensor.numel(), 0.0);
    }
    return s;
}

TrainState TrainState::init(const TrainConfig& config) {
    config.validate();
    TrainState s;
    s.config = config;
    s.model = VelocityModel::init(config.seed, config.model);
    s.adam = AdamState::zeros_like(s.model);
    return s;
}

double global_grad_norm(const VelocityModel& model) {
    double sq = 0.0;
    for (const auto& p : model.parameters()) {
        for (double g : p.tensor.grad()) sq += g * g;
    }
    return std::sqrt(sq);
}

double clip_gradients(VelocityModel& model, double max_norm) {
    const double norm = global_grad_norm(model);
    if (!(norm > max_norm)) return 1.0;
    const double factor = max_norm / norm;
    for (auto& p : model.parameters()) {
        if (!p.tensor.has_grad()) continue;
        for (double& g : p.tensor.mutable_grad()) g *= factor;
    }
    return factor;
}

void adam_step(VelocityModel& model, AdamState& state, double lr, double beta1, double beta2, double eps) {
    auto& params = model.parameters();
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError("adam: optimizer state does not match the model");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto data = params[k].tensor.mutable_data();
        const auto grad = params[k].tensor.grad();
        auto& m = state.m[k];
        auto& v = state.v[k];
        if (m.size() != data.size() || v.size() != data.size()) {
            throw ShapeError("adam: moment size mismatch for '" + params[k].name + "'");
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double g = grad.empty() ? 0.0 : grad[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            data[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
}

std::size_t batches_per_epoch(std::size_t dataset_size, std::size_t batch_size) {
    if (batch_size == 0) throw DomainError("batch_size must be positive");
    return (dataset_size + batch_size - 1) / batch_size;
}

BatchRecord train_batch(TrainState& state, const Dataset& data) {
    const TrainConfig& cfg = state.config;
    const std::size_t n = data.clouds.size();
    if (n == 0) throw DomainError("train: dataset is empty");
    const std::size_t n_batches = batches_per_epoch(n, cfg.batch_size);
    if (state.next_batch >= n_batches) throw DomainError("train: batch position beyond the epoch");

    const Schedule schedule(cfg.schedule, cfg.sigma_d);
    const auto order = epoch_order(cfg.seed, state.epoch, n);
    const std::size_t begin = static_cast<std::size_t>(state.next_batch) * cfg.batch_size;
    const std::size_t end = std::min(n, begin + cfg.batch_size);
    const double inv_b = 1.0 / static_cast<double>(end - begin);

    BatchRecord rec;
    rec.epoch = state.epoch;
    rec.batch = state.next_batch;
    rec.losses.fm_weight = 0.0;
    std::vector<double> ts;
    state.model.zero_grad();

    for (std::size_t k = begin; k < end; ++k) {
        const Points& x0 = data.clouds[order[k]].points;
        Rng rng(cfg.seed, stream_id("item", {state.epoch, state.next_batch, k - begin}));
        const double t = rng.uniform(0.0, schedule.t_max());
        Points z(x0.size());
        for (auto& p : z)
            for (double& c : p) c = rng.normal(0.0, cfg.sigma_d);
        ts.push_back(t);

        Tape tape;
        LossBreakdown lb;
        {
            TapeScope scope(tape);
            lb = total_loss(schedule, state.model, x0, z, t, cfg.objective);
            if (!std::isfinite(lb.l_total)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << state.epoch << ", batch " << state.next_batch << ", t values [";
                for (std::size_t i = 0; i < ts.size(); ++i) msg << (i ? ", " : "") << ts[i];
                msg << "]";
                throw TrainingError(msg.str());
            }
            tape.backward(ops::scale(lb.total, inv_b));
        }
        rec.losses.fm_weight += lb.fm_weight * inv_b;
        rec.losses.l_fm += lb.l_fm * inv_b;
        rec.losses.l_cd += lb.l_cd * inv_b;
        rec.losses.lambda_cd += lb.lambda_cd * inv_b;
        rec.losses.l_total += lb.l_total * inv_b;
    }

    rec.grad_norm = global_grad_norm(state.model);
    if (!std::isfinite(rec.grad_norm)) {
        throw TrainingError("non-finite gradient norm at epoch " + std::to_string(state.epoch) + ", batch " +
                            std::to_string(state.next_batch));
    }
    clip_gradients(state.model, cfg.clip_norm);
    adam_step(state.model, state.adam, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

    if (++state.next_batch == n_batches) {
        state.next_batch = 0;
        ++state.epoch;
    }
    return rec;
}

std::vector<BatchRecord> train_epoch(TrainState& state, const Dataset& data) {
    std::vector<BatchRecord> out;
    const std::uint64_t epoch = state.epoch;
    while (state.epoch == epoch) out.push_back(train_batch(state, data));
    return out;
}

double mean_total(const std::vector<BatchRecord>& records) {
    if (records.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : records) s += r.losses.l_total;
    return s / static_cast<double>(records.size());
}

void write_log_header(std::ostream& out) { out << "epoch,batch,l_fm,l_cd,lambda,l_total,grad_norm\n"; }

void write_log_row(std::ostream& out, const BatchRecord& r) {
    out << r.epoch << ',' << r.batch << ',' << format_double(r.losses.l_fm) << ','
        << format_double(r.losses.l_cd) << ',' << format_double(r.losses.lambda_cd) << ','
        << format_double(r.losses.l_total) << ',' << format_double(r.grad_norm) << '\n';
}

}  // namespace trigcm
