#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "trigcm/config.hpp"
#include "trigcm/model.hpp"
#include "trigcm/objective.hpp"
#include "trigcm/pointcloud.hpp"
#include "trigcm/schedule.hpp"

namespace trigcm {

struct TrainConfig {
    double lr = 1e-4;
    std::size_t batch_size = 64;
    std::size_t epochs = 300;
    double clip_norm = 1.0;
    double sigma_d = 1.0;
    std::uint64_t seed = 0;
    ScheduleKind schedule = ScheduleKind::trigflow;
    ObjectiveConfig objective;
    ModelConfig model;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    // Throws DomainError on a non-positive field or betas outside [0, 1).
    void validate() const;

    // Keys used by both the checkpoint header and run config files.
    static const std::vector<std::string>& keys();
    KeyValueConfig to_config() const;
    // Missing keys keep their defaults; unknown keys are ignored here so
    // callers can share one file across commands.
    static TrainConfig from_config(const KeyValueConfig& cfg);
};

// Adam moments, one vector per parameter in model parameter order.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t step = 0;

    static AdamState zeros_like(const VelocityModel& model);
};

struct TrainState {
    TrainConfig config;
    VelocityModel model;
    AdamState adam;
    std::uint64_t epoch = 0;       // epochs fully completed
    std::uint64_t next_batch = 0;  // batch index within the current epoch

    static TrainState init(const TrainConfig& config);
};

struct BatchRecord {
    std::uint64_t epoch = 0;
    std::uint64_t batch = 0;
    LossBreakdown losses;  // item means; `total` is left empty
    double grad_norm = 0.0;  // before clipping
};

// L2 norm over every parameter gradient; missing gradients count as zero.
double global_grad_norm(const VelocityModel& model);

// Rescales all gradients by max_norm / g when the global norm g exceeds
// max_norm. Returns the factor applied (1 when untouched).
double clip_gradients(VelocityModel& model, double max_norm);

// One bias-corrected Adam update from the current gradients.
void adam_step(VelocityModel& model, AdamState& state, double lr, double beta1, double beta2, double eps);

std::size_t batches_per_epoch(std::size_t dataset_size, std::size_t batch_size);

// Processes the batch at (state.epoch, state.next_batch) and advances the
// position, rolling over to the next epoch after the last batch.
//
// Each item draws t ~ U(0, t_max) then z ~ N(0, sigma_d^2 I) from its own
// counter stream keyed by (epoch, batch, item), and the epoch order is a
// seeded shuffle, so any position can be resumed without replay.
BatchRecord train_batch(TrainState& state, const Dataset& data);

// Runs the remaining batches of the current epoch.
std::vector<BatchRecord> train_epoch(TrainState& state, const Dataset& data);

// Mean l_total over records.
double mean_total(const std::vector<BatchRecord>& records);

void write_log_header(std::ostream& out);
void write_log_row(std::ostream& out, const BatchRecord& record);

}  // namespace trigcm
