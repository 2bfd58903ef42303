#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trigcm/config.hpp"
#include "trigcm/metrics.hpp"
#include "trigcm/objective.hpp"
#include "trigcm/sampler.hpp"
#include "trigcm/schedule.hpp"
#include "trigcm/trainer.hpp"

namespace trigcm::cli {

// `out` receives results meant for the operator, `log` receives progress.
struct Streams {
    std::ostream& out;
    std::ostream& log;
};

// Each command takes a fully merged config (defaults are applied inside)
// and returns 0 on success. Module errors propagate as exceptions.
int cmd_gen_data(const KeyValueConfig& cfg, Streams io);
int cmd_train(const KeyValueConfig& cfg, Streams io);
int cmd_sample(const KeyValueConfig& cfg, Streams io);
int cmd_eval(const KeyValueConfig& cfg, Streams io);
// Returns 1 when at least one cell failed.
int cmd_ablate(const KeyValueConfig& cfg, Streams io);
int cmd_interpolate(const KeyValueConfig& cfg, Streams io);

struct TrainOutcome {
    TrainState state;
    std::vector<double> epoch_mean_total;  // one entry per epoch run here
    double seconds = 0.0;
};

// Runs epochs until state.epoch reaches state.config.epochs. When `run_dir`
// is given, writes train_log.csv, epochs.csv, periodic checkpoints and
// final.ckpt there.
TrainOutcome run_training(TrainState state, const Dataset& data, const std::optional<std::filesystem::path>& run_dir,
                          std::size_t checkpoint_every, std::ostream& log);

// Reference clouds for evaluation: a dataset directory (split lists) yields
// the requested split, any other directory yields its sorted *.xyz files.
std::vector<PointCloud> load_clouds(const std::filesystem::path& dir, Split split);

struct SampleBatch {
    std::vector<PointCloud> clouds;
    std::vector<SampleResult> results;
    std::vector<double> wall_ms;
};

SampleBatch sample_many(const Schedule& s, const VelocityModel& model, const SampleConfig& cfg, std::size_t count);

struct AblationPlan {
    TrainConfig train;
    std::vector<LossMode> loss_modes;
    std::vector<ScheduleKind> schedules;
    std::vector<SampleMethod> methods;
    std::vector<std::size_t> step_counts;
    SampleConfig sample;  // method and steps are overwritten per cell
    EvalOptions eval;
};

struct AblationCell {
    LossMode loss_mode = LossMode::fm_chamfer;
    ScheduleKind schedule = ScheduleKind::trigflow;
    SampleMethod method = SampleMethod::single_step;
    std::size_t steps = 1;
    std::string status = "ok";
    MetricReport report;
    double train_seconds = 0.0;
    double sample_seconds = 0.0;
    double evaluations_per_sample = 0.0;
    std::vector<double> epoch_mean_total;
};

AblationPlan ablation_plan_from(const KeyValueConfig& cfg);

// Trains once per (loss mode, schedule) and evaluates every sampler cell
// against `ref`, drawing |ref| samples. A failing cell is recorded and the
// grid continues. With `out_dir`, each cell gets its own run directory.
std::vector<AblationCell> run_ablation(const AblationPlan& plan, const Dataset& train, const std::vector<PointCloud>& ref,
                                       const std::optional<std::filesystem::path>& out_dir, std::ostream& log);

void write_ablation_csv(std::ostream& out, const std::vector<AblationCell>& cells);

}  // namespace trigcm::cli
