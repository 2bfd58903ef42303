#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trigcm/config.hpp"
#include "trigcm/datagen.hpp"
#include "trigcm/metrics.hpp"
#include "trigcm/pointcloud.hpp"
#include "trigcm/sampler.hpp"
#include "trigcm/trainer.hpp"

namespace trigcm::cli {

// Every key accepted in a run config file or through `--set`. One file can
// drive all subcommands; each command reads the keys it needs.
const std::vector<std::string>& known_keys();

// Throws DomainError naming the first key outside known_keys().
void check_keys(const KeyValueConfig& cfg);

struct DataPlan {
    std::vector<ShapeFamily> families;
    std::vector<double> proportions;
    std::size_t count = 128;
    std::size_t test_count = 64;
    NormalizationMode normalization = NormalizationMode::unit_radius;
    std::uint64_t seed = 0;
};

DataPlan data_plan_from(const KeyValueConfig& cfg);
KeyValueConfig to_config(const DataPlan& plan);

SampleConfig sample_config_from(const KeyValueConfig& cfg);
void add_to_config(KeyValueConfig& cfg, const SampleConfig& sc);

EvalOptions eval_options_from(const KeyValueConfig& cfg);
void add_to_config(KeyValueConfig& cfg, const EvalOptions& eo);

// Path-valued key; throws DomainError if it is missing.
std::filesystem::path require_path(const KeyValueConfig& cfg, const std::string& key);

// Writes `resolved.cfg` into `dir` (created if needed).
void write_snapshot(const std::filesystem::path& dir, const KeyValueConfig& resolved);

}  // namespace trigcm::cli
