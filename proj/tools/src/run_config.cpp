#include "run_config.hpp"

#include <algorithm>
#include <fstream>

#include "trigcm/error.hpp"

namespace trigcm::cli {

namespace {

const std::vector<std::string> kCommandKeys = {
    // gen-data
    "family", "proportions", "count", "test_count", "points", "jitter", "perturbation", "normalization",
    // train
    "data", "checkpoint_every", "resume",
    // sample / interpolate
    "checkpoint", "method", "steps", "heun_advance", "final_predictor", "frames", "noise_a", "noise_b",
    // eval
    "gen", "ref", "ref_split", "dist", "eval_normalization", "jsd_resolution", "compute_jsd",
    "emd_exact_limit", "emd_tolerance", "emd_per_point",
    // ablate
    "loss_modes", "schedules", "step_counts", "methods", "eval_count",
    // shared
    "out"};

std::vector<double> parse_doubles(const std::vector<std::string>& items, const std::string& key) {
    std::vector<double> out;
    for (const auto& s : items) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size()) throw DomainError("key '" + key + "': '" + s + "' is not a number");
        out.push_back(v);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
    return s;
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k = TrainConfig::keys();
        k.insert(k.end(), kCommandKeys.begin(), kCommandKeys.end());
        std::sort(k.begin(), k.end());
        k.erase(std::unique(k.begin(), k.end()), k.end());
        return k;
    }();
    return keys;
}

void check_keys(const KeyValueConfig& cfg) { cfg.require_known(known_keys()); }

DataPlan data_plan_from(const KeyValueConfig& cfg) {
    DataPlan plan;
    const auto names = cfg.get_list("family", {"torus"});
    if (names.empty()) throw DomainError("key 'family' lists no shape kinds");
    const std::size_t points = cfg.get_uint("points", 2048);
    const double jitter = cfg.get_double("jitter", 0.01);
    const double perturbation = cfg.get_double("perturbation", 0.2);
    plan.seed = cfg.get_uint("seed", 0);
    for (std::size_t i = 0; i < names.size(); ++i) {
        ShapeFamily f = ShapeFamily::of(parse_shape_kind(names[i]));
        f.points = points;
        f.jitter = jitter;
        f.perturbation = perturbation;
        // Families in a mixture draw from distinct seeds.
        f.seed = plan.seed + i;
        f.validate();
        plan.families.push_back(f);
    }
    if (cfg.contains("proportions")) {
        plan.proportions = parse_doubles(cfg.get_list("proportions", {}), "proportions");
    } else {
        plan.proportions.assign(names.size(), 1.0 / static_cast<double>(names.size()));
    }
    if (plan.proportions.size() != plan.families.size())
        throw DomainError("key 'proportions' has " + std::to_string(plan.proportions.size()) +
                          " entries for " + std::to_string(plan.families.size()) + " families");
    plan.count = cfg.get_uint("count", plan.count);
    plan.test_count = cfg.get_uint("test_count", plan.test_count);
    if (plan.count == 0) throw DomainError("key 'count' must be positive");
    if (auto n = cfg.get("normalization")) plan.normalization = parse_normalization_mode(*n);
    return plan;
}

KeyValueConfig to_config(const DataPlan& plan) {
    KeyValueConfig c;
    std::vector<std::string> names, props;
    for (const auto& f : plan.families) names.emplace_back(to_string(f.kind));
    for (double p : plan.proportions) props.push_back(format_double(p));
    c.set("family", join(names));
    c.set("proportions", join(props));
    c.set("count", static_cast<std::uint64_t>(plan.count));
    c.set("test_count", static_cast<std::uint64_t>(plan.test_count));
    if (!plan.families.empty()) {
        c.set("points", static_cast<std::uint64_t>(plan.families.front().points));
        c.set("jitter", plan.families.front().jitter);
        c.set("perturbation", plan.families.front().perturbation);
    }
    c.set("normalization", std::string(to_string(plan.normalization)));
    c.set("seed", plan.seed);
    return c;
}

SampleConfig sample_config_from(const KeyValueConfig& cfg) {
    SampleConfig sc;
    if (auto m = cfg.get("method")) sc.method = parse_sample_method(*m);
    sc.steps = cfg.get_uint("steps", sc.steps);
    sc.seed = cfg.get_uint("seed", sc.seed);
    sc.points = cfg.get_uint("points", sc.points);
    sc.heun_advance = cfg.get_bool("heun_advance", sc.heun_advance);
    sc.final_predictor = cfg.get_bool("final_predictor", sc.final_predictor);
    sc.validate();
    return sc;
}

void add_to_config(KeyValueConfig& cfg, const SampleConfig& sc) {
    cfg.set("method", std::string(to_string(sc.method)));
    cfg.set("steps", static_cast<std::uint64_t>(sc.steps));
    cfg.set("seed", sc.seed);
    cfg.set("points", static_cast<std::uint64_t>(sc.points));
    cfg.set("heun_advance", sc.heun_advance);
    cfg.set("final_predictor", sc.final_predictor);
}

EvalOptions eval_options_from(const KeyValueConfig& cfg) {
    EvalOptions eo;
    if (auto d = cfg.get("dist")) eo.dist = parse_distance_selection(*d);
    if (auto n = cfg.get("eval_normalization")) eo.normalization = parse_eval_normalization(*n);
    eo.jsd_resolution = cfg.get_uint("jsd_resolution", eo.jsd_resolution);
    eo.compute_jsd = cfg.get_bool("compute_jsd", eo.compute_jsd);
    eo.emd.exact_limit = cfg.get_uint("emd_exact_limit", eo.emd.exact_limit);
    eo.emd.tolerance = cfg.get_double("emd_tolerance", eo.emd.tolerance);
    eo.emd.per_point = cfg.get_bool("emd_per_point", eo.emd.per_point);
    eo.seed = cfg.get_uint("seed", eo.seed);
    if (eo.jsd_resolution == 0) throw DomainError("key 'jsd_resolution' must be positive");
    return eo;
}

void add_to_config(KeyValueConfig& cfg, const EvalOptions& eo) {
    cfg.set("dist", std::string(to_string(eo.dist)));
    cfg.set("eval_normalization", std::string(to_string(eo.normalization)));
    cfg.set("jsd_resolution", static_cast<std::uint64_t>(eo.jsd_resolution));
    cfg.set("compute_jsd", eo.compute_jsd);
    cfg.set("emd_exact_limit", static_cast<std::uint64_t>(eo.emd.exact_limit));
    cfg.set("emd_tolerance", eo.emd.tolerance);
    cfg.set("emd_per_point", eo.emd.per_point);
    cfg.set("seed", eo.seed);
}

std::filesystem::path require_path(const KeyValueConfig& cfg, const std::string& key) {
    auto v = cfg.get(key);
    if (!v || v->empty()) throw DomainError("missing required key '" + key + "'");
    return std::filesystem::path(*v);
}

void write_snapshot(const std::filesystem::path& dir, const KeyValueConfig& resolved) {
    std::filesystem::create_directories(dir);
    const auto path = dir / "resolved.cfg";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << resolved.render();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace trigcm::cli
