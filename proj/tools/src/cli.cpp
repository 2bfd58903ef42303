#include "cli.hpp"

#include <CLI11.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "run_config.hpp"
#include "trigcm/error.hpp"

namespace trigcm::cli {

namespace {

using Command = std::function<int(const KeyValueConfig&, Streams)>;

struct Subcommand {
    CLI::App* app = nullptr;
    Command run;
    // flag value by config key; only set flags override the file
    std::map<std::string, std::optional<std::string>> flags;
};

void add_flag(Subcommand& sc, const std::string& flag, const std::string& key, const std::string& help) {
    sc.app->add_option(flag, sc.flags[key], help);
}

KeyValueConfig parse_set_pairs(const std::vector<std::string>& pairs) {
    KeyValueConfig c;
    for (const auto& p : pairs) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw DomainError("--set expects key=value, got '" + p + "'");
        std::string key = p.substr(0, eq), value = p.substr(eq + 1);
        c.set(key, value);
    }
    return c;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Consistency-model point cloud generation on synthetic shapes", "trigcm"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> set_pairs;
    std::map<std::string, Subcommand> commands;

    auto add_command = [&](const std::string& name, const std::string& help, Command fn) -> Subcommand& {
        Subcommand& sc = commands[name];
        sc.app = app.add_subcommand(name, help);
        sc.run = std::move(fn);
        sc.app->add_option("--config", config_path, "run config file (key = value lines)");
        sc.app->add_option("--set", set_pairs, "override one config entry, key=value (repeatable)");
        add_flag(sc, "--seed", "seed", "random seed");
        add_flag(sc, "--out", "out", "output directory");
        return sc;
    };

    {
        auto& sc = add_command("gen-data", "generate a synthetic dataset with train/test split lists", cmd_gen_data);
        add_flag(sc, "--family", "family", "shape kind, or comma-separated kinds for a mixture");
        add_flag(sc, "--count", "count", "training clouds");
        add_flag(sc, "--test-count", "test_count", "test clouds");
        add_flag(sc, "--points", "points", "points per cloud");
    }
    {
        auto& sc = add_command("train", "train the velocity network", cmd_train);
        add_flag(sc, "--data", "data", "dataset directory written by gen-data");
        add_flag(sc, "--epochs", "epochs", "number of epochs");
        add_flag(sc, "--resume", "resume", "checkpoint to continue from");
    }
    {
        auto& sc = add_command("sample", "draw point clouds from a checkpoint", cmd_sample);
        add_flag(sc, "--checkpoint", "checkpoint", "trained checkpoint");
        add_flag(sc, "--method", "method", "single, euler or heun");
        add_flag(sc, "--steps", "steps", "sampler steps");
        add_flag(sc, "--count", "count", "number of samples");
        add_flag(sc, "--points", "points", "points per sample");
    }
    {
        auto& sc = add_command("eval", "score generated clouds against a reference set", cmd_eval);
        add_flag(sc, "--gen", "gen", "directory of generated clouds");
        add_flag(sc, "--ref", "ref", "reference directory or dataset");
        add_flag(sc, "--dist", "dist", "cd, emd or both");
    }
    {
        auto& sc = add_command("ablate", "train and evaluate a grid of loss, schedule and sampler settings",
                               cmd_ablate);
        add_flag(sc, "--data", "data", "dataset directory written by gen-data");
        add_flag(sc, "--epochs", "epochs", "epochs per trained model");
    }
    {
        auto& sc = add_command("interpolate", "single-step samples along a noise interpolation", cmd_interpolate);
        add_flag(sc, "--checkpoint", "checkpoint", "trained checkpoint");
        add_flag(sc, "--frames", "frames", "number of frames");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        for (auto& [name, sc] : commands) {
            if (!sc.app->parsed()) continue;
            KeyValueConfig cfg;
            if (!config_path.empty()) cfg = KeyValueConfig::load(config_path);
            cfg.merge(parse_set_pairs(set_pairs));
            for (const auto& [key, value] : sc.flags)
                if (value) cfg.set(key, *value);
            check_keys(cfg);
            return sc.run(cfg, Streams{out, err});
        }
        return kInputError;
    } catch (const VersionError& e) {
        err << "error: " << e.what() << '\n';
        return kVersionError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace trigcm::cli
