#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "run_config.hpp"
#include "trigcm/checkpoint.hpp"
#include "trigcm/datagen.hpp"
#include "trigcm/error.hpp"
#include "trigcm/objective.hpp"
#include "trigcm/predictor.hpp"

namespace fs = std::filesystem;

namespace trigcm::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, i, ext);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    return f;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

Dataset slice(const Dataset& ds, std::size_t begin, std::size_t end, Split split) {
    Dataset out;
    out.clouds.assign(ds.clouds.begin() + static_cast<std::ptrdiff_t>(begin),
                      ds.clouds.begin() + static_cast<std::ptrdiff_t>(end));
    out.split = split;
    return out;
}

template <class T, class Parse>
std::vector<T> parse_all(const std::vector<std::string>& items, Parse parse) {
    std::vector<T> out;
    for (const auto& s : items) out.push_back(parse(s));
    return out;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
    return s;
}

std::string cell_name(const AblationCell& c) {
    return std::string(to_string(c.loss_mode)) + "__" + std::string(to_string(c.schedule)) + "__" +
           std::string(to_string(c.method)) + "_s" + std::to_string(c.steps);
}

void write_samples(const fs::path& dir, const SampleBatch& batch, const SampleConfig& sc) {
    fs::create_directories(dir);
    auto manifest = open_out(dir / "manifest.csv");
    manifest << "index,file,method,steps,seed,points,evaluations,wall_ms,mean_local_error\n";
    for (std::size_t i = 0; i < batch.clouds.size(); ++i) {
        const auto name = numbered("sample", i, ".xyz");
        write_xyz(dir / name, batch.clouds[i]);
        const auto& errs = batch.results[i].local_errors;
        const std::string mean_err =
            errs.empty() ? std::string()
                         : format_double(std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size()));
        manifest << i << ',' << name << ',' << to_string(sc.method) << ',' << sc.steps << ',' << sc.seed << ','
                 << sc.points << ',' << batch.results[i].evaluations << ',' << format_double(batch.wall_ms[i]) << ','
                 << mean_err << '\n';
    }
}

void write_report_files(const fs::path& dir, const MetricReport& report) {
    fs::create_directories(dir);
    auto csv = open_out(dir / "metrics.csv");
    write_report_csv(csv, report);
    auto txt = open_out(dir / "metrics.txt");
    write_report_table(txt, report);
}

}  // namespace

int cmd_gen_data(const KeyValueConfig& cfg, Streams io) {
    const fs::path out_dir = require_path(cfg, "out");
    const DataPlan plan = data_plan_from(cfg);
    const std::size_t total = plan.count + plan.test_count;
    const Dataset all = plan.families.size() == 1 ? generate(plan.families.front(), total)
                                                  : mixture(plan.families, plan.proportions, total);
    // Splits are normalized independently so that test statistics never
    // inform the training coordinates.
    const Dataset train = normalize(slice(all, 0, plan.count, Split::train), plan.normalization);
    Dataset test;
    test.split = Split::test;
    if (plan.test_count > 0) test = normalize(slice(all, plan.count, total, Split::test), plan.normalization);
    save_dataset(out_dir, train, test);

    KeyValueConfig resolved = to_config(plan);
    resolved.set("out", out_dir.string());
    write_snapshot(out_dir, resolved);
    io.out << "wrote " << train.size() << " train and " << test.size() << " test clouds to " << out_dir.string()
           << '\n';
    return 0;
}

TrainOutcome run_training(TrainState state, const Dataset& data, const std::optional<fs::path>& run_dir,
                          std::size_t checkpoint_every, std::ostream& log) {
    std::ofstream batch_log, epoch_log;
    if (run_dir) {
        fs::create_directories(*run_dir);
        batch_log = open_out(*run_dir / "train_log.csv");
        write_log_header(batch_log);
        epoch_log = open_out(*run_dir / "epochs.csv");
        epoch_log << "epoch,mean_l_fm,mean_l_cd,mean_l_total,seconds\n";
    }
    TrainOutcome outcome;
    const auto start = Clock::now();
    while (state.epoch < state.config.epochs) {
        const auto epoch_start = Clock::now();
        const std::uint64_t epoch = state.epoch;
        const auto records = train_epoch(state, data);
        double fm = 0.0, cd = 0.0;
        for (const auto& r : records) {
            fm += r.losses.l_fm;
            cd += r.losses.l_cd;
        }
        const double n = static_cast<double>(records.size());
        const double total = mean_total(records);
        outcome.epoch_mean_total.push_back(total);
        log << "epoch " << epoch << " loss " << format_double(total) << '\n';
        if (run_dir) {
            for (const auto& r : records) write_log_row(batch_log, r);
            epoch_log << epoch << ',' << format_double(fm / n) << ',' << format_double(cd / n) << ','
                      << format_double(total) << ',' << format_double(seconds_since(epoch_start)) << '\n';
            if (checkpoint_every > 0 && state.epoch % checkpoint_every == 0) {
                fs::create_directories(*run_dir / "checkpoints");
                save_checkpoint(*run_dir / "checkpoints" / numbered("epoch", state.epoch, ".ckpt"), state);
            }
        }
    }
    outcome.seconds = seconds_since(start);
    if (run_dir) save_checkpoint(*run_dir / "final.ckpt", state);
    outcome.state = std::move(state);
    return outcome;
}

int cmd_train(const KeyValueConfig& cfg, Streams io) {
    const fs::path data_dir = require_path(cfg, "data");
    const fs::path out_dir = require_path(cfg, "out");
    const Dataset data = load_split(data_dir, Split::train);
    if (data.size() == 0) throw DomainError("dataset '" + data_dir.string() + "' has no training clouds");

    TrainState state;
    if (auto resume = cfg.get("resume")) {
        state = load_checkpoint(*resume);
        if (cfg.contains("epochs")) state.config.epochs = cfg.get_uint("epochs", state.config.epochs);
    } else {
        TrainConfig tc = TrainConfig::from_config(cfg);
        tc.validate();
        state = TrainState::init(tc);
    }
    const std::size_t every = cfg.get_uint("checkpoint_every", 0);

    KeyValueConfig resolved = state.config.to_config();
    resolved.set("data", data_dir.string());
    resolved.set("out", out_dir.string());
    resolved.set("checkpoint_every", static_cast<std::uint64_t>(every));
    if (auto resume = cfg.get("resume")) resolved.set("resume", *resume);
    write_snapshot(out_dir, resolved);

    const auto outcome = run_training(std::move(state), data, out_dir, every, io.log);
    io.out << "trained " << outcome.epoch_mean_total.size() << " epochs in " << format_double(outcome.seconds)
           << " s; final checkpoint " << (out_dir / "final.ckpt").string() << '\n';
    return 0;
}

SampleBatch sample_many(const Schedule& s, const VelocityModel& model, const SampleConfig& cfg, std::size_t count) {
    cfg.validate();
    const VelocityField field = model_field(model);
    SampleBatch batch;
    for (std::size_t i = 0; i < count; ++i) {
        const auto start = Clock::now();
        auto result = generate_sample(s, field, cfg, i);
        batch.wall_ms.push_back(1e3 * seconds_since(start));
        batch.clouds.push_back(result.cloud);
        batch.results.push_back(std::move(result));
    }
    return batch;
}

int cmd_sample(const KeyValueConfig& cfg, Streams io) {
    const fs::path ckpt = require_path(cfg, "checkpoint");
    const fs::path out_dir = require_path(cfg, "out");
    const SampleConfig sc = sample_config_from(cfg);
    const std::size_t count = cfg.get_uint("count", 1);
    if (count == 0) throw DomainError("key 'count' must be positive");
    const TrainState state = load_checkpoint(ckpt);
    const Schedule schedule(state.config.schedule, state.config.sigma_d);

    KeyValueConfig resolved;
    add_to_config(resolved, sc);
    resolved.set("checkpoint", ckpt.string());
    resolved.set("count", static_cast<std::uint64_t>(count));
    resolved.set("out", out_dir.string());
    write_snapshot(out_dir, resolved);

    const auto batch = sample_many(schedule, state.model, sc, count);
    write_samples(out_dir, batch, sc);
    const double ms = std::accumulate(batch.wall_ms.begin(), batch.wall_ms.end(), 0.0);
    io.out << "wrote " << count << " samples to " << out_dir.string() << " (" << format_double(ms / count)
           << " ms per sample)\n";
    return 0;
}

std::vector<PointCloud> load_clouds(const fs::path& dir, Split split) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
    const bool is_dataset = fs::exists(dir / "train.txt") || fs::exists(dir / "test.txt");
    Dataset ds = is_dataset ? load_split(dir, split) : load_directory(dir);
    if (ds.size() == 0) throw DomainError("directory '" + dir.string() + "' contains no point clouds");
    return std::move(ds.clouds);
}

int cmd_eval(const KeyValueConfig& cfg, Streams io) {
    const fs::path gen_dir = require_path(cfg, "gen");
    const fs::path ref_dir = require_path(cfg, "ref");
    const fs::path out_dir = require_path(cfg, "out");
    const std::string split_name = cfg.get_string("ref_split", "test");
    if (split_name != "train" && split_name != "test")
        throw DomainError("key 'ref_split' must be train or test, got '" + split_name + "'");
    const Split split = split_name == "train" ? Split::train : Split::test;
    const EvalOptions eo = eval_options_from(cfg);

    const auto gen = load_clouds(gen_dir, Split::test);
    const auto ref = load_clouds(ref_dir, split);
    if (gen.size() != ref.size())
        throw ShapeError("generated set has " + std::to_string(gen.size()) + " clouds, reference set has " +
                         std::to_string(ref.size()));

    KeyValueConfig resolved;
    add_to_config(resolved, eo);
    resolved.set("gen", gen_dir.string());
    resolved.set("ref", ref_dir.string());
    resolved.set("ref_split", split_name);
    resolved.set("out", out_dir.string());
    write_snapshot(out_dir, resolved);

    const MetricReport report = evaluate(gen, ref, eo);
    write_report_files(out_dir, report);
    write_report_table(io.out, report);
    return 0;
}

AblationPlan ablation_plan_from(const KeyValueConfig& cfg) {
    AblationPlan plan;
    plan.train = TrainConfig::from_config(cfg);
    plan.train.validate();
    plan.loss_modes = parse_all<LossMode>(cfg.get_list("loss_modes", {"fm_only", "chamfer_only", "fm_chamfer"}),
                                          parse_loss_mode);
    plan.schedules = parse_all<ScheduleKind>(cfg.get_list("schedules", {"trigflow"}), parse_schedule_kind);
    plan.methods = parse_all<SampleMethod>(cfg.get_list("methods", {"single"}), parse_sample_method);
    plan.step_counts = cfg.get_sizes("step_counts", {1});
    if (plan.loss_modes.empty() || plan.schedules.empty() || plan.methods.empty() || plan.step_counts.empty())
        throw DomainError("ablation grid has an empty axis");
    plan.sample = sample_config_from(cfg);
    plan.eval = eval_options_from(cfg);
    return plan;
}

std::vector<AblationCell> run_ablation(const AblationPlan& plan, const Dataset& train,
                                       const std::vector<PointCloud>& ref, const std::optional<fs::path>& out_dir,
                                       std::ostream& log) {
    std::vector<AblationCell> cells;
    for (LossMode loss : plan.loss_modes) {
        for (ScheduleKind schedule : plan.schedules) {
            TrainConfig tc = plan.train;
            tc.objective.loss_mode = loss;
            tc.schedule = schedule;
            const std::string run_name = std::string(to_string(loss)) + "__" + std::string(to_string(schedule));

            std::optional<TrainOutcome> trained;
            std::string train_error;
            try {
                tc.validate();
                log << "training " << run_name << '\n';
                std::optional<fs::path> run_dir;
                if (out_dir) {
                    run_dir = *out_dir / "train" / run_name;
                    KeyValueConfig snap = tc.to_config();
                    write_snapshot(*run_dir, snap);
                }
                trained = run_training(TrainState::init(tc), train, run_dir, 0, log);
            } catch (const std::exception& e) {
                train_error = e.what();
            }

            const Schedule sched(schedule, tc.sigma_d);
            for (SampleMethod method : plan.methods) {
                for (std::size_t steps : plan.step_counts) {
                    AblationCell cell;
                    cell.loss_mode = loss;
                    cell.schedule = schedule;
                    cell.method = method;
                    cell.steps = steps;
                    if (!trained) {
                        cell.status = "failed: " + train_error;
                        cells.push_back(cell);
                        continue;
                    }
                    cell.train_seconds = trained->seconds;
                    cell.epoch_mean_total = trained->epoch_mean_total;
                    try {
                        SampleConfig sc = plan.sample;
                        sc.method = method;
                        sc.steps = steps;
                        const auto start = Clock::now();
                        const auto batch = sample_many(sched, trained->state.model, sc, ref.size());
                        cell.sample_seconds = seconds_since(start);
                        double evals = 0.0;
                        for (const auto& r : batch.results) evals += static_cast<double>(r.evaluations);
                        cell.evaluations_per_sample = evals / static_cast<double>(batch.results.size());
                        cell.report = evaluate(batch.clouds, ref, plan.eval);
                        if (out_dir) {
                            const fs::path dir = *out_dir / "cells" / cell_name(cell);
                            KeyValueConfig snap = tc.to_config();
                            add_to_config(snap, sc);
                            add_to_config(snap, plan.eval);
                            snap.set("seed", tc.seed);
                            write_snapshot(dir, snap);
                            write_samples(dir / "samples", batch, sc);
                            write_report_files(dir, cell.report);
                        }
                    } catch (const std::exception& e) {
                        cell.status = std::string("failed: ") + e.what();
                    }
                    log << "cell " << cell_name(cell) << ": " << cell.status << '\n';
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationCell>& cells) {
    out << "loss_mode,schedule,method,steps,status,one_nna_cd,one_nna_emd,mmd_cd,mmd_emd,cov_cd,cov_emd,jsd,"
           "evaluations_per_sample,train_seconds,sample_seconds\n";
    for (const auto& c : cells) {
        std::string status = c.status;
        for (char& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        out << to_string(c.loss_mode) << ',' << to_string(c.schedule) << ',' << to_string(c.method) << ','
            << c.steps << ',' << status << ',' << opt(c.report.one_nna_cd) << ',' << opt(c.report.one_nna_emd)
            << ',' << opt(c.report.mmd_cd) << ',' << opt(c.report.mmd_emd) << ',' << opt(c.report.cov_cd) << ','
            << opt(c.report.cov_emd) << ',' << opt(c.report.jsd) << ',' << format_double(c.evaluations_per_sample)
            << ',' << format_double(c.train_seconds) << ',' << format_double(c.sample_seconds) << '\n';
    }
}

int cmd_ablate(const KeyValueConfig& cfg, Streams io) {
    const fs::path data_dir = require_path(cfg, "data");
    const fs::path out_dir = require_path(cfg, "out");
    const AblationPlan plan = ablation_plan_from(cfg);
    const Dataset train = load_split(data_dir, Split::train);
    auto ref = load_clouds(data_dir, Split::test);
    const std::size_t eval_count = cfg.get_uint("eval_count", ref.size());
    if (eval_count < 2 || eval_count > ref.size())
        throw DomainError("key 'eval_count' must lie in [2, " + std::to_string(ref.size()) + "], got " +
                          std::to_string(eval_count));
    ref.resize(eval_count);

    KeyValueConfig resolved = plan.train.to_config();
    add_to_config(resolved, plan.sample);
    add_to_config(resolved, plan.eval);
    resolved.set("seed", plan.train.seed);
    std::vector<std::string> names;
    for (auto m : plan.loss_modes) names.emplace_back(to_string(m));
    resolved.set("loss_modes", join_names(names));
    names.clear();
    for (auto s : plan.schedules) names.emplace_back(to_string(s));
    resolved.set("schedules", join_names(names));
    names.clear();
    for (auto m : plan.methods) names.emplace_back(to_string(m));
    resolved.set("methods", join_names(names));
    resolved.set("step_counts", plan.step_counts);
    resolved.set("eval_count", static_cast<std::uint64_t>(eval_count));
    resolved.set("data", data_dir.string());
    resolved.set("out", out_dir.string());
    write_snapshot(out_dir, resolved);

    const auto cells = run_ablation(plan, train, ref, out_dir, io.log);
    auto csv = open_out(out_dir / "summary.csv");
    write_ablation_csv(csv, cells);
    write_ablation_csv(io.out, cells);
    for (const auto& c : cells)
        if (c.status != "ok") return 1;
    return 0;
}

int cmd_interpolate(const KeyValueConfig& cfg, Streams io) {
    const fs::path ckpt = require_path(cfg, "checkpoint");
    const fs::path out_dir = require_path(cfg, "out");
    const std::size_t frames = cfg.get_uint("frames", 8);
    const std::uint64_t seed = cfg.get_uint("seed", 0);
    const std::uint64_t noise_a = cfg.get_uint("noise_a", 0);
    const std::uint64_t noise_b = cfg.get_uint("noise_b", 1);
    const std::size_t points = cfg.get_uint("points", 2048);
    if (frames < 2) throw DomainError("key 'frames' must be at least 2, got " + std::to_string(frames));
    if (points == 0) throw DomainError("key 'points' must be positive");
    const TrainState state = load_checkpoint(ckpt);
    const Schedule schedule(state.config.schedule, state.config.sigma_d);

    KeyValueConfig resolved;
    resolved.set("checkpoint", ckpt.string());
    resolved.set("frames", static_cast<std::uint64_t>(frames));
    resolved.set("seed", seed);
    resolved.set("noise_a", noise_a);
    resolved.set("noise_b", noise_b);
    resolved.set("points", static_cast<std::uint64_t>(points));
    resolved.set("out", out_dir.string());
    write_snapshot(out_dir, resolved);

    const Points z1 = draw_noise(seed, noise_a, points, schedule.sigma_d());
    const Points z2 = draw_noise(seed, noise_b, points, schedule.sigma_d());
    const auto clouds = interpolate(schedule, model_field(state.model), z1, z2, frames);
    auto csv = open_out(out_dir / "interpolation.csv");
    csv << "frame,alpha,file,chamfer_to_previous\n";
    for (std::size_t k = 0; k < clouds.size(); ++k) {
        const auto name = numbered("frame", k, ".xyz");
        write_xyz(out_dir / name, clouds[k]);
        const double alpha = static_cast<double>(k) / static_cast<double>(frames - 1);
        csv << k << ',' << format_double(alpha) << ',' << name << ','
            << (k == 0 ? std::string() : format_double(chamfer(clouds[k - 1].points, clouds[k].points))) << '\n';
    }
    io.out << "wrote " << clouds.size() << " frames to " << out_dir.string() << '\n';
    return 0;
}

}  // namespace trigcm::cli
