// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and
// experiment sizes are fixed below; docs/acceptance.md records the
// calibration run behind the training-based settings.
//
// Usage: trigcm_acceptance [--only 1,2,...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "test_support.hpp"
#include "trigcm/checkpoint.hpp"
#include "trigcm/datagen.hpp"
#include "trigcm/metrics.hpp"
#include "trigcm/objective.hpp"
#include "trigcm/predictor.hpp"
#include "trigcm/sampler.hpp"
#include "trigcm/schedule.hpp"
#include "trigcm/trainer.hpp"

using namespace trigcm;
using trigcm::testing::frobenius;
using trigcm::testing::random_points;

namespace {

constexpr double kPi = std::numbers::pi;

// 1. predictor recovery
constexpr double kRecoveryTol = 1e-9;
constexpr double kRecoverySeconds = 10.0;
// 2. residual error model
constexpr double kResidualRelTol = 1e-9;
// 3. gradient fidelity
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kTieMargin = 1e-3;
// 4. sampler orders
constexpr double kEulerSlopeLo = 0.8, kEulerSlopeHi = 1.2;
constexpr double kHeunSlopeLo = 1.7, kHeunSlopeHi = 2.3;
constexpr double kSamplerSeconds = 30.0;
// 5. metric oracles
constexpr double kChamferAbsTol = 1e-12;
constexpr double kAuctionRatio = 1.01;
// 6. training efficacy
constexpr double kLossRatio = 0.5;
constexpr double kOneNnaCeiling = 85.0;
constexpr std::size_t kTrainShapes = 128, kHeldOut = 64, kTrainPoints = 512, kTrainEpochs = 100;
// 7, 8. toy-scale orderings
constexpr std::size_t kToyShapes = 64, kToyHeldOut = 32, kToyPoints = 256, kToyEpochs = 50;
constexpr double kStepPlateau = 2.0;  // percentage points
const std::vector<std::uint64_t> kToySeeds = {1, 2, 3};
// Shared training settings for 6-8: reference optimizer defaults with the
// batch shrunk to 8 and the learning rate raised to 1e-3 to keep the
// number of effective updates meaningful at this dataset size.
constexpr std::size_t kBatch = 8;
constexpr double kLr = 1e-3;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, const char* format = "%.3g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

VelocityField path_field(const Points& x0, const Points& z, const Points* residual = nullptr) {
    return [x0, z, residual](const Points&, double t) {
        Points v = analytic_velocity(Schedule(), x0, z, t);
        if (residual)
            for (std::size_t i = 0; i < v.size(); ++i)
                for (int k = 0; k < 3; ++k) v[i][k] += (*residual)[i][k];
        return v;
    };
}

Points diff(const Points& a, const Points& b) {
    Points d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int k = 0; k < 3; ++k) d[i][k] = a[i][k] - b[i][k];
    return d;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return -num / den;
}

Outcome predictor_recovery() {
    const auto t0 = Clock::now();
    const Schedule s;
    double worst = 0.0;
    for (std::uint64_t c = 0; c < 20; ++c) {
        const auto x0 = random_points(2048, 100 + c), z = random_points(2048, 200 + c);
        const auto field = path_field(x0, z);
        for (int k = 0; k < 100; ++k) {
            const double t = (kPi / 2) * (k / 99.0);
            const auto out = predict(s, field, perturb(s, x0, z, t), t);
            worst = std::max(worst, trigcm::testing::max_abs_diff(out.x_hat.points, x0));
        }
    }
    const double secs = seconds_since(t0);
    return {worst < kRecoveryTol && secs < kRecoverySeconds,
            "max coordinate error " + fmt(worst) + " (< " + fmt(kRecoveryTol) + "), " + fmt(secs) + " s (< " +
                fmt(kRecoverySeconds) + " s)"};
}

Outcome residual_error_model() {
    const Schedule s;
    Rng rng(41, stream_id("acceptance.residual"));
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const auto x0 = random_points(256, 300 + trial), z = random_points(256, 400 + trial);
        const auto eps = random_points(256, 500 + trial, rng.uniform(1e-3, 1.0));
        const double t = rng.uniform(0.01, kPi / 2);
        const auto out = predict(s, path_field(x0, z, &eps), perturb(s, x0, z, t), t);
        const double got = frobenius(diff(out.x_hat.points, x0));
        const double want = std::sin(t) * frobenius(eps);
        worst = std::max(worst, std::abs(got - want) / want);
    }
    return {worst < kResidualRelTol, "max relative deviation " + fmt(worst) + " (< " + fmt(kResidualRelTol) + ")"};
}

Outcome gradient_fidelity() {
    const Schedule s;
    auto model = VelocityModel::init(31, ModelConfig{{16, 16}, 8, {16}, false});
    Rng rng(36, stream_id("acceptance.grad"));
    double worst = 0.0;
    std::string where;
    int checked = 0;
    for (std::uint64_t trial = 0; checked < 3 && trial < 200; ++trial) {
        const auto x0 = random_points(8, 600 + trial), z = random_points(8, 700 + trial);
        const double t = rng.uniform(0.05, kPi / 2);
        const auto x_hat = predict(s, model, perturb(s, x0, z, t), t).x_hat.points;
        if (trigcm::testing::tie_margin(x_hat, x0) <= kTieMargin) continue;
        ++checked;
        const auto r =
            trigcm::testing::grad_check(model, [&] { return total_loss(s, model, x0, z, t).total; }, kGradStep);
        if (r.max_rel_error >= worst) {
            worst = r.max_rel_error;
            where = r.worst;
        }
    }
    return {checked == 3 && worst < kGradRelTol,
            std::to_string(checked) + " configurations, " + std::to_string(model.parameter_count()) +
                " parameters, max relative error " + fmt(worst) + " (< " + fmt(kGradRelTol) + ") at " + where};
}

Outcome sampler_orders() {
    const auto t0 = Clock::now();
    const auto x0 = random_points(256, 9), z = random_points(256, 10);
    const std::vector<double> steps = {2, 4, 8, 16, 32};
    std::vector<double> euler_err, heun_local;
    for (double S : steps) {
        SampleConfig cfg;
        cfg.steps = static_cast<std::size_t>(S);
        cfg.method = SampleMethod::euler;
        euler_err.push_back(frobenius(diff(run_sampler(Schedule(), path_field(x0, z), z, cfg).cloud.points, x0)));
        cfg.method = SampleMethod::heun;
        const auto h = run_sampler(Schedule(), path_field(x0, z), z, cfg);
        double mean = 0.0;
        for (double e : h.local_errors) mean += e;
        heun_local.push_back(mean / static_cast<double>(h.local_errors.size()));
    }
    const double e_slope = loglog_slope(steps, euler_err), h_slope = loglog_slope(steps, heun_local);
    const double secs = seconds_since(t0);
    const bool pass = e_slope >= kEulerSlopeLo && e_slope <= kEulerSlopeHi && h_slope >= kHeunSlopeLo &&
                      h_slope <= kHeunSlopeHi && secs < kSamplerSeconds;
    return {pass, "Euler slope " + fmt(e_slope, "%.3f") + " (in [0.8, 1.2]), Heun local-error slope " +
                      fmt(h_slope, "%.3f") + " (in [1.7, 2.3]), " + fmt(secs) + " s"};
}

Outcome metric_oracles() {
    Rng rng(55, stream_id("acceptance.metrics"));
    double cd_gap = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const std::size_t na = 1 + rng.below(256), nb = 1 + rng.below(256);
        const auto a = random_points(na, 1000 + i), b = random_points(nb, 2000 + i);
        cd_gap = std::max(cd_gap, std::abs(chamfer(a, b) - chamfer_brute_force(a, b)));
    }
    double ratio = 0.0;
    EmdOptions approx, exact;
    approx.exact_limit = 0;
    exact.exact_limit = 1u << 20;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const std::size_t m = 2 + rng.below(127);
        const auto a = random_points(m, 3000 + i), b = random_points(m, 4000 + i, 0.5);
        ratio = std::max(ratio, emd(a, b, approx) / emd(a, b, exact));
    }
    std::vector<PointCloud> ref;
    for (std::uint64_t i = 0; i < 8; ++i) {
        ShapeFamily f = ShapeFamily::of(ShapeKind::torus);
        f.points = 128;
        f.seed = 3;
        ref.push_back(normalize_unit(generate_shape(f, i)));
    }
    EvalOptions eo;
    eo.dist = DistanceSelection::both;
    const auto rep = evaluate(ref, ref, eo);
    const bool self_ok = *rep.one_nna_cd == 0.0 && *rep.one_nna_emd == 0.0 && *rep.mmd_cd == 0.0 &&
                         *rep.mmd_emd == 0.0 && *rep.cov_cd == 100.0 && *rep.cov_emd == 100.0 && *rep.jsd == 0.0;
    return {cd_gap <= kChamferAbsTol && ratio <= kAuctionRatio && self_ok,
            "Chamfer gap " + fmt(cd_gap) + " (<= 1e-12), auction/exact EMD " + fmt(ratio, "%.5f") +
                " (<= 1.01), eval(ref, ref) " + (self_ok ? "exact" : "not exact")};
}

struct ToyData {
    Dataset train;
    std::vector<PointCloud> held_out;
};

ToyData torus_data(std::size_t n_train, std::size_t n_test, std::size_t points, std::uint64_t seed) {
    ShapeFamily f = ShapeFamily::of(ShapeKind::torus);
    f.points = points;
    f.jitter = 0.01;
    f.seed = seed;
    const Dataset all = normalize(generate(f, n_train + n_test), NormalizationMode::unit_radius);
    ToyData d;
    d.train.clouds.assign(all.clouds.begin(), all.clouds.begin() + static_cast<std::ptrdiff_t>(n_train));
    d.held_out.assign(all.clouds.begin() + static_cast<std::ptrdiff_t>(n_train), all.clouds.end());
    return d;
}

TrainConfig acceptance_train_config(std::size_t epochs, std::uint64_t seed) {
    TrainConfig tc;
    tc.batch_size = kBatch;
    tc.lr = kLr;
    tc.epochs = epochs;
    tc.seed = seed;
    return tc;
}

Outcome training_efficacy() {
    const auto t0 = Clock::now();
    const auto data = torus_data(kTrainShapes, kHeldOut, kTrainPoints, 1);
    std::ostringstream log;
    const auto trained =
        cli::run_training(TrainState::init(acceptance_train_config(kTrainEpochs, 7)), data.train, {}, 0, log);
    const double first = trained.epoch_mean_total.front(), last = trained.epoch_mean_total.back();

    SampleConfig sc;
    sc.points = kTrainPoints;
    sc.seed = 11;
    const Schedule s(trained.state.config.schedule, trained.state.config.sigma_d);
    const auto gen = cli::sample_many(s, trained.state.model, sc, kHeldOut).clouds;
    const double nna = one_nna(gen, data.held_out, Distance::cd);
    const auto untrained = cli::sample_many(s, TrainState::init(acceptance_train_config(1, 7)).model, sc, kHeldOut);
    const double nna0 = one_nna(untrained.clouds, data.held_out, Distance::cd);

    const double ratio = last / first;
    return {ratio < kLossRatio && nna <= kOneNnaCeiling,
            "loss " + fmt(first, "%.4f") + " -> " + fmt(last, "%.4f") + " (ratio " + fmt(ratio, "%.3f") +
                ", need < 0.5), single-step 1-NNA(CD) " + fmt(nna, "%.2f") + "% (need <= 85, untrained " +
                fmt(nna0, "%.2f") + "%), " + fmt(seconds_since(t0), "%.0f") + " s"};
}

// One (loss mode x seed) training per cell, single-step and Euler samplers.
struct ToyGrid {
    // [seed][loss mode] in the order fm_only, chamfer_only, fm_chamfer
    std::vector<std::vector<cli::AblationCell>> single;
    // [seed][S-1] for the fm_chamfer model, Euler with S = 1, 2, 4
    std::vector<std::vector<cli::AblationCell>> euler;
};

const ToyGrid& toy_grid() {
    static const ToyGrid grid = [] {
        ToyGrid g;
        for (std::uint64_t seed : kToySeeds) {
            const auto data = torus_data(kToyShapes, kToyHeldOut, kToyPoints, 100 + seed);
            cli::AblationPlan plan;
            plan.train = acceptance_train_config(kToyEpochs, seed);
            plan.loss_modes = {LossMode::fm_only, LossMode::chamfer_only, LossMode::fm_chamfer};
            plan.schedules = {ScheduleKind::trigflow};
            plan.methods = {SampleMethod::single_step, SampleMethod::euler};
            plan.step_counts = {1, 2, 4};
            plan.sample.points = kToyPoints;
            plan.sample.seed = 1000 + seed;
            std::ostringstream log;
            const auto cells = cli::run_ablation(plan, data.train, data.held_out, {}, log);
            std::vector<cli::AblationCell> single, euler;
            for (const auto& c : cells) {
                if (c.method == SampleMethod::single_step && c.steps == 1) single.push_back(c);
                if (c.method == SampleMethod::euler && c.loss_mode == LossMode::fm_chamfer) euler.push_back(c);
            }
            g.single.push_back(single);
            g.euler.push_back(euler);
        }
        return g;
    }();
    return grid;
}

bool all_ok(const std::vector<cli::AblationCell>& cells, std::string& why) {
    for (const auto& c : cells)
        if (c.status != "ok") {
            why = c.status;
            return false;
        }
    return true;
}

Outcome ablation_ordering() {
    const auto t0 = Clock::now();
    const auto& g = toy_grid();
    int votes = 0;
    std::string detail;
    for (std::size_t i = 0; i < g.single.size(); ++i) {
        std::string why;
        if (!all_ok(g.single[i], why)) return {false, "seed " + std::to_string(kToySeeds[i]) + ": " + why};
        const auto& fm = g.single[i][0].report;
        const auto& cd = g.single[i][1].report;
        const auto& both = g.single[i][2].report;
        const bool ok = *both.one_nna_cd <= *fm.one_nna_cd && *both.cov_cd >= *cd.cov_cd;
        votes += ok;
        detail += (i ? "; " : "") + std::string("seed ") + std::to_string(kToySeeds[i]) + " 1-NNA fm+cd/fm " +
                  fmt(*both.one_nna_cd, "%.1f") + "/" + fmt(*fm.one_nna_cd, "%.1f") + " COV fm+cd/cd " +
                  fmt(*both.cov_cd, "%.1f") + "/" + fmt(*cd.cov_cd, "%.1f") + (ok ? " ok" : " no");
    }
    return {2 * votes > static_cast<int>(g.single.size()),
            std::to_string(votes) + "/" + std::to_string(g.single.size()) + " seeds (" + detail + "), " +
                fmt(seconds_since(t0), "%.0f") + " s"};
}

Outcome step_ordering() {
    const auto t0 = Clock::now();
    const auto& g = toy_grid();
    int votes = 0;
    std::string detail;
    for (std::size_t i = 0; i < g.euler.size(); ++i) {
        std::string why;
        if (!all_ok(g.euler[i], why)) return {false, "seed " + std::to_string(kToySeeds[i]) + ": " + why};
        const double s1 = *g.euler[i][0].report.one_nna_cd;
        const double s2 = *g.euler[i][1].report.one_nna_cd;
        const double s4 = *g.euler[i][2].report.one_nna_cd;
        const bool ok = s2 <= s1 && std::abs(s4 - s2) <= kStepPlateau;
        votes += ok;
        detail += (i ? "; " : "") + std::string("seed ") + std::to_string(kToySeeds[i]) + " S=1/2/4 " +
                  fmt(s1, "%.1f") + "/" + fmt(s2, "%.1f") + "/" + fmt(s4, "%.1f") + (ok ? " ok" : " no");
    }
    return {votes == static_cast<int>(g.euler.size()),
            std::to_string(votes) + "/" + std::to_string(g.euler.size()) + " seeds (" + detail + "), " +
                fmt(seconds_since(t0), "%.0f") + " s"};
}

Outcome determinism() {
    ShapeFamily f = ShapeFamily::of(ShapeKind::torus);
    f.points = 64;
    f.seed = 4;
    const Dataset all = normalize(generate(f, 20), NormalizationMode::unit_radius);
    Dataset data;
    data.clouds.assign(all.clouds.begin(), all.clouds.begin() + 14);
    const std::vector<PointCloud> ref(all.clouds.begin() + 14, all.clouds.end());

    TrainConfig tc;
    tc.batch_size = 4;
    tc.lr = 1e-3;
    tc.epochs = 2;
    tc.seed = 21;
    tc.model = ModelConfig{{32, 32}, 8, {32}, false};

    struct Run {
        std::string ckpt, samples, metrics;
    };
    auto run = [&] {
        std::ostringstream log;
        const auto out = cli::run_training(TrainState::init(tc), data, {}, 0, log);
        Run r;
        r.ckpt = encode_checkpoint(out.state);
        const Schedule s(out.state.config.schedule, out.state.config.sigma_d);
        SampleConfig sc;
        sc.points = 64;
        sc.seed = 5;
        auto batch = cli::sample_many(s, out.state.model, sc, ref.size());
        sc.method = SampleMethod::heun;
        sc.steps = 3;
        for (const auto& c : cli::sample_many(s, out.state.model, sc, 2).clouds) r.samples += format_xyz(c);
        for (const auto& c : batch.clouds) r.samples += format_xyz(c);
        std::ostringstream csv;
        write_report_csv(csv, evaluate(batch.clouds, ref));
        r.metrics = csv.str();
        return r;
    };
    const Run a = run(), b = run();
    const bool same = a.ckpt == b.ckpt && a.samples == b.samples && a.metrics == b.metrics;

    // Stop after 3 of the 4 batches in epoch 0, round-trip through the
    // checkpoint format and replay 5 batches across the epoch boundary.
    auto live = TrainState::init(tc);
    for (int i = 0; i < 3; ++i) train_batch(live, data);
    auto restored = decode_checkpoint(encode_checkpoint(live));
    bool replay = true;
    for (int i = 0; i < 5; ++i) {
        const auto x = train_batch(live, data), y = train_batch(restored, data);
        replay = replay && x.epoch == y.epoch && x.batch == y.batch && x.losses.l_total == y.losses.l_total &&
                 x.losses.l_fm == y.losses.l_fm && x.losses.l_cd == y.losses.l_cd && x.grad_norm == y.grad_norm;
    }
    replay = replay && encode_checkpoint(live) == encode_checkpoint(restored);
    return {same && replay, std::string("repeat run: checkpoint/samples/metrics ") + (same ? "identical" : "differ") +
                                "; resume replay of 5 batches " + (replay ? "exact" : "diverged")};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--only") {
            std::stringstream ss(argv[i + 1]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        }
    }
    const std::vector<Criterion> criteria = {
        {1, "predictor recovery with analytic velocity", predictor_recovery},
        {2, "residual error model", residual_error_model},
        {3, "gradient fidelity", gradient_fidelity},
        {4, "sampler convergence orders", sampler_orders},
        {5, "metric oracles", metric_oracles},
        {6, "training efficacy", training_efficacy},
        {7, "loss ablation ordering", ablation_ordering},
        {8, "sampling step ordering", step_ordering},
        {9, "determinism and resume", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.contains(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
