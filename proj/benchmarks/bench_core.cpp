#include <benchmark/benchmark.h>

#include <vector>

#include "trigcm/datagen.hpp"
#include "trigcm/metrics.hpp"
#include "trigcm/model.hpp"
#include "trigcm/objective.hpp"
#include "trigcm/random.hpp"
#include "trigcm/sampler.hpp"
#include "trigcm/tensor.hpp"

namespace {

using namespace trigcm;

Points noise(std::size_t n, std::uint64_t seed) { return draw_noise(seed, 0, n, 1.0); }

PointCloud torus(std::size_t points, std::uint64_t index) {
    ShapeFamily f = ShapeFamily::of(ShapeKind::torus);
    f.points = points;
    return normalize_unit(generate_shape(f, index));
}

std::vector<double> values(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

void BM_Matmul(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const Tensor a({m, 128}, values(m * 128, 1));
    const Tensor b({128, 128}, values(128 * 128, 2));
    NoGradScope ng;
    for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_Matmul)->Arg(512)->Arg(2048);

void BM_Chamfer(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto a = torus(m, 0), b = torus(m, 1);
    for (auto _ : state) benchmark::DoNotOptimize(chamfer(a.points, b.points));
}
BENCHMARK(BM_Chamfer)->Arg(512)->Arg(2048);

void BM_ChamferBruteForce(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto a = torus(m, 0), b = torus(m, 1);
    for (auto _ : state) benchmark::DoNotOptimize(chamfer_brute_force(a.points, b.points));
}
BENCHMARK(BM_ChamferBruteForce)->Arg(512)->Arg(2048);

void BM_Emd(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto a = torus(m, 0), b = torus(m, 1);
    EmdOptions opts;
    opts.exact_limit = state.range(1) ? m : 0;
    for (auto _ : state) benchmark::DoNotOptimize(emd(a, b, opts));
}
BENCHMARK(BM_Emd)->Args({256, 1})->Args({256, 0})->Args({1024, 0})->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto model = VelocityModel::init(1, ModelConfig{});
    const auto x = noise(m, 3);
    NoGradScope ng;
    for (auto _ : state) benchmark::DoNotOptimize(model.forward(x, 1.0));
}
BENCHMARK(BM_ModelForward)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_TrainingStepLoss(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    auto model = VelocityModel::init(1, ModelConfig{});
    const Schedule s;
    const auto x0 = torus(m, 0).points;
    const auto z = noise(m, 4);
    for (auto _ : state) {
        model.zero_grad();
        Tape tape;
        TapeScope scope(tape);
        tape.backward(total_loss(s, model, x0, z, 0.7).total);
    }
}
BENCHMARK(BM_TrainingStepLoss)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SingleStepSample(benchmark::State& state) {
    const auto model = VelocityModel::init(1, ModelConfig{});
    SampleConfig cfg;
    cfg.points = static_cast<std::size_t>(state.range(0));
    const Schedule s;
    const auto field = model_field(model);
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(generate_sample(s, field, cfg, i++));
}
BENCHMARK(BM_SingleStepSample)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
