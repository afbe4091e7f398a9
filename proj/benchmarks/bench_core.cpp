#include <benchmark/benchmark.h>

#include "deltasim/certificates.hpp"
#include "deltasim/experiments.hpp"

using namespace deltasim;

static void BM_GaussianFill(benchmark::State& state) {
    RngStream rng(1, 0);
    std::vector<double> buf(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        rng.fill_gaussian(buf.data(), buf.size());
        benchmark::DoNotOptimize(buf.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaussianFill)->Arg(1024)->Arg(16384);

static void BM_SampleAtCosine(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    RngStream rng(2, 0);
    const DenseVector star = sample_unit_sphere(d, rng);
    for (auto _ : state) benchmark::DoNotOptimize(sample_at_cosine(star, 0.5, rng));
}
BENCHMARK(BM_SampleAtCosine)->Arg(128)->Arg(2048);

static void BM_TrainStepDirect(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const Instance inst = sample_instance(d, accuracy_to_alpha(0.8), accuracy_to_alpha(0.7),
                                          accuracy_to_alpha(0.6), 7);
    TrainConfig cfg;
    cfg.eta = 1e-6;
    cfg.steps = 16;
    cfg.batch = d;
    cfg.sampler = BatchSampler::direct;
    RngStream rng(3, 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(train(inst.theta0, inst.teachers, inst.task, cfg, rng).gain);
    state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_TrainStepDirect)->Arg(64)->Arg(128);

static void BM_TrainStepAggregate(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const Instance inst = sample_instance(d, accuracy_to_alpha(0.8), accuracy_to_alpha(0.7),
                                          accuracy_to_alpha(0.6), 7);
    TrainConfig cfg;
    cfg.eta = 1e-8;
    cfg.steps = 4096;
    cfg.batch = d;
    cfg.sampler = BatchSampler::aggregate;
    RngStream rng(4, 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(train(inst.theta0, inst.teachers, inst.task, cfg, rng).gain);
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_TrainStepAggregate)->Arg(64)->Arg(128);

static void BM_Prescribe(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const Instance inst = sample_instance(d, accuracy_to_alpha(0.8), accuracy_to_alpha(0.7),
                                          accuracy_to_alpha(0.6), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(prescribe(inst.theta0, inst.teachers, inst.task, d, 0.1));
}
BENCHMARK(BM_Prescribe)->Arg(128)->Arg(2048);

BENCHMARK_MAIN();
