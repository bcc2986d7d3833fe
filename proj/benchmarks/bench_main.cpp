#include "streamsbm/batch.hpp"
#include "streamsbm/history.hpp"
#include "streamsbm/likelihood.hpp"
#include "streamsbm/metrics.hpp"
#include "streamsbm/online.hpp"
#include "streamsbm/simulator.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace streamsbm;

const GroundTruth& poisson_truth() {
    static const GroundTruth truth =
        simulate_ground_truth(ModelParams::hom_poisson(reference::poisson_rates()), reference::class_proportions(),
                              100, DegreeScenario::even(40), 100.0, 1);
    return truth;
}

const GroundTruth& hawkes_truth() {
    static const GroundTruth truth = simulate_ground_truth(
        ModelParams::hom_hawkes(reference::hawkes_baseline(), reference::hawkes_excitation(), 1.0),
        reference::class_proportions(), 100, DegreeScenario::even(40), 50.0, 1);
    return truth;
}

// Full online pass; items are events.
void BM_OnlinePass(benchmark::State& state, ModelKind kind) {
    const GroundTruth& truth = is_hawkes(kind) ? hawkes_truth() : poisson_truth();
    OnlineOptions options;
    options.model = kind;
    options.record_params = false;
    const WindowConfig windows(5.0, truth.horizon);
    for (auto _ : state) {
        OnlineResult result = run_online(truth.events, truth.edges, windows, options);
        benchmark::DoNotOptimize(result.state.tau.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(truth.events.size()));
}
BENCHMARK_CAPTURE(BM_OnlinePass, hom_poisson, ModelKind::HomPoisson)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_OnlinePass, hom_hawkes, ModelKind::HomHawkes)->Unit(benchmark::kMillisecond);

// One batch EM iteration on the Poisson setting.
void BM_BatchIteration(benchmark::State& state) {
    const GroundTruth& truth = poisson_truth();
    BatchOptions options;
    options.horizon = truth.horizon;
    options.max_iterations = 1;
    for (auto _ : state) {
        BatchFitReport report = batch_fit(truth.events, truth.edges, options);
        benchmark::DoNotOptimize(report.tau.data());
    }
}
BENCHMARK(BM_BatchIteration)->Unit(benchmark::kMillisecond);

// Appending and trimming a random stream; items are events.
void BM_TrimHistory(benchmark::State& state) {
    const auto pairs = static_cast<NodeId>(state.range(0));
    std::vector<NodePair> list;
    for (NodeId p = 0; p < pairs; ++p) {
        list.push_back({p, p + 1});
    }
    const EdgeList edges(pairs + 1, list);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<NodeId> pick(0, pairs - 1);
    std::vector<Event> events(20000);
    double t = 0.0;
    for (auto& e : events) {
        t += 0.01;
        const NodeId p = pick(rng);
        e = {p, p + 1, t};
    }
    for (auto _ : state) {
        HistoryStore store(HistoryStore::Mode::Timestamps, edges, 5.0);
        for (std::size_t start = 0; start < events.size(); start += 500) {
            const std::span<const Event> chunk(events.data() + start, 500);
            trim_history(store, edges, 5.0, chunk.back().t, chunk);
        }
        benchmark::DoNotOptimize(store.stored_timestamps());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_TrimHistory)->Arg(100)->Arg(10000);

void BM_SimulateHawkes(benchmark::State& state) {
    const ModelParams params =
        ModelParams::hom_hawkes(reference::hawkes_baseline(), reference::hawkes_excitation(), 1.0);
    const SampledEdges sampled = sample_edge_list(100, DegreeScenario::even(10), 4);
    const std::vector<int> classes = sample_memberships(100, reference::class_proportions(), 5);
    std::size_t events = 0;
    for (auto _ : state) {
        const std::vector<Event> out = simulate(params, sampled.edges, classes, 50.0, 6);
        events += out.size();
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_SimulateHawkes)->Unit(benchmark::kMillisecond);

void BM_SpectralBaseline(benchmark::State& state) {
    const GroundTruth& truth = poisson_truth();
    for (auto _ : state) {
        SpectralResult result = spectral_count_baseline(truth.events, truth.edges.num_nodes(), 3, 1);
        benchmark::DoNotOptimize(result.classes.data());
    }
}
BENCHMARK(BM_SpectralBaseline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
