#include <benchmark/benchmark.h>

#include "edboard/dataset.hpp"
#include "edboard/pipeline.hpp"
#include "edboard/platform/replay.hpp"
#include "edboard/synthgen.hpp"

namespace {

using namespace edboard;

synth::Corpus corpus(std::int64_t days) {
    synth::ScenarioConfig cfg;
    cfg.seed = 5;
    cfg.start_ts = from_civil(2019, 1, 1);
    cfg.end_ts = cfg.start_ts + Hours{24 * days};
    return synth::generate_corpus(cfg);
}

void BM_GenerateCorpus(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(corpus(state.range(0)));
}
BENCHMARK(BM_GenerateCorpus)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_BuildFeatures(benchmark::State& state) {
    const auto c = corpus(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(pipeline::build_features(c, {}));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 24);
}
BENCHMARK(BM_BuildFeatures)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_MakeWindows(benchmark::State& state) {
    const auto table = pipeline::build_features(corpus(60), {}).table;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dataset::make_windows(table, {24, 6, "boarding_time_minute_hourly"}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(table.size()));
}
BENCHMARK(BM_MakeWindows)->Unit(benchmark::kMillisecond);

void BM_ReplayHourlyTicks(benchmark::State& state) {
    const auto c = corpus(state.range(0));
    for (auto _ : state) {
        platform::Replayer replayer(c, std::vector<TimeRange>{});
        benchmark::DoNotOptimize(replayer.run_to_end(Hours{1}));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 24);
}
BENCHMARK(BM_ReplayHourlyTicks)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace
