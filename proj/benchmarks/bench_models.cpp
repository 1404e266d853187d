#include <benchmark/benchmark.h>

#include <numeric>

#include "edboard/models.hpp"
#include "edboard/random.hpp"

namespace {

using namespace edboard;

dataset::WindowedDataset random_windows(std::size_t n, std::size_t channels, std::size_t lag,
                                        std::uint64_t seed) {
    Rng rng(seed);
    dataset::WindowedDataset d;
    d.channels = channels;
    d.lag = lag;
    d.target_column = 0;
    d.x.resize(n * channels * lag);
    for (auto& v : d.x) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        d.y.push_back(rng.normal());
        d.origin_ts.push_back(from_civil(2021, 1, 1) + Hours{static_cast<std::int64_t>(i)});
    }
    return d;
}

models::ModelConfig config(models::Algorithm algo) {
    auto cfg = algo == models::Algorithm::kNLinear ? models::nlinear_config(24, features::kFeatureCount)
                                                   : models::dlinear_config(24, features::kFeatureCount, 13);
    cfg.target_column = 0;
    return cfg;
}

void BM_Forward(benchmark::State& state) {
    const auto algo = static_cast<models::Algorithm>(state.range(0));
    const auto data = random_windows(256, features::kFeatureCount, 24, 1);
    const auto model = models::initial_model(config(algo));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::forward(data.window(i), model));
        i = (i + 1) % data.size();
    }
    state.SetLabel(std::string(models::to_string(algo)));
}
BENCHMARK(BM_Forward)->Arg(static_cast<int>(models::Algorithm::kNLinear))
    ->Arg(static_cast<int>(models::Algorithm::kDLinear));

void BM_LossAndGradientBatch(benchmark::State& state) {
    const auto algo = static_cast<models::Algorithm>(state.range(0));
    const auto data = random_windows(64, features::kFeatureCount, 24, 2);
    const auto model = models::initial_model(config(algo));
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::loss_and_gradient(model, data, idx, {}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(idx.size()));
    state.SetLabel(std::string(models::to_string(algo)));
}
BENCHMARK(BM_LossAndGradientBatch)->Arg(static_cast<int>(models::Algorithm::kNLinear))
    ->Arg(static_cast<int>(models::Algorithm::kDLinear));

void BM_TrainTenEpochs(benchmark::State& state) {
    const auto algo = static_cast<models::Algorithm>(state.range(0));
    const auto train = random_windows(2000, features::kFeatureCount, 24, 3);
    const auto val = random_windows(400, features::kFeatureCount, 24, 4);
    models::TrainConfig tc;
    tc.max_epochs = 10;
    tc.patience = 10;
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::train(config(algo), tc, train, val));
    }
    state.SetLabel(std::string(models::to_string(algo)));
}
BENCHMARK(BM_TrainTenEpochs)->Arg(static_cast<int>(models::Algorithm::kNLinear))
    ->Arg(static_cast<int>(models::Algorithm::kDLinear))->Unit(benchmark::kMillisecond);

}  // namespace
