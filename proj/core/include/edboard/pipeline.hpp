#pragma once

// Batch forecasting pipeline: corpus -> cleaned encounters -> hourly features ->
// chronological split -> extreme indicator and scaler fitted on the training split ->
// per-horizon windows -> models and baselines -> leaderboard.

#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edboard/dataset.hpp"
#include "edboard/eval.hpp"
#include "edboard/features.hpp"
#include "edboard/models.hpp"
#include "edboard/synthgen.hpp"

namespace edboard::pipeline {

inline constexpr std::array<int, 5> kHorizons{6, 8, 10, 12, 24};

/// Throws ValidationError unless h is one of kHorizons.
void validate_horizon(int h);

/// Largest odd kernel size <= min(k, lag).
std::size_t fit_kernel(std::size_t k, std::size_t lag);

/// Model structure used by the batch pipeline and the retrain worker.
models::ModelConfig default_model_config(models::Algorithm algorithm, std::size_t lag,
                                         std::size_t kernel_size);

/// [first context hour, last context hour + 1h).
TimeRange corpus_range(const synth::Corpus& corpus);

struct FeatureBuild {
    features::FeatureTable table;
    features::CleaningReport report;
};

/// Cleans the encounters and aggregates every hour of the corpus range outside `exclusions`.
FeatureBuild build_features(const synth::Corpus& corpus, std::span<const TimeRange> exclusions);
/// As above with the default spring-2020 exclusion window.
FeatureBuild build_features(const synth::Corpus& corpus);

/// Mean and population standard deviation of the target over a table.
std::pair<double, double> target_stats(const features::FeatureTable& table);

struct Prepared {
    dataset::SplitSpec split;
    /// Unscaled splits with the extreme indicator filled from training statistics.
    dataset::Splits raw;
    /// The same splits after scaling.
    dataset::Splits scaled;
    dataset::ScalerParams scaler;
    double extreme_mean = 0.0;
    double extreme_sd = 0.0;
    TimeRange train_range{};
};

/// Only the training split influences the indicator statistics and the scaler.
/// With `scale` false the identity scaler is used.
Prepared prepare(const features::FeatureTable& table, const dataset::SplitSpec& split,
                 dataset::DegeneratePolicy policy = dataset::DegeneratePolicy::kCenterOnly,
                 bool scale = true);

/// Windows never cross split boundaries; each split contributes its own samples.
struct HorizonWindows {
    int horizon = 0;
    dataset::WindowedDataset train;
    dataset::WindowedDataset val;
    dataset::WindowedDataset test;
    /// Unscaled windows of the evaluation splits, for baselines and minute targets.
    dataset::WindowedDataset raw_val;
    dataset::WindowedDataset raw_test;
};

HorizonWindows make_horizon_windows(const Prepared& prepared, std::size_t lag, int horizon);

struct PredictionSet {
    std::vector<double> y;
    std::vector<double> y_hat;
    std::vector<Timestamp> origin_ts;
};

/// Model predictions in minutes (clamped at 0) for scaled windows, paired with the
/// unscaled targets of the matching raw windows.
PredictionSet predict_split(const models::FittedModel& model,
                            const dataset::WindowedDataset& scaled,
                            const dataset::WindowedDataset& raw);

/// Persistence or seasonal-naive forecasts over unscaled windows.
PredictionSet baseline_split(models::Algorithm algorithm, const dataset::WindowedDataset& raw);

/// Trains one model and fills its scaler, indicator statistics, train range and metrics
/// (val_mae plus test mae, rmse, r2, mape).
models::FittedModel fit(const Prepared& prepared, const HorizonWindows& windows,
                        const models::ModelConfig& model_cfg,
                        const models::TrainConfig& train_cfg,
                        const models::EpochObserver& observer = {});

/// Metrics of an already fitted model on a split, keyed as in FittedModel::metrics.
std::map<std::string, double> score_model(const models::FittedModel& model,
                                          const HorizonWindows& windows);

struct BenchmarkConfig {
    std::size_t lag = 24;
    std::vector<int> horizons{kHorizons.begin(), kHorizons.end()};
    std::vector<models::Algorithm> algorithms{
        models::Algorithm::kNLinear, models::Algorithm::kDLinear,
        models::Algorithm::kPersistence, models::Algorithm::kSeasonal};
    models::TrainConfig train;
    std::size_t kernel_size = 13;
};

using ModelMap = std::map<std::pair<models::Algorithm, int>, models::FittedModel>;

struct BenchmarkResult {
    eval::Leaderboard board;
    std::vector<eval::ExtremeRow> extremes;
    ModelMap models;
};

/// Scores the given trained models and the baselines on the test split. Throws
/// NotFoundError listing every (algorithm, horizon) pair without a model.
BenchmarkResult evaluate_models(const Prepared& prepared, const BenchmarkConfig& cfg,
                                ModelMap models);

BenchmarkResult run_benchmark(const Prepared& prepared, const BenchmarkConfig& cfg);

}  // namespace edboard::pipeline
