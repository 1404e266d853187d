#include "edboard/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace edboard::pipeline {

using features::FeatureTable;

void validate_horizon(int h) {
    if (std::find(kHorizons.begin(), kHorizons.end(), h) == kHorizons.end()) {
        throw ValidationError("horizon must be one of 6, 8, 10, 12, 24; got " + std::to_string(h),
                              {"horizon"});
    }
}

std::size_t fit_kernel(std::size_t k, std::size_t lag) {
    std::size_t out = std::min(k, lag);
    if (out % 2 == 0 && out > 0) --out;
    return std::max<std::size_t>(out, 1);
}

models::ModelConfig default_model_config(models::Algorithm algorithm, std::size_t lag,
                                         std::size_t kernel_size) {
    if (algorithm == models::Algorithm::kDLinear) {
        return models::dlinear_config(lag, features::kFeatureCount, fit_kernel(kernel_size, lag));
    }
    if (algorithm == models::Algorithm::kNLinear) {
        return models::nlinear_config(lag, features::kFeatureCount);
    }
    throw ValidationError(std::string(models::to_string(algorithm)) + " is not trainable",
                          {"algorithm"});
}

TimeRange corpus_range(const synth::Corpus& corpus) {
    if (corpus.context.empty()) throw ValidationError("corpus has no context hours");
    Timestamp lo = corpus.context.front().hour_ts;
    Timestamp hi = lo;
    for (const auto& c : corpus.context) {
        lo = std::min(lo, c.hour_ts);
        hi = std::max(hi, c.hour_ts);
    }
    return {lo, hi + Hours{1}};
}

FeatureBuild build_features(const synth::Corpus& corpus, std::span<const TimeRange> exclusions) {
    auto cleaned = features::clean_encounters(corpus.encounters);
    FeatureBuild out;
    out.table = features::build_feature_table(cleaned.kept, corpus.inpatient, corpus.context,
                                              corpus_range(corpus), exclusions);
    out.report = cleaned.report;
    const auto range = corpus_range(corpus);
    for (const auto& ex : exclusions) {
        const TimeRange hit{std::max(ex.from, range.from), std::min(ex.to, range.to)};
        if (hit.from < hit.to) out.report.excluded_hour_range = hit;
    }
    return out;
}

FeatureBuild build_features(const synth::Corpus& corpus) {
    const std::array<TimeRange, 1> ex{features::default_exclusion()};
    return build_features(corpus, ex);
}

std::pair<double, double> target_stats(const FeatureTable& table) {
    if (table.empty()) throw ValidationError("target statistics need at least one row");
    double sum = 0.0;
    for (const auto& r : table.rows) sum += r[features::kTargetColumn];
    const double mean = sum / static_cast<double>(table.size());
    double ss = 0.0;
    for (const auto& r : table.rows) {
        const double d = r[features::kTargetColumn] - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(table.size()))};
}

Prepared prepare(const FeatureTable& table, const dataset::SplitSpec& split,
                 dataset::DegeneratePolicy policy, bool scale) {
    Prepared p;
    p.split = split;
    p.raw = dataset::chronological_split(table, split);
    std::tie(p.extreme_mean, p.extreme_sd) = target_stats(p.raw.train);
    for (auto* part : {&p.raw.train, &p.raw.val, &p.raw.test}) {
        features::extreme_indicator(part->rows, p.extreme_mean, p.extreme_sd);
    }
    p.scaler = scale ? dataset::fit_scaler(p.raw.train, policy) : dataset::identity_scaler();
    p.scaled.train = dataset::apply_scaler(p.raw.train, p.scaler);
    p.scaled.val = dataset::apply_scaler(p.raw.val, p.scaler);
    p.scaled.test = dataset::apply_scaler(p.raw.test, p.scaler);
    p.train_range = {p.raw.train.rows.front().hour_ts,
                     p.raw.train.rows.back().hour_ts + Hours{1}};
    return p;
}

HorizonWindows make_horizon_windows(const Prepared& p, std::size_t lag, int horizon) {
    const dataset::WindowSpec spec{lag, horizon, "boarding_time_minute_hourly"};
    HorizonWindows w;
    w.horizon = horizon;
    w.train = dataset::make_windows(p.scaled.train, spec);
    w.val = dataset::make_windows(p.scaled.val, spec);
    w.test = dataset::make_windows(p.scaled.test, spec);
    w.raw_val = dataset::make_windows(p.raw.val, spec);
    w.raw_test = dataset::make_windows(p.raw.test, spec);
    return w;
}

PredictionSet predict_split(const models::FittedModel& model,
                            const dataset::WindowedDataset& scaled,
                            const dataset::WindowedDataset& raw) {
    if (scaled.size() != raw.size()) {
        throw ValidationError("scaled and raw window sets differ in size");
    }
    PredictionSet out;
    out.y = raw.y;
    out.origin_ts = raw.origin_ts;
    out.y_hat.reserve(scaled.size());
    const std::size_t t = model.config.target_column;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const double z = models::forward(scaled.window(i), model);
        out.y_hat.push_back(std::max(dataset::unscale_value(z, model.scaler, t), 0.0));
    }
    return out;
}

PredictionSet baseline_split(models::Algorithm algorithm, const dataset::WindowedDataset& raw) {
    PredictionSet out;
    out.y = raw.y;
    out.origin_ts = raw.origin_ts;
    out.y_hat.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        switch (algorithm) {
            case models::Algorithm::kPersistence:
                out.y_hat.push_back(models::persistence_baseline(raw.window(i), raw.target_column));
                break;
            case models::Algorithm::kSeasonal:
                out.y_hat.push_back(
                    models::seasonal_baseline(raw.window(i), raw.horizon, raw.target_column));
                break;
            default:
                throw ValidationError("baseline_split needs a baseline algorithm");
        }
    }
    return out;
}

std::map<std::string, double> score_model(const models::FittedModel& model,
                                          const HorizonWindows& w) {
    std::map<std::string, double> m;
    if (!w.val.empty()) {
        const auto val = predict_split(model, w.val, w.raw_val);
        m["val_mae"] = eval::compute_metrics(val.y, val.y_hat).mae;
    }
    if (!w.test.empty()) {
        const auto test = predict_split(model, w.test, w.raw_test);
        const auto r = eval::compute_metrics(test.y, test.y_hat);
        m["mae"] = r.mae;
        m["rmse"] = r.rmse;
        if (r.r2) m["r2"] = *r.r2;
        if (r.mape) m["mape"] = *r.mape;
        m["n_test"] = static_cast<double>(r.n);
    }
    return m;
}

models::FittedModel fit(const Prepared& p, const HorizonWindows& w,
                        const models::ModelConfig& model_cfg, const models::TrainConfig& train_cfg,
                        const models::EpochObserver& observer) {
    auto model = models::train(model_cfg, train_cfg, w.train, w.val, observer);
    model.horizon = w.horizon;
    model.scaler = p.scaler;
    model.extreme_mean = p.extreme_mean;
    model.extreme_sd = p.extreme_sd;
    model.train_range = p.train_range;
    model.metrics = score_model(model, w);
    return model;
}

BenchmarkResult evaluate_models(const Prepared& p, const BenchmarkConfig& cfg, ModelMap models) {
    std::vector<std::string> missing;
    for (int h : cfg.horizons) {
        validate_horizon(h);
        for (auto algo : cfg.algorithms) {
            if (models::is_trainable(algo) && !models.count({algo, h})) {
                missing.push_back(std::string(models::to_string(algo)) + " h=" + std::to_string(h));
            }
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw NotFoundError("missing trained models: " + list);
    }
    BenchmarkResult out;
    std::vector<eval::LeaderboardEntry> entries;
    const auto thresholds = eval::extreme_thresholds(p.extreme_mean, p.extreme_sd);
    for (int h : cfg.horizons) {
        const auto w = make_horizon_windows(p, cfg.lag, h);
        if (w.test.empty()) {
            throw InsufficientDataError("test split has no windows for h=" + std::to_string(h));
        }
        for (auto algo : cfg.algorithms) {
            const auto preds = models::is_trainable(algo)
                                   ? predict_split(models.at({algo, h}), w.test, w.raw_test)
                                   : baseline_split(algo, w.raw_test);
            const std::string name(models::to_string(algo));
            entries.push_back({name, h, eval::compute_metrics(preds.y, preds.y_hat), false});
            out.extremes.push_back({h, name, eval::slice_and_score(preds.y, preds.y_hat, thresholds)});
        }
    }
    out.board = eval::leaderboard(std::move(entries));
    out.models = std::move(models);
    return out;
}

BenchmarkResult run_benchmark(const Prepared& p, const BenchmarkConfig& cfg) {
    ModelMap fitted;
    for (int h : cfg.horizons) {
        validate_horizon(h);
        const auto w = make_horizon_windows(p, cfg.lag, h);
        if (w.test.empty()) {
            throw InsufficientDataError("test split has no windows for h=" + std::to_string(h));
        }
        for (auto algo : cfg.algorithms) {
            if (!models::is_trainable(algo)) continue;
            fitted.emplace(std::make_pair(algo, h),
                           fit(p, w, default_model_config(algo, cfg.lag, cfg.kernel_size), cfg.train));
        }
    }
    return evaluate_models(p, cfg, std::move(fitted));
}

}  // namespace edboard::pipeline
