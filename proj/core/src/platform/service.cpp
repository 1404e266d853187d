#include "edboard/platform/service.hpp"

#include <algorithm>
#include <chrono>

#include "edboard/dataset.hpp"
#include "edboard/pipeline.hpp"

namespace edboard::platform {

namespace {

/// "20190301T0500", used inside job ids.
std::string compact_stamp(Timestamp t) {
    const CivilTime c = to_civil(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d%02d%02dT%02d%02d", c.year, c.month, c.day, c.hour,
                  c.minute);
    return buf;
}

bool consecutive(std::span<const features::HourlyFeatureRow> rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].hour_ts - rows[i - 1].hour_ts != Hours{1}) return false;
    }
    return true;
}

}  // namespace

Clock system_clock() {
    return [] { return std::chrono::floor<Seconds>(std::chrono::system_clock::now()); };
}

std::shared_ptr<const models::FittedModel> ModelCache::get(const ModelRegistryEntry& entry) {
    std::lock_guard lock(mutex_);
    const auto it = models_.find(entry.model_id);
    if (it != models_.end()) return it->second;
    auto model = std::make_shared<const models::FittedModel>(models::load_model(entry.artifact_path));
    models_.emplace(entry.model_id, model);
    return model;
}

void ModelCache::put(const std::string& model_id, models::FittedModel model) {
    std::lock_guard lock(mutex_);
    models_[model_id] = std::make_shared<const models::FittedModel>(std::move(model));
}

double predict_window(const models::FittedModel& model,
                      std::span<const features::HourlyFeatureRow> rows) {
    const std::size_t lag = model.config.lag;
    if (rows.size() < lag) {
        throw InsufficientDataError("need " + std::to_string(lag) + " hours, have " +
                                    std::to_string(rows.size()));
    }
    const auto x = dataset::extract_window(rows, rows.size() - 1, lag);
    return predict_raw_window(model, {x, features::kFeatureCount, lag});
}

double predict_raw_window(const models::FittedModel& model, dataset::WindowView window) {
    if (window.channels != features::kFeatureCount) {
        throw ValidationError("raw windows must carry the full feature schema");
    }
    std::vector<double> x(window.data.begin(), window.data.end());
    const double threshold = model.extreme_mean + model.extreme_sd;
    const std::size_t lag = window.lag;
    for (std::size_t l = 0; l < lag; ++l) {
        x[features::kExtremeIndicator * lag + l] =
            x[features::kTargetColumn * lag + l] > threshold ? 1.0 : 0.0;
    }
    return models::predict(model, {x, window.channels, lag});
}

models::FittedModel constant_predictor(const models::FittedModel& like, double minutes) {
    models::FittedModel m = like;
    std::fill(m.w_trend.begin(), m.w_trend.end(), 0.0);
    std::fill(m.w_resid.begin(), m.w_resid.end(), 0.0);
    std::fill(m.bias.begin(), m.bias.end(), 0.0);
    std::fill(m.mix.begin(), m.mix.end(), 0.0);
    m.out_bias = dataset::scale_value(minutes, m.scaler, m.config.target_column);
    m.history.clear();
    m.best_epoch = 0;
    m.metrics.clear();
    return m;
}

void validate(const MonitorConfig& cfg) {
    std::vector<std::string> bad;
    if (cfg.rolling_window_hours < 1) bad.emplace_back("rolling_window_hours");
    if (cfg.cooldown_hours < 0) bad.emplace_back("cooldown_hours");
    if (!(cfg.max_mae >= 0.0)) bad.emplace_back("max_mae");
    if (!(cfg.max_mape >= 0.0)) bad.emplace_back("max_mape");
    if (!(cfg.min_r2 <= 1.0)) bad.emplace_back("min_r2");
    if (!bad.empty()) {
        std::string msg = "invalid monitor config:";
        for (const auto& f : bad) msg += " " + f;
        throw ValidationError(msg, bad);
    }
}

bool breaches(const eval::MetricReport& r, const MonitorConfig& cfg) {
    return r.mae > cfg.max_mae || (r.r2 && *r.r2 < cfg.min_r2) ||
           (r.mape && *r.mape > cfg.max_mape);
}

ForecastService::ForecastService(Store& store, ModelCache& cache, ServiceConfig cfg)
    : store_(store), cache_(cache), cfg_(std::move(cfg)) {
    for (int h : cfg_.horizons) pipeline::validate_horizon(h);
    if (cfg_.lag < 1) throw ValidationError("lag must be at least 1", {"lag"});
}

std::vector<ForecastRecord> ForecastService::forecast_all_horizons(Timestamp created_ts) {
    const auto latest = store_.latest_features(cfg_.lag);
    return forecast_all_horizons(latest, created_ts);
}

std::vector<ForecastRecord> ForecastService::forecast_all_horizons(
    std::span<const features::HourlyFeatureRow> latest, Timestamp created_ts) {
    if (latest.size() < cfg_.lag) {
        throw InsufficientDataError("forecasting needs " + std::to_string(cfg_.lag) +
                                    " hours of history, have " + std::to_string(latest.size()));
    }
    const auto window = latest.subspan(latest.size() - cfg_.lag);
    if (!consecutive(window)) {
        throw InsufficientDataError("the latest " + std::to_string(cfg_.lag) +
                                    " hours are not consecutive");
    }
    const Timestamp origin = window.back().hour_ts;
    std::vector<ForecastRecord> out;
    std::vector<int> missing;
    for (int h : cfg_.horizons) {
        const auto entry = store_.active_model(h);
        if (!entry) {
            missing.push_back(h);
            continue;
        }
        const auto model = cache_.get(*entry);
        if (model->config.lag != cfg_.lag) {
            throw ValidationError("active model " + entry->model_id + " expects lag " +
                                  std::to_string(model->config.lag));
        }
        ForecastRecord rec{origin, h, origin + Hours{h}, predict_window(*model, window),
                           entry->model_id, created_ts};
        store_.insert_forecast(rec);
        out.push_back(std::move(rec));
    }
    if (!missing.empty()) {
        std::string msg = "no active model for horizon(s):";
        for (int h : missing) msg += " " + std::to_string(h);
        throw PartialResultError(msg, std::move(missing), std::move(out));
    }
    return out;
}

std::map<int, MetricSnapshot> ForecastService::mature_and_score(Timestamp now,
                                                                const MonitorConfig& cfg) {
    validate(cfg);
    const TimeRange window{now - Hours{cfg.rolling_window_hours}, now};
    std::map<int, MetricSnapshot> out;
    for (int h : cfg_.horizons) {
        std::vector<double> y;
        std::vector<double> y_hat;
        for (const auto& f : store_.forecasts_by_target(h, window)) {
            const auto row = store_.feature_row(f.target_ts);
            if (!row) continue;
            y.push_back((*row)[features::kTargetColumn]);
            y_hat.push_back(f.predicted_minutes);
        }
        MetricSnapshot snap{now, h, std::nullopt};
        if (!y.empty()) snap.report = eval::compute_metrics(y, y_hat);
        store_.insert_metric_snapshot(snap);
        out.emplace(h, std::move(snap));
    }
    return out;
}

models::Algorithm ForecastService::algorithm_for(int horizon) const {
    const auto active = store_.active_model(horizon);
    if (active && models::is_trainable(active->algorithm)) return active->algorithm;
    return cfg_.default_algorithm;
}

TimeRange ForecastService::data_until(Timestamp end) const {
    const auto span = store_.feature_span();
    const Timestamp from = span ? std::min(span->from, end) : end;
    return {from, end};
}

std::vector<RetrainJob> ForecastService::monitor_and_trigger(
    const std::map<int, MetricSnapshot>& snapshots, const MonitorConfig& cfg, Timestamp now) {
    validate(cfg);
    std::vector<RetrainJob> out;
    const auto all_jobs = store_.jobs();
    for (const auto& [h, snap] : snapshots) {
        if (!snap.report || !breaches(*snap.report, cfg)) continue;
        const std::string id = "thr-h" + std::to_string(h) + "-" + compact_stamp(now);
        if (const auto existing = store_.job(id)) {
            out.push_back(*existing);
            continue;
        }
        const bool cooling = std::any_of(all_jobs.begin(), all_jobs.end(), [&](const RetrainJob& j) {
            return j.trigger == JobTrigger::kThreshold && j.horizon == h && j.enqueued_ts <= now &&
                   now - j.enqueued_ts < Hours{cfg.cooldown_hours};
        });
        if (cooling) continue;
        RetrainJob job;
        job.job_id = id;
        job.trigger = JobTrigger::kThreshold;
        job.algorithm = algorithm_for(h);
        job.horizon = h;
        job.data_range = data_until(floor_hour(now));
        job.enqueued_ts = now;
        store_.enqueue_job(job);
        out.push_back(std::move(job));
    }
    return out;
}

std::vector<RetrainJob> ForecastService::schedule_monthly(Timestamp now) {
    const Timestamp month = month_start(now);
    const CivilTime c = to_civil(month);
    char stamp[16];
    std::snprintf(stamp, sizeof stamp, "%04d-%02d", c.year, c.month);
    std::vector<RetrainJob> out;
    // A month whose start precedes all stored data has nothing to train on.
    if (data_until(month).empty()) return out;
    for (int h : cfg_.horizons) {
        RetrainJob job;
        job.job_id = std::string("sched-") + stamp + "-h" + std::to_string(h);
        job.trigger = JobTrigger::kScheduled;
        job.algorithm = algorithm_for(h);
        job.horizon = h;
        job.data_range = data_until(month);
        job.enqueued_ts = now;
        if (store_.enqueue_job(job)) out.push_back(std::move(job));
    }
    return out;
}

std::vector<RetrainJob> ForecastService::request_retrain(models::Algorithm algorithm,
                                                         std::span<const int> horizons,
                                                         TimeRange range, Timestamp now) {
    if (!models::is_trainable(algorithm)) {
        throw ValidationError("only nlinear and dlinear can be retrained", {"algorithm"});
    }
    if (horizons.empty()) throw ValidationError("at least one horizon is required", {"horizons"});
    for (int h : horizons) pipeline::validate_horizon(h);
    if (!(range.from < range.to)) {
        throw ValidationError("date range must satisfy from < to", {"date_range"});
    }
    std::vector<RetrainJob> out;
    const std::size_t serial = store_.jobs().size();
    for (int h : horizons) {
        RetrainJob job;
        job.job_id = "man-h" + std::to_string(h) + "-" + compact_stamp(now) + "-" +
                     std::to_string(serial + out.size());
        job.trigger = JobTrigger::kManual;
        job.algorithm = algorithm;
        job.horizon = h;
        job.data_range = range;
        job.enqueued_ts = now;
        if (!store_.enqueue_job(job)) {
            throw ConflictError("job '" + job.job_id + "' already exists");
        }
        out.push_back(std::move(job));
    }
    return out;
}

}  // namespace edboard::platform
