#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edboard/models.hpp"
#include "edboard/platform/store.hpp"

namespace edboard::platform {

/// Injectable clock; the platform never reads wall time directly.
using Clock = std::function<Timestamp()>;
Clock system_clock();

/// Loads registered model artifacts on first use and shares them read-only.
class ModelCache {
public:
    std::shared_ptr<const models::FittedModel> get(const ModelRegistryEntry& entry);
    /// Makes an in-memory model available under `model_id` without an artifact file.
    void put(const std::string& model_id, models::FittedModel model);

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const models::FittedModel>> models_;
};

/// Prediction in minutes for an unscaled lag window whose extreme-indicator column is
/// recomputed with the model's own training statistics first.
double predict_window(const models::FittedModel& model, std::span<const features::HourlyFeatureRow> rows);
/// Same for a channel-major unscaled window.
double predict_raw_window(const models::FittedModel& model, dataset::WindowView window);

/// A model that always predicts `minutes`: zero lag weights and mixing, output bias set
/// to the scaled constant. Shape, scaler and indicator statistics are copied from `like`.
models::FittedModel constant_predictor(const models::FittedModel& like, double minutes);

struct MonitorConfig {
    int rolling_window_hours = 168;
    double max_mae = 150.0;
    double min_r2 = 0.4;
    double max_mape = 30.0;
    int cooldown_hours = 24;
};
void validate(const MonitorConfig& cfg);

/// Whether a report breaches any threshold. Absent r2 or mape never breach.
bool breaches(const eval::MetricReport& report, const MonitorConfig& cfg);

struct ServiceConfig {
    std::size_t lag = 24;
    std::vector<int> horizons{6, 8, 10, 12, 24};
    /// Algorithm for scheduled or threshold jobs when a horizon has no active model.
    models::Algorithm default_algorithm = models::Algorithm::kNLinear;
};

/// Forecasting, scoring and retrain triggering on top of a Store.
class ForecastService {
public:
    ForecastService(Store& store, ModelCache& cache, ServiceConfig cfg = {});

    /// Forecasts every configured horizon from the lag window ending at the latest
    /// completed hour in the store and persists the records.
    /// Throws InsufficientDataError when fewer than `lag` consecutive hours end there;
    /// throws PartialResultError (after persisting the others) when horizons lack an
    /// active model.
    std::vector<ForecastRecord> forecast_all_horizons(Timestamp created_ts);
    /// Same, for an explicit window of rows (oldest first); nothing is read from the store.
    std::vector<ForecastRecord> forecast_all_horizons(std::span<const features::HourlyFeatureRow> latest,
                                                      Timestamp created_ts);

    /// Rolling-window metrics per horizon over forecasts whose target hour row exists and
    /// whose target_ts lies in [now - window, now). Persists one snapshot per horizon.
    std::map<int, MetricSnapshot> mature_and_score(Timestamp now, const MonitorConfig& cfg);

    /// Enqueues one threshold job per breaching horizon unless that horizon already had a
    /// threshold job within the cooldown. Job ids are derived from (horizon, now), so
    /// replaying the same snapshots returns the same jobs without enqueuing new ones.
    std::vector<RetrainJob> monitor_and_trigger(const std::map<int, MetricSnapshot>& snapshots,
                                                const MonitorConfig& cfg, Timestamp now);

    /// At the first call in a calendar month, enqueues one scheduled job per horizon
    /// covering data up to the end of the previous month. Later calls in the month, and
    /// calls before any stored data precedes the month start, return nothing.
    std::vector<RetrainJob> schedule_monthly(Timestamp now);

    /// Queues a manual job per horizon; returns the jobs.
    std::vector<RetrainJob> request_retrain(models::Algorithm algorithm, std::span<const int> horizons,
                                            TimeRange range, Timestamp now);

    [[nodiscard]] const ServiceConfig& config() const { return cfg_; }

private:
    models::Algorithm algorithm_for(int horizon) const;
    TimeRange data_until(Timestamp end) const;

    Store& store_;
    ModelCache& cache_;
    ServiceConfig cfg_;
};

}  // namespace edboard::platform
