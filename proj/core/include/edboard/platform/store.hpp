#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "edboard/features.hpp"
#include "edboard/platform/types.hpp"

namespace edboard::platform {

/// Storage contract of the platform. Tables are append-only except job status and the
/// model active flag. Range queries return rows ordered by timestamp. Implementations
/// must be safe for concurrent readers with one writer per table.
class Store {
public:
    virtual ~Store() = default;

    // raw_encounters / raw_context / raw_inpatient
    virtual void append_encounter_events(std::span<const EncounterEvent> events) = 0;
    virtual void append_context(std::span<const ContextRecord> rows) = 0;
    virtual void append_inpatient(std::span<const InpatientEvent> events) = 0;
    [[nodiscard]] virtual std::vector<EncounterEvent> recent_encounter_events(std::size_t n) const = 0;
    [[nodiscard]] virtual std::size_t encounter_event_count() const = 0;
    [[nodiscard]] virtual std::size_t context_count() const = 0;
    [[nodiscard]] virtual std::size_t inpatient_count() const = 0;

    // hourly_features
    /// Throws ConflictError when a row for the hour already exists.
    virtual void insert_feature_row(const features::HourlyFeatureRow& row) = 0;
    /// Rows with hour_ts in [range.from, range.to).
    [[nodiscard]] virtual std::vector<features::HourlyFeatureRow> features(TimeRange range) const = 0;
    [[nodiscard]] virtual std::optional<features::HourlyFeatureRow> feature_row(Timestamp hour) const = 0;
    /// The last n rows, oldest first.
    [[nodiscard]] virtual std::vector<features::HourlyFeatureRow> latest_features(std::size_t n) const = 0;
    [[nodiscard]] virtual std::size_t feature_count() const = 0;
    /// [first hour, last hour + 1h) of the stored rows; absent when the table is empty.
    [[nodiscard]] virtual std::optional<TimeRange> feature_span() const = 0;

    // forecasts
    /// Throws ConflictError when (origin_ts, horizon) already has a forecast.
    virtual void insert_forecast(const ForecastRecord& f) = 0;
    /// Forecasts of one horizon with target_ts in [range.from, range.to), by target time.
    [[nodiscard]] virtual std::vector<ForecastRecord> forecasts_by_target(int horizon,
                                                                          TimeRange range) const = 0;
    /// Most recent forecast per horizon.
    [[nodiscard]] virtual std::vector<ForecastRecord> latest_forecasts() const = 0;
    [[nodiscard]] virtual std::size_t forecast_count() const = 0;

    // metric_snapshots
    /// Re-inserting an identical snapshot is a no-op; a different one for the same
    /// (at, horizon) throws ConflictError.
    virtual void insert_metric_snapshot(const MetricSnapshot& s) = 0;
    [[nodiscard]] virtual std::vector<MetricSnapshot> metric_snapshots(int horizon,
                                                                       TimeRange range) const = 0;

    // model_registry
    /// Throws ConflictError on a duplicate model_id or a second entry for one job_id.
    virtual void register_model(const ModelRegistryEntry& e) = 0;
    /// Activates the model and deactivates the other models of its horizon atomically.
    virtual void activate_model(const std::string& model_id) = 0;
    [[nodiscard]] virtual std::vector<ModelRegistryEntry> registry() const = 0;
    [[nodiscard]] virtual std::optional<ModelRegistryEntry> model(const std::string& model_id) const = 0;
    [[nodiscard]] virtual std::optional<ModelRegistryEntry> active_model(int horizon) const = 0;
    [[nodiscard]] virtual std::optional<ModelRegistryEntry> model_for_job(const std::string& job_id) const = 0;

    // retrain_jobs
    /// Returns false (and changes nothing) when the job_id already exists.
    virtual bool enqueue_job(const RetrainJob& job) = 0;
    /// Applies a status change; throws ConflictError on an illegal transition.
    virtual RetrainJob update_job(const std::string& job_id, JobStatus to, Timestamp ts,
                                  std::optional<std::string> result_model_id = std::nullopt,
                                  std::string error = {}) = 0;
    [[nodiscard]] virtual std::optional<RetrainJob> job(const std::string& job_id) const = 0;
    /// All jobs in enqueue order.
    [[nodiscard]] virtual std::vector<RetrainJob> jobs() const = 0;
    /// Oldest queued job, if any.
    [[nodiscard]] virtual std::optional<RetrainJob> next_queued_job() const = 0;
    [[nodiscard]] virtual std::vector<JobLogEntry> job_log() const = 0;
};

/// Reference store: in-memory tables mirrored to an append-only JSON-lines journal.
/// Opening a directory that already holds a journal restores every table from it.
/// A default-constructed store keeps everything in memory only.
class FileStore final : public Store {
public:
    FileStore();
    explicit FileStore(const std::filesystem::path& dir);
    ~FileStore() override;
    FileStore(const FileStore&) = delete;
    FileStore& operator=(const FileStore&) = delete;

    static constexpr const char* kJournalName = "store.jsonl";

    void append_encounter_events(std::span<const EncounterEvent> events) override;
    void append_context(std::span<const ContextRecord> rows) override;
    void append_inpatient(std::span<const InpatientEvent> events) override;
    std::vector<EncounterEvent> recent_encounter_events(std::size_t n) const override;
    std::size_t encounter_event_count() const override;
    std::size_t context_count() const override;
    std::size_t inpatient_count() const override;

    void insert_feature_row(const features::HourlyFeatureRow& row) override;
    std::vector<features::HourlyFeatureRow> features(TimeRange range) const override;
    std::optional<features::HourlyFeatureRow> feature_row(Timestamp hour) const override;
    std::vector<features::HourlyFeatureRow> latest_features(std::size_t n) const override;
    std::size_t feature_count() const override;
    std::optional<TimeRange> feature_span() const override;

    void insert_forecast(const ForecastRecord& f) override;
    std::vector<ForecastRecord> forecasts_by_target(int horizon, TimeRange range) const override;
    std::vector<ForecastRecord> latest_forecasts() const override;
    std::size_t forecast_count() const override;

    void insert_metric_snapshot(const MetricSnapshot& s) override;
    std::vector<MetricSnapshot> metric_snapshots(int horizon, TimeRange range) const override;

    void register_model(const ModelRegistryEntry& e) override;
    void activate_model(const std::string& model_id) override;
    std::vector<ModelRegistryEntry> registry() const override;
    std::optional<ModelRegistryEntry> model(const std::string& model_id) const override;
    std::optional<ModelRegistryEntry> active_model(int horizon) const override;
    std::optional<ModelRegistryEntry> model_for_job(const std::string& job_id) const override;

    bool enqueue_job(const RetrainJob& job) override;
    RetrainJob update_job(const std::string& job_id, JobStatus to, Timestamp ts,
                          std::optional<std::string> result_model_id,
                          std::string error) override;
    std::optional<RetrainJob> job(const std::string& job_id) const override;
    std::vector<RetrainJob> jobs() const override;
    std::optional<RetrainJob> next_queued_job() const override;
    std::vector<JobLogEntry> job_log() const override;

private:
    struct Tables;
    void replay_journal(const std::filesystem::path& file);
    void journal(const std::string& line);
    void flush();

    mutable std::shared_mutex mutex_;
    std::unique_ptr<Tables> t_;
    std::ofstream journal_;
    bool replaying_ = false;
};

}  // namespace edboard::platform
