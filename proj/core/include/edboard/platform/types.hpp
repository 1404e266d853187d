#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "edboard/eval.hpp"
#include "edboard/models.hpp"
#include "edboard/records.hpp"
#include "edboard/time.hpp"

namespace edboard::platform {

/// One observed step of an ED visit, as it would arrive from a tracking-board feed.
enum class EncounterEventKind { kArrival, kTreatmentStart, kBedRequest, kCheckout };
std::string_view to_string(EncounterEventKind k);
EncounterEventKind parse_encounter_event_kind(std::string_view text);

struct EncounterEvent {
    EncounterEventKind kind = EncounterEventKind::kArrival;
    Timestamp ts;
    std::string visit_id;
    std::string patient_id;
    std::optional<int> esi;
    friend bool operator==(const EncounterEvent&, const EncounterEvent&) = default;
};

struct ForecastRecord {
    Timestamp origin_ts;
    int horizon = 0;
    Timestamp target_ts;
    double predicted_minutes = 0.0;
    std::string model_id;
    Timestamp created_ts;
    friend bool operator==(const ForecastRecord&, const ForecastRecord&) = default;
};

/// Rolling-window metrics of one horizon at one monitoring instant. `report` is absent
/// when no forecast had matured inside the window.
struct MetricSnapshot {
    Timestamp at;
    int horizon = 0;
    std::optional<eval::MetricReport> report;
    friend bool operator==(const MetricSnapshot&, const MetricSnapshot&) = default;
};

struct ModelRegistryEntry {
    std::string model_id;
    /// Display name such as "6 hours - DLinear".
    std::string model_name;
    models::Algorithm algorithm = models::Algorithm::kNLinear;
    int horizon = 0;
    TimeRange train_range{};
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> r2;
    std::optional<double> mape;
    /// Validation-split MAE in minutes; the activation rule compares on this.
    double val_mae = 0.0;
    std::string artifact_path;
    Timestamp registered_ts;
    bool active = false;
    /// Job that produced the model; empty for models registered by hand.
    std::string job_id;
    friend bool operator==(const ModelRegistryEntry&, const ModelRegistryEntry&) = default;
};

std::string model_display_name(int horizon, models::Algorithm algorithm);

enum class JobTrigger { kThreshold, kScheduled, kManual };
enum class JobStatus { kQueued, kRunning, kDone, kFailed };
std::string_view to_string(JobTrigger t);
std::string_view to_string(JobStatus s);
JobTrigger parse_job_trigger(std::string_view text);
JobStatus parse_job_status(std::string_view text);
/// queued -> running -> {done, failed}.
bool is_valid_transition(JobStatus from, JobStatus to);

struct RetrainJob {
    std::string job_id;
    JobTrigger trigger = JobTrigger::kManual;
    models::Algorithm algorithm = models::Algorithm::kNLinear;
    int horizon = 0;
    TimeRange data_range{};
    JobStatus status = JobStatus::kQueued;
    Timestamp enqueued_ts;
    std::optional<Timestamp> started_ts;
    std::optional<Timestamp> finished_ts;
    std::optional<std::string> result_model_id;
    std::string error;
    friend bool operator==(const RetrainJob&, const RetrainJob&) = default;
};

/// One status change of one job, in the order it was recorded.
struct JobLogEntry {
    std::string job_id;
    std::optional<JobStatus> from;  ///< absent for the enqueue record
    JobStatus to = JobStatus::kQueued;
    Timestamp ts;
    friend bool operator==(const JobLogEntry&, const JobLogEntry&) = default;
};

/// Some horizons had no active model. The records that could be produced are kept.
class PartialResultError : public Error {
public:
    PartialResultError(const std::string& message, std::vector<int> missing,
                       std::vector<ForecastRecord> produced)
        : Error("partial_result", message),
          missing_(std::move(missing)),
          produced_(std::move(produced)) {}
    [[nodiscard]] const std::vector<int>& missing_horizons() const noexcept { return missing_; }
    [[nodiscard]] const std::vector<ForecastRecord>& produced() const noexcept { return produced_; }

private:
    std::vector<int> missing_;
    std::vector<ForecastRecord> produced_;
};

}  // namespace edboard::platform
