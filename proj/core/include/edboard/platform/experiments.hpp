#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edboard/dataset.hpp"
#include "edboard/eval.hpp"
#include "edboard/models.hpp"
#include "edboard/platform/service.hpp"
#include "edboard/platform/store.hpp"

namespace edboard::platform {

/// A user-configured training run over stored feature rows.
struct ExperimentRequest {
    std::vector<std::string> features;
    std::string target = "boarding_time_minute_hourly";
    std::size_t lag = 24;
    int horizon = 6;
    /// "standard" or "none".
    std::string scaling = "standard";
    TimeRange date_range{};
    dataset::SplitSpec splits;
    models::Algorithm algorithm = models::Algorithm::kNLinear;
    models::TrainConfig train;
};

/// Parses the POST /api/experiments body. Splits may be fractions or percentages.
/// Missing features default to the full schema. Throws ValidationError naming bad fields.
ExperimentRequest parse_experiment_request(const nlohmann::json& body);
void validate(const ExperimentRequest& req);

enum class ExperimentStatus { kQueued, kRunning, kDone, kFailed };
std::string_view to_string(ExperimentStatus s);

struct Experiment {
    std::string id;
    ExperimentRequest request;
    ExperimentStatus status = ExperimentStatus::kQueued;
    std::vector<std::string> log;
    std::optional<eval::MetricReport> test_metrics;
    std::string error;
    Timestamp submitted_ts;
};

/// Runs experiments and keeps their log lines for incremental polling.
class ExperimentManager {
public:
    /// With `background` false, submit() runs the experiment before returning.
    ExperimentManager(Store& store, Clock clock, bool background = true);
    ~ExperimentManager();
    ExperimentManager(const ExperimentManager&) = delete;
    ExperimentManager& operator=(const ExperimentManager&) = delete;

    std::string submit(ExperimentRequest req);
    [[nodiscard]] std::optional<Experiment> get(const std::string& id) const;
    [[nodiscard]] std::vector<Experiment> list() const;
    /// Log lines from index `since` on.
    [[nodiscard]] std::vector<std::string> log_since(const std::string& id, std::size_t since) const;
    /// Blocks until every background experiment has finished.
    void wait_all();

private:
    void run(const std::string& id);
    void append_log(const std::string& id, std::string line);
    void set_status(const std::string& id, ExperimentStatus s);

    Store& store_;
    Clock clock_;
    bool background_;
    mutable std::mutex mutex_;
    std::map<std::string, Experiment> experiments_;
    std::vector<std::thread> threads_;
    std::size_t next_id_ = 1;
};

}  // namespace edboard::platform
