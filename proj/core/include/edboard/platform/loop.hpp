#pragma once

#include <map>
#include <vector>

#include "edboard/platform/jobs.hpp"
#include "edboard/platform/replay.hpp"
#include "edboard/platform/service.hpp"

namespace edboard::platform {

struct LoopConfig {
    MonitorConfig monitor;
    bool schedule_monthly = true;
    Seconds step = Hours{1};
};

/// What one monitoring cycle (run after each completed hour) did.
struct CycleReport {
    Timestamp now;
    std::vector<ForecastRecord> forecasts;
    /// Set when forecasting was skipped: too little history or missing models.
    std::string forecast_error;
    std::map<int, MetricSnapshot> snapshots;
    std::vector<RetrainJob> threshold_jobs;
    std::vector<RetrainJob> scheduled_jobs;
};

struct StepReport {
    TickResult tick;
    std::vector<CycleReport> cycles;
    std::size_t jobs_processed = 0;
    bool end_of_stream = false;
};

/// Drives replay, hourly monitoring and (optionally) the retrain worker in lockstep on
/// the replay's simulated clock. Everything runs on the calling thread.
class PlatformLoop {
public:
    /// `worker` may be null, in which case queued jobs are left for another consumer.
    PlatformLoop(Replayer& replayer, ForecastService& service, RetrainWorker* worker,
                 LoopConfig cfg = {});

    StepReport step();
    /// Steps until the stream ends or `max_steps` steps were taken (0 = no limit).
    std::vector<StepReport> run(std::size_t max_steps = 0);

    /// Simulated time as seen by the rest of the platform.
    [[nodiscard]] Timestamp now() const { return replayer_.state().clock; }
    [[nodiscard]] Clock clock() const;

    /// One monitoring cycle at `now`: forecast, score matured forecasts, trigger, schedule.
    CycleReport monitor_cycle(Timestamp now);

private:
    Replayer& replayer_;
    ForecastService& service_;
    RetrainWorker* worker_;
    LoopConfig cfg_;
};

}  // namespace edboard::platform
