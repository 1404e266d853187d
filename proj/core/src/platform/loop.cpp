#include "edboard/platform/loop.hpp"

namespace edboard::platform {

PlatformLoop::PlatformLoop(Replayer& replayer, ForecastService& service, RetrainWorker* worker,
                           LoopConfig cfg)
    : replayer_(replayer), service_(service), worker_(worker), cfg_(cfg) {
    validate(cfg_.monitor);
}

Clock PlatformLoop::clock() const {
    return [this] { return now(); };
}

CycleReport PlatformLoop::monitor_cycle(Timestamp now) {
    CycleReport c;
    c.now = now;
    try {
        c.forecasts = service_.forecast_all_horizons(now);
    } catch (const PartialResultError& e) {
        c.forecasts = e.produced();
        c.forecast_error = e.what();
    } catch (const InsufficientDataError& e) {
        c.forecast_error = e.what();
    }
    c.snapshots = service_.mature_and_score(now, cfg_.monitor);
    c.threshold_jobs = service_.monitor_and_trigger(c.snapshots, cfg_.monitor, now);
    if (cfg_.schedule_monthly) c.scheduled_jobs = service_.schedule_monthly(now);
    return c;
}

StepReport PlatformLoop::step() {
    StepReport r;
    r.tick = replayer_.tick(cfg_.step);
    for (const auto& row : r.tick.rows) r.cycles.push_back(monitor_cycle(row.hour_ts + Hours{1}));
    if (worker_ != nullptr) r.jobs_processed = worker_->run_until_idle();
    r.end_of_stream = r.tick.end_of_stream;
    return r;
}

std::vector<StepReport> PlatformLoop::run(std::size_t max_steps) {
    std::vector<StepReport> out;
    while (!replayer_.finished() && (max_steps == 0 || out.size() < max_steps)) {
        out.push_back(step());
    }
    return out;
}

}  // namespace edboard::platform
