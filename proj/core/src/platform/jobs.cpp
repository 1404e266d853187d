#include "edboard/platform/jobs.hpp"

#include <map>

#include "edboard/pipeline.hpp"

namespace edboard::platform {

RetrainWorker::RetrainWorker(Store& store, ModelCache& cache, WorkerConfig cfg, Clock clock)
    : store_(store), cache_(cache), cfg_(std::move(cfg)), clock_(std::move(clock)) {
    dataset::validate(cfg_.split);
    models::validate(cfg_.train);
}

bool RetrainWorker::run_one() {
    const auto job = store_.next_queued_job();
    if (!job) return false;
    deliver(job->job_id);
    return true;
}

std::size_t RetrainWorker::run_until_idle() {
    std::size_t n = 0;
    while (run_one()) ++n;
    return n;
}

RetrainJob RetrainWorker::deliver(const std::string& job_id) {
    auto job = store_.job(job_id);
    if (!job) throw NotFoundError("job '" + job_id + "' not found");
    if (job->status == JobStatus::kDone || job->status == JobStatus::kFailed) return *job;
    if (job->status == JobStatus::kQueued) {
        job = store_.update_job(job_id, JobStatus::kRunning, clock_());
    }
    if (const auto registered = store_.model_for_job(job_id)) {
        return store_.update_job(job_id, JobStatus::kDone, clock_(), registered->model_id);
    }
    try {
        const std::string model_id = train_and_register(*job);
        return store_.update_job(job_id, JobStatus::kDone, clock_(), model_id);
    } catch (const std::exception& e) {
        return store_.update_job(job_id, JobStatus::kFailed, clock_(), std::nullopt,
                                 std::string(e.what()).empty() ? "unknown failure" : e.what());
    }
}

std::string RetrainWorker::train_and_register(const RetrainJob& job) {
    if (!models::is_trainable(job.algorithm)) {
        throw ValidationError(std::string(models::to_string(job.algorithm)) +
                              " models cannot be retrained");
    }
    pipeline::validate_horizon(job.horizon);
    if (!(job.data_range.from < job.data_range.to)) {
        throw ValidationError("job date range " + format_iso8601(job.data_range.from) + " .. " +
                              format_iso8601(job.data_range.to) + " is empty");
    }
    features::FeatureTable table;
    table.rows = store_.features(job.data_range);
    table.gaps = features::detect_gaps(table.rows);
    if (table.rows.size() < 3) {
        throw InsufficientDataError("only " + std::to_string(table.rows.size()) +
                                    " feature rows in the job date range");
    }
    const auto prepared = pipeline::prepare(table, cfg_.split);
    const auto windows = pipeline::make_horizon_windows(prepared, cfg_.lag, job.horizon);
    if (windows.train.empty() || windows.val.empty() || windows.test.empty()) {
        throw InsufficientDataError("date range too short for lag " + std::to_string(cfg_.lag) +
                                    " and horizon " + std::to_string(job.horizon) +
                                    " in every split");
    }
    const auto mc = pipeline::default_model_config(job.algorithm, cfg_.lag, cfg_.kernel_size);
    auto model = pipeline::fit(prepared, windows, mc, cfg_.train);
    const double val_mae = model.metrics.at("val_mae");

    bool activate = true;
    if (const auto incumbent = store_.active_model(job.horizon)) {
        double incumbent_mae = incumbent->val_mae;
        try {
            const auto inc = cache_.get(*incumbent);
            if (inc->config.lag == cfg_.lag) {
                double sum = 0.0;
                for (std::size_t i = 0; i < windows.raw_val.size(); ++i) {
                    sum += std::abs(windows.raw_val.y[i] -
                                    predict_raw_window(*inc, windows.raw_val.window(i)));
                }
                incumbent_mae = sum / static_cast<double>(windows.raw_val.size());
            }
        } catch (const Error&) {
            // The incumbent's artifact is unavailable; fall back to its registered MAE.
        }
        activate = val_mae < incumbent_mae;
    }

    ModelRegistryEntry entry;
    entry.model_id = "m-" + job.job_id;
    entry.model_name = model_display_name(job.horizon, job.algorithm);
    entry.algorithm = job.algorithm;
    entry.horizon = job.horizon;
    entry.train_range = model.train_range;
    entry.mae = model.metrics.at("mae");
    entry.rmse = model.metrics.at("rmse");
    if (model.metrics.count("r2")) entry.r2 = model.metrics.at("r2");
    if (model.metrics.count("mape")) entry.mape = model.metrics.at("mape");
    entry.val_mae = val_mae;
    entry.artifact_path = (cfg_.artifact_dir / (entry.model_id + ".json")).string();
    entry.registered_ts = clock_();
    entry.active = activate;
    entry.job_id = job.job_id;

    models::save_model(entry.artifact_path, model);
    cache_.put(entry.model_id, std::move(model));
    store_.register_model(entry);
    return entry.model_id;
}

std::optional<std::string> audit_job_log(std::span<const JobLogEntry> log) {
    std::map<std::string, JobStatus> state;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& e = log[i];
        const auto it = state.find(e.job_id);
        if (!e.from) {
            if (it != state.end()) return "job " + e.job_id + " enqueued twice (entry " + std::to_string(i) + ")";
            if (e.to != JobStatus::kQueued) return "job " + e.job_id + " did not start queued";
            state[e.job_id] = JobStatus::kQueued;
            continue;
        }
        if (it == state.end()) return "job " + e.job_id + " changed state before being enqueued";
        if (it->second != *e.from) {
            return "job " + e.job_id + " log says from " + std::string(to_string(*e.from)) +
                   " but the job was " + std::string(to_string(it->second));
        }
        if (!is_valid_transition(*e.from, e.to)) {
            return "job " + e.job_id + " moved " + std::string(to_string(*e.from)) + " -> " +
                   std::string(to_string(e.to));
        }
        it->second = e.to;
    }
    return std::nullopt;
}

JobRunner::JobRunner(RetrainWorker& worker, std::chrono::milliseconds poll)
    : worker_(worker), poll_(poll) {}

JobRunner::~JobRunner() { stop(); }

void JobRunner::start() {
    std::lock_guard lock(mutex_);
    if (thread_.joinable()) return;
    stop_ = false;
    thread_ = std::thread([this] { loop(); });
}

void JobRunner::stop() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void JobRunner::notify() {
    {
        std::lock_guard lock(mutex_);
        pending_ = true;
    }
    cv_.notify_all();
}

void JobRunner::loop() {
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            if (stop_) return;
            pending_ = false;
        }
        while (worker_.run_one()) {
            std::lock_guard lock(mutex_);
            if (stop_) return;
        }
        std::unique_lock lock(mutex_);
        cv_.wait_for(lock, poll_, [this] { return stop_ || pending_; });
        if (stop_) return;
    }
}

}  // namespace edboard::platform
