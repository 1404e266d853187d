#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <optional>
#include <thread>

#include "edboard/dataset.hpp"
#include "edboard/platform/service.hpp"

namespace edboard::platform {

struct WorkerConfig {
    std::filesystem::path artifact_dir = "models";
    dataset::SplitSpec split;
    std::size_t lag = 24;
    std::size_t kernel_size = 13;
    models::TrainConfig train;
};

/// Consumes retrain jobs from the store's queue.
///
/// Delivery is at-least-once: a job found in the running state (a worker stopped
/// mid-job) is picked up again, and registration is keyed by job id, so a redelivered
/// job never creates a second registry entry. A new model is activated only when its
/// validation MAE beats the incumbent's MAE on the same validation windows.
class RetrainWorker {
public:
    RetrainWorker(Store& store, ModelCache& cache, WorkerConfig cfg, Clock clock);

    /// Processes the oldest queued job; false when the queue is empty.
    bool run_one();
    /// Processes queued jobs until none is left; returns how many were processed.
    std::size_t run_until_idle();
    /// Processes one job by id. Finished jobs are returned unchanged.
    RetrainJob deliver(const std::string& job_id);

private:
    std::string train_and_register(const RetrainJob& job);

    Store& store_;
    ModelCache& cache_;
    WorkerConfig cfg_;
    Clock clock_;
};

/// Checks every recorded transition against queued -> running -> {done, failed} and that
/// each job's log starts with its enqueue record. Returns the first violation.
std::optional<std::string> audit_job_log(std::span<const JobLogEntry> log);

/// Runs a RetrainWorker on a background thread, polling the queue.
class JobRunner {
public:
    JobRunner(RetrainWorker& worker, std::chrono::milliseconds poll = std::chrono::milliseconds(200));
    ~JobRunner();
    JobRunner(const JobRunner&) = delete;
    JobRunner& operator=(const JobRunner&) = delete;

    void start();
    void stop();
    /// Wakes the runner early, e.g. after a job was enqueued.
    void notify();

private:
    void loop();

    RetrainWorker& worker_;
    std::chrono::milliseconds poll_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stop_ = false;
    bool pending_ = false;
    std::thread thread_;
};

}  // namespace edboard::platform
