#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "edboard/pipeline.hpp"
#include "edboard/platform/jobs.hpp"
#include "edboard/platform/loop.hpp"
#include "test_support.hpp"

namespace edboard::platform {
namespace {

const Timestamp kStart = from_civil(2019, 1, 10);

models::TrainConfig quick() {
    models::TrainConfig t;
    t.learning_rate = 5e-3;
    t.max_epochs = 20;
    t.patience = 5;
    t.seed = 11;
    return t;
}

struct WorkerFixture {
    testing::TempDir dir;
    FileStore store;
    ModelCache cache;
    Timestamp now = from_civil(2019, 3, 1);
    RetrainWorker worker;
    TimeRange data;

    WorkerFixture()
        : worker(store, cache, WorkerConfig{dir.path(), {}, 24, 13, quick()}, [this] { return now; }) {
        const auto corpus = synth::generate_corpus(testing::scenario(24 * 30, 4, kStart));
        for (const auto& r : pipeline::build_features(corpus).table.rows) store.insert_feature_row(r);
        data = *store.feature_span();
    }

    RetrainJob enqueue(const std::string& id, int h, TimeRange range,
                       models::Algorithm algo = models::Algorithm::kNLinear) {
        RetrainJob j;
        j.job_id = id;
        j.trigger = JobTrigger::kManual;
        j.algorithm = algo;
        j.horizon = h;
        j.data_range = range;
        j.enqueued_ts = now;
        EXPECT_TRUE(store.enqueue_job(j));
        return j;
    }
};

TEST(Worker, TrainsRegistersAndActivatesFirstModel) {
    WorkerFixture f;
    f.enqueue("j1", 6, f.data, models::Algorithm::kDLinear);
    EXPECT_TRUE(f.worker.run_one());
    EXPECT_FALSE(f.worker.run_one());
    const auto job = *f.store.job("j1");
    EXPECT_EQ(job.status, JobStatus::kDone);
    ASSERT_TRUE(job.result_model_id.has_value());
    const auto entry = *f.store.model(*job.result_model_id);
    EXPECT_TRUE(entry.active);
    EXPECT_EQ(entry.job_id, "j1");
    EXPECT_EQ(entry.model_name, "6 hours - DLinear");
    EXPECT_EQ(entry.train_range.from, f.data.from);
    const auto loaded = models::load_model(entry.artifact_path);
    EXPECT_EQ(loaded, *f.cache.get(entry));
    EXPECT_DOUBLE_EQ(entry.val_mae, loaded.metrics.at("val_mae"));
    EXPECT_DOUBLE_EQ(entry.mae, loaded.metrics.at("mae"));
    EXPECT_FALSE(audit_job_log(f.store.job_log()).has_value());
}

TEST(Worker, ActivationNeedsStrictlyLowerValidationError) {
    WorkerFixture f;
    f.enqueue("a", 8, f.data);
    f.worker.run_until_idle();
    const auto first = *f.store.active_model(8);
    // Same data, config and seed reproduce the incumbent exactly: a tie keeps it active.
    f.enqueue("b", 8, f.data);
    f.worker.run_until_idle();
    const auto tie = *f.store.model_for_job("b");
    EXPECT_DOUBLE_EQ(tie.val_mae, first.val_mae);
    EXPECT_FALSE(tie.active);
    EXPECT_EQ(f.store.active_model(8)->model_id, first.model_id);

    // A degraded incumbent is replaced.
    const auto bad = constant_predictor(*f.cache.get(first), 5000.0);
    ModelRegistryEntry e = first;
    e.model_id = "bad";
    e.job_id.clear();
    e.val_mae = 0.0;  // registered value is ignored in favour of the re-scored one
    f.cache.put("bad", bad);
    f.store.register_model(e);
    f.store.activate_model("bad");
    f.enqueue("c", 8, f.data);
    f.worker.run_until_idle();
    EXPECT_EQ(f.store.active_model(8)->job_id, "c");
}

TEST(Worker, RedeliveryNeverDuplicatesRegistration) {
    WorkerFixture f;
    f.enqueue("j", 10, f.data);
    f.worker.run_until_idle();
    const auto registry_size = f.store.registry().size();
    const auto done = f.worker.deliver("j");
    EXPECT_EQ(done.status, JobStatus::kDone);
    EXPECT_EQ(f.store.registry().size(), registry_size);

    // A job left running after its model was registered completes without retraining.
    f.enqueue("k", 10, f.data);
    static_cast<Store&>(f.store).update_job("k", JobStatus::kRunning, f.now);
    ModelRegistryEntry e = *f.store.model_for_job("j");
    e.model_id = "m-k-prior";
    e.job_id = "k";
    e.active = false;
    f.store.register_model(e);
    const auto k = f.worker.deliver("k");
    EXPECT_EQ(k.status, JobStatus::kDone);
    EXPECT_EQ(*k.result_model_id, "m-k-prior");
    EXPECT_EQ(f.store.registry().size(), registry_size + 1);
    EXPECT_FALSE(audit_job_log(f.store.job_log()).has_value());
    EXPECT_THROW(f.worker.deliver("missing"), NotFoundError);
}

TEST(Worker, FailuresAreRecorded) {
    WorkerFixture f;
    f.enqueue("short", 24, {f.data.from, f.data.from + Hours{40}});
    f.enqueue("baseline", 6, f.data, models::Algorithm::kSeasonal);
    f.enqueue("empty", 6, {f.data.from, f.data.from});
    EXPECT_EQ(f.worker.run_until_idle(), 3u);
    for (const auto* id : {"short", "baseline", "empty"}) {
        const auto j = *f.store.job(id);
        EXPECT_EQ(j.status, JobStatus::kFailed) << id;
        EXPECT_FALSE(j.error.empty());
        EXPECT_FALSE(f.store.model_for_job(id).has_value());
    }
    EXPECT_FALSE(audit_job_log(f.store.job_log()).has_value());
}

TEST(Audit, DetectsIllegalHistories) {
    const Timestamp t = kStart;
    using S = JobStatus;
    const std::vector<JobLogEntry> ok{{"a", std::nullopt, S::kQueued, t},
                                      {"a", S::kQueued, S::kRunning, t},
                                      {"a", S::kRunning, S::kDone, t}};
    EXPECT_FALSE(audit_job_log(ok).has_value());
    const std::vector<JobLogEntry> skip{{"a", std::nullopt, S::kQueued, t}, {"a", S::kQueued, S::kDone, t}};
    EXPECT_TRUE(audit_job_log(skip).has_value());
    const std::vector<JobLogEntry> orphan{{"b", S::kQueued, S::kRunning, t}};
    EXPECT_TRUE(audit_job_log(orphan).has_value());
    const std::vector<JobLogEntry> twice{{"a", std::nullopt, S::kQueued, t}, {"a", std::nullopt, S::kQueued, t}};
    EXPECT_TRUE(audit_job_log(twice).has_value());
    const std::vector<JobLogEntry> lie{{"a", std::nullopt, S::kQueued, t}, {"a", S::kRunning, S::kDone, t}};
    EXPECT_TRUE(audit_job_log(lie).has_value());
    EXPECT_TRUE(is_valid_transition(S::kRunning, S::kFailed));
    EXPECT_FALSE(is_valid_transition(S::kDone, S::kRunning));
}

TEST(JobRunner, ProcessesJobsInBackground) {
    WorkerFixture f;
    JobRunner runner(f.worker, std::chrono::milliseconds(20));
    runner.start();
    f.enqueue("bg", 6, f.data);
    runner.notify();
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);
    while (f.store.job("bg")->status != JobStatus::kDone && std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    runner.stop();
    EXPECT_EQ(f.store.job("bg")->status, JobStatus::kDone);
    runner.stop();
}

TEST(Loop, SchedulesTrainsThenForecasts) {
    const auto corpus = synth::generate_corpus(testing::scenario(24 * 26, 9, kStart));
    testing::TempDir dir;
    FileStore store;
    ModelCache cache;
    Replayer replayer(corpus, &store);
    ForecastService service(store, cache);
    LoopConfig lc;
    PlatformLoop* loop_ptr = nullptr;
    RetrainWorker worker(store, cache, WorkerConfig{dir.path(), {}, 24, 13, quick()},
                         [&] { return loop_ptr->now(); });
    PlatformLoop loop(replayer, service, &worker, lc);
    loop_ptr = &loop;

    const auto steps = loop.run();
    EXPECT_TRUE(replayer.finished());
    EXPECT_EQ(store.feature_count(), 24u * 26u);
    std::size_t scheduled = 0;
    std::optional<Timestamp> first_forecast;
    for (const auto& s : steps) {
        for (const auto& c : s.cycles) {
            scheduled += c.scheduled_jobs.size();
            if (!first_forecast && c.forecast_error.empty()) first_forecast = c.now;
            EXPECT_EQ(c.snapshots.size(), 5u);
        }
    }
    EXPECT_EQ(scheduled, 5u);
    for (const auto& j : store.jobs()) {
        if (j.trigger != JobTrigger::kScheduled) continue;
        EXPECT_EQ(j.status, JobStatus::kDone) << j.error;
        EXPECT_EQ(j.data_range, (TimeRange{kStart, from_civil(2019, 2, 1)}));
    }
    ASSERT_TRUE(first_forecast.has_value());
    // Models exist once the Feb 1 jobs ran; the first complete forecast follows the next hour.
    EXPECT_EQ(*first_forecast, from_civil(2019, 2, 1, 1));
    for (int h : pipeline::kHorizons) EXPECT_TRUE(store.active_model(h).has_value());
    EXPECT_FALSE(audit_job_log(store.job_log()).has_value());
}

}  // namespace
}  // namespace edboard::platform
