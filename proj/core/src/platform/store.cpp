#include "edboard/platform/store.hpp"

#include <algorithm>
#include <mutex>

#include "edboard/platform/json.hpp"

namespace edboard::platform {

using nlohmann::json;

struct FileStore::Tables {
    std::vector<EncounterEvent> encounters;
    std::vector<ContextRecord> context;
    std::vector<InpatientEvent> inpatient;
    std::map<Timestamp, features::HourlyFeatureRow> rows;
    /// horizon -> origin_ts -> forecast; target order equals origin order within a horizon.
    std::map<int, std::map<Timestamp, ForecastRecord>> forecasts;
    std::size_t forecast_count = 0;
    std::map<std::pair<int, Timestamp>, MetricSnapshot> snapshots;
    std::vector<ModelRegistryEntry> registry;
    std::vector<RetrainJob> jobs;
    std::vector<JobLogEntry> job_log;

    ModelRegistryEntry* find_model(const std::string& id) {
        for (auto& e : registry) {
            if (e.model_id == id) return &e;
        }
        return nullptr;
    }
    RetrainJob* find_job(const std::string& id) {
        for (auto& j : jobs) {
            if (j.job_id == id) return &j;
        }
        return nullptr;
    }

    void insert_row(const features::HourlyFeatureRow& row) {
        if (!rows.emplace(row.hour_ts, row).second) {
            throw ConflictError("hourly_features already has a row for " +
                                format_iso8601(row.hour_ts));
        }
    }

    void insert_forecast(const ForecastRecord& f) {
        if (f.target_ts - f.origin_ts != Hours{f.horizon}) {
            throw ValidationError("forecast target_ts must equal origin_ts + horizon");
        }
        if (!forecasts[f.horizon].emplace(f.origin_ts, f).second) {
            throw ConflictError("forecast for origin " + format_iso8601(f.origin_ts) + " h=" +
                                std::to_string(f.horizon) + " already exists");
        }
        ++forecast_count;
    }

    /// Returns false when an identical snapshot is already stored.
    bool insert_snapshot(const MetricSnapshot& s) {
        const auto [it, inserted] = snapshots.emplace(std::make_pair(s.horizon, s.at), s);
        if (inserted) return true;
        if (it->second == s) return false;
        throw ConflictError("a different metric snapshot exists for " + format_iso8601(s.at) +
                            " h=" + std::to_string(s.horizon));
    }

    void register_model(const ModelRegistryEntry& e) {
        if (find_model(e.model_id) != nullptr) {
            throw ConflictError("model '" + e.model_id + "' is already registered");
        }
        if (!e.job_id.empty()) {
            for (const auto& m : registry) {
                if (m.job_id == e.job_id) {
                    throw ConflictError("job '" + e.job_id + "' already registered a model");
                }
            }
        }
        registry.push_back(e);
        if (e.active) activate(e.model_id);
    }

    void activate(const std::string& id) {
        auto* target = find_model(id);
        if (target == nullptr) throw NotFoundError("model '" + id + "' is not registered");
        for (auto& m : registry) {
            if (m.horizon == target->horizon) m.active = false;
        }
        target->active = true;
    }

    bool enqueue(const RetrainJob& job) {
        if (find_job(job.job_id) != nullptr) return false;
        if (job.status != JobStatus::kQueued) {
            throw ValidationError("new jobs must be queued");
        }
        jobs.push_back(job);
        job_log.push_back({job.job_id, std::nullopt, JobStatus::kQueued, job.enqueued_ts});
        return true;
    }

    RetrainJob update(const std::string& id, JobStatus to, Timestamp ts,
                      std::optional<std::string> result, std::string error) {
        auto* job = find_job(id);
        if (job == nullptr) throw NotFoundError("job '" + id + "' not found");
        if (!is_valid_transition(job->status, to)) {
            throw ConflictError("job '" + id + "' cannot move from " +
                                std::string(to_string(job->status)) + " to " +
                                std::string(to_string(to)));
        }
        if (to == JobStatus::kDone && !result) {
            throw ValidationError("a done job needs a result model id");
        }
        job_log.push_back({id, job->status, to, ts});
        job->status = to;
        if (to == JobStatus::kRunning) job->started_ts = ts;
        if (to == JobStatus::kDone || to == JobStatus::kFailed) job->finished_ts = ts;
        if (result) job->result_model_id = std::move(result);
        if (!error.empty()) job->error = std::move(error);
        return *job;
    }
};

FileStore::FileStore() : t_(std::make_unique<Tables>()) {}

FileStore::FileStore(const std::filesystem::path& dir) : t_(std::make_unique<Tables>()) {
    std::filesystem::create_directories(dir);
    const auto file = dir / kJournalName;
    if (std::filesystem::exists(file)) replay_journal(file);
    journal_.open(file, std::ios::app);
    if (!journal_) throw Error("io_error", "cannot open store journal " + file.string());
}

FileStore::~FileStore() = default;

void FileStore::replay_journal(const std::filesystem::path& file) {
    std::ifstream in(file);
    std::string line;
    std::size_t line_no = 0;
    replaying_ = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            // A torn final line from an interrupted write is ignored; anything else is corrupt.
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw Error("io_error", "corrupt store journal at line " + std::to_string(line_no));
        }
        const auto op = j.at("t").get<std::string>();
        const auto& d = j.at("d");
        if (op == "enc") {
            t_->encounters.push_back(d.get<EncounterEvent>());
        } else if (op == "ctx") {
            t_->context.push_back(d.get<ContextRecord>());
        } else if (op == "inp") {
            t_->inpatient.push_back(d.get<InpatientEvent>());
        } else if (op == "row") {
            t_->insert_row(d.get<features::HourlyFeatureRow>());
        } else if (op == "fc") {
            t_->insert_forecast(d.get<ForecastRecord>());
        } else if (op == "snap") {
            t_->insert_snapshot(d.get<MetricSnapshot>());
        } else if (op == "reg") {
            t_->register_model(d.get<ModelRegistryEntry>());
        } else if (op == "act") {
            t_->activate(d.get<std::string>());
        } else if (op == "job") {
            t_->enqueue(d.get<RetrainJob>());
        } else if (op == "jobst") {
            t_->update(d.at("job_id").get<std::string>(),
                       parse_job_status(d.at("to").get<std::string>()),
                       parse_iso8601(d.at("ts").get<std::string>()),
                       d.at("result").is_null()
                           ? std::nullopt
                           : std::optional<std::string>(d.at("result").get<std::string>()),
                       d.at("error").get<std::string>());
        } else {
            throw Error("io_error", "unknown journal record '" + op + "'");
        }
    }
    replaying_ = false;
}

void FileStore::journal(const std::string& line) {
    if (journal_.is_open() && !replaying_) journal_ << line << '\n';
}

void FileStore::flush() {
    if (journal_.is_open()) {
        journal_.flush();
        if (!journal_) throw Error("io_error", "failed writing store journal");
    }
}

namespace {
std::string record(const char* op, json d) { return json{{"t", op}, {"d", std::move(d)}}.dump(); }
}  // namespace

void FileStore::append_encounter_events(std::span<const EncounterEvent> events) {
    std::unique_lock lock(mutex_);
    for (const auto& e : events) {
        t_->encounters.push_back(e);
        journal(record("enc", e));
    }
    flush();
}

void FileStore::append_context(std::span<const ContextRecord> rows) {
    std::unique_lock lock(mutex_);
    for (const auto& r : rows) {
        t_->context.push_back(r);
        journal(record("ctx", r));
    }
    flush();
}

void FileStore::append_inpatient(std::span<const InpatientEvent> events) {
    std::unique_lock lock(mutex_);
    for (const auto& e : events) {
        t_->inpatient.push_back(e);
        journal(record("inp", e));
    }
    flush();
}

std::vector<EncounterEvent> FileStore::recent_encounter_events(std::size_t n) const {
    std::shared_lock lock(mutex_);
    const auto& v = t_->encounters;
    const std::size_t start = v.size() > n ? v.size() - n : 0;
    return {v.begin() + static_cast<std::ptrdiff_t>(start), v.end()};
}

std::size_t FileStore::encounter_event_count() const {
    std::shared_lock lock(mutex_);
    return t_->encounters.size();
}

std::size_t FileStore::context_count() const {
    std::shared_lock lock(mutex_);
    return t_->context.size();
}

std::size_t FileStore::inpatient_count() const {
    std::shared_lock lock(mutex_);
    return t_->inpatient.size();
}

void FileStore::insert_feature_row(const features::HourlyFeatureRow& row) {
    std::unique_lock lock(mutex_);
    t_->insert_row(row);
    journal(record("row", row));
    flush();
}

std::vector<features::HourlyFeatureRow> FileStore::features(TimeRange range) const {
    std::shared_lock lock(mutex_);
    std::vector<features::HourlyFeatureRow> out;
    for (auto it = t_->rows.lower_bound(range.from); it != t_->rows.end() && it->first < range.to;
         ++it) {
        out.push_back(it->second);
    }
    return out;
}

std::optional<features::HourlyFeatureRow> FileStore::feature_row(Timestamp hour) const {
    std::shared_lock lock(mutex_);
    const auto it = t_->rows.find(hour);
    if (it == t_->rows.end()) return std::nullopt;
    return it->second;
}

std::vector<features::HourlyFeatureRow> FileStore::latest_features(std::size_t n) const {
    std::shared_lock lock(mutex_);
    std::vector<features::HourlyFeatureRow> out;
    for (auto it = t_->rows.rbegin(); it != t_->rows.rend() && out.size() < n; ++it) {
        out.push_back(it->second);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::size_t FileStore::feature_count() const {
    std::shared_lock lock(mutex_);
    return t_->rows.size();
}

std::optional<TimeRange> FileStore::feature_span() const {
    std::shared_lock lock(mutex_);
    if (t_->rows.empty()) return std::nullopt;
    return TimeRange{t_->rows.begin()->first, t_->rows.rbegin()->first + Hours{1}};
}

void FileStore::insert_forecast(const ForecastRecord& f) {
    std::unique_lock lock(mutex_);
    t_->insert_forecast(f);
    journal(record("fc", f));
    flush();
}

std::vector<ForecastRecord> FileStore::forecasts_by_target(int horizon, TimeRange range) const {
    std::shared_lock lock(mutex_);
    std::vector<ForecastRecord> out;
    const auto h = t_->forecasts.find(horizon);
    if (h == t_->forecasts.end()) return out;
    for (auto it = h->second.lower_bound(range.from - Hours{horizon});
         it != h->second.end() && it->second.target_ts < range.to; ++it) {
        out.push_back(it->second);
    }
    return out;
}

std::vector<ForecastRecord> FileStore::latest_forecasts() const {
    std::shared_lock lock(mutex_);
    std::vector<ForecastRecord> out;
    for (const auto& [h, by_origin] : t_->forecasts) {
        if (!by_origin.empty()) out.push_back(by_origin.rbegin()->second);
    }
    return out;
}

std::size_t FileStore::forecast_count() const {
    std::shared_lock lock(mutex_);
    return t_->forecast_count;
}

void FileStore::insert_metric_snapshot(const MetricSnapshot& s) {
    std::unique_lock lock(mutex_);
    if (t_->insert_snapshot(s)) {
        journal(record("snap", s));
        flush();
    }
}

std::vector<MetricSnapshot> FileStore::metric_snapshots(int horizon, TimeRange range) const {
    std::shared_lock lock(mutex_);
    std::vector<MetricSnapshot> out;
    for (auto it = t_->snapshots.lower_bound({horizon, range.from});
         it != t_->snapshots.end() && it->first.first == horizon && it->first.second < range.to;
         ++it) {
        out.push_back(it->second);
    }
    return out;
}

void FileStore::register_model(const ModelRegistryEntry& e) {
    std::unique_lock lock(mutex_);
    t_->register_model(e);
    journal(record("reg", e));
    flush();
}

void FileStore::activate_model(const std::string& model_id) {
    std::unique_lock lock(mutex_);
    t_->activate(model_id);
    journal(record("act", model_id));
    flush();
}

std::vector<ModelRegistryEntry> FileStore::registry() const {
    std::shared_lock lock(mutex_);
    return t_->registry;
}

std::optional<ModelRegistryEntry> FileStore::model(const std::string& model_id) const {
    std::shared_lock lock(mutex_);
    const auto* m = t_->find_model(model_id);
    if (m == nullptr) return std::nullopt;
    return *m;
}

std::optional<ModelRegistryEntry> FileStore::active_model(int horizon) const {
    std::shared_lock lock(mutex_);
    for (const auto& m : t_->registry) {
        if (m.horizon == horizon && m.active) return m;
    }
    return std::nullopt;
}

std::optional<ModelRegistryEntry> FileStore::model_for_job(const std::string& job_id) const {
    std::shared_lock lock(mutex_);
    for (const auto& m : t_->registry) {
        if (!job_id.empty() && m.job_id == job_id) return m;
    }
    return std::nullopt;
}

bool FileStore::enqueue_job(const RetrainJob& job) {
    std::unique_lock lock(mutex_);
    if (!t_->enqueue(job)) return false;
    journal(record("job", job));
    flush();
    return true;
}

RetrainJob FileStore::update_job(const std::string& job_id, JobStatus to, Timestamp ts,
                                 std::optional<std::string> result_model_id, std::string error) {
    std::unique_lock lock(mutex_);
    json d{{"job_id", job_id},
           {"to", to_string(to)},
           {"ts", format_iso8601(ts)},
           {"result", result_model_id ? json(*result_model_id) : json(nullptr)},
           {"error", error}};
    auto job = t_->update(job_id, to, ts, std::move(result_model_id), std::move(error));
    journal(record("jobst", std::move(d)));
    flush();
    return job;
}

std::optional<RetrainJob> FileStore::job(const std::string& job_id) const {
    std::shared_lock lock(mutex_);
    const auto* j = t_->find_job(job_id);
    if (j == nullptr) return std::nullopt;
    return *j;
}

std::vector<RetrainJob> FileStore::jobs() const {
    std::shared_lock lock(mutex_);
    return t_->jobs;
}

std::optional<RetrainJob> FileStore::next_queued_job() const {
    std::shared_lock lock(mutex_);
    for (const auto& j : t_->jobs) {
        if (j.status == JobStatus::kQueued) return j;
    }
    return std::nullopt;
}

std::vector<JobLogEntry> FileStore::job_log() const {
    std::shared_lock lock(mutex_);
    return t_->job_log;
}

}  // namespace edboard::platform
