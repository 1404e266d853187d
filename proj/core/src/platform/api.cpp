#include "edboard/platform/api.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>

#include <httplib.h>

#include "edboard/platform/json.hpp"

namespace edboard::platform {

using nlohmann::json;

namespace {

class HttpError : public Error {
public:
    HttpError(int status, std::string code, const std::string& message)
        : Error(std::move(code), message), status_(status) {}
    [[nodiscard]] int status() const noexcept { return status_; }

private:
    int status_;
};

ApiResponse json_response(int status, const json& body) { return {status, body.dump()}; }

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
    return json_response(status, json{{"code", code}, {"message", message}});
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/') ++i;
        const std::size_t j = path.find('/', i);
        const std::size_t end = j == std::string::npos ? path.size() : j;
        if (end > i) parts.push_back(path.substr(i, end - i));
        i = end;
    }
    return parts;
}

json parse_body(const std::string& body) {
    try {
        return json::parse(body.empty() ? "{}" : body);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
    }
}

Timestamp query_time(const ApiRequest& req, const char* key) {
    const auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) {
        throw ValidationError(std::string("query parameter '") + key + "' is required", {key});
    }
    return parse_iso8601(it->second);
}

std::size_t query_size(const ApiRequest& req, const char* key, std::size_t fallback) {
    const auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) return fallback;
    try {
        const long long v = std::stoll(it->second);
        if (v < 0) throw std::invalid_argument(key);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ValidationError(std::string("query parameter '") + key +
                                  "' must be a non-negative integer",
                              {key});
    }
}

std::string_view card_status(EncounterEventKind k) {
    switch (k) {
        case EncounterEventKind::kArrival: return "waiting";
        case EncounterEventKind::kTreatmentStart: return "treating";
        case EncounterEventKind::kBedRequest: return "boarding";
        case EncounterEventKind::kCheckout: return "departed";
    }
    return "waiting";
}

json experiment_json(const Experiment& e, bool with_log) {
    json j{{"experiment_id", e.id},
           {"status", to_string(e.status)},
           {"submitted_ts", format_iso8601(e.submitted_ts)},
           {"algorithm", models::to_string(e.request.algorithm)},
           {"target", e.request.target},
           {"lag", e.request.lag},
           {"horizon", e.request.horizon},
           {"scaling", e.request.scaling},
           {"features", e.request.features},
           {"date_range", e.request.date_range},
           {"splits",
            {{"train", e.request.splits.train},
             {"val", e.request.splits.val},
             {"test", e.request.splits.test}}},
           {"error", e.error},
           {"log_lines", e.log.size()}};
    j["test_metrics"] = e.test_metrics ? json(*e.test_metrics) : json(nullptr);
    if (with_log) j["log"] = e.log;
    return j;
}

}  // namespace

struct ApiServer::Impl {
    Store& store;
    ForecastService& service;
    ExperimentManager& experiments;
    ApiConfig cfg;
    Clock clock;
    std::function<void()> on_enqueued;
    httplib::Server http;

    Impl(Store& s, ForecastService& f, ExperimentManager& e, ApiConfig c, Clock k)
        : store(s), service(f), experiments(e), cfg(std::move(c)), clock(std::move(k)) {}

    void authorize(const ApiRequest& req) const {
        if (cfg.token.empty()) return;
        const auto it = req.headers.find("authorization");
        if (it == req.headers.end() || it->second != "Bearer " + cfg.token) {
            throw HttpError(401, "unauthorized", "missing or invalid bearer token");
        }
    }

    ApiResponse dashboard() const {
        const auto history = store.latest_features(cfg.history_hours);
        json j;
        if (history.empty()) {
            j["latest_hour"] = nullptr;
            j["current_boarding_time"] = nullptr;
            j["indicators"] = nullptr;
        } else {
            const auto& row = history.back();
            j["latest_hour"] = format_iso8601(row.hour_ts);
            j["current_boarding_time"] = row[features::kTargetColumn];
            j["indicators"] = {{"surgical", row[features::kSurgicalCount]},
                               {"census", row[features::kCensusCount]},
                               {"waiting", row[features::kWaitingCount]},
                               {"boarding", row[features::kBoardingCount]},
                               {"treatment", row[features::kTreatmentCount]},
                               {"total", row[features::kTotalPatientCount]}};
        }
        auto latest = store.latest_forecasts();
        std::sort(latest.begin(), latest.end(),
                  [](const auto& a, const auto& b) { return a.horizon < b.horizon; });
        j["forecasts"] = latest;

        json observed = json::array();
        for (const auto& r : history) {
            observed.push_back({{"hour_ts", format_iso8601(r.hour_ts)},
                                {"boarding_time", r[features::kTargetColumn]}});
        }
        json trajectories = json::object();
        if (!history.empty()) {
            const TimeRange span{history.front().hour_ts, history.back().hour_ts + Hours{25}};
            for (int h : service.config().horizons) {
                json points = json::array();
                for (const auto& f : store.forecasts_by_target(h, span)) {
                    points.push_back({{"target_ts", format_iso8601(f.target_ts)},
                                      {"predicted_minutes", f.predicted_minutes}});
                }
                trajectories[std::to_string(h)] = std::move(points);
            }
        }
        j["history"] = {{"observed", observed}, {"forecasts", trajectories}};
        return json_response(200, j);
    }

    ApiResponse stream_recent(const ApiRequest& req) const {
        const auto events = store.recent_encounter_events(query_size(req, "limit", cfg.recent_events));
        json cards = json::array();
        std::vector<std::string> seen;
        for (auto it = events.rbegin(); it != events.rend(); ++it) {
            if (std::find(seen.begin(), seen.end(), it->visit_id) != seen.end()) continue;
            seen.push_back(it->visit_id);
            cards.push_back({{"patient_id", it->patient_id},
                             {"visit_id", it->visit_id},
                             {"esi", it->esi ? json(*it->esi) : json(nullptr)},
                             {"status", card_status(it->kind)},
                             {"last_event", to_string(it->kind)},
                             {"last_event_ts", format_iso8601(it->ts)}});
        }
        const auto latest = store.latest_features(1);
        return json_response(200, json{{"encounters", cards},
                                       {"events", events},
                                       {"latest_row", latest.empty() ? json(nullptr) : json(latest.back())}});
    }

    ApiResponse feature_rows(const ApiRequest& req) const {
        const TimeRange range{query_time(req, "from"), query_time(req, "to")};
        if (range.to < range.from) throw ValidationError("'from' must not be after 'to'", {"from", "to"});
        auto rows = store.features(range);
        const bool truncated = rows.size() > cfg.max_feature_rows;
        if (truncated) rows.resize(cfg.max_feature_rows);
        return json_response(200, json{{"rows", rows}, {"count", rows.size()}, {"truncated", truncated}});
    }

    ApiResponse retrain(const ApiRequest& req) {
        const json body = parse_body(req.body);
        TimeRange range{};
        models::Algorithm algorithm = models::Algorithm::kNLinear;
        std::vector<int> horizons = service.config().horizons;
        try {
            range = body.at("date_range").get<TimeRange>();
            if (body.contains("algorithm")) {
                algorithm = models::parse_algorithm(body.at("algorithm").get<std::string>());
            }
            if (body.contains("horizons")) horizons = body.at("horizons").get<std::vector<int>>();
        } catch (const json::exception& e) {
            throw ValidationError(std::string("invalid retrain request: ") + e.what());
        }
        const auto jobs = service.request_retrain(algorithm, horizons, range, clock());
        if (on_enqueued) on_enqueued();
        return json_response(202, json{{"jobs", jobs}});
    }

    ApiResponse experiments_route(const ApiRequest& req, const std::vector<std::string>& parts) {
        if (parts.size() == 2) {
            if (req.method == "POST") {
                const auto id = experiments.submit(parse_experiment_request(parse_body(req.body)));
                return json_response(202, json{{"experiment_id", id}});
            }
            if (req.method == "GET") {
                json list = json::array();
                for (const auto& e : experiments.list()) list.push_back(experiment_json(e, false));
                return json_response(200, json{{"experiments", list}});
            }
            throw HttpError(405, "method_not_allowed", req.method + " " + req.path);
        }
        if (req.method != "GET") throw HttpError(405, "method_not_allowed", req.method + " " + req.path);
        const auto exp = experiments.get(parts[2]);
        if (!exp) throw NotFoundError("experiment '" + parts[2] + "' not found");
        if (parts.size() == 3) return json_response(200, experiment_json(*exp, true));
        if (parts.size() == 4 && parts[3] == "log") {
            const std::size_t since = query_size(req, "since", 0);
            const auto lines = experiments.log_since(parts[2], since);
            const auto now = experiments.get(parts[2]);
            return json_response(200, json{{"experiment_id", parts[2]},
                                           {"lines", lines},
                                           {"next", since + lines.size()},
                                           {"status", to_string(now->status)}});
        }
        throw HttpError(404, "not_found", "no route for " + req.path);
    }

    ApiResponse route(const ApiRequest& req) {
        const auto parts = split_path(req.path);
        if (parts.empty() || parts[0] != "api") throw HttpError(404, "not_found", "no route for " + req.path);
        if (parts.size() == 2 && parts[1] == "health") return json_response(200, json{{"status", "ok"}});
        authorize(req);
        const auto get_only = [&] {
            if (req.method != "GET") throw HttpError(405, "method_not_allowed", req.method + " " + req.path);
        };
        if (parts.size() == 2 && parts[1] == "dashboard") {
            get_only();
            return dashboard();
        }
        if (parts.size() == 3 && parts[1] == "stream" && parts[2] == "recent") {
            get_only();
            return stream_recent(req);
        }
        if (parts.size() == 2 && parts[1] == "features") {
            get_only();
            return feature_rows(req);
        }
        if (parts.size() >= 2 && parts[1] == "experiments") return experiments_route(req, parts);
        if (parts.size() == 2 && parts[1] == "models") {
            get_only();
            return json_response(200, json{{"models", store.registry()}});
        }
        if (parts.size() == 2 && parts[1] == "retrain") {
            if (req.method != "POST") throw HttpError(405, "method_not_allowed", req.method + " " + req.path);
            return retrain(req);
        }
        if (parts.size() == 2 && parts[1] == "jobs") {
            get_only();
            return json_response(200, json{{"jobs", store.jobs()}});
        }
        if (parts.size() == 3 && parts[1] == "jobs") {
            get_only();
            const auto job = store.job(parts[2]);
            if (!job) throw NotFoundError("job '" + parts[2] + "' not found");
            return json_response(200, json(*job));
        }
        throw HttpError(404, "not_found", "no route for " + req.path);
    }
};

ApiServer::ApiServer(Store& store, ForecastService& service, ExperimentManager& experiments,
                     ApiConfig cfg, Clock clock)
    : impl_(std::make_unique<Impl>(store, service, experiments, std::move(cfg), std::move(clock))) {
    const auto forward = [this](const httplib::Request& hreq, httplib::Response& hres) {
        ApiRequest req;
        req.method = hreq.method;
        req.path = hreq.path;
        req.body = hreq.body;
        for (const auto& [k, v] : hreq.params) req.query[k] = v;
        for (const auto& [k, v] : hreq.headers) {
            std::string key = k;
            std::transform(key.begin(), key.end(), key.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            req.headers[key] = v;
        }
        const auto res = handle(req);
        hres.status = res.status;
        hres.set_content(res.body, "application/json");
    };
    impl_->http.Get(R"(/.*)", forward);
    impl_->http.Post(R"(/.*)", forward);
    impl_->http.Put(R"(/.*)", forward);
    impl_->http.Delete(R"(/.*)", forward);
}

ApiServer::~ApiServer() { stop(); }

ApiResponse ApiServer::handle(const ApiRequest& req) {
    try {
        return impl_->route(req);
    } catch (const HttpError& e) {
        return error_response(e.status(), e.code(), e.what());
    } catch (const ValidationError& e) {
        return error_response(400, e.code(), e.what());
    } catch (const NotFoundError& e) {
        return error_response(404, e.code(), e.what());
    } catch (const ConflictError& e) {
        return error_response(409, e.code(), e.what());
    } catch (const InsufficientDataError& e) {
        return error_response(422, e.code(), e.what());
    } catch (const Error& e) {
        return error_response(500, e.code(), e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal_error", e.what());
    }
}

void ApiServer::on_jobs_enqueued(std::function<void()> callback) {
    impl_->on_enqueued = std::move(callback);
}

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->http.bind_to_any_port(host);
        if (bound < 0) throw Error("io_error", "cannot bind " + host);
        return bound;
    }
    if (!impl_->http.bind_to_port(host, port)) {
        throw Error("io_error", "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void ApiServer::listen() { impl_->http.listen_after_bind(); }

void ApiServer::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace edboard::platform
