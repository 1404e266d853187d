#include "edboard/platform/json.hpp"

namespace edboard {

using nlohmann::json;

void to_json(json& j, const ContextRecord& r) {
    j = json{{"hour_ts", format_iso8601(r.hour_ts)}, {"temperature", r.temperature_f},
             {"weather_category", to_string(r.weather)}, {"holiday", r.holiday},
             {"football_a", r.football_a}, {"football_b", r.football_b}};
}

void from_json(const json& j, ContextRecord& r) {
    r.hour_ts = parse_iso8601(j.at("hour_ts").get<std::string>());
    r.temperature_f = j.at("temperature").get<double>();
    r.weather = parse_weather(j.at("weather_category").get<std::string>());
    r.holiday = j.at("holiday").get<bool>();
    r.football_a = j.at("football_a").get<bool>();
    r.football_b = j.at("football_b").get<bool>();
}

void to_json(json& j, const InpatientEvent& e) {
    j = json{{"event_kind", to_string(e.kind)}, {"ts", format_iso8601(e.ts)}, {"unit_id", e.unit_id}};
}

void from_json(const json& j, InpatientEvent& e) {
    e.kind = parse_inpatient_kind(j.at("event_kind").get<std::string>());
    e.ts = parse_iso8601(j.at("ts").get<std::string>());
    e.unit_id = j.at("unit_id").get<std::string>();
}

void to_json(json& j, const TimeRange& r) {
    j = json{{"from", format_iso8601(r.from)}, {"to", format_iso8601(r.to)}};
}

void from_json(const json& j, TimeRange& r) {
    r.from = parse_iso8601(j.at("from").get<std::string>());
    r.to = parse_iso8601(j.at("to").get<std::string>());
}

}  // namespace edboard

namespace edboard::features {

void to_json(nlohmann::json& j, const HourlyFeatureRow& r) {
    nlohmann::json values = nlohmann::json::object();
    const auto& names = column_names();
    for (std::size_t c = 0; c < kFeatureCount; ++c) values[std::string(names[c])] = r.values[c];
    j = nlohmann::json{{"hour_ts", format_iso8601(r.hour_ts)}, {"values", std::move(values)}};
}

void from_json(const nlohmann::json& j, HourlyFeatureRow& r) {
    r.hour_ts = parse_iso8601(j.at("hour_ts").get<std::string>());
    const auto& values = j.at("values");
    const auto& names = column_names();
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        r.values[c] = values.at(std::string(names[c])).get<double>();
    }
}

}  // namespace edboard::features

namespace edboard::eval {

void to_json(nlohmann::json& j, const MetricReport& m) {
    j = nlohmann::json{{"mae", m.mae}, {"rmse", m.rmse}, {"n", m.n},
                       {"mape_excluded", m.mape_excluded}};
    j["r2"] = m.r2 ? nlohmann::json(*m.r2) : nlohmann::json(nullptr);
    j["mape"] = m.mape ? nlohmann::json(*m.mape) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, MetricReport& m) {
    m.mae = j.at("mae").get<double>();
    m.rmse = j.at("rmse").get<double>();
    m.n = j.at("n").get<std::size_t>();
    m.mape_excluded = j.value("mape_excluded", std::size_t{0});
    m.r2 = j.at("r2").is_null() ? std::nullopt : std::optional<double>(j.at("r2").get<double>());
    m.mape = j.at("mape").is_null() ? std::nullopt : std::optional<double>(j.at("mape").get<double>());
}

}  // namespace edboard::eval

namespace edboard::platform {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

json optional_ts(const std::optional<Timestamp>& ts) {
    return ts ? json(format_iso8601(*ts)) : json(nullptr);
}

std::optional<Timestamp> read_optional_ts(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return parse_iso8601(j.at(key).get<std::string>());
}

}  // namespace

json timestamp_json(Timestamp ts) { return format_iso8601(ts); }
Timestamp timestamp_from_json(const json& j) { return parse_iso8601(j.get<std::string>()); }

void to_json(json& j, const EncounterEvent& e) {
    j = json{{"kind", to_string(e.kind)},
             {"ts", format_iso8601(e.ts)},
             {"visit_id", e.visit_id},
             {"patient_id", e.patient_id},
             {"esi", e.esi ? json(*e.esi) : json(nullptr)}};
}

void from_json(const json& j, EncounterEvent& e) {
    e.kind = parse_encounter_event_kind(j.at("kind").get<std::string>());
    e.ts = parse_iso8601(j.at("ts").get<std::string>());
    e.visit_id = j.at("visit_id").get<std::string>();
    e.patient_id = j.at("patient_id").get<std::string>();
    e.esi = j.at("esi").is_null() ? std::nullopt : std::optional<int>(j.at("esi").get<int>());
}

void to_json(json& j, const ForecastRecord& f) {
    j = json{{"origin_ts", format_iso8601(f.origin_ts)},
             {"horizon", f.horizon},
             {"target_ts", format_iso8601(f.target_ts)},
             {"predicted_minutes", f.predicted_minutes},
             {"model_id", f.model_id},
             {"created_ts", format_iso8601(f.created_ts)}};
}

void from_json(const json& j, ForecastRecord& f) {
    f.origin_ts = parse_iso8601(j.at("origin_ts").get<std::string>());
    f.horizon = j.at("horizon").get<int>();
    f.target_ts = parse_iso8601(j.at("target_ts").get<std::string>());
    f.predicted_minutes = j.at("predicted_minutes").get<double>();
    f.model_id = j.at("model_id").get<std::string>();
    f.created_ts = parse_iso8601(j.at("created_ts").get<std::string>());
}

void to_json(json& j, const MetricSnapshot& s) {
    j = json{{"at", format_iso8601(s.at)}, {"horizon", s.horizon}, {"empty", !s.report}};
    j["report"] = s.report ? json(*s.report) : json(nullptr);
}

void from_json(const json& j, MetricSnapshot& s) {
    s.at = parse_iso8601(j.at("at").get<std::string>());
    s.horizon = j.at("horizon").get<int>();
    if (j.at("report").is_null()) {
        s.report.reset();
    } else {
        s.report = j.at("report").get<eval::MetricReport>();
    }
}

void to_json(json& j, const ModelRegistryEntry& e) {
    j = json{{"model_id", e.model_id},
             {"model_name", e.model_name},
             {"algorithm", models::to_string(e.algorithm)},
             {"horizon", e.horizon},
             {"date_range", e.train_range},
             {"mae", e.mae},
             {"rmse", e.rmse},
             {"r2", optional_number(e.r2)},
             {"mape", optional_number(e.mape)},
             {"val_mae", e.val_mae},
             {"artifact_path", e.artifact_path},
             {"registered_ts", format_iso8601(e.registered_ts)},
             {"active", e.active},
             {"job_id", e.job_id}};
}

void from_json(const json& j, ModelRegistryEntry& e) {
    e.model_id = j.at("model_id").get<std::string>();
    e.model_name = j.at("model_name").get<std::string>();
    e.algorithm = models::parse_algorithm(j.at("algorithm").get<std::string>());
    e.horizon = j.at("horizon").get<int>();
    e.train_range = j.at("date_range").get<TimeRange>();
    e.mae = j.at("mae").get<double>();
    e.rmse = j.at("rmse").get<double>();
    e.r2 = read_optional_number(j, "r2");
    e.mape = read_optional_number(j, "mape");
    e.val_mae = j.at("val_mae").get<double>();
    e.artifact_path = j.at("artifact_path").get<std::string>();
    e.registered_ts = parse_iso8601(j.at("registered_ts").get<std::string>());
    e.active = j.at("active").get<bool>();
    e.job_id = j.value("job_id", std::string());
}

void to_json(json& j, const RetrainJob& r) {
    j = json{{"job_id", r.job_id},
             {"trigger", to_string(r.trigger)},
             {"algorithm", models::to_string(r.algorithm)},
             {"horizon", r.horizon},
             {"date_range", r.data_range},
             {"status", to_string(r.status)},
             {"enqueued_ts", format_iso8601(r.enqueued_ts)},
             {"started_ts", optional_ts(r.started_ts)},
             {"finished_ts", optional_ts(r.finished_ts)},
             {"result_model_id", r.result_model_id ? json(*r.result_model_id) : json(nullptr)},
             {"error", r.error}};
}

void from_json(const json& j, RetrainJob& r) {
    r.job_id = j.at("job_id").get<std::string>();
    r.trigger = parse_job_trigger(j.at("trigger").get<std::string>());
    r.algorithm = models::parse_algorithm(j.at("algorithm").get<std::string>());
    r.horizon = j.at("horizon").get<int>();
    r.data_range = j.at("date_range").get<TimeRange>();
    r.status = parse_job_status(j.at("status").get<std::string>());
    r.enqueued_ts = parse_iso8601(j.at("enqueued_ts").get<std::string>());
    r.started_ts = read_optional_ts(j, "started_ts");
    r.finished_ts = read_optional_ts(j, "finished_ts");
    r.result_model_id = j.at("result_model_id").is_null()
                            ? std::nullopt
                            : std::optional<std::string>(j.at("result_model_id").get<std::string>());
    r.error = j.value("error", std::string());
}

void to_json(json& j, const JobLogEntry& e) {
    j = json{{"job_id", e.job_id},
             {"from", e.from ? json(to_string(*e.from)) : json(nullptr)},
             {"to", to_string(e.to)},
             {"ts", format_iso8601(e.ts)}};
}

void from_json(const json& j, JobLogEntry& e) {
    e.job_id = j.at("job_id").get<std::string>();
    e.from = j.at("from").is_null()
                 ? std::nullopt
                 : std::optional<JobStatus>(parse_job_status(j.at("from").get<std::string>()));
    e.to = parse_job_status(j.at("to").get<std::string>());
    e.ts = parse_iso8601(j.at("ts").get<std::string>());
}

}  // namespace edboard::platform
