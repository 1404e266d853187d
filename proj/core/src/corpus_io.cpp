#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "edboard/csv.hpp"
#include "edboard/error.hpp"
#include "edboard/random.hpp"
#include "edboard/synthgen.hpp"

namespace edboard::synth {

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const ScenarioConfig& cfg) {
    j = json{
        {"seed", cfg.seed},
        {"start_ts", format_iso8601(cfg.start_ts)},
        {"end_ts", format_iso8601(cfg.end_ts)},
        {"base_arrival_rate", cfg.base_arrival_rate},
        {"daily_amplitude", cfg.daily_amplitude},
        {"weekly_amplitude", cfg.weekly_amplitude},
        {"esi_mix", cfg.esi_mix},
        {"mean_wait_min", cfg.mean_wait_min},
        {"mean_treat_min", cfg.mean_treat_min},
        {"mean_board_min", cfg.mean_board_min},
        {"duration_log_sd", cfg.duration_log_sd},
        {"congestion_coupling", cfg.congestion_coupling},
        {"admit_probability", cfg.admit_probability},
        {"event_rate_multipliers",
         {{"holiday", cfg.event_rate_multipliers.holiday},
          {"football_a", cfg.event_rate_multipliers.football_a},
          {"football_b", cfg.event_rate_multipliers.football_b}}},
    };
}

void from_json(const json& j, ScenarioConfig& cfg) {
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("start_ts")) cfg.start_ts = parse_iso8601(j.at("start_ts").get<std::string>());
    if (j.contains("end_ts")) cfg.end_ts = parse_iso8601(j.at("end_ts").get<std::string>());
    cfg.base_arrival_rate = j.value("base_arrival_rate", cfg.base_arrival_rate);
    cfg.daily_amplitude = j.value("daily_amplitude", cfg.daily_amplitude);
    cfg.weekly_amplitude = j.value("weekly_amplitude", cfg.weekly_amplitude);
    if (j.contains("esi_mix")) cfg.esi_mix = j.at("esi_mix").get<std::array<double, 5>>();
    cfg.mean_wait_min = j.value("mean_wait_min", cfg.mean_wait_min);
    cfg.mean_treat_min = j.value("mean_treat_min", cfg.mean_treat_min);
    cfg.mean_board_min = j.value("mean_board_min", cfg.mean_board_min);
    cfg.duration_log_sd = j.value("duration_log_sd", cfg.duration_log_sd);
    cfg.congestion_coupling = j.value("congestion_coupling", cfg.congestion_coupling);
    cfg.admit_probability = j.value("admit_probability", cfg.admit_probability);
    if (j.contains("event_rate_multipliers")) {
        const auto& m = j.at("event_rate_multipliers");
        cfg.event_rate_multipliers.holiday = m.value("holiday", 1.0);
        cfg.event_rate_multipliers.football_a = m.value("football_a", 1.0);
        cfg.event_rate_multipliers.football_b = m.value("football_b", 1.0);
    }
}

namespace {

std::string ts_or_empty(const std::optional<Timestamp>& t) {
    return t ? format_iso8601(*t) : std::string{};
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write " + p.string());
    return out;
}

}  // namespace

void write_encounters_csv(std::ostream& out, const std::vector<EncounterRecord>& rows) {
    csv::write_row(out, {"patient_id", "visit_id", "esi", "arrival_ts", "treatment_start_ts",
                         "bed_request_ts", "checkout_ts"});
    for (const auto& r : rows) {
        csv::write_row(out, {r.patient_id, r.visit_id, r.esi ? std::to_string(*r.esi) : "",
                             format_iso8601(r.arrival_ts), format_iso8601(r.treatment_start_ts),
                             ts_or_empty(r.bed_request_ts), format_iso8601(r.checkout_ts)});
    }
}

void write_context_csv(std::ostream& out, const std::vector<ContextRecord>& rows) {
    csv::write_row(out, {"hour_ts", "temperature", "weather_category", "holiday", "football_a",
                         "football_b"});
    for (const auto& r : rows) {
        csv::write_row(out, {format_iso8601(r.hour_ts), csv::format_exact(r.temperature_f),
                             std::string(to_string(r.weather)), r.holiday ? "1" : "0",
                             r.football_a ? "1" : "0", r.football_b ? "1" : "0"});
    }
}

void write_inpatient_csv(std::ostream& out, const std::vector<InpatientEvent>& rows) {
    csv::write_row(out, {"event_kind", "ts", "unit_id"});
    for (const auto& r : rows) {
        csv::write_row(out, {std::string(to_string(r.kind)), format_iso8601(r.ts), r.unit_id});
    }
}

std::vector<EncounterRecord> read_encounters_csv(std::istream& in) {
    const csv::Table t = csv::read(in);
    const auto c_pid = t.column("patient_id"), c_vid = t.column("visit_id"),
               c_esi = t.column("esi"), c_arr = t.column("arrival_ts"),
               c_trt = t.column("treatment_start_ts"), c_bed = t.column("bed_request_ts"),
               c_out = t.column("checkout_ts");
    std::vector<EncounterRecord> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        EncounterRecord r;
        r.patient_id = row[c_pid];
        r.visit_id = row[c_vid];
        if (!row[c_esi].empty()) r.esi = static_cast<int>(csv::parse_int(row[c_esi]));
        r.arrival_ts = parse_iso8601(row[c_arr]);
        r.treatment_start_ts = parse_iso8601(row[c_trt]);
        if (!row[c_bed].empty()) r.bed_request_ts = parse_iso8601(row[c_bed]);
        r.checkout_ts = parse_iso8601(row[c_out]);
        if (!satisfies_invariants(r)) {
            throw ValidationError("encounter " + r.visit_id + " violates timestamp ordering");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ContextRecord> read_context_csv(std::istream& in) {
    const csv::Table t = csv::read(in);
    const auto c_ts = t.column("hour_ts"), c_temp = t.column("temperature"),
               c_w = t.column("weather_category"), c_h = t.column("holiday"),
               c_a = t.column("football_a"), c_b = t.column("football_b");
    auto flag = [](const std::string& s) {
        if (s == "1") return true;
        if (s == "0") return false;
        throw ValidationError("binary field must be 0 or 1, got '" + s + "'");
    };
    std::vector<ContextRecord> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        ContextRecord r;
        r.hour_ts = parse_iso8601(row[c_ts]);
        r.temperature_f = csv::parse_double(row[c_temp]);
        r.weather = parse_weather(row[c_w]);
        r.holiday = flag(row[c_h]);
        r.football_a = flag(row[c_a]);
        r.football_b = flag(row[c_b]);
        out.push_back(r);
    }
    return out;
}

std::vector<InpatientEvent> read_inpatient_csv(std::istream& in) {
    const csv::Table t = csv::read(in);
    const auto c_k = t.column("event_kind"), c_ts = t.column("ts"), c_u = t.column("unit_id");
    std::vector<InpatientEvent> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        out.push_back({parse_inpatient_kind(row[c_k]), parse_iso8601(row[c_ts]), row[c_u]});
    }
    return out;
}

void write_corpus(const fs::path& dir, const Corpus& corpus, const ScenarioConfig& cfg) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "encounters.csv");
        write_encounters_csv(out, corpus.encounters);
    }
    {
        auto out = open_out(dir / "context.csv");
        write_context_csv(out, corpus.context);
    }
    {
        auto out = open_out(dir / "inpatient.csv");
        write_inpatient_csv(out, corpus.inpatient);
    }
    json manifest{
        {"generator", {{"name", kGeneratorName}, {"version", kGeneratorVersion}}},
        {"rng", {{"algorithm", Rng::kAlgorithm},
                 {"seed", cfg.seed},
                 {"streams", {{"context", 1}, {"encounters", 2}, {"inpatient", 3}}}}},
        {"seed", cfg.seed},
        {"config", cfg},
        {"row_counts",
         {{"encounters", corpus.encounters.size()},
          {"context", corpus.context.size()},
          {"inpatient", corpus.inpatient.size()}}},
    };
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

Corpus read_corpus(const fs::path& dir) {
    auto open_in = [&](const char* name) {
        std::ifstream in(dir / name, std::ios::binary);
        if (!in) throw NotFoundError("missing corpus file " + (dir / name).string());
        return in;
    };
    Corpus c;
    {
        auto in = open_in("encounters.csv");
        c.encounters = read_encounters_csv(in);
    }
    {
        auto in = open_in("context.csv");
        c.context = read_context_csv(in);
    }
    {
        auto in = open_in("inpatient.csv");
        c.inpatient = read_inpatient_csv(in);
    }
    return c;
}

}  // namespace edboard::synth
