#include "edboard/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <queue>

#include "edboard/error.hpp"
#include "edboard/random.hpp"

namespace edboard {

bool satisfies_invariants(const EncounterRecord& r) {
    if (r.esi && (*r.esi < 1 || *r.esi > 5)) return false;
    if (!(r.arrival_ts <= r.treatment_start_ts && r.treatment_start_ts <= r.checkout_ts)) {
        return false;
    }
    if (r.bed_request_ts) {
        return r.treatment_start_ts <= *r.bed_request_ts && *r.bed_request_ts <= r.checkout_ts;
    }
    return true;
}

std::string_view to_string(WeatherCategory w) {
    switch (w) {
        case WeatherCategory::kClear: return "clear";
        case WeatherCategory::kClouds: return "clouds";
        case WeatherCategory::kRain: return "rain";
        case WeatherCategory::kThunderstorm: return "thunderstorm";
        case WeatherCategory::kOther: return "other";
    }
    return "other";
}

WeatherCategory parse_weather(std::string_view text) {
    for (int i = 0; i < kWeatherCategoryCount; ++i) {
        const auto w = static_cast<WeatherCategory>(i);
        if (to_string(w) == text) return w;
    }
    throw ValidationError("unknown weather category '" + std::string(text) + "'");
}

std::string_view to_string(InpatientEventKind k) {
    switch (k) {
        case InpatientEventKind::kAdmission: return "admission";
        case InpatientEventKind::kDischarge: return "discharge";
        case InpatientEventKind::kSurgeryStart: return "surgery_start";
        case InpatientEventKind::kSurgeryEnd: return "surgery_end";
    }
    return "admission";
}

InpatientEventKind parse_inpatient_kind(std::string_view text) {
    for (int i = 0; i < 4; ++i) {
        const auto k = static_cast<InpatientEventKind>(i);
        if (to_string(k) == text) return k;
    }
    throw ValidationError("unknown inpatient event kind '" + std::string(text) + "'");
}

}  // namespace edboard

namespace edboard::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream identifiers keep the context, encounter and inpatient draws independent,
// so changing one generator does not shift the others.
constexpr std::uint64_t kContextStream = 1;
constexpr std::uint64_t kEncounterStream = 2;
constexpr std::uint64_t kInpatientStream = 3;

constexpr int kInpatientUnits = 12;
constexpr int kOperatingRooms = 8;
constexpr int kInitialCensus = 250;
constexpr double kMeanLengthOfStayDays = 4.5;
constexpr double kDirectAdmissionsPerHour = 0.9;
constexpr double kMeanSurgeryMin = 150.0;

Timestamp nth_weekday(int year, int month, int weekday_mon0, int n) {
    Timestamp t = from_civil(year, month, 1);
    while (to_civil(t).day_of_week != weekday_mon0) t += Hours{24};
    return t + Hours{24 * 7 * (n - 1)};
}

Timestamp last_weekday(int year, int month, int weekday_mon0) {
    Timestamp t = (month == 12 ? from_civil(year + 1, 1, 1) : from_civil(year, month + 1, 1)) -
                  Hours{24};
    while (to_civil(t).day_of_week != weekday_mon0) t -= Hours{24};
    return t;
}

std::string padded_id(char prefix, std::uint64_t n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*llu", prefix, width, static_cast<unsigned long long>(n));
    return buf;
}

std::string unit_name(const char* prefix, std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%02llu", prefix, static_cast<unsigned long long>(n));
    return buf;
}

Seconds minutes_to_seconds(double minutes) {
    return Seconds{static_cast<std::int64_t>(std::llround(minutes * 60.0))};
}

std::vector<ContextRecord> generate_context(const ScenarioConfig& cfg) {
    Rng rng = Rng::stream(cfg.seed, kContextStream);
    static constexpr std::array<double, kWeatherCategoryCount> kWeatherWeights{0.45, 0.30, 0.15,
                                                                               0.04, 0.06};
    constexpr double kWeatherPersistence = 0.9;

    std::vector<ContextRecord> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, TimeRange{cfg.start_ts, cfg.end_ts}.hours())));
    auto weather = static_cast<WeatherCategory>(rng.categorical(kWeatherWeights));
    for (Timestamp t = cfg.start_ts; t < cfg.end_ts; t += Hours{1}) {
        const CivilTime c = to_civil(t);
        const double day_of_year =
            std::chrono::duration<double, std::ratio<86400>>(t - from_civil(c.year, 1, 1)).count();
        const double annual = std::sin(kTwoPi * (day_of_year - 110.0) / 365.25);
        const double diurnal = std::sin(kTwoPi * (c.hour - 9) / 24.0);
        const double noise = rng.normal(0.0, 2.0);
        if (!rng.bernoulli(kWeatherPersistence)) {
            weather = static_cast<WeatherCategory>(rng.categorical(kWeatherWeights));
        }
        const FootballFlags fb = football_flags(t);
        ContextRecord r;
        r.hour_ts = t;
        r.temperature_f = std::round((62.0 + 18.0 * annual + 8.0 * diurnal + noise) * 10.0) / 10.0;
        r.weather = weather;
        r.holiday = is_federal_holiday(t);
        r.football_a = fb.team_a;
        r.football_b = fb.team_b;
        out.push_back(r);
    }
    return out;
}

struct PendingVisit {
    EncounterRecord record;
    bool admitted = false;
    double base_board_min = 0.0;
};

std::vector<EncounterRecord> generate_encounters(const ScenarioConfig& cfg) {
    Rng rng = Rng::stream(cfg.seed, kEncounterStream);
    std::vector<PendingVisit> visits;
    const double hours = static_cast<double>(TimeRange{cfg.start_ts, cfg.end_ts}.hours());
    const auto patient_pool =
        static_cast<std::uint64_t>(std::max(1.0, 0.8 * cfg.base_arrival_rate * hours));

    for (Timestamp t = cfg.start_ts; t < cfg.end_ts; t += Hours{1}) {
        const std::uint64_t n = rng.poisson(arrival_rate(t, cfg));
        for (std::uint64_t i = 0; i < n; ++i) {
            PendingVisit v;
            v.record.patient_id = padded_id('P', rng.below(patient_pool), 7);
            v.record.esi = static_cast<int>(rng.categorical(cfg.esi_mix)) + 1;
            v.record.arrival_ts = t + Seconds{static_cast<std::int64_t>(rng.below(3600))};
            const double wait = rng.lognormal_with_mean(cfg.mean_wait_min, cfg.duration_log_sd);
            const double treat = rng.lognormal_with_mean(cfg.mean_treat_min, cfg.duration_log_sd);
            v.admitted = rng.bernoulli(cfg.admit_probability);
            v.base_board_min = rng.lognormal_with_mean(cfg.mean_board_min, cfg.duration_log_sd);
            v.record.treatment_start_ts = v.record.arrival_ts + minutes_to_seconds(wait);
            const Timestamp treat_end = v.record.treatment_start_ts + minutes_to_seconds(treat);
            if (v.admitted) v.record.bed_request_ts = treat_end;
            v.record.checkout_ts = treat_end;
            visits.push_back(std::move(v));
        }
    }

    std::stable_sort(visits.begin(), visits.end(), [](const PendingVisit& a, const PendingVisit& b) {
        return a.record.arrival_ts < b.record.arrival_ts;
    });
    for (std::size_t i = 0; i < visits.size(); ++i) {
        visits[i].record.visit_id = padded_id('V', i + 1, 8);
    }

    // Boarding durations inflate with the number of patients already boarding when
    // the bed request is placed, processed in bed-request order.
    std::vector<std::size_t> admitted;
    for (std::size_t i = 0; i < visits.size(); ++i) {
        if (visits[i].admitted) admitted.push_back(i);
    }
    std::stable_sort(admitted.begin(), admitted.end(), [&](std::size_t a, std::size_t b) {
        return *visits[a].record.bed_request_ts < *visits[b].record.bed_request_ts;
    });
    std::priority_queue<Timestamp, std::vector<Timestamp>, std::greater<>> boarding_until;
    for (std::size_t idx : admitted) {
        EncounterRecord& r = visits[idx].record;
        while (!boarding_until.empty() && boarding_until.top() <= *r.bed_request_ts) {
            boarding_until.pop();
        }
        const double concurrent = static_cast<double>(boarding_until.size());
        const double board =
            visits[idx].base_board_min * (1.0 + cfg.congestion_coupling * concurrent / 10.0);
        r.checkout_ts = *r.bed_request_ts + minutes_to_seconds(board);
        boarding_until.push(r.checkout_ts);
    }

    std::vector<EncounterRecord> out;
    out.reserve(visits.size());
    for (auto& v : visits) out.push_back(std::move(v.record));
    return out;
}

Timestamp discharge_time(Rng& rng, Timestamp admitted) {
    const double los_days = rng.lognormal_with_mean(kMeanLengthOfStayDays, 0.6);
    const Timestamp day = std::chrono::floor<std::chrono::days>(admitted + minutes_to_seconds(los_days * 1440.0));
    // Discharges cluster around early afternoon.
    const double hour = std::clamp(rng.normal(14.0, 2.5), 6.0, 22.0);
    const Timestamp t = day + minutes_to_seconds(hour * 60.0);
    return std::max(t, admitted + Hours{1});
}

std::vector<InpatientEvent> generate_inpatient(const ScenarioConfig& cfg,
                                               const std::vector<EncounterRecord>& encounters) {
    Rng rng = Rng::stream(cfg.seed, kInpatientStream);
    std::vector<InpatientEvent> events;
    auto add_stay = [&](Timestamp admitted) {
        const std::string unit = unit_name("UNIT", rng.below(kInpatientUnits) + 1);
        const Timestamp discharged = discharge_time(rng, admitted);
        events.push_back({InpatientEventKind::kAdmission, admitted, unit});
        if (discharged < cfg.end_ts) {
            events.push_back({InpatientEventKind::kDischarge, discharged, unit});
        }
    };

    if (cfg.start_ts < cfg.end_ts) {
        for (int i = 0; i < kInitialCensus; ++i) add_stay(cfg.start_ts);
    }
    for (const auto& e : encounters) {
        if (e.bed_request_ts && e.checkout_ts < cfg.end_ts) add_stay(e.checkout_ts);
    }
    for (Timestamp t = cfg.start_ts; t < cfg.end_ts; t += Hours{1}) {
        const std::uint64_t direct = rng.poisson(kDirectAdmissionsPerHour);
        for (std::uint64_t i = 0; i < direct; ++i) {
            add_stay(t + Seconds{static_cast<std::int64_t>(rng.below(3600))});
        }
        const CivilTime c = to_civil(t);
        const bool elective_block = c.day_of_week < 5 && c.hour >= 7 && c.hour < 17;
        const std::uint64_t surgeries = rng.poisson(elective_block ? 2.0 : 0.2);
        for (std::uint64_t i = 0; i < surgeries; ++i) {
            const std::string room = unit_name("OR", rng.below(kOperatingRooms) + 1);
            const Timestamp start = t + Seconds{static_cast<std::int64_t>(rng.below(3600))};
            const Timestamp end =
                start + minutes_to_seconds(rng.lognormal_with_mean(kMeanSurgeryMin, 0.5));
            events.push_back({InpatientEventKind::kSurgeryStart, start, room});
            if (end < cfg.end_ts) events.push_back({InpatientEventKind::kSurgeryEnd, end, room});
        }
    }
    std::stable_sort(events.begin(), events.end(), [](const InpatientEvent& a, const InpatientEvent& b) {
        if (a.ts != b.ts) return a.ts < b.ts;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.unit_id < b.unit_id;
    });
    return events;
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    std::vector<std::string> bad;
    if (cfg.end_ts < cfg.start_ts) bad.emplace_back("end_ts");
    if (!is_hour_aligned(cfg.start_ts)) bad.emplace_back("start_ts");
    if (!is_hour_aligned(cfg.end_ts)) bad.emplace_back("end_ts");
    if (!(cfg.base_arrival_rate > 0.0)) bad.emplace_back("base_arrival_rate");
    if (!(cfg.daily_amplitude >= 0.0 && cfg.daily_amplitude < 1.0)) bad.emplace_back("daily_amplitude");
    if (!(cfg.weekly_amplitude >= 0.0 && cfg.weekly_amplitude < 1.0)) bad.emplace_back("weekly_amplitude");
    double mix = 0.0;
    bool mix_ok = true;
    for (double p : cfg.esi_mix) {
        mix += p;
        mix_ok = mix_ok && p >= 0.0;
    }
    if (!mix_ok || std::abs(mix - 1.0) > 1e-9) bad.emplace_back("esi_mix");
    if (!(cfg.mean_wait_min > 0.0)) bad.emplace_back("mean_wait_min");
    if (!(cfg.mean_treat_min > 0.0)) bad.emplace_back("mean_treat_min");
    if (!(cfg.mean_board_min > 0.0)) bad.emplace_back("mean_board_min");
    if (!(cfg.duration_log_sd > 0.0)) bad.emplace_back("duration_log_sd");
    if (!(cfg.congestion_coupling >= 0.0)) bad.emplace_back("congestion_coupling");
    if (!(cfg.admit_probability >= 0.0 && cfg.admit_probability <= 1.0)) bad.emplace_back("admit_probability");
    if (!(cfg.event_rate_multipliers.holiday > 0.0)) bad.emplace_back("event_rate_multipliers.holiday");
    if (!(cfg.event_rate_multipliers.football_a > 0.0)) bad.emplace_back("event_rate_multipliers.football_a");
    if (!(cfg.event_rate_multipliers.football_b > 0.0)) bad.emplace_back("event_rate_multipliers.football_b");
    if (!bad.empty()) {
        std::string msg = "invalid scenario config:";
        for (const auto& f : bad) msg += " " + f;
        throw ValidationError(msg, bad);
    }
}

double arrival_rate(Timestamp t, const ScenarioConfig& cfg) {
    if (t < cfg.start_ts || t >= cfg.end_ts) {
        throw RangeError("timestamp " + format_iso8601(t) + " outside scenario range");
    }
    const CivilTime c = to_civil(t);
    double rate = cfg.base_arrival_rate *
                  (1.0 + cfg.daily_amplitude * std::sin(kTwoPi * c.hour / 24.0)) *
                  (1.0 + cfg.weekly_amplitude * std::sin(kTwoPi * c.day_of_week / 7.0));
    if (is_federal_holiday(t)) rate *= cfg.event_rate_multipliers.holiday;
    const FootballFlags fb = football_flags(t);
    if (fb.team_a) rate *= cfg.event_rate_multipliers.football_a;
    if (fb.team_b) rate *= cfg.event_rate_multipliers.football_b;
    return std::max(rate, 0.0);
}

std::vector<Timestamp> federal_holidays(int year) {
    constexpr int kMon = 0;
    constexpr int kThu = 3;
    return {
        from_civil(year, 1, 1),           // New Year's Day
        nth_weekday(year, 1, kMon, 3),    // Martin Luther King Jr. Day
        nth_weekday(year, 2, kMon, 3),    // Washington's Birthday
        last_weekday(year, 5, kMon),      // Memorial Day
        from_civil(year, 6, 19),          // Juneteenth
        from_civil(year, 7, 4),           // Independence Day
        nth_weekday(year, 9, kMon, 1),    // Labor Day
        nth_weekday(year, 10, kMon, 2),   // Columbus Day
        from_civil(year, 11, 11),         // Veterans Day
        nth_weekday(year, 11, kThu, 4),   // Thanksgiving
        from_civil(year, 12, 25),         // Christmas
    };
}

bool is_federal_holiday(Timestamp t) {
    const Timestamp day = std::chrono::floor<std::chrono::days>(t);
    const auto days = federal_holidays(to_civil(t).year);
    return std::find(days.begin(), days.end(), day) != days.end();
}

FootballFlags football_flags(Timestamp t) {
    const CivilTime c = to_civil(t);
    if (c.month < 9 || c.month > 11 || c.day_of_week != 5) return {};
    const Timestamp first = nth_weekday(c.year, 9, 5, 1);
    const auto index = std::chrono::floor<std::chrono::days>(t - first);
    const auto week = index.count() / 7;
    return week % 2 == 0 ? FootballFlags{true, false} : FootballFlags{false, true};
}

Corpus generate_corpus(const ScenarioConfig& cfg) {
    validate(cfg);
    Corpus c;
    c.context = generate_context(cfg);
    c.encounters = generate_encounters(cfg);
    c.inpatient = generate_inpatient(cfg, c.encounters);
    return c;
}

}  // namespace edboard::synth
