#include "edboard/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "edboard/csv.hpp"
#include "edboard/error.hpp"

namespace edboard::features {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kColumnNames{
    "year",
    "month",
    "day_of_month",
    "day_of_week",
    "hour",
    "boarding_time_minute_hourly",
    "boarding_count_hourly",
    "boarding_count_esi12_hourly",
    "boarding_count_esi3_hourly",
    "boarding_count_esi45_hourly",
    "waiting_time_minute_hourly",
    "waiting_count_hourly",
    "waiting_count_esi12_hourly",
    "waiting_count_esi3_hourly",
    "waiting_count_esi45_hourly",
    "treatment_time_minute_hourly",
    "treatment_count_hourly",
    "total_patient_count_hourly",
    "extreme_boarding_indicator",
    "census_count_hourly",
    "surgical_count_hourly",
    "temperature",
    "weather_clear",
    "weather_clouds",
    "weather_rain",
    "weather_thunderstorm",
    "weather_other",
    "holiday",
    "football_a",
    "football_b",
};

double average_minutes(std::int64_t seconds, std::int64_t count) {
    return count == 0 ? 0.0 : (static_cast<double>(seconds) / 60.0) / static_cast<double>(count);
}

struct SortedInpatient {
    std::vector<Timestamp> admissions, discharges, surgery_starts, surgery_ends;

    explicit SortedInpatient(std::span<const InpatientEvent> events) {
        for (const auto& e : events) {
            switch (e.kind) {
                case InpatientEventKind::kAdmission: admissions.push_back(e.ts); break;
                case InpatientEventKind::kDischarge: discharges.push_back(e.ts); break;
                case InpatientEventKind::kSurgeryStart: surgery_starts.push_back(e.ts); break;
                case InpatientEventKind::kSurgeryEnd: surgery_ends.push_back(e.ts); break;
            }
        }
        for (auto* v : {&admissions, &discharges, &surgery_starts, &surgery_ends}) {
            std::sort(v->begin(), v->end());
        }
    }

    static std::int64_t upto(const std::vector<Timestamp>& v, Timestamp at) {
        return std::upper_bound(v.begin(), v.end(), at) - v.begin();
    }

    [[nodiscard]] InpatientSnapshot at(Timestamp t) const {
        return {upto(admissions, t) - upto(discharges, t),
                upto(surgery_starts, t) - upto(surgery_ends, t)};
    }
};

const ContextRecord* find_context(std::span<const ContextRecord> context, Timestamp hour_ts) {
    for (const auto& c : context) {
        if (c.hour_ts == hour_ts) return &c;
    }
    return nullptr;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& column_names() { return kColumnNames; }

std::size_t column_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (kColumnNames[i] == name) return i;
    }
    throw ValidationError("unknown feature column '" + std::string(name) + "'",
                          {std::string(name)});
}

bool is_binary_column(std::size_t column) {
    switch (column) {
        case kExtremeIndicator:
        case kWeatherClear:
        case kWeatherClouds:
        case kWeatherRain:
        case kWeatherThunderstorm:
        case kWeatherOther:
        case kHoliday:
        case kFootballA:
        case kFootballB:
            return true;
        default:
            return false;
    }
}

CleaningResult clean_encounters(std::span<const EncounterRecord> records) {
    CleaningResult out;
    out.report.n_input = records.size();
    for (const auto& r : records) {
        if (r.treatment_start_ts - r.arrival_ts > kMaxWait) {
            ++out.report.n_dropped_waiting;
            continue;
        }
        if (r.bed_request_ts && r.checkout_ts - *r.bed_request_ts > kMaxBoarding) {
            ++out.report.n_dropped_boarding;
            continue;
        }
        out.kept.push_back(r);
    }
    out.report.n_kept = out.kept.size();
    out.report.dropped_fraction_waiting =
        records.empty() ? 0.0
                        : 100.0 * static_cast<double>(out.report.n_dropped_waiting) /
                              static_cast<double>(records.size());
    return out;
}

InpatientSnapshot inpatient_snapshot(std::span<const InpatientEvent> events, Timestamp at) {
    InpatientSnapshot s;
    for (const auto& e : events) {
        if (e.ts > at) continue;
        switch (e.kind) {
            case InpatientEventKind::kAdmission: ++s.census; break;
            case InpatientEventKind::kDischarge: --s.census; break;
            case InpatientEventKind::kSurgeryStart: ++s.surgical; break;
            case InpatientEventKind::kSurgeryEnd: --s.surgical; break;
        }
    }
    return s;
}

void HourAccumulator::State::add(std::optional<int> esi, Seconds elapsed) {
    ++count;
    elapsed_seconds += elapsed.count();
    const int level = esi.value_or(3);
    if (level <= 2) {
        ++esi12;
    } else if (level == 3) {
        ++esi3;
    } else {
        ++esi45;
    }
}

HourAccumulator::HourAccumulator(Timestamp hour_ts)
    : hour_ts_(hour_ts), hour_end_(hour_ts + Hours{1}) {
    if (!is_hour_aligned(hour_ts)) {
        throw ValidationError("hour_ts " + format_iso8601(hour_ts) + " is not hour-aligned");
    }
}

void HourAccumulator::add(const EncounterRecord& r) {
    const Timestamp e = hour_end_;
    if (!(r.arrival_ts <= e && e < r.checkout_ts)) return;
    if (r.bed_request_ts && *r.bed_request_ts <= e) {
        boarding_.add(r.esi, e - *r.bed_request_ts);
    } else if (r.treatment_start_ts <= e) {
        treating_.add(r.esi, e - r.treatment_start_ts);
    } else {
        waiting_.add(r.esi, e - r.arrival_ts);
    }
}

HourlyFeatureRow HourAccumulator::finish(const InpatientSnapshot& inpatient,
                                         const ContextRecord& context) const {
    HourlyFeatureRow row;
    row.hour_ts = hour_ts_;
    auto& v = row.values;
    const CivilTime c = to_civil(hour_ts_);
    v[kYear] = c.year;
    v[kMonth] = c.month;
    v[kDayOfMonth] = c.day;
    v[kDayOfWeek] = c.day_of_week;
    v[kHour] = c.hour;

    v[kBoardingTime] = average_minutes(boarding_.elapsed_seconds, boarding_.count);
    v[kBoardingCount] = static_cast<double>(boarding_.count);
    v[kBoardingCountEsi12] = static_cast<double>(boarding_.esi12);
    v[kBoardingCountEsi3] = static_cast<double>(boarding_.esi3);
    v[kBoardingCountEsi45] = static_cast<double>(boarding_.esi45);
    v[kWaitingTime] = average_minutes(waiting_.elapsed_seconds, waiting_.count);
    v[kWaitingCount] = static_cast<double>(waiting_.count);
    v[kWaitingCountEsi12] = static_cast<double>(waiting_.esi12);
    v[kWaitingCountEsi3] = static_cast<double>(waiting_.esi3);
    v[kWaitingCountEsi45] = static_cast<double>(waiting_.esi45);
    v[kTreatmentTime] = average_minutes(treating_.elapsed_seconds, treating_.count);
    v[kTreatmentCount] = static_cast<double>(treating_.count);
    v[kTotalPatientCount] =
        static_cast<double>(waiting_.count + treating_.count + boarding_.count);
    v[kExtremeIndicator] = 0.0;
    v[kCensusCount] = static_cast<double>(inpatient.census);
    v[kSurgicalCount] = static_cast<double>(inpatient.surgical);

    v[kTemperature] = context.temperature_f;
    v[kWeatherClear] = context.weather == WeatherCategory::kClear ? 1.0 : 0.0;
    v[kWeatherClouds] = context.weather == WeatherCategory::kClouds ? 1.0 : 0.0;
    v[kWeatherRain] = context.weather == WeatherCategory::kRain ? 1.0 : 0.0;
    v[kWeatherThunderstorm] = context.weather == WeatherCategory::kThunderstorm ? 1.0 : 0.0;
    v[kWeatherOther] = context.weather == WeatherCategory::kOther ? 1.0 : 0.0;
    v[kHoliday] = context.holiday ? 1.0 : 0.0;
    v[kFootballA] = context.football_a ? 1.0 : 0.0;
    v[kFootballB] = context.football_b ? 1.0 : 0.0;
    return row;
}

HourlyFeatureRow aggregate_hour(std::span<const EncounterRecord> encounters,
                                std::span<const InpatientEvent> inpatient,
                                std::span<const ContextRecord> context, Timestamp hour_ts) {
    HourAccumulator acc(hour_ts);
    const ContextRecord* ctx = find_context(context, hour_ts);
    if (ctx == nullptr) {
        throw DataGapError("no context record for hour " + format_iso8601(hour_ts));
    }
    for (const auto& r : encounters) acc.add(r);
    return acc.finish(inpatient_snapshot(inpatient, acc.hour_end()), *ctx);
}

void extreme_indicator(std::span<HourlyFeatureRow> rows, double mean, double sd) {
    const double threshold = mean + sd;
    for (auto& row : rows) {
        row[kExtremeIndicator] = row[kBoardingTime] > threshold ? 1.0 : 0.0;
    }
}

FeatureTable extreme_indicator(FeatureTable table, double mean, double sd) {
    extreme_indicator(std::span<HourlyFeatureRow>(table.rows), mean, sd);
    return table;
}

FeatureTable exclude_window(FeatureTable table, Timestamp from, Timestamp to) {
    if (!is_hour_aligned(from) || !is_hour_aligned(to)) {
        throw ValidationError("exclusion bounds must be hour-aligned", {"from", "to"});
    }
    if (!(from < to)) throw ValidationError("exclusion window is empty", {"from", "to"});
    const TimeRange window{from, to};
    std::erase_if(table.rows, [&](const HourlyFeatureRow& r) { return window.contains(r.hour_ts); });
    table.gaps.push_back(window);
    std::sort(table.gaps.begin(), table.gaps.end(),
              [](const TimeRange& a, const TimeRange& b) { return a.from < b.from; });
    return table;
}

FeatureTable build_feature_table(std::span<const EncounterRecord> encounters,
                                 std::span<const InpatientEvent> inpatient,
                                 std::span<const ContextRecord> context, TimeRange range,
                                 std::span<const TimeRange> exclusions) {
    if (!is_hour_aligned(range.from) || !is_hour_aligned(range.to)) {
        throw ValidationError("feature range must be hour-aligned", {"from", "to"});
    }
    std::map<Timestamp, const ContextRecord*> ctx;
    for (const auto& c : context) {
        if (!ctx.emplace(c.hour_ts, &c).second) {
            throw DuplicateKeyError("duplicate context hour " + format_iso8601(c.hour_ts));
        }
    }

    const std::int64_t n_hours = std::max<std::int64_t>(0, range.hours());
    auto excluded = [&](Timestamp h) {
        return std::any_of(exclusions.begin(), exclusions.end(),
                           [&](const TimeRange& x) { return x.contains(h); });
    };

    // Bucket each visit into every hour whose end instant falls inside its stay.
    std::vector<std::vector<const EncounterRecord*>> buckets(static_cast<std::size_t>(n_hours));
    for (const auto& r : encounters) {
        Timestamp end = floor_hour(r.arrival_ts);
        if (end < r.arrival_ts) end += Hours{1};
        if (end <= range.from) end = range.from + Hours{1};
        for (; end < r.checkout_ts && end <= range.to; end += Hours{1}) {
            const auto idx = std::chrono::duration_cast<Hours>(end - Hours{1} - range.from).count();
            buckets[static_cast<std::size_t>(idx)].push_back(&r);
        }
    }

    const SortedInpatient sorted(inpatient);
    FeatureTable table;
    table.rows.reserve(static_cast<std::size_t>(n_hours));
    for (std::int64_t i = 0; i < n_hours; ++i) {
        const Timestamp hour = range.from + Hours{i};
        if (excluded(hour)) continue;
        const auto it = ctx.find(hour);
        if (it == ctx.end()) {
            throw DataGapError("no context record for hour " + format_iso8601(hour));
        }
        HourAccumulator acc(hour);
        for (const EncounterRecord* r : buckets[static_cast<std::size_t>(i)]) acc.add(*r);
        table.rows.push_back(acc.finish(sorted.at(acc.hour_end()), *it->second));
    }
    for (const auto& x : exclusions) {
        if (x.from < range.to && range.from < x.to) {
            table.gaps.push_back({std::max(x.from, range.from), std::min(x.to, range.to)});
        }
    }
    std::sort(table.gaps.begin(), table.gaps.end(),
              [](const TimeRange& a, const TimeRange& b) { return a.from < b.from; });
    return table;
}

FeatureTable build_feature_table(std::span<const EncounterRecord> encounters,
                                 std::span<const InpatientEvent> inpatient,
                                 std::span<const ContextRecord> context, TimeRange range) {
    const std::array<TimeRange, 1> defaults{default_exclusion()};
    return build_feature_table(encounters, inpatient, context, range, defaults);
}

std::optional<std::string> check_row_invariants(const HourlyFeatureRow& row) {
    const auto& v = row.values;
    for (double x : v) {
        if (!std::isfinite(x)) return "non-finite value";
    }
    if (v[kBoardingCountEsi12] + v[kBoardingCountEsi3] + v[kBoardingCountEsi45] != v[kBoardingCount]) {
        return "boarding ESI partition";
    }
    if (v[kWaitingCountEsi12] + v[kWaitingCountEsi3] + v[kWaitingCountEsi45] != v[kWaitingCount]) {
        return "waiting ESI partition";
    }
    if (v[kWaitingCount] + v[kTreatmentCount] + v[kBoardingCount] != v[kTotalPatientCount]) {
        return "total patient identity";
    }
    const double one_hot = v[kWeatherClear] + v[kWeatherClouds] + v[kWeatherRain] +
                           v[kWeatherThunderstorm] + v[kWeatherOther];
    if (one_hot != 1.0) return "weather one-hot";
    if (v[kBoardingCount] == 0 && v[kBoardingTime] != 0) return "boarding time without boarders";
    if (v[kWaitingCount] == 0 && v[kWaitingTime] != 0) return "waiting time without waiters";
    if (v[kTreatmentCount] == 0 && v[kTreatmentTime] != 0) return "treatment time without patients";
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        if (is_binary_column(c) && v[c] != 0.0 && v[c] != 1.0) return "non-binary indicator";
    }
    for (auto c : {kBoardingTime, kBoardingCount, kWaitingTime, kWaitingCount, kTreatmentTime,
                   kTreatmentCount, kCensusCount, kSurgicalCount}) {
        if (v[c] < 0) return "negative count or duration";
    }
    return std::nullopt;
}

void write_features_csv(std::ostream& out, const FeatureTable& table) {
    std::vector<std::string> fields;
    fields.reserve(kFeatureCount + 1);
    fields.emplace_back("hour_ts");
    for (auto name : kColumnNames) fields.emplace_back(name);
    csv::write_row(out, fields);
    for (const auto& row : table.rows) {
        fields.clear();
        fields.push_back(format_iso8601(row.hour_ts));
        for (double x : row.values) fields.push_back(csv::format_exact(x));
        csv::write_row(out, fields);
    }
}

FeatureTable read_features_csv(std::istream& in) {
    const csv::Table t = csv::read(in);
    const std::size_t ts_col = t.column("hour_ts");
    std::array<std::size_t, kFeatureCount> cols{};
    for (std::size_t c = 0; c < kFeatureCount; ++c) cols[c] = t.column(kColumnNames[c]);
    FeatureTable table;
    table.rows.reserve(t.rows.size());
    for (const auto& fields : t.rows) {
        HourlyFeatureRow row;
        row.hour_ts = parse_iso8601(fields[ts_col]);
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            row.values[c] = csv::parse_double(fields[cols[c]]);
        }
        if (!table.rows.empty() && row.hour_ts <= table.rows.back().hour_ts) {
            throw ValidationError("features.csv rows are not strictly increasing in hour_ts");
        }
        table.rows.push_back(row);
    }
    table.gaps = detect_gaps(table.rows);
    return table;
}

std::vector<TimeRange> detect_gaps(std::span<const HourlyFeatureRow> rows) {
    std::vector<TimeRange> gaps;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].hour_ts - rows[i - 1].hour_ts > Hours{1}) {
            gaps.push_back({rows[i - 1].hour_ts + Hours{1}, rows[i].hour_ts});
        }
    }
    return gaps;
}

}  // namespace edboard::features
