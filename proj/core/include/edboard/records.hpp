#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "edboard/time.hpp"

namespace edboard {

/// One emergency-department visit. Boarding is the interval [bed_request_ts, checkout_ts)
/// and exists only for admitted patients.
struct EncounterRecord {
    std::string patient_id;
    std::string visit_id;
    /// Triage acuity 1..5; empty when the source record had none.
    std::optional<int> esi;
    Timestamp arrival_ts;
    Timestamp treatment_start_ts;
    std::optional<Timestamp> bed_request_ts;
    Timestamp checkout_ts;

    friend bool operator==(const EncounterRecord&, const EncounterRecord&) = default;
};

/// arrival <= treatment_start <= checkout, bed request (if any) inside
/// [treatment_start, checkout], esi (if any) in 1..5.
bool satisfies_invariants(const EncounterRecord& r);

enum class WeatherCategory { kClear, kClouds, kRain, kThunderstorm, kOther };
inline constexpr int kWeatherCategoryCount = 5;

std::string_view to_string(WeatherCategory w);
WeatherCategory parse_weather(std::string_view text);

/// External context for one hour.
struct ContextRecord {
    Timestamp hour_ts;
    double temperature_f = 0.0;
    WeatherCategory weather = WeatherCategory::kClear;
    bool holiday = false;
    bool football_a = false;
    bool football_b = false;

    friend bool operator==(const ContextRecord&, const ContextRecord&) = default;
};

enum class InpatientEventKind { kAdmission, kDischarge, kSurgeryStart, kSurgeryEnd };

std::string_view to_string(InpatientEventKind k);
InpatientEventKind parse_inpatient_kind(std::string_view text);

struct InpatientEvent {
    InpatientEventKind kind = InpatientEventKind::kAdmission;
    Timestamp ts;
    std::string unit_id;

    friend bool operator==(const InpatientEvent&, const InpatientEvent&) = default;
};

}  // namespace edboard
