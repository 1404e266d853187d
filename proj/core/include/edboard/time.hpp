#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace edboard {

/// UTC instant at one-second resolution.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;
using Minutes = std::chrono::minutes;
using Hours = std::chrono::hours;

/// Calendar breakdown of a UTC instant. day_of_week is 0 = Monday ... 6 = Sunday.
struct CivilTime {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
    int day_of_week = 3;
};

CivilTime to_civil(Timestamp t);
Timestamp from_civil(int year, int month, int day, int hour = 0, int minute = 0, int second = 0);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SSZ", "YYYY-MM-DDTHH:MMZ", "YYYY-MM-DDTHH:MM:SS" and
/// "YYYY-MM-DD" (midnight). Throws ValidationError on anything else.
Timestamp parse_iso8601(std::string_view text);

Timestamp floor_hour(Timestamp t);
bool is_hour_aligned(Timestamp t);

/// Start of the calendar month containing t.
Timestamp month_start(Timestamp t);
/// Start of the calendar month after the one containing t.
Timestamp next_month_start(Timestamp t);

inline std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_unix(std::int64_t s) { return Timestamp{Seconds{s}}; }

/// Half-open interval [from, to).
struct TimeRange {
    Timestamp from;
    Timestamp to;

    [[nodiscard]] bool contains(Timestamp t) const { return from <= t && t < to; }
    [[nodiscard]] bool empty() const { return to <= from; }
    [[nodiscard]] std::int64_t hours() const {
        return std::chrono::duration_cast<Hours>(to - from).count();
    }
    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

}  // namespace edboard
