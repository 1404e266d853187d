#include "edboard/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "edboard/error.hpp"

namespace edboard {

namespace chr = std::chrono;

CivilTime to_civil(Timestamp t) {
    const auto day = chr::floor<chr::days>(t);
    const chr::year_month_day ymd{day};
    const chr::hh_mm_ss hms{t - day};
    const chr::weekday wd{day};

    CivilTime c;
    c.year = static_cast<int>(ymd.year());
    c.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    c.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
    c.hour = static_cast<int>(hms.hours().count());
    c.minute = static_cast<int>(hms.minutes().count());
    c.second = static_cast<int>(hms.seconds().count());
    c.day_of_week = static_cast<int>((wd.c_encoding() + 6) % 7);
    return c;
}

Timestamp from_civil(int year, int month, int day, int hour, int minute, int second) {
    const chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                                  chr::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) {
        throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
    }
    return Timestamp{chr::sys_days{ymd}} + Hours{hour} + Minutes{minute} + Seconds{second};
}

std::string format_iso8601(Timestamp t) {
    const CivilTime c = to_civil(t);
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month,
                  c.day, c.hour, c.minute, c.second);
    return std::string(buf.data());
}

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    const char* first = s.data() + pos;
    const char* last = first + len;
    for (const char* p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') return false;
    }
    return std::from_chars(first, last, out).ec == std::errc{};
}

}  // namespace

Timestamp parse_iso8601(std::string_view text) {
    auto fail = [&]() -> Timestamp {
        throw ValidationError("malformed ISO-8601 timestamp '" + std::string(text) + "'");
    };
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (text.size() < 10 || !read_int(text, 0, 4, y) || text[4] != '-' ||
        !read_int(text, 5, 2, mo) || text[7] != '-' || !read_int(text, 8, 2, d)) {
        return fail();
    }
    std::string_view rest = text.substr(10);
    if (!rest.empty()) {
        if (rest[0] != 'T' && rest[0] != ' ') return fail();
        if (!read_int(rest, 1, 2, h) || rest.size() < 6 || rest[3] != ':' ||
            !read_int(rest, 4, 2, mi)) {
            return fail();
        }
        rest = rest.substr(6);
        if (!rest.empty() && rest[0] == ':') {
            if (!read_int(rest, 1, 2, s)) return fail();
            rest = rest.substr(3);
        }
        if (rest == "Z" || rest == "+00:00") rest = {};
        if (!rest.empty()) return fail();
    }
    if (h > 23 || mi > 59 || s > 59) return fail();
    try {
        return from_civil(y, mo, d, h, mi, s);
    } catch (const ValidationError&) {
        return fail();
    }
}

Timestamp floor_hour(Timestamp t) { return chr::floor<Hours>(t); }

bool is_hour_aligned(Timestamp t) { return floor_hour(t) == t; }

Timestamp month_start(Timestamp t) {
    const CivilTime c = to_civil(t);
    return from_civil(c.year, c.month, 1);
}

Timestamp next_month_start(Timestamp t) {
    const CivilTime c = to_civil(t);
    return c.month == 12 ? from_civil(c.year + 1, 1, 1) : from_civil(c.year, c.month + 1, 1);
}

}  // namespace edboard
