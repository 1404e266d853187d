#include <algorithm>

#include "edboard/models.hpp"

namespace edboard::models {

namespace {

void check_seasonal_horizon(int h) {
    if (h < 1 || h > 24) {
        throw ValidationError("seasonal baseline needs 1 <= h <= 24, got " + std::to_string(h),
                              {"horizon"});
    }
}

}  // namespace

double persistence_baseline(WindowView window, std::size_t target_column) {
    if (target_column >= window.channels || window.lag == 0) {
        throw ValidationError("persistence baseline: target column outside the window");
    }
    return window.last(target_column);
}

double seasonal_baseline(std::span<const features::HourlyFeatureRow> rows, Timestamp t, int h,
                         std::size_t target_column) {
    check_seasonal_horizon(h);
    const Timestamp want = t + std::chrono::hours(h - 24);
    if (rows.empty() || want < rows.front().hour_ts) {
        throw RangeError("seasonal lookup at " + format_iso8601(want) +
                         " precedes the start of the table");
    }
    const auto it = std::lower_bound(
        rows.begin(), rows.end(), want,
        [](const features::HourlyFeatureRow& r, Timestamp ts) { return r.hour_ts < ts; });
    if (it == rows.end() || it->hour_ts != want) {
        throw RangeError("seasonal lookup hour " + format_iso8601(want) + " is not in the table");
    }
    return it->values.at(target_column);
}

double seasonal_baseline(WindowView window, int h, std::size_t target_column) {
    check_seasonal_horizon(h);
    const auto back = static_cast<std::size_t>(24 - h);
    if (back >= window.lag) {
        throw RangeError("window of " + std::to_string(window.lag) +
                         " hours is too short for a seasonal lookup at h=" + std::to_string(h));
    }
    if (target_column >= window.channels) {
        throw ValidationError("seasonal baseline: target column outside the window");
    }
    return window.at(target_column, window.lag - 1 - back);
}

}  // namespace edboard::models
