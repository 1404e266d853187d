#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edboard/records.hpp"
#include "edboard/time.hpp"

namespace edboard::features {

/// Column order of the hourly feature table. Fixed: features.csv, model weights and the
/// dataset cache all index channels by this enum.
enum Column : std::size_t {
    kYear,
    kMonth,
    kDayOfMonth,
    kDayOfWeek,  // 0 = Monday
    kHour,
    kBoardingTime,  // target
    kBoardingCount,
    kBoardingCountEsi12,
    kBoardingCountEsi3,
    kBoardingCountEsi45,
    kWaitingTime,
    kWaitingCount,
    kWaitingCountEsi12,
    kWaitingCountEsi3,
    kWaitingCountEsi45,
    kTreatmentTime,
    kTreatmentCount,
    kTotalPatientCount,
    kExtremeIndicator,
    kCensusCount,
    kSurgicalCount,
    kTemperature,
    kWeatherClear,
    kWeatherClouds,
    kWeatherRain,
    kWeatherThunderstorm,
    kWeatherOther,
    kHoliday,
    kFootballA,
    kFootballB,
};

inline constexpr std::size_t kFeatureCount = 30;
inline constexpr Column kTargetColumn = kBoardingTime;

const std::array<std::string_view, kFeatureCount>& column_names();
/// Throws ValidationError for unknown names.
std::size_t column_index(std::string_view name);
/// Indicator and one-hot columns: exempt from standardisation.
bool is_binary_column(std::size_t column);

struct HourlyFeatureRow {
    Timestamp hour_ts;
    std::array<double, kFeatureCount> values{};

    double operator[](std::size_t c) const { return values[c]; }
    double& operator[](std::size_t c) { return values[c]; }
    friend bool operator==(const HourlyFeatureRow&, const HourlyFeatureRow&) = default;
};

/// Hourly rows sorted by hour_ts, plus the hour ranges known to be missing.
struct FeatureTable {
    std::vector<HourlyFeatureRow> rows;
    std::vector<TimeRange> gaps;

    [[nodiscard]] std::size_t size() const { return rows.size(); }
    [[nodiscard]] bool empty() const { return rows.empty(); }
};

/// The hours dropped for atypical operations in spring 2020.
inline TimeRange default_exclusion() {
    return {from_civil(2020, 4, 1), from_civil(2020, 7, 1)};
}

// -- cleaning --------------------------------------------------------------

inline constexpr Minutes kMaxWait{540};
inline constexpr Minutes kMaxBoarding{18000};

struct CleaningReport {
    std::size_t n_input = 0;
    std::size_t n_kept = 0;
    std::size_t n_dropped_waiting = 0;
    std::size_t n_dropped_boarding = 0;
    double dropped_fraction_waiting = 0.0;  // percent of n_input
    std::optional<TimeRange> excluded_hour_range;
};

struct CleaningResult {
    std::vector<EncounterRecord> kept;
    CleaningReport report;
};

/// Drops visits waiting more than 540 minutes or boarding more than 18,000 minutes.
/// A visit breaking both rules is tallied once, as a waiting drop. Order is preserved.
CleaningResult clean_encounters(std::span<const EncounterRecord> records);

// -- hourly aggregation ------------------------------------------------------

/// Far-future sentinel for timestamps a streaming consumer has not observed yet.
inline constexpr Timestamp kNotYetObserved = Timestamp::max();

struct InpatientSnapshot {
    std::int64_t census = 0;
    std::int64_t surgical = 0;
};

/// Cumulative admissions minus discharges, and surgeries started minus ended, over all
/// events with ts <= at.
InpatientSnapshot inpatient_snapshot(std::span<const InpatientEvent> events, Timestamp at);

/// Accumulates the ED state at the end instant of one hour. Elapsed time is summed in
/// whole seconds, so the result does not depend on the order visits are added.
class HourAccumulator {
public:
    explicit HourAccumulator(Timestamp hour_ts);

    /// Classifies `r` at the hour-end instant; visits not in the ED at that instant are ignored.
    void add(const EncounterRecord& r);
    [[nodiscard]] HourlyFeatureRow finish(const InpatientSnapshot& inpatient,
                                          const ContextRecord& context) const;

    [[nodiscard]] Timestamp hour_end() const { return hour_end_; }

private:
    struct State {
        std::int64_t count = 0;
        std::int64_t esi12 = 0;
        std::int64_t esi3 = 0;
        std::int64_t esi45 = 0;
        std::int64_t elapsed_seconds = 0;
        void add(std::optional<int> esi, Seconds elapsed);
    };
    Timestamp hour_ts_;
    Timestamp hour_end_;
    State waiting_;
    State treating_;
    State boarding_;
};

/// State of the ED, hospital and context for the hour starting at `hour_ts`, evaluated at
/// hour_ts + 1h. The extreme indicator is left 0. Throws DataGapError if no context record
/// matches the hour, ValidationError if hour_ts is not hour-aligned.
HourlyFeatureRow aggregate_hour(std::span<const EncounterRecord> encounters,
                                std::span<const InpatientEvent> inpatient,
                                std::span<const ContextRecord> context, Timestamp hour_ts);

/// Sets the indicator column to 1 where boarding time > mean + sd, else 0.
void extreme_indicator(std::span<HourlyFeatureRow> rows, double mean, double sd);
FeatureTable extreme_indicator(FeatureTable table, double mean, double sd);

/// Removes rows with hour_ts in [from, to) and records the gap.
FeatureTable exclude_window(FeatureTable table, Timestamp from, Timestamp to);

/// One row per hour of `range` outside `exclusions`, sorted. Throws DuplicateKeyError on
/// repeated context hours and DataGapError on missing ones.
FeatureTable build_feature_table(std::span<const EncounterRecord> encounters,
                                 std::span<const InpatientEvent> inpatient,
                                 std::span<const ContextRecord> context, TimeRange range,
                                 std::span<const TimeRange> exclusions);
FeatureTable build_feature_table(std::span<const EncounterRecord> encounters,
                                 std::span<const InpatientEvent> inpatient,
                                 std::span<const ContextRecord> context, TimeRange range);

/// Checks partition sums, the total identity, one-hot weather and zero time features on
/// zero counts. Returns a description of the first violation, or empty.
std::optional<std::string> check_row_invariants(const HourlyFeatureRow& row);

/// features.csv: hour_ts followed by the 30 columns in enum order. Values use the
/// shortest exact decimal form, so reading back is lossless.
void write_features_csv(std::ostream& out, const FeatureTable& table);
FeatureTable read_features_csv(std::istream& in);

/// Ranges where consecutive rows are more than one hour apart.
std::vector<TimeRange> detect_gaps(std::span<const HourlyFeatureRow> rows);

}  // namespace edboard::features
