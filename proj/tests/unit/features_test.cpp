#include <gtest/gtest.h>

#include <sstream>

#include "edboard/error.hpp"
#include "edboard/features.hpp"
#include "edboard/pipeline.hpp"
#include "edboard/synthgen.hpp"
#include "test_support.hpp"

namespace edboard::features {
namespace {

const Timestamp kHourStart = from_civil(2021, 3, 10, 9);
const Timestamp kEnd = kHourStart + Hours{1};

EncounterRecord visit(const std::string& id, std::optional<int> esi, Timestamp arrival,
                      Timestamp treat, std::optional<Timestamp> bed, Timestamp checkout) {
    return {"P" + id, "V" + id, esi, arrival, treat, bed, checkout};
}

/// Visit waiting `wait` minutes and boarding `board` minutes (no boarding when negative).
EncounterRecord with_durations(const std::string& id, int wait, int board) {
    const Timestamp a = from_civil(2021, 1, 1);
    const Timestamp t = a + Minutes{wait};
    if (board < 0) return visit(id, 3, a, t, std::nullopt, t + Minutes{60});
    const Timestamp bed = t + Minutes{30};
    return visit(id, 3, a, t, bed, bed + Minutes{board});
}

ContextRecord context(Timestamp hour) {
    return {hour, 55.0, WeatherCategory::kRain, false, false, true};
}

TEST(Columns, ThirtyCanonicalNames) {
    const auto& names = column_names();
    ASSERT_EQ(names.size(), 30u);
    EXPECT_EQ(names[kTargetColumn], "boarding_time_minute_hourly");
    EXPECT_EQ(column_index("total_patient_count_hourly"), kTotalPatientCount);
    EXPECT_THROW(column_index("nope"), ValidationError);
    std::size_t binary = 0;
    for (std::size_t c = 0; c < kFeatureCount; ++c) binary += is_binary_column(c) ? 1 : 0;
    EXPECT_EQ(binary, 9u);
    EXPECT_TRUE(is_binary_column(kHoliday));
    EXPECT_FALSE(is_binary_column(kTemperature));
}

TEST(Clean, WaitBoundary) {
    const std::vector<EncounterRecord> rs{with_durations("1", 540, -1), with_durations("2", 541, -1)};
    const auto r = clean_encounters(rs);
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0].visit_id, "V1");
    EXPECT_EQ(r.report.n_dropped_waiting, 1u);
    EXPECT_EQ(r.report.n_dropped_boarding, 0u);
}

TEST(Clean, BoardingBoundary) {
    const std::vector<EncounterRecord> rs{with_durations("1", 10, 18000),
                                          with_durations("2", 10, 18001)};
    const auto r = clean_encounters(rs);
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0].visit_id, "V1");
    EXPECT_EQ(r.report.n_dropped_boarding, 1u);
}

TEST(Clean, PlantedAnomaliesAndOrder) {
    std::vector<EncounterRecord> rs;
    for (int i = 0; i < 1000; ++i) {
        rs.push_back(with_durations(std::to_string(i), i % 83 == 0 && i < 1000 - 83 ? 600 : 30, 120));
    }
    std::size_t planted = 0;
    for (const auto& r : rs) planted += (r.treatment_start_ts - r.arrival_ts) > Minutes{540} ? 1 : 0;
    ASSERT_EQ(planted, 12u);
    const auto out = clean_encounters(rs);
    EXPECT_EQ(out.report.n_kept, 988u);
    EXPECT_EQ(out.report.n_input, 1000u);
    EXPECT_NEAR(out.report.dropped_fraction_waiting, 1.2, 1e-12);
    for (std::size_t i = 1; i < out.kept.size(); ++i) {
        EXPECT_LT(std::stoi(out.kept[i - 1].visit_id.substr(1)), std::stoi(out.kept[i].visit_id.substr(1)));
    }
}

TEST(Clean, RandomDurationsProperty) {
    Rng rng(17);
    std::vector<EncounterRecord> rs;
    for (int i = 0; i < 2000; ++i) {
        const int wait = static_cast<int>(rng.below(700));
        const int board = rng.bernoulli(0.3) ? -1 : static_cast<int>(17900 + rng.below(200));
        rs.push_back(with_durations(std::to_string(i), wait, board));
    }
    const auto out = clean_encounters(rs);
    std::size_t k = 0;
    for (const auto& r : rs) {
        const bool wait_ok = (r.treatment_start_ts - r.arrival_ts) <= Minutes{540};
        const bool board_ok = !r.bed_request_ts || (r.checkout_ts - *r.bed_request_ts) <= Minutes{18000};
        if (wait_ok && board_ok) {
            ASSERT_LT(k, out.kept.size());
            EXPECT_EQ(out.kept[k++].visit_id, r.visit_id);
        }
    }
    EXPECT_EQ(k, out.kept.size());
    const auto& rep = out.report;
    EXPECT_EQ(rep.n_input, rep.n_kept + rep.n_dropped_waiting + rep.n_dropped_boarding);
}

TEST(Clean, BothRulesCountOnceAsWaiting) {
    const std::vector<EncounterRecord> rs{with_durations("1", 600, 20000)};
    const auto r = clean_encounters(rs);
    EXPECT_EQ(r.report.n_dropped_waiting, 1u);
    EXPECT_EQ(r.report.n_dropped_boarding, 0u);
}

TEST(AggregateHour, EmptyHour) {
    const std::vector<ContextRecord> ctx{context(kHourStart)};
    const auto row = aggregate_hour({}, {}, ctx, kHourStart);
    for (Column c : {kBoardingCount, kWaitingCount, kTreatmentCount, kTotalPatientCount,
                     kBoardingTime, kWaitingTime, kTreatmentTime}) {
        EXPECT_EQ(row[c], 0.0);
    }
    EXPECT_EQ(row[kWeatherRain], 1.0);
    EXPECT_EQ(row[kFootballB], 1.0);
    EXPECT_EQ(row[kTemperature], 55.0);
    EXPECT_EQ(row[features::kHour], 9.0);
    EXPECT_EQ(row[kDayOfWeek], 2.0);  // Wednesday
    EXPECT_FALSE(check_row_invariants(row).has_value());
}

TEST(AggregateHour, TwoBoardersAverageElapsed) {
    const Timestamp a = kHourStart - Hours{6};
    const std::vector<EncounterRecord> rs{
        visit("1", 2, a, a + Hours{1}, kEnd - Minutes{120}, kEnd + Hours{3}),
        visit("2", 4, a, a + Hours{1}, kEnd - Minutes{60}, kEnd + Minutes{1})};
    const std::vector<ContextRecord> ctx{context(kHourStart)};
    const auto row = aggregate_hour(rs, {}, ctx, kHourStart);
    EXPECT_EQ(row[kBoardingCount], 2.0);
    EXPECT_DOUBLE_EQ(row[kBoardingTime], 90.0);
    EXPECT_EQ(row[kBoardingCountEsi12], 1.0);
    EXPECT_EQ(row[kBoardingCountEsi3], 0.0);
    EXPECT_EQ(row[kBoardingCountEsi45], 1.0);
    EXPECT_EQ(row[kTotalPatientCount], 2.0);
}

TEST(AggregateHour, StateAtHourEndInstant) {
    const std::vector<EncounterRecord> rs{
        // waiting: arrived 30 min before the hour end, not yet treated
        visit("w", 5, kEnd - Minutes{30}, kEnd + Minutes{10}, std::nullopt, kEnd + Hours{2}),
        // treating since 45 minutes
        visit("t", std::nullopt, kEnd - Hours{2}, kEnd - Minutes{45}, std::nullopt, kEnd + Hours{1}),
        // left exactly at the hour end: not present
        visit("gone", 3, kHourStart, kHourStart + Minutes{5}, std::nullopt, kEnd),
        // bed request exactly at the hour end: boarding with zero elapsed time
        visit("b", 1, kHourStart - Hours{3}, kHourStart - Hours{2}, kEnd, kEnd + Hours{5}),
        // arrives after the hour end
        visit("late", 3, kEnd + Minutes{1}, kEnd + Minutes{2}, std::nullopt, kEnd + Minutes{3})};
    const std::vector<ContextRecord> ctx{context(kHourStart)};
    const auto row = aggregate_hour(rs, {}, ctx, kHourStart);
    EXPECT_EQ(row[kWaitingCount], 1.0);
    EXPECT_EQ(row[kWaitingCountEsi45], 1.0);
    EXPECT_DOUBLE_EQ(row[kWaitingTime], 30.0);
    EXPECT_EQ(row[kTreatmentCount], 1.0);
    EXPECT_DOUBLE_EQ(row[kTreatmentTime], 45.0);
    EXPECT_EQ(row[kBoardingCount], 1.0);
    EXPECT_EQ(row[kBoardingCountEsi12], 1.0);
    EXPECT_DOUBLE_EQ(row[kBoardingTime], 0.0);
    EXPECT_EQ(row[kTotalPatientCount], 3.0);
    EXPECT_FALSE(check_row_invariants(row).has_value());
}

TEST(AggregateHour, MissingEsiCountsAsMiddleStratum) {
    const std::vector<EncounterRecord> rs{
        visit("1", std::nullopt, kEnd - Minutes{10}, kEnd + Minutes{10}, std::nullopt, kEnd + Hours{1})};
    const std::vector<ContextRecord> ctx{context(kHourStart)};
    const auto row = aggregate_hour(rs, {}, ctx, kHourStart);
    EXPECT_EQ(row[kWaitingCountEsi3], 1.0);
}

TEST(AggregateHour, InpatientCensusAndSurgery) {
    const std::vector<InpatientEvent> ev{
        {InpatientEventKind::kAdmission, kHourStart - Hours{5}, "U1"},
        {InpatientEventKind::kAdmission, kHourStart - Hours{4}, "U1"},
        {InpatientEventKind::kDischarge, kHourStart - Hours{1}, "U1"},
        {InpatientEventKind::kSurgeryStart, kHourStart + Minutes{20}, "OR"},
        {InpatientEventKind::kSurgeryStart, kHourStart - Hours{3}, "OR"},
        {InpatientEventKind::kSurgeryEnd, kEnd, "OR"},
        {InpatientEventKind::kAdmission, kEnd + Minutes{1}, "U1"}};
    const std::vector<ContextRecord> ctx{context(kHourStart)};
    const auto row = aggregate_hour({}, ev, ctx, kHourStart);
    EXPECT_EQ(row[kCensusCount], 1.0);
    EXPECT_EQ(row[kSurgicalCount], 1.0);
}

TEST(AggregateHour, Errors) {
    const std::vector<ContextRecord> ctx{context(kHourStart)};
    EXPECT_THROW(aggregate_hour({}, {}, ctx, kHourStart + Hours{1}), DataGapError);
    EXPECT_THROW(aggregate_hour({}, {}, ctx, kHourStart + Minutes{5}), ValidationError);
}

TEST(AggregateHour, PureAndInvariantOverCorpus) {
    const auto corpus = synth::generate_corpus(testing::scenario(24 * 14, 5));
    const auto cleaned = clean_encounters(corpus.encounters).kept;
    for (int i = 0; i < 24 * 14; i += 7) {
        const auto h = from_civil(2019, 1, 1) + Hours{i};
        const auto a = aggregate_hour(cleaned, corpus.inpatient, corpus.context, h);
        const auto b = aggregate_hour(cleaned, corpus.inpatient, corpus.context, h);
        EXPECT_EQ(a, b);
        EXPECT_FALSE(check_row_invariants(a).has_value()) << *check_row_invariants(a);
    }
}

TEST(ExtremeIndicator, StrictThreshold) {
    auto table = testing::random_table(4, 1, [](std::size_t i) {
        return std::array<double, 4>{919.0, 918.0, 0.0, 2000.0}[i];
    });
    table = extreme_indicator(std::move(table), 622.0, 296.0);
    EXPECT_EQ(table.rows[0][kExtremeIndicator], 1.0);
    EXPECT_EQ(table.rows[1][kExtremeIndicator], 0.0);
    EXPECT_EQ(table.rows[2][kExtremeIndicator], 0.0);
    EXPECT_EQ(table.rows[3][kExtremeIndicator], 1.0);

    auto zeros = testing::random_table(10, 2, [](std::size_t) { return 0.0; });
    zeros = extreme_indicator(std::move(zeros), 0.0, 0.0);
    for (const auto& r : zeros.rows) EXPECT_EQ(r[kExtremeIndicator], 0.0);
}

TEST(ExcludeWindow, Examples) {
    const auto before = testing::random_table(100, 3, [](std::size_t) { return 10.0; },
                                              from_civil(2020, 1, 1));
    const auto same = exclude_window(before, from_civil(2020, 4, 1), from_civil(2020, 7, 1));
    EXPECT_EQ(same.rows, before.rows);

    const auto inside = testing::random_table(24, 3, [](std::size_t) { return 10.0; },
                                              from_civil(2020, 5, 1));
    EXPECT_TRUE(exclude_window(inside, from_civil(2020, 4, 1), from_civil(2020, 7, 1)).empty());

    EXPECT_THROW(exclude_window(before, from_civil(2020, 4, 1, 0, 30), from_civil(2020, 7, 1)),
                 ValidationError);
}

TEST(ExcludeWindow, FourYearTableLoses2184Rows) {
    const std::size_t hours = static_cast<std::size_t>(
        TimeRange{from_civil(2018, 1, 1), from_civil(2022, 1, 1)}.hours());
    const auto table = testing::random_table(hours, 4, [](std::size_t) { return 1.0; },
                                             from_civil(2018, 1, 1));
    const auto out = exclude_window(table, from_civil(2020, 4, 1), from_civil(2020, 7, 1));
    EXPECT_EQ(table.size() - out.size(), 2184u);
    ASSERT_FALSE(out.gaps.empty());
    EXPECT_EQ(detect_gaps(out.rows).size(), 1u);
    for (std::size_t i = 1; i < out.size(); ++i) ASSERT_LT(out.rows[i - 1].hour_ts, out.rows[i].hour_ts);
}

TEST(BuildFeatureTable, FortyEightHours) {
    const auto corpus = synth::generate_corpus(testing::scenario(48, 8));
    const TimeRange range{from_civil(2019, 1, 1), from_civil(2019, 1, 3)};
    const auto table = build_feature_table(corpus.encounters, corpus.inpatient, corpus.context, range);
    ASSERT_EQ(table.size(), 48u);
    EXPECT_EQ(table.rows.front().hour_ts, range.from);
    EXPECT_EQ(table.rows.back().hour_ts, range.to - Hours{1});
}

TEST(BuildFeatureTable, DuplicateContextRejected) {
    auto corpus = synth::generate_corpus(testing::scenario(48, 8));
    corpus.context.push_back(corpus.context[5]);
    const TimeRange range{from_civil(2019, 1, 1), from_civil(2019, 1, 3)};
    EXPECT_THROW(build_feature_table(corpus.encounters, corpus.inpatient, corpus.context, range),
                 DuplicateKeyError);
}

TEST(BuildFeatureTable, ExclusionWindowLeavesRecordedGap) {
    const auto start = from_civil(2020, 3, 25);
    const auto corpus = synth::generate_corpus(testing::scenario(24 * 14, 8, start));
    const TimeRange range{start, start + Hours{24 * 14}};
    const std::vector<TimeRange> ex{{from_civil(2020, 4, 1), from_civil(2020, 4, 3)}};
    const auto table = build_feature_table(corpus.encounters, corpus.inpatient, corpus.context, range, ex);
    EXPECT_EQ(table.size(), 24u * 12u);
    for (const auto& r : table.rows) EXPECT_FALSE(ex[0].contains(r.hour_ts));
    ASSERT_EQ(table.gaps.size(), 1u);
}

TEST(BuildFeatureTable, OneYearInvariantSweep) {
    const auto corpus = synth::generate_corpus(testing::scenario(24 * 365, 2021, from_civil(2021, 1, 1)));
    const auto build = pipeline::build_features(corpus);
    ASSERT_EQ(build.table.size(), 24u * 365u);
    for (const auto& row : build.table.rows) {
        const auto problem = check_row_invariants(row);
        ASSERT_FALSE(problem.has_value()) << format_iso8601(row.hour_ts) << ": " << *problem;
    }
    EXPECT_EQ(build.report.n_input,
              build.report.n_kept + build.report.n_dropped_waiting + build.report.n_dropped_boarding);
}

TEST(FeaturesCsv, LosslessRoundTrip) {
    auto table = testing::random_table(50, 9, [](std::size_t i) { return 100.0 / 3.0 * static_cast<double>(i); });
    table = exclude_window(std::move(table), from_civil(2021, 1, 1, 10), from_civil(2021, 1, 1, 12));
    std::ostringstream out;
    write_features_csv(out, table);
    const std::string text = out.str();
    EXPECT_EQ(text.substr(0, text.find(',')), "hour_ts");
    std::istringstream in(text);
    const auto back = read_features_csv(in);
    EXPECT_EQ(back.rows, table.rows);
    EXPECT_EQ(back.gaps.size(), 1u);
}

}  // namespace
}  // namespace edboard::features
