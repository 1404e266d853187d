#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edboard/error.hpp"
#include "edboard/synthgen.hpp"
#include "test_support.hpp"

namespace edboard::synth {
namespace {

ScenarioConfig flat(double base) {
    ScenarioConfig cfg = testing::scenario(24 * 14, 1, from_civil(2019, 3, 4));
    cfg.base_arrival_rate = base;
    cfg.daily_amplitude = 0.0;
    cfg.weekly_amplitude = 0.0;
    cfg.event_rate_multipliers = {1.0, 1.0, 1.0};
    return cfg;
}

TEST(ArrivalRate, FlatScenarioReturnsBase) {
    const auto cfg = flat(5.0);
    EXPECT_DOUBLE_EQ(arrival_rate(cfg.start_ts + Hours{7}, cfg), 5.0);
}

TEST(ArrivalRate, DailyPeakAtSixOclock) {
    auto cfg = flat(10.0);
    cfg.daily_amplitude = 0.5;
    EXPECT_NEAR(arrival_rate(from_civil(2019, 3, 5, 6), cfg), 15.0, 1e-12);
}

TEST(ArrivalRate, HolidayMultiplierApplies) {
    auto cfg = flat(4.0);
    cfg.start_ts = from_civil(2019, 7, 1);
    cfg.end_ts = from_civil(2019, 7, 10);
    cfg.event_rate_multipliers.holiday = 1.5;
    ASSERT_TRUE(is_federal_holiday(from_civil(2019, 7, 4, 12)));
    EXPECT_NEAR(arrival_rate(from_civil(2019, 7, 4, 12), cfg), 6.0, 1e-12);
    EXPECT_NEAR(arrival_rate(from_civil(2019, 7, 5, 12), cfg), 4.0, 1e-12);
}

TEST(ArrivalRate, MatchesFormulaAndIsDailyPeriodic) {
    auto cfg = flat(8.0);
    cfg.daily_amplitude = 0.45;
    for (int i = 0; i < 24 * 5; ++i) {
        const auto t = cfg.start_ts + Hours{i};
        const double expect =
            8.0 * (1.0 + 0.45 * std::sin(2.0 * std::numbers::pi * (i % 24) / 24.0));
        EXPECT_NEAR(arrival_rate(t, cfg), expect, 1e-12);
        if (i + 24 < 24 * 14) EXPECT_DOUBLE_EQ(arrival_rate(t, cfg), arrival_rate(t + Hours{24}, cfg));
    }
}

TEST(ArrivalRate, OutsideRangeThrows) {
    const auto cfg = flat(5.0);
    EXPECT_THROW(arrival_rate(cfg.end_ts, cfg), RangeError);
    EXPECT_THROW(arrival_rate(cfg.start_ts - Hours{1}, cfg), RangeError);
}

TEST(Calendar, ElevenFederalHolidays) {
    for (int year : {2019, 2020, 2021, 2022}) EXPECT_EQ(federal_holidays(year).size(), 11u);
    EXPECT_TRUE(is_federal_holiday(from_civil(2021, 12, 25, 23)));
    EXPECT_TRUE(is_federal_holiday(from_civil(2019, 11, 28, 0)));  // fourth Thursday
    EXPECT_FALSE(is_federal_holiday(from_civil(2021, 12, 26)));
}

TEST(Calendar, FootballSaturdaysAlternate) {
    // Saturdays in September 2019: 7, 14, 21, 28.
    EXPECT_TRUE(football_flags(from_civil(2019, 9, 7, 15)).team_a);
    EXPECT_TRUE(football_flags(from_civil(2019, 9, 14, 15)).team_b);
    EXPECT_TRUE(football_flags(from_civil(2019, 9, 21, 15)).team_a);
    const auto off = football_flags(from_civil(2019, 9, 8, 15));
    EXPECT_FALSE(off.team_a || off.team_b);
    const auto summer = football_flags(from_civil(2019, 8, 31, 15));
    EXPECT_FALSE(summer.team_a || summer.team_b);
}

TEST(Validate, ListsEveryViolatedField) {
    ScenarioConfig cfg;
    cfg.base_arrival_rate = 0.0;
    cfg.daily_amplitude = 1.0;
    cfg.esi_mix = {0.5, 0.5, 0.5, 0.0, 0.0};
    cfg.end_ts = cfg.start_ts - Hours{1};
    try {
        validate(cfg);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        const auto& f = e.fields();
        for (const char* name : {"base_arrival_rate", "daily_amplitude", "esi_mix", "end_ts"}) {
            EXPECT_NE(std::find(f.begin(), f.end(), name), f.end()) << name;
        }
    }
}

TEST(GenerateCorpus, ZeroHourRangeIsEmpty) {
    auto cfg = testing::scenario(0, 3);
    const auto c = generate_corpus(cfg);
    EXPECT_TRUE(c.encounters.empty());
    EXPECT_TRUE(c.context.empty());
    EXPECT_TRUE(c.inpatient.empty());
}

TEST(GenerateCorpus, PoissonTotalsOverManySeeds) {
    const double lo = 240.0 - 4.0 * std::sqrt(240.0);
    const double hi = 240.0 + 4.0 * std::sqrt(240.0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto cfg = flat(5.0);
        cfg.seed = seed;
        cfg.end_ts = cfg.start_ts + Hours{48};
        const auto n = static_cast<double>(generate_corpus(cfg).encounters.size());
        EXPECT_GE(n, lo) << "seed " << seed;
        EXPECT_LE(n, hi) << "seed " << seed;
    }
}

TEST(GenerateCorpus, NoAdmissionsWhenProbabilityZero) {
    auto cfg = testing::scenario(24 * 7, 9);
    cfg.admit_probability = 0.0;
    for (const auto& r : generate_corpus(cfg).encounters) EXPECT_FALSE(r.bed_request_ts.has_value());
}

TEST(GenerateCorpus, RecordInvariantsAndOrdering) {
    const auto c = generate_corpus(testing::scenario(24 * 30, 21));
    ASSERT_FALSE(c.encounters.empty());
    for (std::size_t i = 0; i < c.encounters.size(); ++i) {
        ASSERT_TRUE(satisfies_invariants(c.encounters[i])) << c.encounters[i].visit_id;
        if (i > 0) ASSERT_LE(c.encounters[i - 1].arrival_ts, c.encounters[i].arrival_ts);
    }
    ASSERT_EQ(c.context.size(), 24u * 30u);
    for (std::size_t i = 0; i < c.context.size(); ++i) {
        EXPECT_EQ(c.context[i].hour_ts, from_civil(2019, 1, 1) + Hours{static_cast<int>(i)});
    }
    std::int64_t census = 0;
    std::int64_t surgeries = 0;
    for (const auto& e : c.inpatient) {
        if (e.kind == InpatientEventKind::kAdmission) ++census;
        if (e.kind == InpatientEventKind::kDischarge) --census;
        if (e.kind == InpatientEventKind::kSurgeryStart) ++surgeries;
        if (e.kind == InpatientEventKind::kSurgeryEnd) --surgeries;
        ASSERT_GE(census, 0);
        ASSERT_GE(surgeries, 0);
    }
}

TEST(GenerateCorpus, AdmittedFractionConverges) {
    auto cfg = testing::scenario(24 * 60, 4);
    const auto c = generate_corpus(cfg);
    const double n = static_cast<double>(c.encounters.size());
    ASSERT_GE(n, 10000.0);
    double admitted = 0.0;
    for (const auto& r : c.encounters) admitted += r.bed_request_ts ? 1.0 : 0.0;
    const double p = cfg.admit_probability;
    EXPECT_NEAR(admitted / n, p, 3.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST(GenerateCorpus, DeterministicBytes) {
    const auto cfg = testing::scenario(48, 7);
    testing::TempDir a;
    testing::TempDir b;
    write_corpus(a.path(), generate_corpus(cfg), cfg);
    write_corpus(b.path(), generate_corpus(cfg), cfg);
    for (const char* name : {"encounters.csv", "context.csv", "inpatient.csv", "manifest.json"}) {
        std::ifstream fa(a.path() / name);
        std::ifstream fb(b.path() / name);
        std::stringstream sa;
        std::stringstream sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        EXPECT_FALSE(sa.str().empty()) << name;
        EXPECT_EQ(sa.str(), sb.str()) << name;
    }
}

TEST(CorpusIo, RoundTripAndManifest) {
    const auto cfg = testing::scenario(72, 12);
    const auto corpus = generate_corpus(cfg);
    testing::TempDir dir;
    write_corpus(dir.path(), corpus, cfg);
    const auto back = read_corpus(dir.path());
    EXPECT_EQ(back.encounters, corpus.encounters);
    EXPECT_EQ(back.context, corpus.context);
    EXPECT_EQ(back.inpatient, corpus.inpatient);

    std::ifstream in(dir.path() / "manifest.json");
    const auto manifest = nlohmann::json::parse(in);
    EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 12u);
    EXPECT_EQ(manifest.at("rng").at("algorithm"), "mt19937_64");
    EXPECT_EQ(manifest.at("generator").at("name"), kGeneratorName);
    EXPECT_EQ(manifest.at("row_counts").at("encounters").get<std::size_t>(), corpus.encounters.size());
    ScenarioConfig parsed = manifest.at("config").get<ScenarioConfig>();
    EXPECT_EQ(parsed.seed, cfg.seed);
    EXPECT_EQ(parsed.end_ts, cfg.end_ts);
}

}  // namespace
}  // namespace edboard::synth
