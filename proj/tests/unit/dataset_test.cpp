#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "edboard/dataset.hpp"
#include "edboard/error.hpp"
#include "test_support.hpp"

namespace edboard::dataset {
namespace {

using features::FeatureTable;
using features::kTargetColumn;

FeatureTable ramp(std::size_t n, std::uint64_t seed = 1) {
    return testing::random_table(n, seed, [](std::size_t i) { return 10.0 * static_cast<double>(i); });
}

TEST(Split, SizesAndPartition) {
    const auto s100 = chronological_split(ramp(100), {});
    EXPECT_EQ(s100.train.size(), 70u);
    EXPECT_EQ(s100.val.size(), 15u);
    EXPECT_EQ(s100.test.size(), 15u);

    const auto s10 = chronological_split(ramp(10), {});
    EXPECT_EQ(s10.train.size(), 7u);
    EXPECT_EQ(s10.val.size(), 1u);
    EXPECT_EQ(s10.test.size(), 2u);

    const auto table = ramp(57);
    const auto s = chronological_split(table, {});
    std::vector<features::HourlyFeatureRow> joined = s.train.rows;
    joined.insert(joined.end(), s.val.rows.begin(), s.val.rows.end());
    joined.insert(joined.end(), s.test.rows.begin(), s.test.rows.end());
    EXPECT_EQ(joined, table.rows);
    EXPECT_LT(s.train.rows.back().hour_ts, s.val.rows.front().hour_ts);
    EXPECT_LT(s.val.rows.back().hour_ts, s.test.rows.front().hour_ts);
}

TEST(Split, Errors) {
    EXPECT_THROW(chronological_split(ramp(2), {}), ValidationError);
    EXPECT_THROW(validate(SplitSpec{0.7, 0.2, 0.2}), ValidationError);
    EXPECT_THROW(validate(SplitSpec{0.0, 0.5, 0.5}), ValidationError);
    EXPECT_NO_THROW(validate(SplitSpec{0.6, 0.2, 0.2}));
}

TEST(Scaler, PopulationStatistics) {
    const auto table = testing::random_table(3, 4, [](std::size_t i) { return static_cast<double>(i + 1); });
    const auto p = fit_scaler(table, DegeneratePolicy::kCenterOnly);
    EXPECT_DOUBLE_EQ(p.mean[kTargetColumn], 2.0);
    EXPECT_NEAR(p.std[kTargetColumn], std::sqrt(2.0 / 3.0), 1e-15);
    EXPECT_TRUE(p.binary[features::kHoliday]);
    EXPECT_EQ(p.mean[features::kHoliday], 0.0);
    EXPECT_EQ(p.std[features::kHoliday], 1.0);
}

TEST(Scaler, ConstantColumnPolicy) {
    // Spans a year boundary so every calendar column varies.
    auto table = testing::random_table(24 * 400, 5, [](std::size_t i) { return static_cast<double>(i % 50); });
    for (auto& r : table.rows) r[features::kTemperature] = 70.0;
    try {
        (void)fit_scaler(table, DegeneratePolicy::kError);
        FAIL() << "expected DegenerateColumnError";
    } catch (const DegenerateColumnError& e) {
        EXPECT_EQ(e.column(), "temperature");
    }
    const auto p = fit_scaler(table, DegeneratePolicy::kCenterOnly);
    EXPECT_TRUE(p.degenerate[features::kTemperature]);
    EXPECT_EQ(p.std[features::kTemperature], 1.0);
    EXPECT_EQ(scale_value(70.0, p, features::kTemperature), 0.0);
}

TEST(Scaler, IgnoresRowsOutsideTraining) {
    const auto table = ramp(200);
    auto s = chronological_split(table, {});
    const auto before = fit_scaler(s.train, DegeneratePolicy::kCenterOnly);
    for (auto& r : s.val.rows) r[kTargetColumn] = 1e6;
    s.test.rows.push_back(s.test.rows.back());
    EXPECT_EQ(fit_scaler(s.train, DegeneratePolicy::kCenterOnly), before);
}

TEST(Scaler, ApplyAndInvert) {
    const auto table = ramp(300, 7);
    const auto p = fit_scaler(table, DegeneratePolicy::kCenterOnly);
    const std::string target = "boarding_time_minute_hourly";
    const std::vector<double> probe{p.mean[kTargetColumn], p.mean[kTargetColumn] + p.std[kTargetColumn]};
    const auto z = apply_scaler(probe, p, target);
    EXPECT_EQ(z[0], 0.0);
    EXPECT_NEAR(z[1], 1.0, 1e-15);

    const auto scaled = apply_scaler(table, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t c = 0; c < features::kFeatureCount; ++c) {
            if (features::is_binary_column(c)) {
                ASSERT_EQ(scaled.rows[i][c], table.rows[i][c]);
            }
            worst = std::max(worst, std::abs(unscale_value(scaled.rows[i][c], p, c) - table.rows[i][c]));
        }
    }
    EXPECT_LT(worst, 1e-9);

    std::vector<double> col;
    for (const auto& r : table.rows) col.push_back(r[kTargetColumn]);
    const auto back = invert_scaler(apply_scaler(col, p, target), p, target);
    for (std::size_t i = 0; i < col.size(); ++i) EXPECT_NEAR(back[i], col[i], 1e-9);
    EXPECT_THROW(apply_scaler(col, p, "not_a_column"), ValidationError);
}

TEST(Windows, FormulaBoundaries) {
    EXPECT_EQ(make_windows(ramp(30), {24, 6}).size(), 1u);
    EXPECT_EQ(make_windows(ramp(48), {24, 6}).size(), 19u);
    const auto short_table = make_windows(ramp(29), {24, 6});
    EXPECT_TRUE(short_table.empty());
    EXPECT_TRUE(short_table.too_short);
    EXPECT_THROW(make_windows(ramp(48), {0, 6}), ValidationError);
}

TEST(Windows, ContentsAndCausality) {
    const auto table = ramp(60, 3);
    const auto w = make_windows(table, {8, 5});
    ASSERT_EQ(w.size(), 60u - 8u - 5u + 1u);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t origin = i + 7;
        EXPECT_EQ(w.origin_ts[i], table.rows[origin].hour_ts);
        EXPECT_EQ(w.y[i], table.rows[origin + 5][kTargetColumn]);
        EXPECT_EQ(table.rows[origin].hour_ts + Hours{5}, table.rows[origin + 5].hour_ts);
        const auto v = w.window(i);
        for (std::size_t c = 0; c < features::kFeatureCount; ++c) {
            for (std::size_t l = 0; l < 8; ++l) ASSERT_EQ(v.at(c, l), table.rows[origin - 7 + l][c]);
        }
        if (i > 0) EXPECT_LT(w.origin_ts[i - 1], w.origin_ts[i]);
    }
}

TEST(Windows, NeverSpanAGap) {
    auto table = ramp(48, 5);
    table.rows.erase(table.rows.begin() + 20);
    const auto w = make_windows(table, {24, 6});
    EXPECT_LT(w.size(), 19u);
    const Timestamp missing = from_civil(2021, 1, 1) + Hours{20};
    // Brute force: every origin whose lag hours and target hour avoid the missing hour.
    std::vector<Timestamp> expected;
    for (int t = 23; t + 6 < 48; ++t) {
        const Timestamp origin = from_civil(2021, 1, 1) + Hours{t};
        bool clean = true;
        for (int k = t - 23; k <= t + 6; ++k) {
            if (from_civil(2021, 1, 1) + Hours{k} == missing) clean = false;
        }
        if (clean) expected.push_back(origin);
    }
    EXPECT_EQ(w.origin_ts, expected);
}

TEST(Windows, SelectChannelsRemapsTarget) {
    const auto w = make_windows(ramp(40), {4, 2});
    const std::vector<std::size_t> cols{features::kHour, kTargetColumn};
    const auto s = select_channels(w, cols);
    EXPECT_EQ(s.channels, 2u);
    EXPECT_EQ(s.target_column, 1u);
    EXPECT_EQ(s.y, w.y);
    for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(s.window(3).at(1, l), w.window(3).at(kTargetColumn, l));
    const std::vector<std::size_t> no_target{features::kHour};
    EXPECT_THROW(select_channels(w, no_target), ValidationError);
}

TEST(Windows, ExtractWindowMatchesMakeWindows) {
    const auto table = ramp(40, 6);
    const auto w = make_windows(table, {6, 3});
    const auto x = extract_window(table.rows, 10, 6);
    const auto v = w.window(5);
    ASSERT_EQ(x.size(), v.data.size());
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_EQ(x[k], v.data[k]);
}

TEST(Cache, RoundTripAndRejectsGarbage) {
    const auto table = ramp(80, 8);
    const auto scaler = fit_scaler(table, DegeneratePolicy::kCenterOnly);
    const auto w = make_windows(apply_scaler(table, scaler), {24, 6});
    std::stringstream buf;
    write_cache(buf, w, scaler);
    const auto back = read_cache(buf);
    EXPECT_EQ(back.scaler, scaler);
    EXPECT_EQ(back.data.x, w.x);
    EXPECT_EQ(back.data.y, w.y);
    EXPECT_EQ(back.data.origin_ts, w.origin_ts);
    EXPECT_EQ(back.data.lag, 24u);
    EXPECT_EQ(back.data.horizon, 6);

    std::stringstream garbage("definitely not a cache");
    EXPECT_THROW(read_cache(garbage), ValidationError);
    std::string bytes;
    {
        std::stringstream again;
        write_cache(again, w, scaler);
        bytes = again.str();
    }
    EXPECT_EQ(bytes.substr(0, 8), "EDBWIN01");
    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(read_cache(truncated), ValidationError);
    EXPECT_NE(schema_hash(), 0u);
}

}  // namespace
}  // namespace edboard::dataset
