#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edboard/error.hpp"

namespace edboard::eval {

/// Regression metrics in minutes. `r2` is absent when the targets have zero variance;
/// `mape` is absent when every target is below the 1-minute guard.
struct MetricReport {
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> r2;
    std::optional<double> mape;
    std::size_t n = 0;
    /// Rows left out of the MAPE mean because |y| < 1 minute.
    std::size_t mape_excluded = 0;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline constexpr double kMapeGuardMinutes = 1.0;

/// Throws ValidationError on empty input, length mismatch or non-finite values.
MetricReport compute_metrics(std::span<const double> y, std::span<const double> y_hat);

using Thresholds = std::array<double, 3>;

/// (mean + sd, mean + 2 sd, mean + 3 sd). Throws ValidationError for negative sd.
Thresholds extreme_thresholds(double mean, double sd);

struct ExtremeLevel {
    int level = 0;
    double threshold = 0.0;
    std::size_t n_cases = 0;
    double share_percent = 0.0;
    std::optional<double> mae;
};

struct ExtremeReport {
    std::array<ExtremeLevel, 3> levels{};
    std::size_t n_total = 0;
};

/// Level k holds rows whose observed value y >= t_k.
ExtremeReport slice_and_score(std::span<const double> y, std::span<const double> y_hat,
                              const Thresholds& thresholds);

struct LeaderboardEntry {
    std::string algorithm;
    int horizon = 0;
    MetricReport metrics;
    bool best = false;
};

struct Leaderboard {
    /// Sorted by (horizon, mae, algorithm).
    std::vector<LeaderboardEntry> rows;

    [[nodiscard]] const LeaderboardEntry& winner(int horizon) const;
    [[nodiscard]] const LeaderboardEntry& at(const std::string& algorithm, int horizon) const;
};

/// Throws ValidationError on duplicate (algorithm, horizon) pairs or an empty input.
Leaderboard leaderboard(std::vector<LeaderboardEntry> results);

/// Columns: algorithm,horizon,mae,rmse,r2,mape,n,best. Floats with 4 decimals; absent
/// values are written as empty fields.
void write_leaderboard_csv(std::ostream& out, const Leaderboard& board);
Leaderboard read_leaderboard_csv(std::istream& in);
std::string leaderboard_json(const Leaderboard& board);

/// Columns: horizon,algorithm,level,threshold,n_cases,share_percent,mae.
struct ExtremeRow {
    int horizon = 0;
    std::string algorithm;
    ExtremeReport report;
};
void write_extreme_csv(std::ostream& out, std::span<const ExtremeRow> rows);

std::string metric_json(const MetricReport& m);

}  // namespace edboard::eval
