#include "edboard/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "edboard/csv.hpp"

namespace edboard::eval {

namespace {

using nlohmann::json;

void check_inputs(std::span<const double> y, std::span<const double> y_hat) {
    if (y.empty()) throw ValidationError("metrics need at least one observation");
    if (y.size() != y_hat.size()) {
        throw ValidationError("metrics: " + std::to_string(y.size()) + " observations vs " +
                              std::to_string(y_hat.size()) + " predictions");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i]) || !std::isfinite(y_hat[i])) {
            throw ValidationError("metrics: non-finite value at row " + std::to_string(i));
        }
    }
}

double round4(double v) {
    const double r = std::round(v * 1e4) / 1e4;
    return r == 0.0 ? 0.0 : r;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(round4(*v)) : json(nullptr);
}

std::string optional_fixed(const std::optional<double>& v) {
    return v ? csv::format_fixed(*v, 4) : std::string();
}

std::optional<double> parse_optional(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return csv::parse_double(s);
}

}  // namespace

MetricReport compute_metrics(std::span<const double> y, std::span<const double> y_hat) {
    check_inputs(y, y_hat);
    const auto n = static_cast<double>(y.size());
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double y_sum = 0.0;
    double ape_sum = 0.0;
    std::size_t ape_n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - y_hat[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        y_sum += y[i];
        if (std::abs(y[i]) >= kMapeGuardMinutes) {
            ape_sum += std::abs(e) / std::abs(y[i]);
            ++ape_n;
        }
    }
    const double y_mean = y_sum / n;
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - y_mean) * (v - y_mean);

    MetricReport r;
    r.n = y.size();
    r.mae = abs_sum / n;
    r.rmse = std::sqrt(sq_sum / n);
    // Floating-point rounding can put sqrt(mean e^2) a hair under mean|e| when all errors
    // have equal magnitude; the two are equal in exact arithmetic.
    r.rmse = std::max(r.rmse, r.mae);
    if (ss_tot > 0.0) r.r2 = 1.0 - sq_sum / ss_tot;
    if (ape_n > 0) r.mape = 100.0 * ape_sum / static_cast<double>(ape_n);
    r.mape_excluded = y.size() - ape_n;
    return r;
}

Thresholds extreme_thresholds(double mean, double sd) {
    if (!(sd >= 0.0) || !std::isfinite(mean) || !std::isfinite(sd)) {
        throw ValidationError("extreme thresholds need a finite mean and sd >= 0", {"sd"});
    }
    return {mean + sd, mean + 2.0 * sd, mean + 3.0 * sd};
}

ExtremeReport slice_and_score(std::span<const double> y, std::span<const double> y_hat,
                              const Thresholds& t) {
    check_inputs(y, y_hat);
    ExtremeReport rep;
    rep.n_total = y.size();
    for (std::size_t k = 0; k < 3; ++k) {
        auto& lvl = rep.levels[k];
        lvl.level = static_cast<int>(k) + 1;
        lvl.threshold = t[k];
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] >= t[k]) {
                ++lvl.n_cases;
                abs_sum += std::abs(y[i] - y_hat[i]);
            }
        }
        lvl.share_percent =
            100.0 * static_cast<double>(lvl.n_cases) / static_cast<double>(y.size());
        if (lvl.n_cases > 0) lvl.mae = abs_sum / static_cast<double>(lvl.n_cases);
    }
    return rep;
}

const LeaderboardEntry& Leaderboard::winner(int horizon) const {
    for (const auto& r : rows) {
        if (r.horizon == horizon && r.best) return r;
    }
    throw NotFoundError("no leaderboard entries for h=" + std::to_string(horizon));
}

const LeaderboardEntry& Leaderboard::at(const std::string& algorithm, int horizon) const {
    for (const auto& r : rows) {
        if (r.horizon == horizon && r.algorithm == algorithm) return r;
    }
    throw NotFoundError("no leaderboard entry for " + algorithm + " at h=" +
                        std::to_string(horizon));
}

Leaderboard leaderboard(std::vector<LeaderboardEntry> results) {
    if (results.empty()) throw ValidationError("leaderboard needs at least one result");
    std::set<std::pair<std::string, int>> seen;
    for (const auto& r : results) {
        if (!seen.emplace(r.algorithm, r.horizon).second) {
            throw ValidationError("duplicate leaderboard entry for " + r.algorithm + " at h=" +
                                  std::to_string(r.horizon));
        }
    }
    std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
        if (a.horizon != b.horizon) return a.horizon < b.horizon;
        if (a.metrics.mae != b.metrics.mae) return a.metrics.mae < b.metrics.mae;
        return a.algorithm < b.algorithm;
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i].best = i == 0 || results[i - 1].horizon != results[i].horizon;
    }
    return Leaderboard{std::move(results)};
}

void write_leaderboard_csv(std::ostream& out, const Leaderboard& board) {
    csv::write_row(out, {"algorithm", "horizon", "mae", "rmse", "r2", "mape", "n", "best"});
    for (const auto& r : board.rows) {
        csv::write_row(out, {r.algorithm, std::to_string(r.horizon),
                             csv::format_fixed(r.metrics.mae, 4),
                             csv::format_fixed(r.metrics.rmse, 4), optional_fixed(r.metrics.r2),
                             optional_fixed(r.metrics.mape), std::to_string(r.metrics.n),
                             r.best ? "1" : "0"});
    }
}

Leaderboard read_leaderboard_csv(std::istream& in) {
    const auto table = csv::read(in);
    const std::size_t ia = table.column("algorithm"), ih = table.column("horizon"),
                      imae = table.column("mae"), irmse = table.column("rmse"),
                      ir2 = table.column("r2"), imape = table.column("mape"),
                      in_ = table.column("n"), ib = table.column("best");
    Leaderboard board;
    for (const auto& row : table.rows) {
        LeaderboardEntry e;
        e.algorithm = row.at(ia);
        e.horizon = static_cast<int>(csv::parse_int(row.at(ih)));
        e.metrics.mae = csv::parse_double(row.at(imae));
        e.metrics.rmse = csv::parse_double(row.at(irmse));
        e.metrics.r2 = parse_optional(row.at(ir2));
        e.metrics.mape = parse_optional(row.at(imape));
        e.metrics.n = static_cast<std::size_t>(csv::parse_int(row.at(in_)));
        e.best = row.at(ib) == "1";
        board.rows.push_back(std::move(e));
    }
    return board;
}

std::string metric_json(const MetricReport& m) {
    json j{{"mae", round4(m.mae)},     {"rmse", round4(m.rmse)},
           {"r2", optional_json(m.r2)}, {"mape", optional_json(m.mape)},
           {"n", m.n},                 {"mape_excluded", m.mape_excluded}};
    return j.dump();
}

std::string leaderboard_json(const Leaderboard& board) {
    json rows = json::array();
    std::map<int, std::string> winners;
    for (const auto& r : board.rows) {
        json e = json::parse(metric_json(r.metrics));
        e["algorithm"] = r.algorithm;
        e["horizon"] = r.horizon;
        e["best"] = r.best;
        rows.push_back(std::move(e));
        if (r.best) winners[r.horizon] = r.algorithm;
    }
    json w = json::object();
    for (const auto& [h, a] : winners) w[std::to_string(h)] = a;
    return json{{"rows", rows}, {"winners", w}}.dump(2);
}

void write_extreme_csv(std::ostream& out, std::span<const ExtremeRow> rows) {
    csv::write_row(out, {"horizon", "algorithm", "level", "threshold", "n_cases", "share_percent",
                         "mae"});
    for (const auto& row : rows) {
        for (const auto& lvl : row.report.levels) {
            csv::write_row(out, {std::to_string(row.horizon), row.algorithm,
                                 std::to_string(lvl.level), csv::format_fixed(lvl.threshold, 4),
                                 std::to_string(lvl.n_cases),
                                 csv::format_fixed(lvl.share_percent, 4),
                                 optional_fixed(lvl.mae)});
        }
    }
}

}  // namespace edboard::eval
