#include "edboard/dataset.hpp"

#include <cmath>

#include "edboard/error.hpp"

namespace edboard::dataset {

using features::HourlyFeatureRow;

void validate(const SplitSpec& spec) {
    std::vector<std::string> bad;
    auto in_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_unit(spec.train)) bad.emplace_back("train");
    if (!in_unit(spec.val)) bad.emplace_back("val");
    if (!in_unit(spec.test)) bad.emplace_back("test");
    if (std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) bad.emplace_back("sum");
    if (!bad.empty()) throw ValidationError("split fractions must lie in (0,1) and sum to 1", bad);
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
    validate(spec);
    // The epsilon keeps products such as 0.7 * 100 from flooring to 69.
    const auto floor_of = [n](double frac) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9));
    };
    const std::size_t n_train = floor_of(spec.train);
    const std::size_t n_val = floor_of(spec.val);
    return {n_train, n_val, n - n_train - n_val};
}

Splits chronological_split(const FeatureTable& table, const SplitSpec& spec) {
    if (table.rows.size() < 3) {
        throw ValidationError("chronological split needs at least 3 rows, got " +
                              std::to_string(table.rows.size()));
    }
    const auto [n_train, n_val, n_test] = split_sizes(table.rows.size(), spec);
    Splits s;
    const auto first = table.rows.begin();
    s.train.rows.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
    s.val.rows.assign(first + static_cast<std::ptrdiff_t>(n_train),
                      first + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.rows.assign(first + static_cast<std::ptrdiff_t>(n_train + n_val), table.rows.end());
    s.train.gaps = features::detect_gaps(s.train.rows);
    s.val.gaps = features::detect_gaps(s.val.rows);
    s.test.gaps = features::detect_gaps(s.test.rows);
    return s;
}

ScalerParams fit_scaler(const FeatureTable& train, DegeneratePolicy policy) {
    if (train.rows.empty()) throw ValidationError("cannot fit scaler on an empty table");
    ScalerParams p;
    const auto n = static_cast<double>(train.rows.size());
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        if (features::is_binary_column(c)) {
            p.binary[c] = true;
            p.mean[c] = 0.0;
            p.std[c] = 1.0;
            continue;
        }
        double sum = 0.0;
        for (const auto& r : train.rows) sum += r.values[c];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& r : train.rows) {
            const double d = r.values[c] - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / n);
        p.mean[c] = mean;
        if (sd > 0.0) {
            p.std[c] = sd;
        } else if (policy == DegeneratePolicy::kCenterOnly) {
            p.std[c] = 1.0;
            p.degenerate[c] = true;
        } else {
            const std::string name(features::column_names()[c]);
            throw DegenerateColumnError(name, "column '" + name + "' is constant on the training split");
        }
    }
    return p;
}

double scale_value(double x, const ScalerParams& params, std::size_t column) {
    if (params.binary[column]) return x;
    return (x - params.mean[column]) / params.std[column];
}

double unscale_value(double z, const ScalerParams& params, std::size_t column) {
    if (params.binary[column]) return z;
    return z * params.std[column] + params.mean[column];
}

FeatureTable apply_scaler(FeatureTable table, const ScalerParams& params) {
    for (auto& row : table.rows) {
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            row.values[c] = scale_value(row.values[c], params, c);
        }
    }
    return table;
}

std::vector<double> apply_scaler(std::span<const double> values, const ScalerParams& params,
                                 std::string_view column) {
    const std::size_t c = features::column_index(column);
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v = scale_value(v, params, c);
    return out;
}

std::vector<double> invert_scaler(std::span<const double> values, const ScalerParams& params,
                                  std::string_view column) {
    const std::size_t c = features::column_index(column);
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v = unscale_value(v, params, c);
    return out;
}

void validate(const WindowSpec& spec) {
    std::vector<std::string> bad;
    if (spec.lag < 1) bad.emplace_back("lag");
    if (spec.horizon < 1) bad.emplace_back("horizon");
    if (!bad.empty()) throw ValidationError("lag and horizon must be >= 1", bad);
    features::column_index(spec.target);
}

std::vector<double> extract_window(std::span<const HourlyFeatureRow> rows, std::size_t end_index,
                                   std::size_t lag) {
    std::vector<double> w(kFeatureCount * lag);
    const std::size_t first = end_index + 1 - lag;
    for (std::size_t l = 0; l < lag; ++l) {
        const auto& row = rows[first + l];
        for (std::size_t c = 0; c < kFeatureCount; ++c) w[c * lag + l] = row.values[c];
    }
    return w;
}

WindowedDataset make_windows(const FeatureTable& table, const WindowSpec& spec) {
    validate(spec);
    WindowedDataset ds;
    ds.lag = spec.lag;
    ds.horizon = spec.horizon;
    ds.target_column = features::column_index(spec.target);
    const std::size_t h = static_cast<std::size_t>(spec.horizon);
    const auto& rows = table.rows;
    ds.too_short = rows.size() < spec.lag + h;
    if (ds.too_short) return ds;

    // Walk gap-free runs of consecutive hours; windows never leave their run.
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= rows.size(); ++i) {
        const bool run_ends = i == rows.size() || rows[i].hour_ts - rows[i - 1].hour_ts != Hours{1};
        if (!run_ends) continue;
        const std::size_t run_len = i - run_start;
        if (run_len >= spec.lag + h) {
            for (std::size_t origin = run_start + spec.lag - 1; origin + h < i; ++origin) {
                const auto w = extract_window(rows, origin, spec.lag);
                ds.x.insert(ds.x.end(), w.begin(), w.end());
                ds.y.push_back(rows[origin + h].values[ds.target_column]);
                ds.origin_ts.push_back(rows[origin].hour_ts);
            }
        }
        run_start = i;
    }
    return ds;
}

WindowedDataset select_channels(const WindowedDataset& data, std::span<const std::size_t> columns) {
    if (data.channels != kFeatureCount) {
        throw ValidationError("channel selection needs windows over the full feature schema");
    }
    if (columns.empty()) throw ValidationError("select at least one feature", {"features"});
    WindowedDataset out;
    out.lag = data.lag;
    out.channels = columns.size();
    out.horizon = data.horizon;
    out.y = data.y;
    out.origin_ts = data.origin_ts;
    out.too_short = data.too_short;
    bool has_target = false;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] >= kFeatureCount) throw ValidationError("feature column out of range");
        if (columns[k] == data.target_column) {
            out.target_column = k;
            has_target = true;
        }
    }
    if (!has_target) throw ValidationError("selected features must include the target", {"features"});
    out.x.reserve(data.size() * out.window_size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto w = data.window(i);
        for (std::size_t c : columns) {
            const auto ch = w.channel(c);
            out.x.insert(out.x.end(), ch.begin(), ch.end());
        }
    }
    return out;
}

ScalerParams identity_scaler() {
    ScalerParams p;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        p.mean[c] = 0.0;
        p.std[c] = 1.0;
        p.binary[c] = features::is_binary_column(c);
    }
    return p;
}

}  // namespace edboard::dataset
