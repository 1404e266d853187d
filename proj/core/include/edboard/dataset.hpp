#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "edboard/features.hpp"

namespace edboard::dataset {

using features::FeatureTable;
using features::kFeatureCount;

struct SplitSpec {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

/// Fractions in (0,1) summing to 1 within 1e-9.
void validate(const SplitSpec& spec);

/// Row counts for a table of n rows: floor for train and val, remainder to test.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec);

struct Splits {
    FeatureTable train;
    FeatureTable val;
    FeatureTable test;
};

/// Contiguous prefix / middle / suffix of a time-sorted table. Throws ValidationError
/// for tables shorter than 3 rows.
Splits chronological_split(const FeatureTable& table, const SplitSpec& spec);

/// Population-sd standard scaler over the feature columns. Binary columns are recorded
/// with mean 0 / std 1 and are never transformed.
struct ScalerParams {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> std{};
    std::array<bool, kFeatureCount> binary{};
    /// Constant non-binary columns accepted under DegeneratePolicy::kCenterOnly (std = 1).
    std::array<bool, kFeatureCount> degenerate{};

    friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

enum class DegeneratePolicy {
    kError,       ///< constant non-binary column -> DegenerateColumnError
    kCenterOnly,  ///< constant column is centred with std forced to 1
};

ScalerParams fit_scaler(const FeatureTable& train,
                        DegeneratePolicy policy = DegeneratePolicy::kError);

double scale_value(double x, const ScalerParams& params, std::size_t column);
double unscale_value(double z, const ScalerParams& params, std::size_t column);

FeatureTable apply_scaler(FeatureTable table, const ScalerParams& params);
/// Scales values of the named column. Throws ValidationError for unknown columns.
std::vector<double> apply_scaler(std::span<const double> values, const ScalerParams& params,
                                 std::string_view column);
/// Exact inverse of apply_scaler for one column (within floating-point rounding).
std::vector<double> invert_scaler(std::span<const double> values, const ScalerParams& params,
                                  std::string_view column);

struct WindowSpec {
    std::size_t lag = 24;
    int horizon = 6;
    std::string target = "boarding_time_minute_hourly";
};

void validate(const WindowSpec& spec);

/// Read-only view of one d x L window, channel-major: at(c, l) with l = L-1 the origin hour.
struct WindowView {
    std::span<const double> data;
    std::size_t channels = kFeatureCount;
    std::size_t lag = 24;

    [[nodiscard]] double at(std::size_t c, std::size_t l) const { return data[c * lag + l]; }
    [[nodiscard]] std::span<const double> channel(std::size_t c) const {
        return data.subspan(c * lag, lag);
    }
    [[nodiscard]] double last(std::size_t c) const { return at(c, lag - 1); }
};

/// Sliding-window supervised samples. X is stored row-major as [sample][channel][lag].
struct WindowedDataset {
    std::size_t lag = 0;
    std::size_t channels = kFeatureCount;
    int horizon = 0;
    std::size_t target_column = features::kTargetColumn;
    std::vector<double> x;
    std::vector<double> y;
    /// Hour of each window's last lag row.
    std::vector<Timestamp> origin_ts;
    /// True when the table had fewer than lag + horizon rows.
    bool too_short = false;

    [[nodiscard]] std::size_t size() const { return y.size(); }
    [[nodiscard]] bool empty() const { return y.empty(); }
    [[nodiscard]] std::size_t window_size() const { return channels * lag; }
    [[nodiscard]] WindowView window(std::size_t i) const {
        return {std::span<const double>(x).subspan(i * window_size(), window_size()), channels, lag};
    }
};

/// One sample per origin t whose lag rows [t-L+1, t] and target hour t+h lie in a single
/// gap-free run of consecutive hours. On a gap-free table of T rows, N = T - L - h + 1.
WindowedDataset make_windows(const FeatureTable& table, const WindowSpec& spec);

/// Keeps only the listed feature columns, in the given order. The target column must be
/// among them; its position in the new channel list becomes the target index.
WindowedDataset select_channels(const WindowedDataset& data, std::span<const std::size_t> columns);

/// Scaler that leaves every column unchanged (mean 0, std 1).
ScalerParams identity_scaler();

/// Copies the L rows ending at `end_index` (inclusive) into a channel-major window.
std::vector<double> extract_window(std::span<const features::HourlyFeatureRow> rows,
                                   std::size_t end_index, std::size_t lag);

// -- binary cache -------------------------------------------------------------
//
// Little-endian layout:
//   char[8]  magic "EDBWIN01"
//   u32      lag L, u32 horizon h, u32 channels d, u32 target column
//   u64      N, u64 schema hash (FNV-1a 64 over comma-joined column names)
//   f64[d]   scaler mean, f64[d] scaler std, u8[d] binary mask, u8[d] degenerate mask
//   i64[N]   origin timestamps (unix seconds)
//   f64[N*d*L] X, row-major [sample][channel][lag]
//   f64[N]   y

std::uint64_t schema_hash();

struct CachedDataset {
    WindowedDataset data;
    ScalerParams scaler;
};

void write_cache(std::ostream& out, const WindowedDataset& data, const ScalerParams& scaler);
CachedDataset read_cache(std::istream& in);
void write_cache(const std::filesystem::path& path, const WindowedDataset& data,
                 const ScalerParams& scaler);
CachedDataset read_cache(const std::filesystem::path& path);

}  // namespace edboard::dataset
