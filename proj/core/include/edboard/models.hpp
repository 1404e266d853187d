#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edboard/dataset.hpp"
#include "edboard/error.hpp"

namespace edboard::models {

using dataset::WindowedDataset;
using dataset::WindowView;

enum class Algorithm { kNLinear, kDLinear, kPersistence, kSeasonal };

std::string_view to_string(Algorithm a);
/// Accepts "nlinear", "dlinear", "persistence", "seasonal" (case-insensitive).
Algorithm parse_algorithm(std::string_view text);
/// Display name used in registry rows, e.g. "DLinear".
std::string_view display_name(Algorithm a);
bool is_trainable(Algorithm a);

/// Structure of a trainable forecaster. Fields that do not apply to the algorithm are ignored.
struct ModelConfig {
    Algorithm algorithm = Algorithm::kNLinear;
    std::size_t lag = 24;
    std::size_t channels = features::kFeatureCount;
    std::size_t target_column = features::kTargetColumn;
    /// NLinear: subtract the last observation before the linear layer, add it back after.
    bool center_on_last = true;
    /// DLinear: odd moving-average kernel, 1 <= k <= lag.
    std::size_t kernel_size = 13;
    /// DLinear: one lag-weight vector per component shared by all channels.
    bool shared_weights = false;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

ModelConfig nlinear_config(std::size_t lag, std::size_t channels, bool center_on_last = true);
ModelConfig dlinear_config(std::size_t lag, std::size_t channels, std::size_t kernel_size,
                           bool shared_weights = false);
void validate(const ModelConfig& cfg);

enum class LossKind { kMse, kHuber };

struct LossSpec {
    LossKind kind = LossKind::kMse;
    double huber_delta = 1.0;
    friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    int max_epochs = 300;
    int patience = 20;
    std::uint64_t seed = 0;
    LossSpec loss;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    /// Always mean squared error on the validation windows, in scaled units.
    double val_loss = 0.0;
    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// A trained (or hand-built) linear forecaster for one horizon.
///
/// Per channel c the model forms u_c from the channel's lag window, then mixes channels
/// into one scalar: y = sum_c mix[c] * u_c + out_bias.
///   NLinear: u_c = w_c . (x_c - x_c[L]) + bias_c + x_c[L]   (centred)
///            u_c = w_c . x_c + bias_c                         (uncentred)
///   DLinear: u_c = w_trend_c . trend_c + w_resid_c . resid_c + bias_c
/// Weight vectors are stored as weight_sets() blocks of `lag` values.
struct FittedModel {
    ModelConfig config;
    std::vector<double> w_trend;  ///< NLinear lag weights, or DLinear trend weights
    std::vector<double> w_resid;  ///< DLinear residual weights; empty for NLinear
    std::vector<double> bias;     ///< per channel
    std::vector<double> mix;      ///< channel-mixing vector
    double out_bias = 0.0;

    int horizon = 0;
    dataset::ScalerParams scaler;
    /// Training-split statistics of the target used for the extreme-boarding indicator.
    double extreme_mean = 0.0;
    double extreme_sd = 0.0;
    TimeRange train_range{};
    TrainConfig train_config;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    std::map<std::string, double> metrics;

    [[nodiscard]] std::size_t weight_sets() const;
    friend bool operator==(const FittedModel&, const FittedModel&) = default;
};

/// Epoch-0 weights: lag weights 1/L, zero biases, mixing one-hot on the target channel.
FittedModel initial_model(const ModelConfig& cfg);

/// Centred moving average with replicate padding of (k-1)/2 on both ends.
/// Throws ValidationError for even k or k outside [1, series length].
std::vector<double> moving_average(std::span<const double> series, std::size_t k);

struct Decomposition {
    std::vector<double> trend;     ///< channel-major d x L
    std::vector<double> residual;  ///< window - trend
};
Decomposition decompose(WindowView window, std::size_t k);

/// Scaled-space forward passes. Throw ValidationError on shape mismatch.
double forward_nlinear(WindowView window, const FittedModel& model);
double forward_dlinear(WindowView window, const FittedModel& model);
double forward(WindowView window, const FittedModel& model);

/// Flattened parameter order: w_trend, w_resid, bias, mix, out_bias.
std::vector<double> flatten(const FittedModel& model);
void unflatten(FittedModel& model, std::span<const double> params);

/// Mean loss over the given samples and its gradient in flatten() order.
std::pair<double, std::vector<double>> loss_and_gradient(const FittedModel& model,
                                                         const WindowedDataset& data,
                                                         std::span<const std::size_t> samples,
                                                         const LossSpec& loss);
double mean_squared_error(const FittedModel& model, const WindowedDataset& data);

class TrainingError : public Error {
public:
    TrainingError(const std::string& message, int last_finite_epoch)
        : Error("training_failed", message), last_finite_epoch_(last_finite_epoch) {}
    [[nodiscard]] int last_finite_epoch() const noexcept { return last_finite_epoch_; }

private:
    int last_finite_epoch_;
};

/// Called after each epoch; returning false stops training (used for pruning).
using EpochObserver = std::function<bool(const EpochRecord&)>;

/// Mini-batch Adam on scaled windows with seeded shuffling and early stopping on
/// validation MSE. Returns the best-validation-epoch weights with the full history.
FittedModel train(const ModelConfig& cfg, const TrainConfig& train_cfg,
                  const WindowedDataset& train_set, const WindowedDataset& val_set,
                  const EpochObserver& observer = {});

/// Scales an unscaled window with the model's scaler, runs the forward pass and returns
/// minutes, clamped at 0.
double predict(const FittedModel& model, WindowView window_unscaled);
/// As above, but first checks that `scaler` is the one the model was trained with.
double predict(const FittedModel& model, WindowView window_unscaled,
               const dataset::ScalerParams& scaler);

/// Last observed target value in the window.
double persistence_baseline(WindowView window, std::size_t target_column = features::kTargetColumn);
/// Target 24 hours before t + h, looked up in a time-sorted table. Throws RangeError when
/// that hour precedes the table or is missing, ValidationError for h > 24.
double seasonal_baseline(std::span<const features::HourlyFeatureRow> rows, Timestamp t, int h,
                         std::size_t target_column = features::kTargetColumn);
/// Same lookup inside a window ending at t; needs lag >= 25 - h.
double seasonal_baseline(WindowView window, int h,
                         std::size_t target_column = features::kTargetColumn);

// -- model files --------------------------------------------------------------
//
// JSON document with metadata plus "weights": base64 of the flatten() vector as
// little-endian IEEE-754 doubles. Loading reproduces predictions bit-exactly.

std::string to_json_string(const FittedModel& model);
FittedModel from_json_string(std::string_view text);
void save_model(const std::filesystem::path& path, const FittedModel& model);
FittedModel load_model(const std::filesystem::path& path);

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(std::string_view text);

}  // namespace edboard::models
