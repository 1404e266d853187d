#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edboard/models.hpp"

namespace edboard::tuner {

/// Hyperparameter search space for one trainable algorithm. Choice lists must be non-empty.
struct SearchSpace {
    models::ModelConfig base;     ///< algorithm, lag, channels and target column
    models::TrainConfig training;  ///< max_epochs and patience; other fields are sampled
    double lr_min = 1e-4;
    double lr_max = 1e-1;
    std::vector<std::size_t> batch_sizes{32, 64, 128, 256};
    std::vector<std::size_t> kernel_sizes{3, 5, 9, 13, 25};  ///< DLinear only
    std::vector<bool> shared_weights{false, true};           ///< DLinear only
    std::vector<bool> center_on_last{true, false};           ///< NLinear only
    std::vector<models::LossSpec> losses{{models::LossKind::kMse, 1.0},
                                         {models::LossKind::kHuber, 1.0}};
};

SearchSpace default_space(models::Algorithm algorithm, std::size_t lag,
                          std::size_t channels = features::kFeatureCount);

/// Throws ValidationError listing every invalid field.
void validate(const SearchSpace& space);

enum class TrialStatus { kCompleted, kPruned, kFailed };
std::string_view to_string(TrialStatus s);

struct Trial {
    int trial_id = 0;
    models::ModelConfig model;
    models::TrainConfig training;
    std::vector<double> val_losses;
    /// Best validation MSE seen; absent for failed trials.
    std::optional<double> final_val_loss;
    TrialStatus status = TrialStatus::kCompleted;
    std::optional<int> pruned_epoch;
    std::string error;
    /// Set for completed trials: the trained model at its best epoch.
    std::optional<models::FittedModel> fitted;

    [[nodiscard]] int epochs_run() const { return static_cast<int>(val_losses.size()); }
};

struct SearchResult {
    Trial best;
    std::vector<Trial> trials;
};

class TuningError : public Error {
public:
    TuningError(const std::string& message, std::vector<Trial> trials)
        : Error("tuning_failed", message), trials_(std::move(trials)) {}
    [[nodiscard]] const std::vector<Trial>& trials() const noexcept { return trials_; }

private:
    std::vector<Trial> trials_;
};

inline constexpr int kPruneWarmupEpochs = 5;

/// Median of values; the mean of the two middle values for even counts.
double median(std::vector<double> values);

/// Sequential seeded random search with median pruning. Trial i trains with seed
/// `seed + i`; configs are drawn from one Rng(seed) stream in trial order.
SearchResult random_search(const SearchSpace& space, const dataset::WindowedDataset& train_set,
                           const dataset::WindowedDataset& val_set, int n_trials,
                           std::uint64_t seed);

/// trials.csv: trial_id, algorithm, learning_rate, batch_size, kernel_size, shared_weights,
/// center_on_last, loss, huber_delta, status, final_val_loss, epochs_run, pruned_epoch.
void write_trials_csv(std::ostream& out, const std::vector<Trial>& trials);
std::string best_config_json(const Trial& best);

}  // namespace edboard::tuner
