#include "edboard/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "edboard/csv.hpp"
#include "edboard/random.hpp"

namespace edboard::tuner {

std::string_view to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::kCompleted: return "completed";
        case TrialStatus::kPruned: return "pruned";
        case TrialStatus::kFailed: return "failed";
    }
    return "failed";
}

SearchSpace default_space(models::Algorithm algorithm, std::size_t lag, std::size_t channels) {
    SearchSpace s;
    s.base = algorithm == models::Algorithm::kDLinear ? models::dlinear_config(lag, channels, 1)
                                                      : models::nlinear_config(lag, channels);
    s.kernel_sizes.erase(std::remove_if(s.kernel_sizes.begin(), s.kernel_sizes.end(),
                                        [lag](std::size_t k) { return k > lag; }),
                         s.kernel_sizes.end());
    return s;
}

void validate(const SearchSpace& space) {
    std::vector<std::string> bad;
    if (!models::is_trainable(space.base.algorithm)) bad.emplace_back("algorithm");
    if (!(space.lr_min > 0.0) || !(space.lr_max >= space.lr_min)) bad.emplace_back("learning_rate");
    if (space.batch_sizes.empty() ||
        std::any_of(space.batch_sizes.begin(), space.batch_sizes.end(),
                    [](std::size_t b) { return b == 0; })) {
        bad.emplace_back("batch_size");
    }
    if (space.losses.empty()) bad.emplace_back("loss");
    if (space.base.algorithm == models::Algorithm::kDLinear) {
        if (space.kernel_sizes.empty() ||
            std::any_of(space.kernel_sizes.begin(), space.kernel_sizes.end(), [&](std::size_t k) {
                return k % 2 == 0 || k > space.base.lag;
            })) {
            bad.emplace_back("kernel_size");
        }
        if (space.shared_weights.empty()) bad.emplace_back("shared_weights");
    } else if (space.center_on_last.empty()) {
        bad.emplace_back("center_on_last");
    }
    if (!bad.empty()) {
        std::string msg = "invalid search space:";
        for (const auto& f : bad) msg += " " + f;
        throw ValidationError(msg, bad);
    }
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

namespace {

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& choices) {
    return choices[static_cast<std::size_t>(rng.below(choices.size()))];
}

bool pick_bool(Rng& rng, const std::vector<bool>& choices) {
    return choices[static_cast<std::size_t>(rng.below(choices.size()))];
}

}  // namespace

SearchResult random_search(const SearchSpace& space, const dataset::WindowedDataset& train_set,
                           const dataset::WindowedDataset& val_set, int n_trials,
                           std::uint64_t seed) {
    if (n_trials < 1) throw ValidationError("n_trials must be at least 1", {"n_trials"});
    validate(space);
    Rng rng(seed);
    std::vector<Trial> trials;
    for (int id = 0; id < n_trials; ++id) {
        Trial t;
        t.trial_id = id;
        t.model = space.base;
        t.training = space.training;
        t.training.learning_rate =
            std::exp(rng.uniform(std::log(space.lr_min), std::log(space.lr_max)));
        t.training.batch_size = pick(rng, space.batch_sizes);
        if (space.base.algorithm == models::Algorithm::kDLinear) {
            t.model.kernel_size = pick(rng, space.kernel_sizes);
            t.model.shared_weights = pick_bool(rng, space.shared_weights);
        } else {
            t.model.center_on_last = pick_bool(rng, space.center_on_last);
        }
        t.training.loss = pick(rng, space.losses);
        t.training.seed = seed + static_cast<std::uint64_t>(id);

        const auto observer = [&](const models::EpochRecord& rec) {
            t.val_losses.push_back(rec.val_loss);
            if (rec.epoch < kPruneWarmupEpochs) return true;
            std::vector<double> prior;
            for (const auto& p : trials) {
                if (p.epochs_run() >= rec.epoch) {
                    prior.push_back(p.val_losses[static_cast<std::size_t>(rec.epoch - 1)]);
                }
            }
            if (!prior.empty() && rec.val_loss > median(std::move(prior))) {
                t.status = TrialStatus::kPruned;
                t.pruned_epoch = rec.epoch;
                return false;
            }
            return true;
        };
        try {
            auto fitted = models::train(t.model, t.training, train_set, val_set, observer);
            t.final_val_loss = *std::min_element(t.val_losses.begin(), t.val_losses.end());
            if (t.status == TrialStatus::kCompleted) t.fitted = std::move(fitted);
        } catch (const models::TrainingError& e) {
            t.status = TrialStatus::kFailed;
            t.pruned_epoch.reset();
            t.final_val_loss.reset();
            t.error = e.what();
        }
        trials.push_back(std::move(t));
    }

    const Trial* best = nullptr;
    for (const auto& t : trials) {
        if (t.status != TrialStatus::kCompleted) continue;
        if (best == nullptr || *t.final_val_loss < *best->final_val_loss) best = &t;
    }
    if (best == nullptr) {
        std::string msg = "no trial completed:";
        for (const auto& t : trials) {
            msg += " [" + std::to_string(t.trial_id) + " " + std::string(to_string(t.status)) +
                   (t.error.empty() ? "" : ": " + t.error) + "]";
        }
        throw TuningError(msg, std::move(trials));
    }
    SearchResult result{*best, {}};
    result.trials = std::move(trials);
    return result;
}

void write_trials_csv(std::ostream& out, const std::vector<Trial>& trials) {
    csv::write_row(out, {"trial_id", "algorithm", "learning_rate", "batch_size", "kernel_size",
                         "shared_weights", "center_on_last", "loss", "huber_delta", "status",
                         "final_val_loss", "epochs_run", "pruned_epoch"});
    for (const auto& t : trials) {
        const bool dl = t.model.algorithm == models::Algorithm::kDLinear;
        csv::write_row(
            out, {std::to_string(t.trial_id), std::string(models::to_string(t.model.algorithm)),
                  csv::format_exact(t.training.learning_rate), std::to_string(t.training.batch_size),
                  dl ? std::to_string(t.model.kernel_size) : "",
                  dl ? (t.model.shared_weights ? "1" : "0") : "",
                  dl ? "" : (t.model.center_on_last ? "1" : "0"),
                  t.training.loss.kind == models::LossKind::kHuber ? "huber" : "mse",
                  csv::format_exact(t.training.loss.huber_delta), std::string(to_string(t.status)),
                  t.final_val_loss ? csv::format_exact(*t.final_val_loss) : "",
                  std::to_string(t.epochs_run()),
                  t.pruned_epoch ? std::to_string(*t.pruned_epoch) : ""});
    }
}

std::string best_config_json(const Trial& best) {
    nlohmann::json j{
        {"trial_id", best.trial_id},
        {"algorithm", models::to_string(best.model.algorithm)},
        {"lag", best.model.lag},
        {"learning_rate", best.training.learning_rate},
        {"batch_size", best.training.batch_size},
        {"max_epochs", best.training.max_epochs},
        {"patience", best.training.patience},
        {"seed", best.training.seed},
        {"loss", best.training.loss.kind == models::LossKind::kHuber ? "huber" : "mse"},
        {"huber_delta", best.training.loss.huber_delta},
        {"final_val_loss", best.final_val_loss ? nlohmann::json(*best.final_val_loss) : nlohmann::json(nullptr)},
    };
    if (best.model.algorithm == models::Algorithm::kDLinear) {
        j["kernel_size"] = best.model.kernel_size;
        j["shared_weights"] = best.model.shared_weights;
    } else {
        j["center_on_last"] = best.model.center_on_last;
    }
    return j.dump(2);
}

}  // namespace edboard::tuner
