#include <cmath>
#include <limits>
#include <numeric>

#include "edboard/models.hpp"
#include "edboard/random.hpp"
#include "linear_core.hpp"

namespace edboard::models {

void validate(const TrainConfig& cfg) {
    std::vector<std::string> bad;
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
        bad.emplace_back("learning_rate");
    }
    if (cfg.batch_size < 1) bad.emplace_back("batch_size");
    if (cfg.max_epochs < 1) bad.emplace_back("max_epochs");
    if (cfg.patience < 1) bad.emplace_back("patience");
    if (cfg.loss.kind == LossKind::kHuber && !(cfg.loss.huber_delta > 0.0)) {
        bad.emplace_back("huber_delta");
    }
    if (!bad.empty()) {
        std::string msg = "invalid training config:";
        for (const auto& f : bad) msg += " " + f;
        throw ValidationError(msg, bad);
    }
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

class Adam {
public:
    Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
            v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kAdamEps);
        }
    }

private:
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

double mse_prepared(const FittedModel& m, const detail::Inputs& in, const WindowedDataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = detail::evaluate(m, in, i) - data.y[i];
        total += r * r;
    }
    return total / static_cast<double>(data.size());
}

}  // namespace

FittedModel train(const ModelConfig& cfg, const TrainConfig& train_cfg,
                  const WindowedDataset& train_set, const WindowedDataset& val_set,
                  const EpochObserver& observer) {
    validate(cfg);
    validate(train_cfg);
    if (train_set.empty()) throw ValidationError("training set has no windows", {"train"});
    if (val_set.empty()) throw ValidationError("validation set has no windows", {"val"});

    FittedModel model = initial_model(cfg);
    detail::check_shapes(model, train_set.channels, train_set.lag);
    detail::check_shapes(model, val_set.channels, val_set.lag);
    model.horizon = train_set.horizon;
    model.train_config = train_cfg;

    const auto train_in = detail::prepare_inputs(cfg, train_set);
    const auto val_in = detail::prepare_inputs(cfg, val_set);

    std::vector<double> params = flatten(model);
    std::vector<double> best = params;
    std::vector<double> grad(params.size());
    std::vector<double> u(cfg.channels);
    Adam adam(params.size(), train_cfg.learning_rate);
    Rng rng(train_cfg.seed);

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + train_cfg.batch_size);
            const double scale = 1.0 / static_cast<double>(end - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                const double r = detail::evaluate(model, train_in, i, u) - train_set.y[i];
                total += detail::sample_loss(r, train_cfg.loss);
                detail::accumulate_gradient(
                    model, train_in, i, u,
                    detail::sample_loss_derivative(r, train_cfg.loss) * scale, grad);
            }
            adam.step(params, grad);
            unflatten(model, params);
        }
        const EpochRecord rec{epoch, total / static_cast<double>(order.size()),
                              mse_prepared(model, val_in, val_set)};
        if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
            throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch),
                                epoch - 1);
        }
        model.history.push_back(rec);
        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            best_epoch = epoch;
            best = params;
        }
        if (observer && !observer(rec)) break;
        if (epoch - best_epoch >= train_cfg.patience) break;
    }
    unflatten(model, best);
    model.best_epoch = best_epoch;
    return model;
}

}  // namespace edboard::models
