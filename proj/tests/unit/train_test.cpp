#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "edboard/models.hpp"
#include "test_support.hpp"

namespace edboard::models {
namespace {

ModelConfig plain_linear(std::size_t channels, std::size_t lag) {
    auto cfg = nlinear_config(lag, channels, false);
    cfg.target_column = 0;
    return cfg;
}

TrainConfig fast(std::uint64_t seed = 1) {
    TrainConfig t;
    t.learning_rate = 1e-2;
    t.batch_size = 32;
    t.max_epochs = 400;
    t.patience = 30;
    t.seed = seed;
    return t;
}

double r_squared(const FittedModel& m, const dataset::WindowedDataset& d) {
    double mean = 0.0;
    for (double y : d.y) mean += y;
    mean /= static_cast<double>(d.size());
    double ss_tot = 0.0;
    for (double y : d.y) ss_tot += (y - mean) * (y - mean);
    return 1.0 - mean_squared_error(m, d) * static_cast<double>(d.size()) / ss_tot;
}

TEST(Train, RecoversNoiselessSingleChannelCoefficients) {
    const auto p = testing::linear_problem(1, 8, 800, 200, 200, 0.0, 21);
    const auto m = train(plain_linear(1, 8), fast(), p.train, p.val);
    EXPECT_LT(mean_squared_error(m, p.val), 1e-4);
    EXPECT_LT(mean_squared_error(m, p.test), 1e-4);
    for (std::size_t l = 0; l < 8; ++l) EXPECT_NEAR(m.mix[0] * m.w_trend[l], p.coef[l], 1e-2);
}

TEST(Train, RecoversNoiselessMultiChannelFunction) {
    const auto p = testing::linear_problem(3, 6, 1000, 200, 200, 0.0, 22);
    const auto m = train(plain_linear(3, 6), fast(), p.train, p.val);
    EXPECT_LT(mean_squared_error(m, p.test), 1e-4);
}

TEST(Train, NoisyProblemReachesHighRSquared) {
    const auto p = testing::linear_problem(2, 12, 1500, 300, 300, 0.05, 23);
    for (auto algo : {Algorithm::kNLinear, Algorithm::kDLinear}) {
        auto cfg = algo == Algorithm::kNLinear ? plain_linear(2, 12) : dlinear_config(12, 2, 5);
        cfg.target_column = 0;
        const auto m = train(cfg, fast(), p.train, p.val);
        EXPECT_GE(r_squared(m, p.test), 0.9) << to_string(algo);
    }
}

TEST(Train, SameSeedIsBitIdenticalAndSeedsDiffer) {
    const auto p = testing::linear_problem(2, 6, 300, 100, 10, 0.1, 24);
    auto t = fast(5);
    t.max_epochs = 20;
    const auto a = train(plain_linear(2, 6), t, p.train, p.val);
    const auto b = train(plain_linear(2, 6), t, p.train, p.val);
    EXPECT_EQ(flatten(a), flatten(b));
    EXPECT_EQ(a.history, b.history);
    t.seed = 6;
    const auto c = train(plain_linear(2, 6), t, p.train, p.val);
    EXPECT_NE(flatten(a), flatten(c));
}

TEST(Train, EarlyStoppingKeepsBestEpochWeights) {
    // Pure noise target: validation loss stops improving after a few epochs.
    auto p = testing::linear_problem(1, 6, 200, 100, 10, 1.0, 25);
    Rng rng(25);
    for (auto& y : p.train.y) y = rng.normal();
    for (auto& y : p.val.y) y = rng.normal();
    auto t = fast(3);
    t.patience = 5;
    t.max_epochs = 500;
    const auto m = train(plain_linear(1, 6), t, p.train, p.val);
    ASSERT_LT(static_cast<int>(m.history.size()), t.max_epochs);
    EXPECT_EQ(static_cast<int>(m.history.size()), m.best_epoch + t.patience);

    double best = std::numeric_limits<double>::infinity();
    int first_min = 0;
    for (const auto& r : m.history) {
        if (r.val_loss < best) {
            best = r.val_loss;
            first_min = r.epoch;
        }
    }
    EXPECT_EQ(m.best_epoch, first_min);
    EXPECT_EQ(m.history.front().epoch, 1);
    EXPECT_DOUBLE_EQ(mean_squared_error(m, p.val), m.history[static_cast<std::size_t>(m.best_epoch - 1)].val_loss);

    auto stop_at_best = t;
    stop_at_best.max_epochs = m.best_epoch;
    const auto replay = train(plain_linear(1, 6), stop_at_best, p.train, p.val);
    EXPECT_EQ(flatten(replay), flatten(m));
}

TEST(Train, ObserverCanStopTraining) {
    const auto p = testing::linear_problem(1, 4, 100, 50, 10, 0.1, 26);
    int calls = 0;
    const auto m = train(plain_linear(1, 4), fast(), p.train, p.val, [&](const EpochRecord& r) {
        ++calls;
        return r.epoch < 3;
    });
    EXPECT_EQ(calls, 3);
    EXPECT_EQ(m.history.size(), 3u);
}

TEST(Train, NonFiniteLossThrows) {
    auto p = testing::linear_problem(1, 4, 50, 20, 10, 0.0, 27);
    for (auto& y : p.train.y) y = 1e300;
    try {
        train(plain_linear(1, 4), fast(), p.train, p.val);
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        EXPECT_EQ(e.last_finite_epoch(), 0);
    }
}

TEST(Train, RejectsBadConfigAndEmptySets) {
    const auto p = testing::linear_problem(1, 4, 50, 20, 10, 0.0, 28);
    auto t = fast();
    t.learning_rate = 0.0;
    EXPECT_THROW(train(plain_linear(1, 4), t, p.train, p.val), ValidationError);
    t = fast();
    t.patience = 0;
    EXPECT_THROW(train(plain_linear(1, 4), t, p.train, p.val), ValidationError);
    EXPECT_THROW(train(plain_linear(1, 4), fast(), p.train, dataset::WindowedDataset{}), ValidationError);
    EXPECT_THROW(train(plain_linear(2, 4), fast(), p.train, p.val), ValidationError);
}

TEST(Train, HuberLossAlsoConverges) {
    const auto p = testing::linear_problem(1, 6, 600, 150, 150, 0.0, 29);
    auto t = fast();
    t.loss = {LossKind::kHuber, 0.5};
    const auto m = train(plain_linear(1, 6), t, p.train, p.val);
    EXPECT_LT(mean_squared_error(m, p.test), 1e-3);
}

}  // namespace
}  // namespace edboard::models
