#include <gtest/gtest.h>

#include <cmath>

#include "edboard/pipeline.hpp"
#include "test_support.hpp"

namespace edboard::pipeline {
namespace {

using models::Algorithm;

features::FeatureTable wave_table(std::size_t hours, std::uint64_t seed) {
    return testing::random_table(hours, seed, [](std::size_t i) {
        return 400.0 + 150.0 * std::sin(2.0 * M_PI * static_cast<double>(i % 24) / 24.0) +
               static_cast<double>(i % 7) * 10.0;
    });
}

models::TrainConfig quick() {
    models::TrainConfig t;
    t.learning_rate = 5e-3;
    t.max_epochs = 15;
    t.patience = 5;
    t.seed = 3;
    return t;
}

TEST(Pipeline, HorizonsAndKernels) {
    for (int h : kHorizons) EXPECT_NO_THROW(validate_horizon(h));
    EXPECT_THROW(validate_horizon(7), ValidationError);
    EXPECT_EQ(fit_kernel(13, 24), 13u);
    EXPECT_EQ(fit_kernel(14, 24), 13u);
    EXPECT_EQ(fit_kernel(25, 8), 7u);
    EXPECT_EQ(fit_kernel(25, 24), 23u);
    const auto cfg = default_model_config(Algorithm::kDLinear, 24, 25);
    EXPECT_EQ(cfg.kernel_size, 23u);
    EXPECT_EQ(cfg.channels, features::kFeatureCount);
}

TEST(Pipeline, BuildFeaturesCoversCorpusRangeMinusExclusion) {
    const auto cfg = testing::scenario(24 * 20, 5, from_civil(2020, 3, 25));
    const auto corpus = synth::generate_corpus(cfg);
    EXPECT_EQ(corpus_range(corpus), (TimeRange{cfg.start_ts, cfg.end_ts}));
    const auto all = build_features(corpus, {});
    EXPECT_EQ(all.table.size(), 24u * 20u);
    const auto cut = build_features(corpus);
    // 2020-04-01 00:00 is seven days after the start.
    EXPECT_EQ(cut.table.size(), 24u * 7u);
    ASSERT_EQ(cut.table.gaps.size(), 1u);
    EXPECT_EQ(cut.table.gaps[0], (TimeRange{from_civil(2020, 4, 1), cfg.end_ts}));
    EXPECT_EQ(cut.report.n_input, corpus.encounters.size());
}

TEST(Pipeline, TargetStatsArePopulation) {
    const auto t = testing::random_table(4, 1, [](std::size_t i) { return static_cast<double>(2 * i); });
    const auto [mean, sd] = target_stats(t);
    EXPECT_DOUBLE_EQ(mean, 3.0);
    EXPECT_DOUBLE_EQ(sd, std::sqrt(5.0));
}

TEST(Pipeline, PrepareUsesOnlyTrainingStatistics) {
    const auto table = wave_table(24 * 30, 2);
    const auto p = prepare(table, {});
    const auto [mean, sd] = target_stats(p.raw.train);
    EXPECT_EQ(p.extreme_mean, mean);
    EXPECT_EQ(p.extreme_sd, sd);
    EXPECT_EQ(p.scaler, dataset::fit_scaler(p.raw.train, dataset::DegeneratePolicy::kCenterOnly));
    EXPECT_EQ(p.train_range.from, table.rows.front().hour_ts);
    EXPECT_EQ(p.train_range.to, p.raw.val.rows.front().hour_ts);
    for (const auto* part : {&p.raw.train, &p.raw.val, &p.raw.test}) {
        for (const auto& r : part->rows) {
            EXPECT_EQ(r[features::kExtremeIndicator], r[features::kTargetColumn] > mean + sd ? 1.0 : 0.0);
        }
    }
    const auto unscaled = prepare(table, {}, dataset::DegeneratePolicy::kCenterOnly, false);
    EXPECT_EQ(unscaled.scaled.test.rows, unscaled.raw.test.rows);
}

TEST(Pipeline, PerturbingHeldOutRowsLeavesTrainingUntouched) {
    const auto table = wave_table(24 * 30, 3);
    auto altered = table;
    const auto n_train = dataset::split_sizes(table.size(), {})[0];
    Rng rng(3);
    for (std::size_t i = n_train; i < altered.size(); ++i) {
        altered.rows[i][features::kTargetColumn] = rng.uniform(0.0, 5000.0);
        altered.rows[i][features::kCensusCount] += 100.0;
    }
    const auto a = prepare(table, {});
    const auto b = prepare(altered, {});
    EXPECT_EQ(a.scaler, b.scaler);
    EXPECT_EQ(a.extreme_mean, b.extreme_mean);
    const auto wa = make_horizon_windows(a, 24, 6);
    const auto wb = make_horizon_windows(b, 24, 6);
    EXPECT_EQ(wa.train.x, wb.train.x);
    auto t = quick();
    t.max_epochs = 3;
    t.patience = 10;
    // Validation losses differ, so compare weights after a fixed number of epochs.
    const auto cfg = default_model_config(Algorithm::kNLinear, 24, 13);
    const auto ma = models::train(cfg, t, wa.train, wa.val);
    const auto mb = models::train(cfg, t, wb.train, wb.val);
    ASSERT_EQ(ma.history.size(), 3u);
    ASSERT_EQ(mb.history.size(), 3u);
    for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(ma.history[e].train_loss, mb.history[e].train_loss);
}

TEST(Pipeline, WindowsStayInsideEachSplit) {
    const auto table = wave_table(24 * 30, 4);
    const auto p = prepare(table, {});
    for (int h : kHorizons) {
        const auto w = make_horizon_windows(p, 24, h);
        auto expected = [&](const features::FeatureTable& part) {
            const long n = static_cast<long>(part.size()) - 24 - h + 1;
            return static_cast<std::size_t>(std::max(0L, n));
        };
        EXPECT_EQ(w.train.size(), expected(p.raw.train));
        EXPECT_EQ(w.val.size(), expected(p.raw.val));
        EXPECT_EQ(w.test.size(), expected(p.raw.test));
        EXPECT_EQ(w.raw_test.origin_ts, w.test.origin_ts);
        if (!w.test.empty()) EXPECT_GE(w.test.origin_ts.front(), p.raw.test.rows.front().hour_ts + Hours{23});
    }
}

TEST(Pipeline, PredictSplitMatchesPredict) {
    const auto table = wave_table(24 * 30, 5);
    const auto p = prepare(table, {});
    const auto w = make_horizon_windows(p, 24, 8);
    const auto m = fit(p, w, default_model_config(Algorithm::kDLinear, 24, 13), quick());
    EXPECT_EQ(m.scaler, p.scaler);
    EXPECT_EQ(m.horizon, 8);
    EXPECT_EQ(m.train_range, p.train_range);
    const auto preds = predict_split(m, w.test, w.raw_test);
    for (std::size_t i = 0; i < w.test.size(); ++i) {
        EXPECT_NEAR(preds.y_hat[i], models::predict(m, w.raw_test.window(i)), 1e-9);
        EXPECT_EQ(preds.y[i], w.raw_test.y[i]);
    }
    EXPECT_DOUBLE_EQ(m.metrics.at("mae"), eval::compute_metrics(preds.y, preds.y_hat).mae);
    EXPECT_EQ(m.metrics.at("n_test"), static_cast<double>(w.test.size()));
    EXPECT_THROW(baseline_split(Algorithm::kNLinear, w.raw_test), ValidationError);
}

TEST(Pipeline, BenchmarkProducesFullBoard) {
    const auto table = wave_table(24 * 40, 6);
    const auto p = prepare(table, {});
    BenchmarkConfig cfg;
    cfg.train = quick();
    const auto r = run_benchmark(p, cfg);
    EXPECT_EQ(r.board.rows.size(), 20u);
    EXPECT_EQ(r.models.size(), 10u);
    EXPECT_EQ(r.extremes.size(), 20u);
    for (int h : kHorizons) {
        const auto& win = r.board.winner(h);
        for (const auto& row : r.board.rows) {
            if (row.horizon == h) EXPECT_LE(win.metrics.mae, row.metrics.mae);
        }
        for (auto algo : {Algorithm::kNLinear, Algorithm::kDLinear}) {
            EXPECT_NEAR(r.board.at(std::string(models::to_string(algo)), h).metrics.mae,
                        r.models.at({algo, h}).metrics.at("mae"), 1e-9);
        }
        const auto w = make_horizon_windows(p, 24, h);
        const auto pers = baseline_split(Algorithm::kPersistence, w.raw_test);
        EXPECT_DOUBLE_EQ(r.board.at("persistence", h).metrics.mae,
                         eval::compute_metrics(pers.y, pers.y_hat).mae);
    }
    ModelMap partial = r.models;
    partial.erase({Algorithm::kDLinear, 12});
    try {
        evaluate_models(p, cfg, partial);
        FAIL();
    } catch (const NotFoundError& e) {
        EXPECT_NE(std::string(e.what()).find("dlinear h=12"), std::string::npos);
    }
    const auto again = evaluate_models(p, cfg, r.models);
    for (std::size_t i = 0; i < again.board.rows.size(); ++i) {
        EXPECT_EQ(again.board.rows[i].metrics, r.board.rows[i].metrics);
    }
}

TEST(Pipeline, TooShortTestSplitIsReported) {
    const auto p = prepare(wave_table(24 * 8, 7), {});
    BenchmarkConfig cfg;
    cfg.algorithms = {Algorithm::kPersistence};
    EXPECT_THROW(evaluate_models(p, cfg, {}), InsufficientDataError);
}

}  // namespace
}  // namespace edboard::pipeline
