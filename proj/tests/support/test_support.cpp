#include "test_support.hpp"

#include <unistd.h>

#include <atomic>

namespace edboard::testing {

namespace fs = std::filesystem;
using features::HourlyFeatureRow;

TempDir::TempDir(const std::string& prefix) {
    static std::atomic<int> counter{0};
    const auto base = fs::temp_directory_path();
    for (;;) {
        path_ = base / (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        if (fs::create_directories(path_)) break;
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

HourlyFeatureRow random_row(Timestamp hour, double target, Rng& rng) {
    using namespace features;
    HourlyFeatureRow row;
    row.hour_ts = hour;
    const auto c = to_civil(hour);
    row[kYear] = c.year;
    row[kMonth] = c.month;
    row[kDayOfMonth] = c.day;
    row[kDayOfWeek] = c.day_of_week;
    row[kHour] = c.hour;
    const auto strata = [&rng](std::size_t total, std::size_t col12, HourlyFeatureRow& r) {
        const auto a = rng.below(total + 1);
        const auto b = rng.below(total - a + 1);
        r[col12] = static_cast<double>(a);
        r[col12 + 1] = static_cast<double>(b);
        r[col12 + 2] = static_cast<double>(total - a - b);
    };
    const auto boarding = rng.below(12) + 1;
    const auto waiting = rng.below(15);
    const auto treating = rng.below(30);
    row[kBoardingTime] = target;
    row[kBoardingCount] = static_cast<double>(boarding);
    strata(boarding, kBoardingCountEsi12, row);
    row[kWaitingCount] = static_cast<double>(waiting);
    row[kWaitingTime] = waiting == 0 ? 0.0 : rng.uniform(5.0, 200.0);
    strata(waiting, kWaitingCountEsi12, row);
    row[kTreatmentCount] = static_cast<double>(treating);
    row[kTreatmentTime] = treating == 0 ? 0.0 : rng.uniform(20.0, 400.0);
    row[kTotalPatientCount] = static_cast<double>(boarding + waiting + treating);
    row[kExtremeIndicator] = 0.0;
    row[kCensusCount] = static_cast<double>(200 + rng.below(100));
    row[kSurgicalCount] = static_cast<double>(rng.below(20));
    row[kTemperature] = rng.uniform(10.0, 95.0);
    row[kWeatherClear + rng.below(5)] = 1.0;
    row[kHoliday] = rng.bernoulli(0.05) ? 1.0 : 0.0;
    row[kFootballA] = rng.bernoulli(0.02) ? 1.0 : 0.0;
    row[kFootballB] = rng.bernoulli(0.02) ? 1.0 : 0.0;
    return row;
}

features::FeatureTable random_table(std::size_t hours, std::uint64_t seed,
                                    const std::function<double(std::size_t)>& target,
                                    Timestamp start) {
    Rng rng(seed);
    features::FeatureTable table;
    table.rows.reserve(hours);
    for (std::size_t i = 0; i < hours; ++i) {
        table.rows.push_back(random_row(start + Hours{static_cast<int>(i)}, target(i), rng));
    }
    return table;
}

synth::ScenarioConfig scenario(std::int64_t hours, std::uint64_t seed, Timestamp start) {
    synth::ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.start_ts = start;
    cfg.end_ts = start + Hours{hours};
    return cfg;
}

namespace {

dataset::WindowedDataset draw(std::size_t n, std::size_t channels, std::size_t lag,
                              const std::vector<double>& coef, double noise_sd, Rng& rng) {
    dataset::WindowedDataset d;
    d.lag = lag;
    d.channels = channels;
    d.horizon = 1;
    d.target_column = 0;
    d.x.resize(n * channels * lag);
    d.y.resize(n);
    d.origin_ts.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.0;
        for (std::size_t j = 0; j < channels * lag; ++j) {
            const double v = rng.normal();
            d.x[i * channels * lag + j] = v;
            y += coef[j] * v;
        }
        d.y[i] = y + (noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0);
        d.origin_ts[i] = from_civil(2021, 1, 1) + Hours{static_cast<int>(i)};
    }
    return d;
}

}  // namespace

LinearProblem linear_problem(std::size_t channels, std::size_t lag, std::size_t n_train,
                             std::size_t n_val, std::size_t n_test, double noise_sd,
                             std::uint64_t seed) {
    Rng rng(seed);
    LinearProblem p;
    p.coef.resize(channels * lag);
    for (auto& c : p.coef) c = rng.normal(0.0, 1.0 / static_cast<double>(lag));
    p.train = draw(n_train, channels, lag, p.coef, noise_sd, rng);
    p.val = draw(n_val, channels, lag, p.coef, noise_sd, rng);
    p.test = draw(n_test, channels, lag, p.coef, noise_sd, rng);
    return p;
}

}  // namespace edboard::testing
