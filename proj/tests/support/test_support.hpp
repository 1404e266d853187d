#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "edboard/dataset.hpp"
#include "edboard/features.hpp"
#include "edboard/random.hpp"
#include "edboard/synthgen.hpp"

namespace edboard::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "edboard-test");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// A row satisfying every HourlyFeatureRow invariant, with random counts and times drawn
/// from `rng` and the given target value.
features::HourlyFeatureRow random_row(Timestamp hour, double target, Rng& rng);

/// `hours` consecutive rows starting at `start` whose target is `target(i)`.
features::FeatureTable random_table(std::size_t hours, std::uint64_t seed,
                                    const std::function<double(std::size_t)>& target,
                                    Timestamp start = from_civil(2021, 1, 1));

/// Small scenario for fast end-to-end checks.
synth::ScenarioConfig scenario(std::int64_t hours, std::uint64_t seed,
                               Timestamp start = from_civil(2019, 1, 1));

/// Dataset of `n` random windows (d channels, lag L) whose target is
/// sum_c sum_l coef[c*L + l] * x[c][l] + noise.
struct LinearProblem {
    dataset::WindowedDataset train;
    dataset::WindowedDataset val;
    dataset::WindowedDataset test;
    std::vector<double> coef;
};
LinearProblem linear_problem(std::size_t channels, std::size_t lag, std::size_t n_train,
                             std::size_t n_val, std::size_t n_test, double noise_sd,
                             std::uint64_t seed);

}  // namespace edboard::testing
