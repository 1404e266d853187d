#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "edboard/dataset.hpp"
#include "edboard/models.hpp"
#include "edboard/platform/service.hpp"
#include "edboard/synthgen.hpp"

namespace edboard::cli {

/// Everything a command needs. Defaults < config file < command-line flags.
struct RunConfig {
    std::filesystem::path out_dir = "edboard-out";
    /// Empty paths resolve under out_dir: corpus/, models/, store/.
    std::filesystem::path corpus_dir;
    std::filesystem::path model_dir;
    std::filesystem::path store_dir;

    std::uint64_t seed = 42;
    std::int64_t hours = 24 * 90;
    Timestamp start_ts = from_civil(2019, 1, 1);
    synth::ScenarioConfig scenario;
    bool exclude_covid = true;

    std::vector<int> horizons{6, 8, 10, 12, 24};
    std::vector<models::Algorithm> algorithms{
        models::Algorithm::kNLinear, models::Algorithm::kDLinear,
        models::Algorithm::kPersistence, models::Algorithm::kSeasonal};
    dataset::SplitSpec split;
    std::size_t lag = 24;
    std::size_t kernel_size = 13;
    models::TrainConfig train;
    int trials = 20;

    platform::MonitorConfig monitor;
    bool loop = false;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string token;
    bool replay = false;
    int replay_interval_ms = 50;

    [[nodiscard]] std::filesystem::path corpus() const;
    [[nodiscard]] std::filesystem::path model_store() const;
    [[nodiscard]] std::filesystem::path store() const;
    [[nodiscard]] std::filesystem::path features_csv() const { return out_dir / "features.csv"; }
    /// Scenario with seed and time range taken from the top-level fields.
    [[nodiscard]] synth::ScenarioConfig resolved_scenario() const;
};

/// Sets one key from its text form. Throws ValidationError for unknown keys or bad values.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key = value` lines; blank lines and lines starting with '#' are ignored.
std::map<std::string, std::string> parse_config_text(std::istream& in);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Checks the invariants shared by all commands.
void validate(const RunConfig& cfg);

/// Every key with its resolved value, in a fixed order.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg);

}  // namespace edboard::cli
