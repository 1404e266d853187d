#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "edboard/error.hpp"
#include "edboard/pipeline.hpp"

namespace edboard::cli {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !in.eof()) {
        throw ValidationError("config key '" + key + "': cannot parse '" + value + "'", {key});
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError("config key '" + key + "': expected true or false, got '" + value + "'",
                          {key});
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string format_double(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (const auto& item : items) out += (out.empty() ? "" : ",") + fmt(item);
    return out;
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        const auto path_key = [&k](const char* name, std::filesystem::path RunConfig::*member) {
            k.push_back({name, [member](RunConfig& c, const std::string& v) { c.*member = v; },
                         [member](const RunConfig& c) { return (c.*member).string(); }});
        };
        const auto double_key = [&k](const char* name, auto getter) {
            k.push_back({name,
                         [getter, name](RunConfig& c, const std::string& v) {
                             getter(c) = parse_number<double>(name, v);
                         },
                         [getter](const RunConfig& c) {
                             return format_double(getter(const_cast<RunConfig&>(c)));
                         }});
        };
        const auto int_key = [&k](const char* name, auto getter) {
            k.push_back({name,
                         [getter, name](RunConfig& c, const std::string& v) {
                             using T = std::remove_reference_t<decltype(getter(c))>;
                             getter(c) = parse_number<T>(name, v);
                         },
                         [getter](const RunConfig& c) {
                             return std::to_string(getter(const_cast<RunConfig&>(c)));
                         }});
        };
        const auto bool_key = [&k](const char* name, bool RunConfig::*member) {
            k.push_back({name,
                         [member, name](RunConfig& c, const std::string& v) {
                             c.*member = parse_bool(name, v);
                         },
                         [member](const RunConfig& c) {
                             return std::string(c.*member ? "true" : "false");
                         }});
        };

        path_key("out_dir", &RunConfig::out_dir);
        path_key("corpus_dir", &RunConfig::corpus_dir);
        path_key("model_dir", &RunConfig::model_dir);
        path_key("store_dir", &RunConfig::store_dir);
        int_key("seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; });
        int_key("hours", [](RunConfig& c) -> std::int64_t& { return c.hours; });
        k.push_back({"start",
                     [](RunConfig& c, const std::string& v) {
                         try {
                             c.start_ts = parse_iso8601(v);
                         } catch (const Error& e) {
                             throw ValidationError(std::string("config key 'start': ") + e.what(),
                                                   {"start"});
                         }
                     },
                     [](const RunConfig& c) { return format_iso8601(c.start_ts); }});
        double_key("base_arrival_rate", [](RunConfig& c) -> double& { return c.scenario.base_arrival_rate; });
        double_key("daily_amplitude", [](RunConfig& c) -> double& { return c.scenario.daily_amplitude; });
        double_key("weekly_amplitude", [](RunConfig& c) -> double& { return c.scenario.weekly_amplitude; });
        double_key("mean_wait_min", [](RunConfig& c) -> double& { return c.scenario.mean_wait_min; });
        double_key("mean_treat_min", [](RunConfig& c) -> double& { return c.scenario.mean_treat_min; });
        double_key("mean_board_min", [](RunConfig& c) -> double& { return c.scenario.mean_board_min; });
        double_key("duration_log_sd", [](RunConfig& c) -> double& { return c.scenario.duration_log_sd; });
        double_key("congestion_coupling", [](RunConfig& c) -> double& { return c.scenario.congestion_coupling; });
        double_key("admit_probability", [](RunConfig& c) -> double& { return c.scenario.admit_probability; });
        bool_key("exclude_covid", &RunConfig::exclude_covid);
        k.push_back({"horizons",
                     [](RunConfig& c, const std::string& v) {
                         c.horizons.clear();
                         for (const auto& item : split_list(v)) {
                             c.horizons.push_back(parse_number<int>("horizons", item));
                         }
                     },
                     [](const RunConfig& c) {
                         return join(c.horizons, [](int h) { return std::to_string(h); });
                     }});
        k.push_back({"algorithms",
                     [](RunConfig& c, const std::string& v) {
                         c.algorithms.clear();
                         for (const auto& item : split_list(v)) {
                             c.algorithms.push_back(models::parse_algorithm(item));
                         }
                     },
                     [](const RunConfig& c) {
                         return join(c.algorithms, [](models::Algorithm a) {
                             return std::string(models::to_string(a));
                         });
                     }});
        double_key("split_train", [](RunConfig& c) -> double& { return c.split.train; });
        double_key("split_val", [](RunConfig& c) -> double& { return c.split.val; });
        double_key("split_test", [](RunConfig& c) -> double& { return c.split.test; });
        int_key("lag", [](RunConfig& c) -> std::size_t& { return c.lag; });
        int_key("kernel_size", [](RunConfig& c) -> std::size_t& { return c.kernel_size; });
        double_key("learning_rate", [](RunConfig& c) -> double& { return c.train.learning_rate; });
        int_key("batch_size", [](RunConfig& c) -> std::size_t& { return c.train.batch_size; });
        int_key("max_epochs", [](RunConfig& c) -> int& { return c.train.max_epochs; });
        int_key("patience", [](RunConfig& c) -> int& { return c.train.patience; });
        int_key("trials", [](RunConfig& c) -> int& { return c.trials; });
        int_key("monitor_window_hours", [](RunConfig& c) -> int& { return c.monitor.rolling_window_hours; });
        double_key("max_mae", [](RunConfig& c) -> double& { return c.monitor.max_mae; });
        double_key("min_r2", [](RunConfig& c) -> double& { return c.monitor.min_r2; });
        double_key("max_mape", [](RunConfig& c) -> double& { return c.monitor.max_mape; });
        int_key("cooldown_hours", [](RunConfig& c) -> int& { return c.monitor.cooldown_hours; });
        bool_key("loop", &RunConfig::loop);
        k.push_back({"host", [](RunConfig& c, const std::string& v) { c.host = v; },
                     [](const RunConfig& c) { return c.host; }});
        int_key("port", [](RunConfig& c) -> int& { return c.port; });
        k.push_back({"token", [](RunConfig& c, const std::string& v) { c.token = v; },
                     [](const RunConfig& c) { return std::string(c.token.empty() ? "" : "<set>"); }});
        bool_key("replay", &RunConfig::replay);
        int_key("replay_interval_ms", [](RunConfig& c) -> int& { return c.replay_interval_ms; });
        return k;
    }();
    return table;
}

}  // namespace

std::filesystem::path RunConfig::corpus() const {
    return corpus_dir.empty() ? out_dir / "corpus" : corpus_dir;
}
std::filesystem::path RunConfig::model_store() const {
    return model_dir.empty() ? out_dir / "models" : model_dir;
}
std::filesystem::path RunConfig::store() const {
    return store_dir.empty() ? out_dir / "store" : store_dir;
}

synth::ScenarioConfig RunConfig::resolved_scenario() const {
    auto s = scenario;
    s.seed = seed;
    s.start_ts = start_ts;
    s.end_ts = start_ts + Hours{hours};
    return s;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ValidationError("unknown config key '" + key + "'", {key});
    it->set(cfg, value);
}

std::map<std::string, std::string> parse_config_text(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(number) +
                                  ": expected 'key = value'");
        }
        out[trim(std::string_view(text).substr(0, eq))] = trim(std::string_view(text).substr(eq + 1));
    }
    return out;
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string(), {"config"});
    for (const auto& [key, value] : parse_config_text(in)) set_key(cfg, key, value);
}

void validate(const RunConfig& cfg) {
    std::vector<std::string> bad;
    std::string message;
    const auto fail = [&](const std::string& field, const std::string& why) {
        bad.push_back(field);
        message += (message.empty() ? "" : "; ") + field + ": " + why;
    };
    if (cfg.hours < 1) fail("hours", "must be at least 1");
    if (cfg.horizons.empty()) fail("horizons", "must not be empty");
    for (int h : cfg.horizons) {
        if (std::find(pipeline::kHorizons.begin(), pipeline::kHorizons.end(), h) ==
            pipeline::kHorizons.end()) {
            fail("horizons", std::to_string(h) + " is not one of 6, 8, 10, 12, 24");
        }
    }
    if (cfg.algorithms.empty()) fail("algorithms", "must not be empty");
    if (cfg.lag < 1) fail("lag", "must be at least 1");
    if (cfg.trials < 1) fail("trials", "must be at least 1");
    if (cfg.port < 0 || cfg.port > 65535) fail("port", "must be in [0, 65535]");
    if (cfg.replay_interval_ms < 0) fail("replay_interval_ms", "must not be negative");
    if (!bad.empty()) throw ValidationError(message, bad);
    dataset::validate(cfg.split);
    models::validate(cfg.train);
    platform::validate(cfg.monitor);
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys()) out.emplace_back(k.name, k.get(cfg));
    return out;
}

}  // namespace edboard::cli
