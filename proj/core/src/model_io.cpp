#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edboard/models.hpp"

namespace edboard::models {

namespace {

using nlohmann::json;

constexpr std::string_view kFormat = "edboard-model";
constexpr int kFormatVersion = 1;
constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::vector<unsigned char> doubles_to_le(std::span<const double> values) {
    std::vector<unsigned char> out(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::array<unsigned char, 8> b{};
        std::memcpy(b.data(), &values[i], 8);
        if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
        std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(i * 8));
    }
    return out;
}

std::vector<double> le_to_doubles(std::span<const unsigned char> bytes) {
    if (bytes.size() % 8 != 0) throw ValidationError("weight payload is not a whole number of doubles");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::array<unsigned char, 8> b{};
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(i * 8), 8, b.begin());
        if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
        std::memcpy(&out[i], b.data(), 8);
    }
    return out;
}

std::string_view loss_name(LossKind k) { return k == LossKind::kHuber ? "huber" : "mse"; }

LossKind parse_loss(const std::string& s) {
    if (s == "mse") return LossKind::kMse;
    if (s == "huber") return LossKind::kHuber;
    throw ValidationError("unknown loss '" + s + "'", {"loss"});
}

template <typename T, std::size_t N>
std::array<T, N> read_array(const json& j, const char* key) {
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != N) {
        throw ValidationError(std::string("model file: '") + key + "' must have " +
                              std::to_string(N) + " entries");
    }
    std::array<T, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = arr[i].get<T>();
    return out;
}

}  // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        const std::size_t n = std::min<std::size_t>(3, bytes.size() - i);
        std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (n > 1) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (n > 2) v |= bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += n > 1 ? kAlphabet[(v >> 6) & 63] : '=';
        out += n > 2 ? kAlphabet[v & 63] : '=';
    }
    return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw ValidationError("base64 length must be a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t v = 0;
        int pad = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char c = text[i + k];
            std::uint32_t d = 0;
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) throw ValidationError("misplaced base64 padding");
                ++pad;
            } else {
                if (pad > 0) throw ValidationError("misplaced base64 padding");
                const auto pos = kAlphabet.find(c);
                if (pos == std::string_view::npos) {
                    throw ValidationError(std::string("invalid base64 character '") + c + "'");
                }
                d = static_cast<std::uint32_t>(pos);
            }
            v = (v << 6) | d;
        }
        out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
        if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xFF));
    }
    return out;
}

std::string to_json_string(const FittedModel& m) {
    json j;
    j["format"] = kFormat;
    j["format_version"] = kFormatVersion;
    j["algorithm"] = to_string(m.config.algorithm);
    j["display_name"] = display_name(m.config.algorithm);
    j["horizon"] = m.horizon;
    j["config"] = {{"lag", m.config.lag},
                   {"channels", m.config.channels},
                   {"target_column", m.config.target_column},
                   {"center_on_last", m.config.center_on_last},
                   {"kernel_size", m.config.kernel_size},
                   {"shared_weights", m.config.shared_weights}};
    j["scaler"] = {{"mean", m.scaler.mean},
                   {"std", m.scaler.std},
                   {"binary", m.scaler.binary},
                   {"degenerate", m.scaler.degenerate}};
    j["extreme_threshold"] = {{"mean", m.extreme_mean}, {"sd", m.extreme_sd}};
    j["train_range"] = {{"from", format_iso8601(m.train_range.from)},
                        {"to", format_iso8601(m.train_range.to)}};
    j["train_config"] = {{"learning_rate", m.train_config.learning_rate},
                         {"batch_size", m.train_config.batch_size},
                         {"max_epochs", m.train_config.max_epochs},
                         {"patience", m.train_config.patience},
                         {"seed", m.train_config.seed},
                         {"loss", loss_name(m.train_config.loss.kind)},
                         {"huber_delta", m.train_config.loss.huber_delta}};
    json hist = json::array();
    for (const auto& e : m.history) hist.push_back({e.epoch, e.train_loss, e.val_loss});
    j["history"] = hist;
    j["best_epoch"] = m.best_epoch;
    j["metrics"] = m.metrics;
    j["weight_counts"] = {{"w_trend", m.w_trend.size()},
                          {"w_resid", m.w_resid.size()},
                          {"bias", m.bias.size()},
                          {"mix", m.mix.size()}};
    j["weights"] = base64_encode(doubles_to_le(flatten(m)));
    return j.dump(2);
}

FittedModel from_json_string(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormat) {
            throw ValidationError("not an edboard model file");
        }
        if (j.at("format_version").get<int>() != kFormatVersion) {
            throw ValidationError("unsupported model format version " +
                                  std::to_string(j.at("format_version").get<int>()));
        }
        FittedModel m;
        const auto& c = j.at("config");
        m.config.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
        m.config.lag = c.at("lag").get<std::size_t>();
        m.config.channels = c.at("channels").get<std::size_t>();
        m.config.target_column = c.at("target_column").get<std::size_t>();
        m.config.center_on_last = c.at("center_on_last").get<bool>();
        m.config.kernel_size = c.at("kernel_size").get<std::size_t>();
        m.config.shared_weights = c.at("shared_weights").get<bool>();
        m.horizon = j.at("horizon").get<int>();

        const auto& s = j.at("scaler");
        m.scaler.mean = read_array<double, features::kFeatureCount>(s, "mean");
        m.scaler.std = read_array<double, features::kFeatureCount>(s, "std");
        m.scaler.binary = read_array<bool, features::kFeatureCount>(s, "binary");
        m.scaler.degenerate = read_array<bool, features::kFeatureCount>(s, "degenerate");

        m.extreme_mean = j.at("extreme_threshold").at("mean").get<double>();
        m.extreme_sd = j.at("extreme_threshold").at("sd").get<double>();
        m.train_range = {parse_iso8601(j.at("train_range").at("from").get<std::string>()),
                         parse_iso8601(j.at("train_range").at("to").get<std::string>())};

        const auto& t = j.at("train_config");
        m.train_config.learning_rate = t.at("learning_rate").get<double>();
        m.train_config.batch_size = t.at("batch_size").get<std::size_t>();
        m.train_config.max_epochs = t.at("max_epochs").get<int>();
        m.train_config.patience = t.at("patience").get<int>();
        m.train_config.seed = t.at("seed").get<std::uint64_t>();
        m.train_config.loss.kind = parse_loss(t.at("loss").get<std::string>());
        m.train_config.loss.huber_delta = t.at("huber_delta").get<double>();

        for (const auto& e : j.at("history")) {
            m.history.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
        }
        m.best_epoch = j.at("best_epoch").get<int>();
        m.metrics = j.at("metrics").get<std::map<std::string, double>>();

        const auto& counts = j.at("weight_counts");
        m.w_trend.resize(counts.at("w_trend").get<std::size_t>());
        m.w_resid.resize(counts.at("w_resid").get<std::size_t>());
        m.bias.resize(counts.at("bias").get<std::size_t>());
        m.mix.resize(counts.at("mix").get<std::size_t>());
        unflatten(m, le_to_doubles(base64_decode(j.at("weights").get<std::string>())));

        validate(m.config);
        const std::size_t w = m.weight_sets() * m.config.lag;
        if (m.w_trend.size() != w || m.bias.size() != m.config.channels ||
            m.mix.size() != m.config.channels ||
            m.w_resid.size() != (m.config.algorithm == Algorithm::kDLinear ? w : 0)) {
            throw ValidationError("model weights do not match the stored configuration");
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const FittedModel& model) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write model file " + path.string());
    out << to_json_string(model) << '\n';
    if (!out) throw Error("io_error", "failed writing model file " + path.string());
}

FittedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("model file " + path.string() + " not found");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

}  // namespace edboard::models
