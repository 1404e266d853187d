#include "edboard/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "linear_core.hpp"

namespace edboard::models {

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::kNLinear: return "nlinear";
        case Algorithm::kDLinear: return "dlinear";
        case Algorithm::kPersistence: return "persistence";
        case Algorithm::kSeasonal: return "seasonal";
    }
    return "nlinear";
}

std::string_view display_name(Algorithm a) {
    switch (a) {
        case Algorithm::kNLinear: return "NLinear";
        case Algorithm::kDLinear: return "DLinear";
        case Algorithm::kPersistence: return "Persistence";
        case Algorithm::kSeasonal: return "SeasonalNaive";
    }
    return "NLinear";
}

Algorithm parse_algorithm(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto a : {Algorithm::kNLinear, Algorithm::kDLinear, Algorithm::kPersistence,
                   Algorithm::kSeasonal}) {
        if (to_string(a) == lower) return a;
    }
    if (lower == "seasonal_naive" || lower == "seasonalnaive") return Algorithm::kSeasonal;
    throw ValidationError("unknown algorithm '" + std::string(text) + "'", {"algorithm"});
}

bool is_trainable(Algorithm a) { return a == Algorithm::kNLinear || a == Algorithm::kDLinear; }

ModelConfig nlinear_config(std::size_t lag, std::size_t channels, bool center_on_last) {
    ModelConfig c;
    c.algorithm = Algorithm::kNLinear;
    c.lag = lag;
    c.channels = channels;
    c.center_on_last = center_on_last;
    c.target_column = std::min<std::size_t>(features::kTargetColumn, channels - 1);
    return c;
}

ModelConfig dlinear_config(std::size_t lag, std::size_t channels, std::size_t kernel_size,
                           bool shared_weights) {
    ModelConfig c;
    c.algorithm = Algorithm::kDLinear;
    c.lag = lag;
    c.channels = channels;
    c.kernel_size = kernel_size;
    c.shared_weights = shared_weights;
    c.target_column = std::min<std::size_t>(features::kTargetColumn, channels - 1);
    return c;
}

void validate(const ModelConfig& cfg) {
    std::vector<std::string> bad;
    if (!is_trainable(cfg.algorithm)) bad.emplace_back("algorithm");
    if (cfg.lag < 1) bad.emplace_back("lag");
    if (cfg.channels < 1) bad.emplace_back("channels");
    if (cfg.target_column >= cfg.channels) bad.emplace_back("target_column");
    if (cfg.algorithm == Algorithm::kDLinear &&
        (cfg.kernel_size % 2 == 0 || cfg.kernel_size < 1 || cfg.kernel_size > cfg.lag)) {
        bad.emplace_back("kernel_size");
    }
    if (!bad.empty()) {
        std::string msg = "invalid model config:";
        for (const auto& f : bad) msg += " " + f;
        throw ValidationError(msg, bad);
    }
}

std::size_t FittedModel::weight_sets() const {
    return config.algorithm == Algorithm::kDLinear && config.shared_weights ? 1 : config.channels;
}

FittedModel initial_model(const ModelConfig& cfg) {
    validate(cfg);
    FittedModel m;
    m.config = cfg;
    const std::size_t sets = m.weight_sets();
    const double w0 = 1.0 / static_cast<double>(cfg.lag);
    m.w_trend.assign(sets * cfg.lag, w0);
    if (cfg.algorithm == Algorithm::kDLinear) m.w_resid.assign(sets * cfg.lag, w0);
    m.bias.assign(cfg.channels, 0.0);
    m.mix.assign(cfg.channels, 0.0);
    m.mix[cfg.target_column] = 1.0;
    return m;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t k) {
    const std::size_t n = series.size();
    if (k % 2 == 0 || k < 1 || k > n) {
        throw ValidationError("moving-average kernel must be odd and within [1, " +
                                  std::to_string(n) + "], got " + std::to_string(k),
                              {"kernel_size"});
    }
    const auto half = static_cast<std::ptrdiff_t>((k - 1) / 2);
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    std::vector<double> out(n);
    for (std::ptrdiff_t i = 0; i <= last; ++i) {
        double sum = 0.0;
        for (std::ptrdiff_t j = i - half; j <= i + half; ++j) {
            sum += series[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, last))];
        }
        out[static_cast<std::size_t>(i)] = sum / static_cast<double>(k);
    }
    return out;
}

Decomposition decompose(WindowView window, std::size_t k) {
    Decomposition d;
    d.trend.resize(window.channels * window.lag);
    d.residual.resize(window.channels * window.lag);
    for (std::size_t c = 0; c < window.channels; ++c) {
        const auto ch = window.channel(c);
        const auto trend = moving_average(ch, k);
        for (std::size_t l = 0; l < window.lag; ++l) {
            d.trend[c * window.lag + l] = trend[l];
            d.residual[c * window.lag + l] = ch[l] - trend[l];
        }
    }
    return d;
}

double forward_nlinear(WindowView window, const FittedModel& model) {
    if (model.config.algorithm != Algorithm::kNLinear) {
        throw ValidationError("forward_nlinear called with a non-NLinear model");
    }
    detail::check_shapes(model, window.channels, window.lag);
    return detail::evaluate(model, detail::prepare_inputs(model.config, window), 0);
}

double forward_dlinear(WindowView window, const FittedModel& model) {
    if (model.config.algorithm != Algorithm::kDLinear) {
        throw ValidationError("forward_dlinear called with a non-DLinear model");
    }
    detail::check_shapes(model, window.channels, window.lag);
    return detail::evaluate(model, detail::prepare_inputs(model.config, window), 0);
}

double forward(WindowView window, const FittedModel& model) {
    return model.config.algorithm == Algorithm::kDLinear ? forward_dlinear(window, model)
                                                         : forward_nlinear(window, model);
}

std::vector<double> flatten(const FittedModel& model) {
    std::vector<double> p;
    p.reserve(model.w_trend.size() + model.w_resid.size() + model.bias.size() +
              model.mix.size() + 1);
    p.insert(p.end(), model.w_trend.begin(), model.w_trend.end());
    p.insert(p.end(), model.w_resid.begin(), model.w_resid.end());
    p.insert(p.end(), model.bias.begin(), model.bias.end());
    p.insert(p.end(), model.mix.begin(), model.mix.end());
    p.push_back(model.out_bias);
    return p;
}

void unflatten(FittedModel& model, std::span<const double> params) {
    const std::size_t expected =
        model.w_trend.size() + model.w_resid.size() + model.bias.size() + model.mix.size() + 1;
    if (params.size() != expected) {
        throw ValidationError("parameter vector has " + std::to_string(params.size()) +
                              " values, model needs " + std::to_string(expected));
    }
    auto it = params.begin();
    for (auto* v : {&model.w_trend, &model.w_resid, &model.bias, &model.mix}) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(v->size()), v->begin());
        it += static_cast<std::ptrdiff_t>(v->size());
    }
    model.out_bias = *it;
}

std::pair<double, std::vector<double>> loss_and_gradient(const FittedModel& model,
                                                         const WindowedDataset& data,
                                                         std::span<const std::size_t> samples,
                                                         const LossSpec& loss) {
    detail::check_shapes(model, data.channels, data.lag);
    const auto in = detail::prepare_inputs(model.config, data);
    std::vector<double> grad(flatten(model).size(), 0.0);
    std::vector<double> u(model.config.channels);
    double total = 0.0;
    const double scale = samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size());
    for (std::size_t i : samples) {
        const double r = detail::evaluate(model, in, i, u) - data.y[i];
        total += detail::sample_loss(r, loss);
        detail::accumulate_gradient(model, in, i, u, detail::sample_loss_derivative(r, loss) * scale,
                                    grad);
    }
    return {total * scale, std::move(grad)};
}

double mean_squared_error(const FittedModel& model, const WindowedDataset& data) {
    detail::check_shapes(model, data.channels, data.lag);
    if (data.empty()) return 0.0;
    const auto in = detail::prepare_inputs(model.config, data);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = detail::evaluate(model, in, i) - data.y[i];
        total += r * r;
    }
    return total / static_cast<double>(data.size());
}

double predict(const FittedModel& model, WindowView window_unscaled) {
    detail::check_shapes(model, window_unscaled.channels, window_unscaled.lag);
    if (model.config.channels != features::kFeatureCount) {
        throw ValidationError("predict needs a model over the full feature schema");
    }
    std::vector<double> scaled(window_unscaled.data.begin(), window_unscaled.data.end());
    for (std::size_t c = 0; c < window_unscaled.channels; ++c) {
        for (std::size_t l = 0; l < window_unscaled.lag; ++l) {
            double& v = scaled[c * window_unscaled.lag + l];
            v = dataset::scale_value(v, model.scaler, c);
        }
    }
    const double z = forward({scaled, window_unscaled.channels, window_unscaled.lag}, model);
    const double minutes = dataset::unscale_value(z, model.scaler, model.config.target_column);
    return std::max(minutes, 0.0);
}

double predict(const FittedModel& model, WindowView window_unscaled,
               const dataset::ScalerParams& scaler) {
    if (!(scaler == model.scaler)) {
        throw ValidationError("scaler does not match the one the model was trained with");
    }
    return predict(model, window_unscaled);
}

namespace detail {

void check_shapes(const FittedModel& m, std::size_t channels, std::size_t lag) {
    if (channels != m.config.channels || lag != m.config.lag) {
        throw ValidationError("window shape " + std::to_string(channels) + "x" +
                              std::to_string(lag) + " does not match model " +
                              std::to_string(m.config.channels) + "x" +
                              std::to_string(m.config.lag));
    }
    const std::size_t w = m.weight_sets() * m.config.lag;
    const bool dl = m.config.algorithm == Algorithm::kDLinear;
    if (m.w_trend.size() != w || m.w_resid.size() != (dl ? w : 0) ||
        m.bias.size() != channels || m.mix.size() != channels) {
        throw ValidationError("model weight shapes do not match its configuration");
    }
}

namespace {

void fill_inputs(const ModelConfig& cfg, std::span<const double> window, std::size_t i,
                 Inputs& in) {
    const std::size_t d = in.channels;
    const std::size_t L = in.lag;
    const std::size_t base = i * d * L;
    if (cfg.algorithm == Algorithm::kDLinear) {
        const auto dec = decompose({window, d, L}, cfg.kernel_size);
        std::copy(dec.trend.begin(), dec.trend.end(), in.a.begin() + static_cast<std::ptrdiff_t>(base));
        std::copy(dec.residual.begin(), dec.residual.end(),
                  in.b.begin() + static_cast<std::ptrdiff_t>(base));
        return;
    }
    for (std::size_t c = 0; c < d; ++c) {
        const double last = cfg.center_on_last ? window[c * L + L - 1] : 0.0;
        if (cfg.center_on_last) in.offset[i * d + c] = last;
        for (std::size_t l = 0; l < L; ++l) {
            in.a[base + c * L + l] = window[c * L + l] - last;
        }
    }
}

Inputs allocate(const ModelConfig& cfg, std::size_t n, std::size_t channels, std::size_t lag) {
    Inputs in;
    in.n = n;
    in.channels = channels;
    in.lag = lag;
    in.a.resize(n * channels * lag);
    if (cfg.algorithm == Algorithm::kDLinear) in.b.resize(n * channels * lag);
    if (cfg.algorithm == Algorithm::kNLinear && cfg.center_on_last) in.offset.resize(n * channels);
    return in;
}

}  // namespace

Inputs prepare_inputs(const ModelConfig& cfg, const WindowedDataset& data) {
    Inputs in = allocate(cfg, data.size(), data.channels, data.lag);
    for (std::size_t i = 0; i < data.size(); ++i) fill_inputs(cfg, data.window(i).data, i, in);
    return in;
}

Inputs prepare_inputs(const ModelConfig& cfg, WindowView window) {
    Inputs in = allocate(cfg, 1, window.channels, window.lag);
    fill_inputs(cfg, window.data, 0, in);
    return in;
}

double evaluate(const FittedModel& m, const Inputs& in, std::size_t i, std::span<double> u) {
    const std::size_t d = in.channels;
    const std::size_t L = in.lag;
    const bool shared = m.weight_sets() == 1 && d > 1;
    const double* a = in.a.data() + i * d * L;
    const double* b = in.b.empty() ? nullptr : in.b.data() + i * d * L;
    double y = m.out_bias;
    for (std::size_t c = 0; c < d; ++c) {
        const std::size_t ws = (shared ? 0 : c) * L;
        double uc = m.bias[c];
        for (std::size_t l = 0; l < L; ++l) uc += m.w_trend[ws + l] * a[c * L + l];
        if (b != nullptr) {
            for (std::size_t l = 0; l < L; ++l) uc += m.w_resid[ws + l] * b[c * L + l];
        }
        if (!in.offset.empty()) uc += in.offset[i * d + c];
        if (!u.empty()) u[c] = uc;
        y += m.mix[c] * uc;
    }
    return y;
}

void accumulate_gradient(const FittedModel& m, const Inputs& in, std::size_t i,
                         std::span<const double> u, double g, std::span<double> grad) {
    const std::size_t d = in.channels;
    const std::size_t L = in.lag;
    const bool shared = m.weight_sets() == 1 && d > 1;
    const double* a = in.a.data() + i * d * L;
    const double* b = in.b.empty() ? nullptr : in.b.data() + i * d * L;
    double* g_trend = grad.data();
    double* g_resid = g_trend + m.w_trend.size();
    double* g_bias = g_resid + m.w_resid.size();
    double* g_mix = g_bias + m.bias.size();
    double* g_out = g_mix + m.mix.size();
    for (std::size_t c = 0; c < d; ++c) {
        const double gc = g * m.mix[c];
        const std::size_t ws = (shared ? 0 : c) * L;
        for (std::size_t l = 0; l < L; ++l) g_trend[ws + l] += gc * a[c * L + l];
        if (b != nullptr) {
            for (std::size_t l = 0; l < L; ++l) g_resid[ws + l] += gc * b[c * L + l];
        }
        g_bias[c] += gc;
        g_mix[c] += g * u[c];
    }
    *g_out += g;
}

double sample_loss(double r, const LossSpec& loss) {
    if (loss.kind == LossKind::kMse) return r * r;
    const double ar = std::abs(r);
    return ar <= loss.huber_delta ? 0.5 * r * r : loss.huber_delta * (ar - 0.5 * loss.huber_delta);
}

double sample_loss_derivative(double r, const LossSpec& loss) {
    if (loss.kind == LossKind::kMse) return 2.0 * r;
    if (std::abs(r) <= loss.huber_delta) return r;
    return r > 0 ? loss.huber_delta : -loss.huber_delta;
}

}  // namespace detail

}  // namespace edboard::models
