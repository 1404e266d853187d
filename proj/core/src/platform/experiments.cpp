#include "edboard/platform/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "edboard/csv.hpp"
#include "edboard/pipeline.hpp"
#include "edboard/platform/json.hpp"

namespace edboard::platform {

using nlohmann::json;

std::string_view to_string(ExperimentStatus s) {
    switch (s) {
        case ExperimentStatus::kQueued: return "queued";
        case ExperimentStatus::kRunning: return "running";
        case ExperimentStatus::kDone: return "done";
        case ExperimentStatus::kFailed: return "failed";
    }
    return "queued";
}

ExperimentRequest parse_experiment_request(const json& body) {
    if (!body.is_object()) throw ValidationError("experiment body must be a JSON object");
    ExperimentRequest req;
    std::vector<std::string> bad;
    const auto field = [&](const char* key, auto&& read) {
        if (!body.contains(key)) return;
        try {
            read(body.at(key));
        } catch (const std::exception&) {
            bad.emplace_back(key);
        }
    };
    field("features", [&](const json& j) { req.features = j.get<std::vector<std::string>>(); });
    field("target", [&](const json& j) { req.target = j.get<std::string>(); });
    field("lag", [&](const json& j) {
        const auto v = j.get<long long>();
        if (v < 1) throw ValidationError("lag");
        req.lag = static_cast<std::size_t>(v);
    });
    field("horizon", [&](const json& j) { req.horizon = j.get<int>(); });
    field("scaling", [&](const json& j) { req.scaling = j.get<std::string>(); });
    field("algorithm", [&](const json& j) { req.algorithm = models::parse_algorithm(j.get<std::string>()); });
    field("date_range", [&](const json& j) { req.date_range = j.get<TimeRange>(); });
    field("splits", [&](const json& j) {
        double tr = j.at("train").get<double>();
        double va = j.at("val").get<double>();
        double te = j.at("test").get<double>();
        if (tr + va + te > 1.5) {
            tr /= 100.0;
            va /= 100.0;
            te /= 100.0;
        }
        req.splits = {tr, va, te};
    });
    field("learning_rate", [&](const json& j) { req.train.learning_rate = j.get<double>(); });
    field("batch_size", [&](const json& j) { req.train.batch_size = j.get<std::size_t>(); });
    field("max_epochs", [&](const json& j) { req.train.max_epochs = j.get<int>(); });
    field("seed", [&](const json& j) { req.train.seed = j.get<std::uint64_t>(); });
    if (!body.contains("date_range")) bad.emplace_back("date_range");
    if (!bad.empty()) {
        std::string msg = "invalid experiment request:";
        for (const auto& f : bad) msg += " " + f;
        throw ValidationError(msg, bad);
    }
    if (req.features.empty()) {
        for (auto name : features::column_names()) req.features.emplace_back(name);
    }
    validate(req);
    return req;
}

void validate(const ExperimentRequest& req) {
    std::vector<std::string> bad;
    for (const auto& f : req.features) {
        try {
            features::column_index(f);
        } catch (const ValidationError&) {
            bad.emplace_back("features");
            break;
        }
    }
    std::size_t target = 0;
    try {
        target = features::column_index(req.target);
        if (features::is_binary_column(target)) bad.emplace_back("target");
    } catch (const ValidationError&) {
        bad.emplace_back("target");
    }
    if (req.lag < 1) bad.emplace_back("lag");
    try {
        pipeline::validate_horizon(req.horizon);
    } catch (const ValidationError&) {
        bad.emplace_back("horizon");
    }
    if (req.scaling != "standard" && req.scaling != "none") bad.emplace_back("scaling");
    if (!(req.date_range.from < req.date_range.to)) bad.emplace_back("date_range");
    try {
        dataset::validate(req.splits);
    } catch (const ValidationError&) {
        bad.emplace_back("splits");
    }
    try {
        models::validate(req.train);
    } catch (const ValidationError&) {
        bad.emplace_back("train");
    }
    if (!bad.empty()) {
        std::string msg = "invalid experiment request:";
        for (const auto& f : bad) msg += " " + f;
        throw ValidationError(msg, bad);
    }
}

ExperimentManager::ExperimentManager(Store& store, Clock clock, bool background)
    : store_(store), clock_(std::move(clock)), background_(background) {}

ExperimentManager::~ExperimentManager() { wait_all(); }

void ExperimentManager::wait_all() {
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(mutex_);
        threads.swap(threads_);
    }
    for (auto& t : threads) {
        if (t.joinable()) t.join();
    }
}

std::string ExperimentManager::submit(ExperimentRequest req) {
    validate(req);
    std::string id;
    {
        std::lock_guard lock(mutex_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "exp-%04zu", next_id_++);
        id = buf;
        Experiment e;
        e.id = id;
        e.request = std::move(req);
        e.submitted_ts = clock_();
        e.log.emplace_back("Ready to train...");
        experiments_.emplace(id, std::move(e));
    }
    if (background_) {
        std::lock_guard lock(mutex_);
        threads_.emplace_back([this, id] { run(id); });
    } else {
        run(id);
    }
    return id;
}

std::optional<Experiment> ExperimentManager::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = experiments_.find(id);
    if (it == experiments_.end()) return std::nullopt;
    return it->second;
}

std::vector<Experiment> ExperimentManager::list() const {
    std::lock_guard lock(mutex_);
    std::vector<Experiment> out;
    for (const auto& [id, e] : experiments_) out.push_back(e);
    return out;
}

std::vector<std::string> ExperimentManager::log_since(const std::string& id, std::size_t since) const {
    std::lock_guard lock(mutex_);
    const auto it = experiments_.find(id);
    if (it == experiments_.end()) throw NotFoundError("experiment '" + id + "' not found");
    const auto& log = it->second.log;
    if (since >= log.size()) return {};
    return {log.begin() + static_cast<std::ptrdiff_t>(since), log.end()};
}

void ExperimentManager::append_log(const std::string& id, std::string line) {
    std::lock_guard lock(mutex_);
    experiments_.at(id).log.push_back(std::move(line));
}

void ExperimentManager::set_status(const std::string& id, ExperimentStatus s) {
    std::lock_guard lock(mutex_);
    experiments_.at(id).status = s;
}

void ExperimentManager::run(const std::string& id) {
    const ExperimentRequest req = get(id)->request;
    set_status(id, ExperimentStatus::kRunning);
    try {
        features::FeatureTable table;
        table.rows = store_.features(req.date_range);
        table.gaps = features::detect_gaps(table.rows);
        append_log(id, "Loaded " + std::to_string(table.rows.size()) + " hourly rows");
        if (table.rows.size() < 3) throw InsufficientDataError("too few rows in the date range");
        const auto prepared = pipeline::prepare(table, req.splits,
                                                dataset::DegeneratePolicy::kCenterOnly,
                                                req.scaling == "standard");
        const dataset::WindowSpec spec{req.lag, req.horizon, req.target};
        std::vector<std::size_t> columns;
        for (const auto& f : req.features) columns.push_back(features::column_index(f));
        const std::size_t target = features::column_index(req.target);
        if (std::find(columns.begin(), columns.end(), target) == columns.end()) {
            columns.push_back(target);
        }
        const auto raw_test = dataset::make_windows(prepared.raw.test, spec);
        if (raw_test.empty()) throw InsufficientDataError("test split has no windows");

        std::vector<double> y_hat;
        if (models::is_trainable(req.algorithm)) {
            const auto train = dataset::select_channels(dataset::make_windows(prepared.scaled.train, spec), columns);
            const auto val = dataset::select_channels(dataset::make_windows(prepared.scaled.val, spec), columns);
            const auto test = dataset::select_channels(dataset::make_windows(prepared.scaled.test, spec), columns);
            if (train.empty() || val.empty()) {
                throw InsufficientDataError("train or validation split has no windows");
            }
            append_log(id, "Windows: train " + std::to_string(train.size()) + ", val " +
                               std::to_string(val.size()) + ", test " + std::to_string(test.size()));
            models::ModelConfig mc =
                req.algorithm == models::Algorithm::kDLinear
                    ? models::dlinear_config(req.lag, columns.size(), pipeline::fit_kernel(13, req.lag))
                    : models::nlinear_config(req.lag, columns.size());
            mc.target_column = train.target_column;
            const auto observer = [&](const models::EpochRecord& r) {
                append_log(id, "epoch " + std::to_string(r.epoch) + " train_loss=" +
                                   csv::format_fixed(r.train_loss, 6) +
                                   " val_loss=" + csv::format_fixed(r.val_loss, 6));
                return true;
            };
            const auto model = models::train(mc, req.train, train, val, observer);
            append_log(id, "best epoch " + std::to_string(model.best_epoch));
            for (std::size_t i = 0; i < test.size(); ++i) {
                const double z = models::forward(test.window(i), model);
                y_hat.push_back(std::max(dataset::unscale_value(z, prepared.scaler, target), 0.0));
            }
        } else {
            y_hat = pipeline::baseline_split(req.algorithm, raw_test).y_hat;
        }
        const auto metrics = eval::compute_metrics(raw_test.y, y_hat);
        append_log(id, "test MAE=" + csv::format_fixed(metrics.mae, 4) +
                           " RMSE=" + csv::format_fixed(metrics.rmse, 4) +
                           (metrics.r2 ? " R2=" + csv::format_fixed(*metrics.r2, 4) : "") +
                           (metrics.mape ? " MAPE=" + csv::format_fixed(*metrics.mape, 4) : ""));
        {
            std::lock_guard lock(mutex_);
            auto& e = experiments_.at(id);
            e.test_metrics = metrics;
            e.status = ExperimentStatus::kDone;
            e.log.emplace_back("done");
        }
    } catch (const std::exception& ex) {
        std::lock_guard lock(mutex_);
        auto& e = experiments_.at(id);
        e.error = ex.what();
        e.status = ExperimentStatus::kFailed;
        e.log.push_back(std::string("failed: ") + ex.what());
    }
}

}  // namespace edboard::platform
