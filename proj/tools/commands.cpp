#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <regex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "edboard/error.hpp"
#include "edboard/eval.hpp"
#include "edboard/pipeline.hpp"
#include "edboard/platform/api.hpp"
#include "edboard/platform/experiments.hpp"
#include "edboard/platform/jobs.hpp"
#include "edboard/platform/loop.hpp"
#include "edboard/platform/replay.hpp"
#include "edboard/platform/store.hpp"
#include "edboard/tuner.hpp"
#include "run_config.hpp"

namespace edboard::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> hours;
    std::vector<int> horizons;
    std::string algorithm;
    std::string out;
    std::optional<int> port;
    std::string token;
};

RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) apply_config_file(cfg, f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.hours) cfg.hours = *f.hours;
    if (!f.horizons.empty()) cfg.horizons = f.horizons;
    if (!f.algorithm.empty()) cfg.algorithms = {models::parse_algorithm(f.algorithm)};
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.port) cfg.port = *f.port;
    if (!f.token.empty()) cfg.token = f.token;
    validate(cfg);
    return cfg;
}

void log_config(std::ostream& out, const std::string& command, const RunConfig& cfg) {
    out << "# edboard " << command << " (seed " << cfg.seed << ")\n";
    for (const auto& [key, value] : describe(cfg)) out << "# " << key << " = " << value << '\n';
}

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw ValidationError(what + " not found: " + path.string() +
                              " (run the producing command first)");
    }
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    out << text;
}

std::vector<TimeRange> exclusions(const RunConfig& cfg) {
    if (!cfg.exclude_covid) return {};
    return {features::default_exclusion()};
}

features::FeatureTable load_features(const RunConfig& cfg) {
    require_file(cfg.features_csv(), "feature table");
    std::ifstream in(cfg.features_csv());
    return features::read_features_csv(in);
}

std::vector<models::Algorithm> trainable(const RunConfig& cfg) {
    std::vector<models::Algorithm> out;
    for (auto a : cfg.algorithms) {
        if (models::is_trainable(a)) out.push_back(a);
    }
    if (out.empty()) throw ValidationError("no trainable algorithm selected", {"algorithms"});
    return out;
}

std::string model_stem(models::Algorithm algo, int h) {
    return std::string(models::to_string(algo)) + "-h" + std::to_string(h);
}

/// Highest existing version of `<algo>-h<h>-vNNN.json`, or 0.
int latest_version(const fs::path& dir, models::Algorithm algo, int h) {
    if (!fs::exists(dir)) return 0;
    const std::regex pattern(model_stem(algo, h) + R"(-v(\d+)\.json)");
    int best = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const auto name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) best = std::max(best, std::stoi(m[1].str()));
    }
    return best;
}

fs::path versioned_path(const fs::path& dir, models::Algorithm algo, int h, int version) {
    std::ostringstream name;
    name << model_stem(algo, h) << "-v" << std::setw(3) << std::setfill('0') << version << ".json";
    return dir / name.str();
}

std::string fixed(double v, int digits = 2) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

// -- commands -------------------------------------------------------------------

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
    const auto scenario = cfg.resolved_scenario();
    synth::validate(scenario);
    const auto corpus = synth::generate_corpus(scenario);
    synth::write_corpus(cfg.corpus(), corpus, scenario);
    out << "wrote " << corpus.encounters.size() << " encounters, " << corpus.context.size()
        << " context hours, " << corpus.inpatient.size() << " inpatient events to "
        << cfg.corpus().string() << '\n';
}

void cmd_features(const RunConfig& cfg, std::ostream& out) {
    require_file(cfg.corpus() / "encounters.csv", "corpus");
    const auto corpus = synth::read_corpus(cfg.corpus());
    const auto ex = exclusions(cfg);
    const auto build = pipeline::build_features(corpus, ex);
    std::ostringstream csv;
    features::write_features_csv(csv, build.table);
    write_text(cfg.features_csv(), csv.str());

    const auto& r = build.report;
    nlohmann::json report{{"n_input", r.n_input},
                          {"n_kept", r.n_kept},
                          {"n_dropped_waiting", r.n_dropped_waiting},
                          {"n_dropped_boarding", r.n_dropped_boarding},
                          {"dropped_fraction_waiting", r.dropped_fraction_waiting},
                          {"n_rows", build.table.size()}};
    report["excluded_hour_range"] =
        r.excluded_hour_range ? nlohmann::json{{"from", format_iso8601(r.excluded_hour_range->from)},
                                               {"to", format_iso8601(r.excluded_hour_range->to)}}
                              : nlohmann::json(nullptr);
    write_text(cfg.out_dir / "cleaning_report.json", report.dump(2) + "\n");
    out << "wrote " << build.table.size() << " hourly rows to " << cfg.features_csv().string()
        << " (kept " << r.n_kept << " of " << r.n_input << " encounters)\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
    const auto algos = trainable(cfg);
    const auto prepared = pipeline::prepare(load_features(cfg), cfg.split);
    auto tcfg = cfg.train;
    tcfg.seed = cfg.seed;
    fs::create_directories(cfg.model_store());
    for (int h : cfg.horizons) {
        const auto windows = pipeline::make_horizon_windows(prepared, cfg.lag, h);
        if (windows.train.empty() || windows.val.empty() || windows.test.empty()) {
            throw InsufficientDataError("too few rows for lag " + std::to_string(cfg.lag) +
                                        " and horizon " + std::to_string(h));
        }
        for (auto algo : algos) {
            const auto model = pipeline::fit(
                prepared, windows, pipeline::default_model_config(algo, cfg.lag, cfg.kernel_size), tcfg);
            const auto path =
                versioned_path(cfg.model_store(), algo, h, latest_version(cfg.model_store(), algo, h) + 1);
            models::save_model(path, model);
            out << models::to_string(algo) << " h=" << h << " epochs=" << model.history.size()
                << " val_mae=" << fixed(model.metrics.at("val_mae"))
                << " test_mae=" << fixed(model.metrics.at("mae")) << " -> " << path.string() << '\n';
        }
    }
}

void cmd_tune(const RunConfig& cfg, std::ostream& out) {
    const auto algos = trainable(cfg);
    const auto prepared = pipeline::prepare(load_features(cfg), cfg.split);
    for (int h : cfg.horizons) {
        const auto windows = pipeline::make_horizon_windows(prepared, cfg.lag, h);
        for (auto algo : algos) {
            auto space = tuner::default_space(algo, cfg.lag);
            space.training.max_epochs = cfg.train.max_epochs;
            space.training.patience = cfg.train.patience;
            const auto result = tuner::random_search(space, windows.train, windows.val, cfg.trials, cfg.seed);
            const fs::path dir = cfg.out_dir / "tune" / model_stem(algo, h);
            std::ostringstream csv;
            tuner::write_trials_csv(csv, result.trials);
            write_text(dir / "trials.csv", csv.str());
            write_text(dir / "best_config.json", tuner::best_config_json(result.best) + "\n");
            out << models::to_string(algo) << " h=" << h << " best trial " << result.best.trial_id
                << " val_mse=" << fixed(*result.best.final_val_loss, 5) << " -> " << dir.string() << '\n';
        }
    }
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    pipeline::ModelMap loaded;
    std::vector<std::string> missing;
    for (int h : cfg.horizons) {
        for (auto algo : cfg.algorithms) {
            if (!models::is_trainable(algo)) continue;
            const int version = latest_version(cfg.model_store(), algo, h);
            if (version == 0) {
                missing.push_back((cfg.model_store() / (model_stem(algo, h) + "-vNNN.json")).string());
                continue;
            }
            loaded.emplace(std::make_pair(algo, h),
                           models::load_model(versioned_path(cfg.model_store(), algo, h, version)));
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += "\n  " + m;
        throw ValidationError("missing model artifacts (run 'edboard train' first):" + list);
    }
    const auto prepared = pipeline::prepare(load_features(cfg), cfg.split);
    for (const auto& [key, model] : loaded) {
        if (!(model.scaler == prepared.scaler)) {
            throw ValidationError("model " + model_stem(key.first, key.second) +
                                  " was trained on a different feature table or split");
        }
    }
    pipeline::BenchmarkConfig bench;
    bench.lag = cfg.lag;
    bench.horizons = cfg.horizons;
    bench.algorithms = cfg.algorithms;
    const auto result = pipeline::evaluate_models(prepared, bench, std::move(loaded));

    std::ostringstream board;
    eval::write_leaderboard_csv(board, result.board);
    write_text(cfg.out_dir / "leaderboard.csv", board.str());
    std::ostringstream extremes;
    eval::write_extreme_csv(extremes, result.extremes);
    write_text(cfg.out_dir / "extreme_report.csv", extremes.str());
    out << board.str();
}

void cmd_replay(const RunConfig& cfg, std::ostream& out) {
    require_file(cfg.corpus() / "encounters.csv", "corpus");
    const auto corpus = synth::read_corpus(cfg.corpus());
    const fs::path journal = cfg.store() / "store.jsonl";
    if (fs::exists(journal)) {
        out << "# replacing existing store " << journal.string() << '\n';
        fs::remove(journal);
    }
    platform::FileStore store(cfg.store());
    platform::Replayer replayer(corpus, exclusions(cfg), &store);
    if (!cfg.loop) {
        const auto rows = replayer.run_to_end();
        out << "replayed " << rows << " hourly rows into " << cfg.store().string() << '\n';
        return;
    }
    platform::ModelCache cache;
    platform::ServiceConfig scfg;
    scfg.lag = cfg.lag;
    scfg.horizons = cfg.horizons;
    platform::ForecastService service(store, cache, scfg);
    platform::WorkerConfig wcfg;
    wcfg.artifact_dir = cfg.model_store() / "platform";
    wcfg.split = cfg.split;
    wcfg.lag = cfg.lag;
    wcfg.kernel_size = cfg.kernel_size;
    wcfg.train = cfg.train;
    wcfg.train.seed = cfg.seed;
    platform::PlatformLoop* loop_ptr = nullptr;
    platform::RetrainWorker worker(store, cache, wcfg, [&] { return loop_ptr->now(); });
    platform::LoopConfig lcfg;
    lcfg.monitor = cfg.monitor;
    platform::PlatformLoop loop(replayer, service, &worker, lcfg);
    loop_ptr = &loop;
    std::size_t jobs = 0;
    for (const auto& step : loop.run()) jobs += step.jobs_processed;
    out << "replayed " << store.feature_count() << " hourly rows, " << store.forecast_count()
        << " forecasts, " << jobs << " retrain jobs, " << store.registry().size()
        << " registered models into " << cfg.store().string() << '\n';
}

std::atomic<bool>* g_stop = nullptr;

extern "C" void handle_signal(int) {
    if (g_stop) g_stop->store(true);
}

void cmd_serve(const RunConfig& cfg, std::ostream& out) {
    platform::FileStore store(cfg.store());
    platform::ModelCache cache;
    platform::ServiceConfig scfg;
    scfg.lag = cfg.lag;
    scfg.horizons = cfg.horizons;
    platform::ForecastService service(store, cache, scfg);

    std::optional<synth::Corpus> corpus;
    if (cfg.replay) {
        require_file(cfg.corpus() / "encounters.csv", "corpus");
        if (store.feature_count() > 0) {
            throw ValidationError("store " + cfg.store().string() +
                                  " already holds feature rows; remove it or set replay = false");
        }
        corpus = synth::read_corpus(cfg.corpus());
    }
    std::atomic<std::int64_t> sim_seconds{0};
    platform::Clock clock = platform::system_clock();
    if (corpus) {
        clock = [&sim_seconds] { return Timestamp{Seconds{sim_seconds.load()}}; };
    }

    platform::WorkerConfig wcfg;
    wcfg.artifact_dir = cfg.model_store() / "platform";
    wcfg.split = cfg.split;
    wcfg.lag = cfg.lag;
    wcfg.kernel_size = cfg.kernel_size;
    wcfg.train = cfg.train;
    wcfg.train.seed = cfg.seed;
    platform::RetrainWorker worker(store, cache, wcfg, clock);
    platform::ExperimentManager experiments(store, clock);
    platform::ApiConfig acfg;
    acfg.token = cfg.token;
    platform::ApiServer api(store, service, experiments, acfg, clock);

    std::atomic<bool> stop{false};
    g_stop = &stop;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::optional<platform::JobRunner> runner;
    std::thread replay_thread;
    std::optional<platform::Replayer> replayer;
    if (corpus) {
        replayer.emplace(*corpus, exclusions(cfg), &store);
        sim_seconds = replayer->state().clock.time_since_epoch().count();
        replay_thread = std::thread([&] {
            platform::LoopConfig lcfg;
            lcfg.monitor = cfg.monitor;
            platform::PlatformLoop loop(*replayer, service, &worker, lcfg);
            while (!stop.load()) {
                const auto report = loop.step();
                sim_seconds = loop.now().time_since_epoch().count();
                if (report.end_of_stream) break;
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg.replay_interval_ms));
            }
        });
    } else {
        runner.emplace(worker);
        runner->start();
        api.on_jobs_enqueued([&] { runner->notify(); });
    }

    const int port = api.bind(cfg.host, cfg.port);
    out << "listening on http://" << cfg.host << ":" << port << std::endl;
    std::thread http([&] { api.listen(); });
    while (!stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    api.stop();
    http.join();
    if (replay_thread.joinable()) replay_thread.join();
    if (runner) runner->stop();
    experiments.wait_all();
    g_stop = nullptr;
    out << "stopped" << std::endl;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Emergency department boarding-time forecasting toolkit", "edboard"};
    app.require_subcommand(1);
    Flags flags;
    const auto add_common = [&flags](CLI::App* sub) {
        sub->add_option("--config", flags.config, "key = value configuration file");
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_option("--hours", flags.hours, "corpus length in hours");
        sub->add_option("--horizon", flags.horizons, "forecast horizon (repeatable)")
            ->check(CLI::IsMember({6, 8, 10, 12, 24}));
        sub->add_option("--algorithm", flags.algorithm, "restrict to one algorithm")
            ->check(CLI::IsMember({"nlinear", "dlinear", "persistence", "seasonal"}, CLI::ignore_case));
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--port", flags.port, "HTTP port (serve)");
        sub->add_option("--token", flags.token, "bearer token required by the API (serve)");
    };
    using Command = void (*)(const RunConfig&, std::ostream&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands{
        {"synth", "generate a synthetic corpus", cmd_synth},
        {"features", "clean the corpus and build the hourly feature table", cmd_features},
        {"train", "train NLinear/DLinear models per horizon", cmd_train},
        {"tune", "random hyperparameter search per algorithm and horizon", cmd_tune},
        {"evaluate", "score trained models and baselines on the test split", cmd_evaluate},
        {"replay", "stream the corpus into the platform store", cmd_replay},
        {"serve", "run the HTTP API until interrupted", cmd_serve},
    };
    for (const auto& [name, help, fn] : commands) add_common(app.add_subcommand(name, help));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return kExitOk;
        err << app.help();
        return kExitUsage;
    }

    for (const auto& [name, help, fn] : commands) {
        if (!app.got_subcommand(name)) continue;
        try {
            const RunConfig cfg = resolve(flags);
            log_config(err, name, cfg);
            fn(cfg, out);
            return kExitOk;
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitRuntime;
        }
    }
    return kExitUsage;
}

}  // namespace edboard::cli
