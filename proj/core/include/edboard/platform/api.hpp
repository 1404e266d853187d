#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "edboard/platform/experiments.hpp"
#include "edboard/platform/service.hpp"
#include "edboard/platform/store.hpp"

namespace edboard::platform {

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;  ///< lower-case names
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;  ///< JSON
};

struct ApiConfig {
    /// Required as "Authorization: Bearer <token>" on every /api route except
    /// /api/health. An empty token disables the check.
    std::string token;
    std::size_t history_hours = 72;
    std::size_t recent_events = 40;
    std::size_t max_feature_rows = 10000;
};

/// HTTP/JSON API over the platform. handle() is transport independent; serve() exposes
/// it over HTTP. Errors are returned as {"code": ..., "message": ...}.
class ApiServer {
public:
    ApiServer(Store& store, ForecastService& service, ExperimentManager& experiments,
              ApiConfig cfg, Clock clock);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    ApiResponse handle(const ApiRequest& req);

    /// Called after POST /api/retrain enqueued jobs, e.g. to wake a JobRunner.
    void on_jobs_enqueued(std::function<void()> callback);

    /// Binds the socket; returns the bound port (pass 0 for any free port).
    int bind(const std::string& host, int port);
    /// Serves requests until stop() is called. Call bind() first.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace edboard::platform
