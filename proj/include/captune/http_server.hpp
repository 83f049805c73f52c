#pragma once

#include "captune/error.hpp"
#include "captune/service.hpp"

#include <memory>
#include <string>

namespace captune {

// HTTP status for each error code; bodies are {code, message, details}.
int http_status(ErrorCode code);

// JSON API over a Service:
//   POST /projects, GET /projects/{id}, POST /projects/{id}/calibrate,
//   PUT /projects/{id}/anchors, POST /projects/{id}/preview,
//   PATCH /projects/{id}/cues/{n}, GET /projects/{id}/export,
//   POST /sessions, GET /sessions/{id}, PUT /sessions/{id}/prefs,
//   POST /sessions/{id}/chat, GET /sessions/{id}/captions?from_ms=&to_ms=,
//   GET /healthz, GET /metrics.
class HttpServer {
public:
    explicit HttpServer(Service& service, std::string cors_origin = "*");
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds without serving yet. Port 0 picks a free port; returns the bound
    // port or -1.
    int bind(const std::string& host, int port);
    // Serves until stop(). Call after bind().
    bool serve();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace captune
