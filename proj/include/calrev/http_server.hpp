#pragma once

#include "calrev/service.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace calrev {

// JSON over HTTP in front of an AssessorService:
//   GET  /topics
//   GET  /topics/{id}/next?assessor=A        200 payload, 204 when exhausted
//   POST /topics/{id}/judgments              {doc_id, assessor_id, label}
//   GET  /topics/{id}/status
//   GET  /topics/{id}/run?method=i|ii|iii    TREC run body (text/plain)
// Errors: 400 validation, 404 unknown topic/document, 409 lease or budget
// conflict and untrained model, 500 otherwise; body {"error": "..."}.
// When `ui_dir` exists it is served as static files under "/".
class HttpServer {
public:
    explicit HttpServer(AssessorService& service, std::optional<std::filesystem::path> ui_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds an ephemeral port; returns it, or -1 on failure.
    int bind_to_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    // Blocks serving requests until stop().
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace calrev
