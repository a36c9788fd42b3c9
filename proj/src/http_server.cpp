#include "calrev/http_server.hpp"

#include "calrev/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <sstream>

namespace calrev {

using nlohmann::json;

namespace {

json optional_count(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const DocumentPayload& p) {
    return {{"doc_id", p.document.doc_id},
            {"title", p.document.title},
            {"abstract", p.document.abstract},
            {"authors", p.document.authors},
            {"year", p.document.year},
            {"publisher", p.document.publisher},
            {"highlight_terms", p.highlight_terms},
            {"m", p.m},
            {"n", p.n},
            {"assessed_count", p.assessed_count},
            {"budget_remaining", optional_count(p.budget_remaining)},
            {"stop_recommended", p.stop_recommended},
            {"lease_expires_at", p.lease_expires_at}};
}

json to_json(const JudgmentAck& a) {
    return {{"doc_id", a.doc_id},
            {"label", a.label},
            {"applied", a.applied},
            {"m", a.m},
            {"n", a.n},
            {"assessed_count", a.assessed_count},
            {"budget_remaining", optional_count(a.budget_remaining)},
            {"stop_recommended", a.stop_recommended}};
}

json to_json(const StatusReport& s) {
    return {{"topic_id", s.topic_id},
            {"mode", std::string(to_string(s.mode))},
            {"m", s.m},
            {"n", s.n},
            {"assessed_count", s.assessed_count},
            {"batch_index", s.batch_index},
            {"batch_size", s.batch_size},
            {"budget_remaining", optional_count(s.budget_remaining)},
            {"stop_recommended", s.stop_recommended},
            {"model_trained", s.model_trained},
            {"active_leases", s.active_leases},
            {"assessments_by_assessor", s.assessments_by_assessor}};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const ValidationError& e) {
            send_json(res, 400, {{"error", e.what()}});
        } catch (const ParseError& e) {
            send_json(res, 400, {{"error", e.what()}});
        } catch (const json::exception& e) {
            send_json(res, 400, {{"error", std::string("bad request body: ") + e.what()}});
        } catch (const NotFoundError& e) {
            send_json(res, 404, {{"error", e.what()}});
        } catch (const ConflictError& e) {
            send_json(res, 409, {{"error", e.what()}});
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", e.what()}});
        }
    };
}

int topic_of(const httplib::Request& req) {
    try {
        return std::stoi(req.matches[1].str());
    } catch (const std::exception&) {
        throw NotFoundError("unknown topic " + req.matches[1].str());
    }
}

}  // namespace

struct HttpServer::Impl {
    explicit Impl(AssessorService& s) : service(s) {}
    AssessorService& service;
    httplib::Server server;
};

HttpServer::HttpServer(AssessorService& service, std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(service)) {
    auto& svc = impl_->service;
    auto& server = impl_->server;

    server.Get("/topics", guarded([&svc](const httplib::Request&, httplib::Response& res) {
        json topics = json::array();
        for (int id : svc.topic_ids()) {
            const Topic* t = svc.collection().find_topic(id);
            topics.push_back({{"topic_id", id},
                              {"query", t ? t->query : ""},
                              {"question", t ? t->question : ""},
                              {"narrative", t ? t->narrative : ""}});
        }
        send_json(res, 200, topics);
    }));

    server.Get(R"(/topics/(\d+)/next)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const std::string assessor = req.get_param_value("assessor");
        auto payload = svc.next(topic_of(req), assessor);
        if (!payload) {
            res.status = 204;
            return;
        }
        send_json(res, 200, to_json(*payload));
    }));

    server.Post(R"(/topics/(\d+)/judgments)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const int topic = topic_of(req);
        const json body = json::parse(req.body);
        if (!body.is_object()) throw ValidationError("judgment body must be a JSON object");
        if (!body.contains("label") || !body.at("label").is_number_integer())
            throw ValidationError("label must be an integer");
        const auto ack = svc.judge(topic, body.at("doc_id").get<std::string>(),
                                   body.at("assessor_id").get<std::string>(), body.at("label").get<int>());
        send_json(res, 200, to_json(ack));
    }));

    server.Get(R"(/topics/(\d+)/status)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(svc.status(topic_of(req))));
    }));

    server.Get(R"(/topics/(\d+)/run)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const int topic = topic_of(req);
        const auto method = parse_ordering_method(req.has_param("method") ? req.get_param_value("method") : "i");
        const auto run = svc.export_run(topic, method);
        std::ostringstream body;
        write_run(run, body);
        res.status = 200;
        res.set_content(body.str(), "text/plain");
    }));

    if (ui_dir && std::filesystem::is_directory(*ui_dir)) server.set_mount_point("/", ui_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace calrev
