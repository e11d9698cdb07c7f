#include "qcity/http_server.hpp"

#include <httplib.h>

#include "qcity/error.hpp"

namespace qcity {

namespace {

QueryParams params_of(const httplib::Request& req) {
    QueryParams q;
    for (const auto& [k, v] : req.params) {
        q.emplace(k, v); // first value wins for repeated keys
    }
    return q;
}

} // namespace

ApiServer::ApiServer(const QueryService& service)
    : m_service(service), m_server(std::make_unique<httplib::Server>()) {
    auto reply = [this](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
        const auto& origin = m_service.config().allowed_origin;
        if (!origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
        }
    };
    auto route = [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, m_service.handle(req.path, params_of(req)));
    };
    m_server->Get("/zones", route);
    m_server->Get("/density", route);
    m_server->Get("/timeline", route);
    m_server->Get("/events", route);
    m_server->Get(R"(/events/([^/]+))", route);
    m_server->Get("/traffic", route);
    m_server->Options(R"(.*)", [this](const httplib::Request&, httplib::Response& res) {
        const auto& origin = m_service.config().allowed_origin;
        if (!origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
        res.status = 204;
    });
    m_server->set_error_handler([reply](const httplib::Request& req, httplib::Response& res) {
        if (res.status == 404 && res.body.empty()) {
            reply(res, error_response(404, "not_found", "no route for " + req.path));
        }
    });
}

ApiServer::~ApiServer() {
    stop();
}

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        m_port = m_server->bind_to_any_port(host);
    } else {
        m_port = m_server->bind_to_port(host, port) ? port : -1;
    }
    if (m_port < 0) {
        throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    }
    return m_port;
}

void ApiServer::start() {
    m_thread = std::thread([this] { m_server->listen_after_bind(); });
    m_server->wait_until_ready();
}

void ApiServer::run() {
    m_server->listen_after_bind();
}

void ApiServer::stop() {
    if (m_server) {
        m_server->stop();
    }
    if (m_thread.joinable()) {
        m_thread.join();
    }
}

} // namespace qcity
