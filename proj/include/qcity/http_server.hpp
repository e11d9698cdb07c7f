#pragma once

#include <memory>
#include <string>
#include <thread>

#include "qcity/api.hpp"

namespace httplib {
class Server;
}

namespace qcity {

// HTTP/1.1 front end for a QueryService. GET routes /zones, /density,
// /timeline, /events, /events/{id}, /traffic.
class ApiServer {
public:
    explicit ApiServer(const QueryService& service);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Binds host:port (port 0 picks a free one) and returns the bound port.
    // Throws Error(IoError) when the socket cannot be bound.
    int bind(const std::string& host, int port);

    // Serves on a background thread until stop().
    void start();
    // Serves on the calling thread until stop() is called elsewhere.
    void run();
    void stop();

    int port() const { return m_port; }

private:
    const QueryService& m_service;
    std::unique_ptr<httplib::Server> m_server;
    std::thread m_thread;
    int m_port = -1;
};

} // namespace qcity
