#pragma once

#include "eyero/actuator_io.hpp"
#include "eyero/session_service.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace eyero {

struct ListenAddress {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7777;
};

// "host:port" or ":port". Throws ConfigError.
ListenAddress parse_listen_address(const std::string& text);

// Serves the newline-delimited JSON protocol over TCP. Any number of
// connections may send events; all of them are serialized into the single
// engine loop and every outbound message is broadcast to every connection.
class SessionServer {
public:
    using LogSink = std::function<void(const EventRecord&)>;

    SessionServer(SessionEngine& engine, ActuatorSink& actuator, LogSink log_sink,
                  const ListenAddress& address);
    ~SessionServer();
    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    std::uint16_t port() const { return port_; }

    // Starts the engine (if needed) and runs until the study is done or
    // `stop` becomes true.
    void run(const std::atomic<bool>& stop);

    // Milliseconds on the service clock.
    Millis now() const;

private:
    struct Client {
        int fd;
        std::string rx;
    };

    void dispatch(Effects& fx);
    void accept_client();
    bool read_client(Client& c, Millis now);
    void broadcast(const std::string& line);

    SessionEngine& engine_;
    ActuatorSink& actuator_;
    LogSink log_sink_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::vector<Client> clients_;
    std::chrono::steady_clock::time_point epoch_;
};

} // namespace eyero
