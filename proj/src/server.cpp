#include "eyero/server.hpp"

#include "eyero/errors.hpp"

#include <algorithm>
#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace eyero {

ListenAddress parse_listen_address(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) throw ConfigError("listen address must be host:port");
    ListenAddress a;
    if (colon > 0) a.host = text.substr(0, colon);
    const std::string port = text.substr(colon + 1);
    try {
        std::size_t used = 0;
        const int p = std::stoi(port, &used);
        if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range(port);
        a.port = static_cast<std::uint16_t>(p);
    } catch (const std::exception&) {
        throw ConfigError("bad port in listen address '" + text + "'");
    }
    return a;
}

SessionServer::SessionServer(SessionEngine& engine, ActuatorSink& actuator, LogSink log_sink,
                             const ListenAddress& address)
    : engine_(engine), actuator_(actuator), log_sink_(std::move(log_sink)),
      epoch_(std::chrono::steady_clock::now()) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(address.port);
    if (::inet_pton(AF_INET, address.host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw ConfigError("listen host must be an IPv4 address: " + address.host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 8) != 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw Error("cannot listen on " + address.host + ":" + std::to_string(address.port) +
                    ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

SessionServer::~SessionServer() {
    for (auto& c : clients_) ::close(c.fd);
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

Millis SessionServer::now() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - epoch_)
        .count();
}

void SessionServer::broadcast(const std::string& line) {
    for (auto& c : clients_) {
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            const ssize_t n = ::send(c.fd, p, left, MSG_NOSIGNAL);
            if (n <= 0) {
                if (n < 0 && errno == EINTR) continue;
                break; // reaped on the next read
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
    }
}

void SessionServer::dispatch(Effects& fx) {
    for (const auto& r : fx.log) log_sink_(r);
    for (const auto& i : fx.intents) actuator_.apply(i);
    for (const auto& m : fx.messages) broadcast(m.to_line() + "\n");
    fx.clear();
}

void SessionServer::accept_client() {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd >= 0) clients_.push_back({fd, {}});
}

bool SessionServer::read_client(Client& c, Millis now) {
    char buf[4096];
    const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
    if (n <= 0) return false;
    c.rx.append(buf, static_cast<std::size_t>(n));
    Effects fx;
    std::size_t nl;
    while ((nl = c.rx.find('\n')) != std::string::npos) {
        std::string line = c.rx.substr(0, nl);
        c.rx.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        engine_.handle_line(line, now, fx);
        dispatch(fx);
    }
    return true;
}

void SessionServer::run(const std::atomic<bool>& stop) {
    Effects fx;
    if (!engine_.started()) {
        engine_.start(now(), fx);
        dispatch(fx);
    }

    while (!stop.load() && !engine_.done()) {
        std::vector<pollfd> fds;
        fds.push_back({listen_fd_, POLLIN, 0});
        for (const auto& c : clients_) fds.push_back({c.fd, POLLIN, 0});

        int timeout = 10;
        if (auto d = engine_.next_deadline()) {
            timeout = static_cast<int>(std::clamp<Millis>(*d - now(), 0, 10));
        }
        const int ready = ::poll(fds.data(), fds.size(), timeout);
        if (ready < 0 && errno != EINTR) throw Error(std::string("poll: ") + std::strerror(errno));

        const Millis t = now();
        engine_.tick(t, fx);
        dispatch(fx);

        if (ready > 0) {
            for (std::size_t i = fds.size(); i-- > 1;) {
                if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
                auto& c = clients_[i - 1];
                if (!read_client(c, t)) {
                    ::close(c.fd);
                    clients_.erase(clients_.begin() + static_cast<std::ptrdiff_t>(i - 1));
                }
            }
            if (fds[0].revents & POLLIN) accept_client();
        }
        actuator_.tick(now());
    }
}

} // namespace eyero
