#include "eyero/actuator_io.hpp"

#include "eyero/errors.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <termios.h>
#include <unistd.h>

namespace eyero {

std::string_view site_code(BodySite site) {
    switch (site) {
        case BodySite::LeftWrist:  return "LW";
        case BodySite::RightWrist: return "RW";
        case BodySite::LeftAnkle:  return "LA";
        case BodySite::RightAnkle: return "RA";
    }
    return "??";
}

std::string encode_command(const SerialCommand& c) {
    std::string out = "V,";
    out += site_code(c.site);
    out += c.on ? ",1\n" : ",0\n";
    return out;
}

SerialCommand decode_command(std::string_view bytes) {
    // Exactly 7 bytes: 'V' ',' S S ',' {0|1} '\n'
    if (bytes.size() != 7 || bytes[0] != 'V' || bytes[1] != ',' || bytes[4] != ',' ||
        bytes[6] != '\n' || (bytes[5] != '0' && bytes[5] != '1')) {
        throw ProtocolError("malformed command frame", std::string(bytes));
    }
    for (BodySite site : kAllBodySites) {
        if (bytes.substr(2, 2) == site_code(site)) {
            return SerialCommand{site, bytes[5] == '1'};
        }
    }
    throw ProtocolError("unknown site code in command frame", std::string(bytes));
}

Ack decode_ack(std::string_view bytes) {
    if (bytes != "A\n") {
        throw ProtocolError("unexpected reply from device", std::string(bytes));
    }
    return Ack{};
}

Ack read_ack(ByteTransport& transport, std::chrono::milliseconds timeout) {
    auto line = transport.read_line(timeout);
    if (!line) {
        throw DeviceTimeout("no acknowledgement within " + std::to_string(timeout.count()) +
                            " ms");
    }
    return decode_ack(*line);
}

void send_command(ByteTransport& transport, const SerialCommand& c,
                  std::chrono::milliseconds timeout) {
    transport.write(encode_command(c));
    read_ack(transport, timeout);
}

// ---- timeline ---------------------------------------------------------------

void ActuationTimeline::record(Millis ts_ms, BodySite site, bool on) {
    if (!records_.empty() && ts_ms < records_.back().ts_ms) {
        throw TimingError("actuation at " + std::to_string(ts_ms) + " ms is out of order");
    }
    auto& current = on_[static_cast<std::size_t>(site)];
    if (current == on) {
        throw ContractError("site " + std::string(to_string(site)) + " is already " +
                            (on ? "on" : "off"));
    }
    current = on;
    records_.push_back({ts_ms, site, on});
}

bool ActuationTimeline::site_on(BodySite site) const {
    return on_[static_cast<std::size_t>(site)];
}

ActuationTimeline mock_apply(std::span<const ActuatorIntent> intents) {
    ActuationTimeline timeline;
    for (const auto& intent : intents) {
        timeline.record(intent.ts_ms, intent.site, intent.active);
    }
    return timeline;
}

// ---- mock device --------------------------------------------------------------

MockDeviceTransport::MockDeviceTransport(std::function<Millis()> clock)
    : clock_(std::move(clock)) {}

void MockDeviceTransport::write(std::string_view bytes) {
    rx_.append(bytes);
    std::size_t nl;
    while ((nl = rx_.find('\n')) != std::string::npos) {
        std::string frame = rx_.substr(0, nl + 1);
        rx_.erase(0, nl + 1);
        frames_.push_back(frame);

        const SerialCommand c = decode_command(frame);
        // Repeating the current level is harmless on real hardware; the
        // timeline only keeps transitions.
        if (timeline_.site_on(c.site) != c.on) {
            timeline_.record(clock_ ? clock_() : 0, c.site, c.on);
        }
        switch (reply_) {
            case Reply::Ack:     pending_.push_back("A\n"); break;
            case Reply::Garbage: pending_.push_back("X\n"); break;
            case Reply::Silent:  break;
        }
    }
}

std::optional<std::string> MockDeviceTransport::read_line(std::chrono::milliseconds) {
    if (pending_.empty()) return std::nullopt;
    std::string line = std::move(pending_.front());
    pending_.pop_front();
    return line;
}

// ---- POSIX serial -------------------------------------------------------------

namespace {

speed_t baud_constant(int baud) {
    switch (baud) {
        case 9600:   return B9600;
        case 19200:  return B19200;
        case 38400:  return B38400;
        case 57600:  return B57600;
        case 115200: return B115200;
        case 230400: return B230400;
        default:
            throw ConfigError("unsupported baud rate " + std::to_string(baud));
    }
}

} // namespace

PosixSerialTransport::PosixSerialTransport(const std::string& device, int baud) {
    const speed_t speed = baud_constant(baud);
    fd_ = ::open(device.c_str(), O_RDWR | O_NOCTTY | O_NONBLOCK);
    if (fd_ < 0) {
        throw Error("cannot open serial device " + device + ": " + std::strerror(errno));
    }
    termios tio{};
    if (::tcgetattr(fd_, &tio) != 0) {
        ::close(fd_);
        throw Error("tcgetattr failed on " + device + ": " + std::strerror(errno));
    }
    ::cfmakeraw(&tio);
    tio.c_cflag &= ~(PARENB | CSTOPB | CSIZE);
    tio.c_cflag |= CS8 | CLOCAL | CREAD;
    ::cfsetispeed(&tio, speed);
    ::cfsetospeed(&tio, speed);
    if (::tcsetattr(fd_, TCSANOW, &tio) != 0) {
        ::close(fd_);
        throw Error("tcsetattr failed on " + device + ": " + std::strerror(errno));
    }
}

PosixSerialTransport::~PosixSerialTransport() {
    if (fd_ >= 0) ::close(fd_);
}

void PosixSerialTransport::write(std::string_view bytes) {
    while (!bytes.empty()) {
        const ssize_t n = ::write(fd_, bytes.data(), bytes.size());
        if (n < 0) {
            if (errno == EAGAIN || errno == EINTR) continue;
            throw Error(std::string("serial write failed: ") + std::strerror(errno));
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
}

std::optional<std::string> PosixSerialTransport::read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto nl = rx_.find('\n'); nl != std::string::npos) {
            std::string line = rx_.substr(0, nl + 1);
            rx_.erase(0, nl + 1);
            return line;
        }
        // Round up so the wait never ends before the full timeout.
        const auto left = std::chrono::ceil<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0 && errno != EINTR) {
            throw Error(std::string("serial poll failed: ") + std::strerror(errno));
        }
        if (ready <= 0) continue;
        char buf[64];
        const ssize_t n = ::read(fd_, buf, sizeof buf);
        if (n > 0) rx_.append(buf, static_cast<std::size_t>(n));
    }
}

// ---- command queue ------------------------------------------------------------

CommandQueue::CommandQueue(ByteTransport& transport, std::chrono::milliseconds timeout)
    : transport_(transport), timeout_(timeout), worker_([this] { run(); }) {}

CommandQueue::~CommandQueue() {
    {
        std::lock_guard lock(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    worker_.join();
}

void CommandQueue::submit(const SerialCommand& c) {
    {
        std::lock_guard lock(mu_);
        queue_.push_back(c);
    }
    cv_.notify_all();
}

void CommandQueue::flush() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

std::vector<std::string> CommandQueue::take_errors() {
    std::lock_guard lock(mu_);
    return std::exchange(errors_, {});
}

void CommandQueue::run() {
    std::unique_lock lock(mu_);
    for (;;) {
        cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
        if (queue_.empty()) return; // stop requested and drained
        const SerialCommand c = queue_.front();
        queue_.pop_front();
        busy_ = true;
        lock.unlock();
        std::string failure;
        try {
            send_command(transport_, c, timeout_);
        } catch (const Error& e) {
            failure = encode_command(c).substr(0, 6) + ": " + e.what();
        }
        lock.lock();
        if (!failure.empty()) errors_.push_back(std::move(failure));
        busy_ = false;
        cv_.notify_all();
    }
}

// ---- pulse train ----------------------------------------------------------------

std::vector<SerialCommand> PulseTrain::on_intent(const ActuatorIntent& intent) {
    std::vector<SerialCommand> out;
    if (intent.active) {
        if (active_ && motor_on_) out.push_back({*active_, false});
        active_ = intent.site;
        epoch_ms_ = intent.ts_ms;
        motor_on_ = true;
        out.push_back({intent.site, true});
    } else if (active_ == intent.site) {
        if (motor_on_) out.push_back({intent.site, false});
        active_.reset();
        motor_on_ = false;
    }
    return out;
}

std::vector<SerialCommand> PulseTrain::advance(Millis now_ms) {
    std::vector<SerialCommand> out;
    if (!active_) return out;
    const bool want_on = pulse_schedule(active_, now_ms, epoch_ms_) == MotorLevel::On;
    if (want_on != motor_on_) {
        motor_on_ = want_on;
        out.push_back({*active_, want_on});
    }
    return out;
}

void MockActuator::apply(const ActuatorIntent& intent) {
    timeline_.record(intent.ts_ms, intent.site, intent.active);
}

PulsedActuator::PulsedActuator(ByteTransport& transport) : queue_(transport) {}

void PulsedActuator::apply(const ActuatorIntent& intent) {
    for (const auto& c : pulses_.on_intent(intent)) queue_.submit(c);
}

void PulsedActuator::tick(Millis now_ms) {
    for (const auto& c : pulses_.advance(now_ms)) queue_.submit(c);
}

} // namespace eyero
