#pragma once

#include "eyero/feedback_controller.hpp"
#include "eyero/gaze_map.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace eyero {

// Wire frame: ASCII "V,<SITE>,<STATE>\n", SITE in {LW,RW,LA,RA}, STATE in {0,1}.
struct SerialCommand {
    BodySite site = BodySite::LeftWrist;
    bool on = false;

    friend bool operator==(const SerialCommand&, const SerialCommand&) = default;
};

std::string encode_command(const SerialCommand& c);
SerialCommand decode_command(std::string_view bytes);
std::string_view site_code(BodySite site);

struct Ack {};

// "A\n" is the only acknowledgement; anything else throws ProtocolError
// carrying the offending bytes.
Ack decode_ack(std::string_view bytes);

inline constexpr std::chrono::milliseconds kAckTimeout{100};

// Byte-level link to the device. read_line returns nullopt on timeout.
class ByteTransport {
public:
    virtual ~ByteTransport() = default;
    virtual void write(std::string_view bytes) = 0;
    virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
};

// Reads one acknowledgement; throws DeviceTimeout when nothing arrives.
Ack read_ack(ByteTransport& transport, std::chrono::milliseconds timeout = kAckTimeout);

struct ActuationRecord {
    Millis ts_ms = 0;
    BodySite site = BodySite::LeftWrist;
    bool on = false;

    friend bool operator==(const ActuationRecord&, const ActuationRecord&) = default;
};

// Ordered record of what the device was told. Per-site states alternate.
class ActuationTimeline {
public:
    // Throws TimingError if ts_ms goes backwards and ContractError if the
    // site is already in the requested state.
    void record(Millis ts_ms, BodySite site, bool on);

    const std::vector<ActuationRecord>& records() const { return records_; }
    bool site_on(BodySite site) const;

    friend bool operator==(const ActuationTimeline&, const ActuationTimeline&) = default;

private:
    std::vector<ActuationRecord> records_;
    std::array<bool, 4> on_{};
};

ActuationTimeline mock_apply(std::span<const ActuatorIntent> intents);

// Emulated firmware: parses each frame, records it on a timeline and answers
// according to the configured behaviour.
class MockDeviceTransport : public ByteTransport {
public:
    enum class Reply { Ack, Garbage, Silent };

    explicit MockDeviceTransport(std::function<Millis()> clock = {});

    void set_reply(Reply reply) { reply_ = reply; }
    void write(std::string_view bytes) override;
    std::optional<std::string> read_line(std::chrono::milliseconds timeout) override;

    const ActuationTimeline& timeline() const { return timeline_; }
    const std::vector<std::string>& frames() const { return frames_; }

private:
    std::function<Millis()> clock_;
    Reply reply_ = Reply::Ack;
    std::string rx_;
    std::deque<std::string> pending_;
    std::vector<std::string> frames_;
    ActuationTimeline timeline_;
};

// POSIX tty at 8N1 with the given baud rate.
class PosixSerialTransport : public ByteTransport {
public:
    PosixSerialTransport(const std::string& device, int baud);
    ~PosixSerialTransport() override;
    PosixSerialTransport(const PosixSerialTransport&) = delete;
    PosixSerialTransport& operator=(const PosixSerialTransport&) = delete;

    void write(std::string_view bytes) override;
    std::optional<std::string> read_line(std::chrono::milliseconds timeout) override;

private:
    int fd_ = -1;
    std::string rx_;
};

// One command in flight: write the frame, wait for the ack.
void send_command(ByteTransport& transport, const SerialCommand& c,
                  std::chrono::milliseconds timeout = kAckTimeout);

// Single-writer FIFO in front of a transport. submit() never blocks on I/O;
// failures are collected and can be drained with take_errors().
class CommandQueue {
public:
    explicit CommandQueue(ByteTransport& transport,
                          std::chrono::milliseconds timeout = kAckTimeout);
    ~CommandQueue();
    CommandQueue(const CommandQueue&) = delete;
    CommandQueue& operator=(const CommandQueue&) = delete;

    void submit(const SerialCommand& c);
    // Blocks until every submitted command has been sent (or failed).
    void flush();
    std::vector<std::string> take_errors();

private:
    void run();

    ByteTransport& transport_;
    std::chrono::milliseconds timeout_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<SerialCommand> queue_;
    std::vector<std::string> errors_;
    bool busy_ = false;
    bool stop_ = false;
    std::thread worker_;
};

// Turns edge-triggered intents into the raw on/off frames of a 1 Hz pulse
// train.
class PulseTrain {
public:
    std::vector<SerialCommand> on_intent(const ActuatorIntent& intent);
    std::vector<SerialCommand> advance(Millis now_ms);

    std::optional<BodySite> active_site() const { return active_; }

private:
    std::optional<BodySite> active_;
    Millis epoch_ms_ = 0;
    bool motor_on_ = false;
};

// Where the session engine sends intents.
class ActuatorSink {
public:
    virtual ~ActuatorSink() = default;
    virtual void apply(const ActuatorIntent& intent) = 0;
    virtual void tick(Millis /*now_ms*/) {}
};

class MockActuator : public ActuatorSink {
public:
    void apply(const ActuatorIntent& intent) override;
    const ActuationTimeline& timeline() const { return timeline_; }

private:
    ActuationTimeline timeline_;
};

class PulsedActuator : public ActuatorSink {
public:
    explicit PulsedActuator(ByteTransport& transport);
    void apply(const ActuatorIntent& intent) override;
    void tick(Millis now_ms) override;
    CommandQueue& queue() { return queue_; }

private:
    PulseTrain pulses_;
    CommandQueue queue_;
};

} // namespace eyero
