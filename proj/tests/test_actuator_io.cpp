#include "eyero/actuator_io.hpp"
#include "eyero/errors.hpp"

#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <fcntl.h>
#include <random>
#include <thread>
#include <unistd.h>

using namespace eyero;
using namespace std::chrono_literals;

TEST_CASE("command encoding") {
    CHECK(encode_command({BodySite::LeftWrist, true}) == "V,LW,1\n");
    CHECK(encode_command({BodySite::RightAnkle, false}) == "V,RA,0\n");
    int count = 0;
    for (BodySite s : kAllBodySites) {
        for (bool on : {false, true}) {
            const SerialCommand c{s, on};
            const std::string bytes = encode_command(c);
            CHECK(bytes.size() == 7);
            CHECK(decode_command(bytes) == c);
            ++count;
        }
    }
    CHECK(count == 8);
}

TEST_CASE("malformed frames carry the offending bytes") {
    for (const char* bad : {"V,LW,2\n", "V,XX,1\n", "V,LW,1", "v,LW,1\n", "V;LW,1\n", ""}) {
        try {
            decode_command(bad);
            FAIL("accepted " << bad);
        } catch (const ProtocolError& e) {
            CHECK(e.offending_bytes() == bad);
        }
    }
}

TEST_CASE("acknowledgement") {
    CHECK_NOTHROW(decode_ack("A\n"));
    CHECK_THROWS_AS(decode_ack("X\n"), ProtocolError);
    CHECK_THROWS_AS(decode_ack("A"), ProtocolError);

    MockDeviceTransport dev;
    CHECK_NOTHROW(send_command(dev, {BodySite::LeftAnkle, true}));
    dev.set_reply(MockDeviceTransport::Reply::Garbage);
    CHECK_THROWS_AS(send_command(dev, {BodySite::LeftAnkle, false}), ProtocolError);
    dev.set_reply(MockDeviceTransport::Reply::Silent);
    CHECK_THROWS_AS(send_command(dev, {BodySite::LeftAnkle, true}), DeviceTimeout);
    CHECK(dev.frames().size() == 3);
}

TEST_CASE("timeline from intents") {
    std::vector<ActuatorIntent> intents{{BodySite::LeftWrist, true, 10},
                                        {BodySite::LeftWrist, false, 500}};
    const auto t = mock_apply(intents);
    REQUIRE(t.records().size() == 2);
    CHECK(t.records()[0] == ActuationRecord{10, BodySite::LeftWrist, true});
    CHECK(t.records()[1] == ActuationRecord{500, BodySite::LeftWrist, false});
    CHECK(mock_apply(std::vector<ActuatorIntent>{}).records().empty());

    ActuationTimeline bad;
    bad.record(10, BodySite::RightWrist, true);
    CHECK_THROWS_AS(bad.record(5, BodySite::RightWrist, false), TimingError);
    CHECK_THROWS_AS(bad.record(20, BodySite::RightWrist, true), ContractError);
}

TEST_CASE("random valid intent streams reproduce on the timeline") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<bool, 4> on{};
        std::vector<ActuatorIntent> intents;
        Millis ts = 0;
        for (int i = 0; i < 100; ++i) {
            ts += static_cast<Millis>(rng() % 50);
            const auto s = static_cast<std::size_t>(rng() % 4);
            on[s] = !on[s];
            intents.push_back({kAllBodySites[s], on[s], ts});
        }
        const auto t = mock_apply(intents);
        REQUIRE(t.records().size() == intents.size());
        for (std::size_t i = 0; i < intents.size(); ++i) {
            CHECK(t.records()[i] ==
                  ActuationRecord{intents[i].ts_ms, intents[i].site, intents[i].active});
        }
    }
}

TEST_CASE("pulse train drives the device at 1 Hz") {
    PulseTrain train;
    auto c = train.on_intent({BodySite::RightWrist, true, 1000});
    REQUIRE(c.size() == 1);
    CHECK(c[0] == SerialCommand{BodySite::RightWrist, true});
    CHECK(train.advance(1250).empty());
    c = train.advance(1500);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == SerialCommand{BodySite::RightWrist, false});
    c = train.advance(2000);
    REQUIRE(c.size() == 1);
    CHECK(c[0].on);
    c = train.on_intent({BodySite::RightWrist, false, 2100});
    REQUIRE(c.size() == 1);
    CHECK_FALSE(c[0].on);
    CHECK(train.advance(2600).empty());
}

TEST_CASE("pulsed actuator through the command queue") {
    MockDeviceTransport dev;
    PulsedActuator act(dev);
    act.apply({BodySite::LeftWrist, true, 0});
    act.tick(250);
    act.tick(500);
    act.tick(1000);
    act.apply({BodySite::LeftWrist, false, 1100});
    act.apply({BodySite::LeftAnkle, true, 1100});
    act.queue().flush();
    CHECK(act.queue().take_errors().empty());
    const std::vector<std::string> expected{"V,LW,1\n", "V,LW,0\n", "V,LW,1\n", "V,LW,0\n",
                                            "V,LA,1\n"};
    CHECK(dev.frames() == expected);
}

TEST_CASE("queue collects device failures without blocking") {
    MockDeviceTransport dev;
    dev.set_reply(MockDeviceTransport::Reply::Silent);
    CommandQueue q(dev, 5ms);
    q.submit({BodySite::LeftWrist, true});
    q.submit({BodySite::LeftWrist, false});
    q.flush();
    const auto errors = q.take_errors();
    REQUIRE(errors.size() == 2);
    CHECK(errors[0].find("V,LW,1") != std::string::npos);
}

TEST_CASE("posix serial transport over a pseudo terminal") {
    const int master = ::posix_openpt(O_RDWR | O_NOCTTY);
    REQUIRE(master >= 0);
    REQUIRE(::grantpt(master) == 0);
    REQUIRE(::unlockpt(master) == 0);
    const std::string slave = ::ptsname(master);

    PosixSerialTransport port(slave, 115200);

    // Firmware side: answer one frame with an ack.
    std::string frame;
    bool replied = false;
    std::thread firmware([&] {
        char ch;
        while (frame.size() < 7 && ::read(master, &ch, 1) == 1) frame.push_back(ch);
        if (frame == "V,RW,1\n") replied = ::write(master, "A\n", 2) == 2;
    });
    CHECK_NOTHROW(send_command(port, {BodySite::RightWrist, true}, 1000ms));
    firmware.join();
    CHECK(frame == "V,RW,1\n");
    CHECK(replied);

    // Nobody answers: the read gives up after the timeout.
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(send_command(port, {BodySite::RightWrist, false}), DeviceTimeout);
    const auto waited = std::chrono::steady_clock::now() - t0;
    CHECK(waited >= 100ms);
    CHECK(waited < 1000ms);
    ::close(master);

    CHECK_THROWS_AS(PosixSerialTransport(slave, 12345), ConfigError);
}
