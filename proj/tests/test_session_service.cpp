#include "eyero/errors.hpp"
#include "eyero/session_service.hpp"

#include <doctest.h>

using namespace eyero;
using namespace eyero::wire;

namespace {

struct Driver {
    SessionEngine engine;
    Effects fx;
    std::vector<EventRecord> log;
    std::vector<OutboundMessage> messages;
    std::vector<ActuatorIntent> intents;

    explicit Driver(SessionEngine e) : engine(std::move(e)) {}

    void collect() {
        log.insert(log.end(), fx.log.begin(), fx.log.end());
        messages.insert(messages.end(), fx.messages.begin(), fx.messages.end());
        intents.insert(intents.end(), fx.intents.begin(), fx.intents.end());
        fx.clear();
    }
    void start(Millis t) {
        engine.start(t, fx);
        collect();
    }
    void send(Millis t, InboundPayload p) {
        engine.handle(InboundMessage{t, std::move(p)}, t, fx);
        collect();
    }
    void tick(Millis t) {
        engine.tick(t, fx);
        collect();
    }
    void calibrate(Millis t) {
        for (int i = 0; i < 9; ++i) send(t, CalibrationPoint{0.1 + 0.4 * (i % 3), 0.1 + 0.4 * (i / 3)});
        send(t, CalibrationDone{9});
    }
    // Ticks through every pending deadline.
    Millis run_task() {
        Millis last = 0;
        while (auto d = engine.next_deadline()) {
            last = *d;
            tick(*d);
        }
        return last;
    }
    std::optional<OutboundMessage> last_error() const {
        for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
            if (it->type == "error") return *it;
        }
        return std::nullopt;
    }
    int count_kind(const std::string& kind) const {
        int n = 0;
        for (const auto& r : log) n += r.kind == kind ? 1 : 0;
        return n;
    }
};

SessionEngine one_session(FeedbackMode mode, DurationClass d = DurationClass::Short) {
    return SessionEngine(EngineOptions{}, {ScheduledSession{0, {mode, d, false}, 99}});
}

} // namespace

TEST_CASE("a session walks through every phase") {
    Driver dr(one_session(FeedbackMode::Filter));
    dr.start(0);
    CHECK(dr.engine.phase().kind == PhaseKind::Calibration);
    dr.calibrate(1000);
    CHECK(dr.engine.phase().kind == PhaseKind::Ready);
    dr.tick(3999);
    CHECK(dr.engine.phase().kind == PhaseKind::Ready);
    dr.tick(4000);
    CHECK(dr.engine.phase() == SessionPhase{PhaseKind::Running, 0, 4000});

    const Millis end = dr.run_task();
    CHECK(dr.engine.phase().kind == PhaseKind::Questionnaire);
    CHECK(dr.engine.outcomes().size() == 10);
    CHECK(dr.count_kind(log_kind::kTrialResult) == 10);
    CHECK(dr.count_kind(log_kind::kTrialOnset) == 10);

    dr.send(end + 100, QuestionnaireMsg{{{4, 4, 4, 4, 4, 4}}});
    CHECK(dr.engine.phase().kind == PhaseKind::Rest);
    const Millis rest_at = dr.engine.phase().started_ms;

    dr.send(rest_at + 59000, RestExitRequest{});
    CHECK(dr.engine.phase().kind == PhaseKind::Rest);
    REQUIRE(dr.last_error());
    CHECK(dr.last_error()->payload.at("code") == "rest_guard");

    dr.send(rest_at + 60000, RestExitRequest{});
    CHECK(dr.engine.done());

    // calibration, ready, 10 x running, questionnaire, rest, done
    CHECK(dr.count_kind(log_kind::kPhase) == 15);
    for (std::size_t i = 1; i < dr.log.size(); ++i) {
        CHECK(dr.log[i - 1].ts_ms <= dr.log[i].ts_ms);
    }
}

TEST_CASE("timers fire in order even when ticked late") {
    Driver dr(one_session(FeedbackMode::Silence));
    dr.start(0);
    dr.calibrate(0);
    dr.tick(1'000'000);
    CHECK(dr.engine.phase().kind == PhaseKind::Questionnaire);
    const auto& timing = dr.engine.trial_timing();
    std::vector<Millis> onsets;
    for (const auto& r : dr.log) {
        if (r.kind == log_kind::kTrialOnset) onsets.push_back(r.ts_ms);
    }
    REQUIRE(onsets.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(onsets[i] == timing[i].onset_ms);
}

TEST_CASE("guards") {
    Driver dr(one_session(FeedbackMode::Silence));
    dr.start(0);

    SUBCASE("calibration needs nine points") {
        dr.send(10, CalibrationDone{8});
        CHECK(dr.engine.phase().kind == PhaseKind::Calibration);
        CHECK(dr.last_error()->payload.at("code") == "calibration_incomplete");
    }
    SUBCASE("keys only while running") {
        dr.send(10, KeyEventMsg{ResponseKey::Left});
        CHECK(dr.last_error()->payload.at("code") == "out_of_phase");
        CHECK(dr.count_kind(log_kind::kRejected) == 1);
    }
    SUBCASE("likert bounds") {
        dr.calibrate(0);
        dr.run_task();
        dr.send(200000, QuestionnaireMsg{{{1, 2, 8, 4, 5, 6}}});
        CHECK(dr.engine.phase().kind == PhaseKind::Questionnaire);
        CHECK(dr.last_error()->payload.at("code") == "validation");
    }
    SUBCASE("unknown message type") {
        dr.engine.handle_line(R"({"type":"warp","ts_ms":1,"payload":{}})", 5, dr.fx);
        dr.collect();
        CHECK(dr.last_error()->payload.at("code") == "unknown_type");
        CHECK(dr.engine.phase().kind == PhaseKind::Calibration);
    }
    SUBCASE("rest exit outside rest") {
        dr.send(10, RestExitRequest{});
        CHECK(dr.last_error()->payload.at("code") == "out_of_phase");
    }
}

TEST_CASE("silence sessions never drive the actuator") {
    Driver dr(one_session(FeedbackMode::Silence));
    dr.start(0);
    dr.calibrate(0);
    for (Millis t = 0; t < 20000; t += 33) {
        dr.send(t, GazeSampleMsg{(t % 1000) / 1000.0, ((t * 7) % 1000) / 1000.0, true});
    }
    CHECK(dr.intents.empty());
    CHECK(dr.count_kind(log_kind::kIntent) == 0);
}

TEST_CASE("stationary crossing forwards deactivate then activate") {
    Driver dr(one_session(FeedbackMode::Stationary));
    dr.start(0);
    dr.calibrate(0);
    dr.send(100, GazeSampleMsg{0.2, 0.2, true});
    dr.send(133, GazeSampleMsg{0.8, 0.2, true});
    REQUIRE(dr.intents.size() == 3);
    CHECK(dr.intents[0] == ActuatorIntent{BodySite::LeftWrist, true, 100});
    CHECK(dr.intents[1] == ActuatorIntent{BodySite::LeftWrist, false, 133});
    CHECK(dr.intents[2] == ActuatorIntent{BodySite::RightWrist, true, 133});
    CHECK(dr.count_kind(log_kind::kIntent) == 3);
}

TEST_CASE("gaze outside the task phases is logged but not routed") {
    Driver dr(one_session(FeedbackMode::Stationary));
    dr.start(0);
    dr.send(10, GazeSampleMsg{0.1, 0.1, true});
    CHECK(dr.intents.empty());
    REQUIRE(dr.count_kind(log_kind::kGaze) == 1);
    CHECK(dr.log.back().payload.at("routed") == false);

    // Out-of-range coordinates become invalid samples.
    dr.calibrate(20);
    dr.send(30, GazeSampleMsg{1.5, 0.2, true});
    CHECK(dr.intents.empty());
    CHECK(dr.log.back().payload.at("valid") == false);
}

TEST_CASE("leaving the task releases the active site") {
    Driver dr(one_session(FeedbackMode::Stationary));
    dr.start(0);
    dr.calibrate(0);
    dr.send(10, GazeSampleMsg{0.9, 0.9, true});
    dr.run_task();
    REQUIRE(dr.intents.size() == 2);
    CHECK_FALSE(dr.intents.back().active);
    CHECK(dr.engine.phase().kind == PhaseKind::Questionnaire);
}

TEST_CASE("a keypress is scored against the right trial") {
    Driver dr(one_session(FeedbackMode::Silence));
    dr.start(0);
    dr.calibrate(0);
    dr.tick(3000);
    const auto& plan = dr.engine.trial_plan();
    const auto onset = dr.engine.trial_timing()[0].onset_ms;
    dr.tick(onset);
    const ResponseKey key =
        plan[0].shape == StimulusShape::NonTarget ? ResponseKey::Right : ResponseKey::Left;
    dr.send(onset + 450, KeyEventMsg{key});
    dr.tick(onset + 2000);
    REQUIRE(dr.engine.outcomes().size() == 1);
    CHECK(dr.engine.outcomes()[0].rt_ms == 450);
    CHECK(dr.engine.outcomes()[0].correct == (plan[0].shape != StimulusShape::Distractor));
}

TEST_CASE("a full study visits all twelve sessions") {
    const auto plan = generate_study_plan("P03", 4);
    Driver dr(SessionEngine::for_study(plan, EngineOptions{}));
    dr.start(0);
    Millis t = 0;
    for (int s = 0; s < 12; ++s) {
        CHECK(dr.engine.current_position() == s);
        CHECK(dr.engine.current_session().config == plan.sessions[static_cast<std::size_t>(s)]);
        dr.calibrate(t);
        t = dr.run_task() + 10;
        dr.send(t, QuestionnaireMsg{{{3, 3, 3, 3, 3, 3}}});
        t += 60000;
        dr.send(t, RestExitRequest{});
    }
    CHECK(dr.engine.done());
    CHECK(dr.count_kind(log_kind::kSessionStart) == 12);

    StudyPlan broken = plan;
    broken.sessions.pop_back();
    CHECK_THROWS_AS(SessionEngine::for_study(broken, EngineOptions{}), ConfigError);
}

TEST_CASE("hello answers with the current state") {
    Driver dr(one_session(FeedbackMode::Filter));
    dr.start(0);
    dr.messages.clear();
    dr.send(5, Hello{});
    REQUIRE(dr.messages.size() == 2);
    CHECK(dr.messages[0].type == "session_start");
    CHECK(dr.messages[0].payload.at("feedback") == "filter");
    CHECK(dr.messages[1].type == "phase");
    CHECK(dr.messages[1].payload.at("name") == "calibration");
}
