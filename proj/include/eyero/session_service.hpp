#pragma once

#include "eyero/event_log.hpp"
#include "eyero/feedback_controller.hpp"
#include "eyero/study_design.hpp"
#include "eyero/task_engine.hpp"
#include "eyero/wire.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eyero {

enum class PhaseKind { Calibration, Ready, Running, Questionnaire, Rest, Done };

std::string_view to_string(PhaseKind kind);
PhaseKind phase_kind_from_string(std::string_view name);

struct SessionPhase {
    PhaseKind kind = PhaseKind::Calibration;
    int trial_index = 0;   // Running only
    Millis started_ms = 0; // entry time of the phase

    friend bool operator==(const SessionPhase&, const SessionPhase&) = default;
};

struct EngineOptions {
    std::string participant_id = "P00";
    FilterParams filter{};
    Millis ready_lead_ms = 3000;
    Millis display_ms = kDefaultDisplayMs;
    Millis max_window_ms = kMaxResponseWindowMs;
    Millis rest_min_ms = 60000;
    int min_calibration_points = 9;
    Millis feedback_broadcast_ms = 100;
    // Off for bulk simulation where only in-memory streams are needed.
    bool log_gaze = true;
};

struct ScheduledSession {
    int index = 0; // position in the participant's study plan
    SessionConfig config;
    std::uint64_t trial_seed = 0;
};

std::vector<ScheduledSession> schedule_for(const StudyPlan& plan);

// Everything a step produces, in emission order per channel.
struct Effects {
    std::vector<wire::OutboundMessage> messages;
    std::vector<EventRecord> log;
    std::vector<ActuatorIntent> intents;

    void clear() {
        messages.clear();
        log.clear();
        intents.clear();
    }
};

// One participant's protocol: Calibration -> Ready -> Running(0..9) ->
// Questionnaire -> Rest -> next session's Calibration, or Done after the
// last session. Every transition appends exactly one "phase" record.
// Not thread-safe: one logical event loop drives it.
class SessionEngine {
public:
    SessionEngine(EngineOptions options, std::vector<ScheduledSession> sessions);
    static SessionEngine for_study(const StudyPlan& plan, EngineOptions options);

    // Enters the first session's Calibration phase.
    void start(Millis now_ms, Effects& out);

    // Processes due timers first, then the message. Invalid or out-of-phase
    // messages produce an "error" reply and leave the state unchanged.
    void handle(const wire::InboundMessage& msg, Millis now_ms, Effects& out);
    void handle_line(std::string_view line, Millis now_ms, Effects& out);

    // Fires every timer due at or before now_ms, each stamped with its own
    // deadline.
    void tick(Millis now_ms, Effects& out);
    std::optional<Millis> next_deadline() const;

    const SessionPhase& phase() const { return phase_; }
    bool started() const { return started_; }
    bool done() const { return phase_.kind == PhaseKind::Done; }
    const ScheduledSession& current_session() const { return sessions_[current_]; }
    int current_position() const { return static_cast<int>(current_); }
    const ControllerState& controller() const { return controller_; }
    const std::vector<TrialSpec>& trial_plan() const { return plan_; }
    const std::vector<TrialTiming>& trial_timing() const { return timing_; }
    const std::vector<TrialOutcome>& outcomes() const { return outcomes_; }
    const EngineOptions& options() const { return options_; }

private:
    void enter_session(std::size_t position, Millis now, Effects& out);
    void transition(SessionPhase next, Millis now, Effects& out);
    void reject(Millis now, const std::string& code, const std::string& detail, Effects& out);
    void log(Millis ts, const char* kind, json payload, Effects& out) const;
    void route_gaze(const wire::GazeSampleMsg& g, Millis client_ts, Millis now, Effects& out);
    void on_key(const wire::KeyEventMsg& k, Millis client_ts, Millis now, Effects& out);
    void finish_trial(int index, Millis ts, Effects& out);
    wire::OutboundMessage session_start_message(Millis now) const;
    wire::OutboundMessage phase_message(Millis now) const;

    EngineOptions options_;
    std::vector<ScheduledSession> sessions_;
    std::size_t current_ = 0;
    SessionPhase phase_;
    bool started_ = false;

    ControllerState controller_;
    Millis last_broadcast_ms_ = 0;
    bool broadcast_once_ = false;
    int calibration_points_ = 0;

    std::vector<TrialSpec> plan_;
    std::vector<TrialTiming> timing_;
    std::vector<bool> onset_sent_;
    std::vector<KeyEvent> keys_;
    std::vector<TrialOutcome> outcomes_;
};

json to_json(const TrialOutcome& o);
TrialOutcome trial_outcome_from_json(const json& j);
json to_json(const TrialSpec& t);
TrialSpec trial_spec_from_json(const json& j);
json to_json(const SessionConfig& c);
SessionConfig session_config_from_json(const json& j);
json to_json(const QuestionnaireResponse& q);
QuestionnaireResponse questionnaire_from_json(const json& j);

} // namespace eyero
