#pragma once

#include "eyero/event_log.hpp"
#include "eyero/feedback_controller.hpp"
#include "eyero/session_service.hpp"
#include "eyero/study_design.hpp"
#include "eyero/task_engine.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eyero {

struct PhaseRecord {
    Millis ts_ms = 0;
    PhaseKind kind = PhaseKind::Calibration;
    int trial_index = 0;

    friend bool operator==(const PhaseRecord&, const PhaseRecord&) = default;
};

struct TrialRecord {
    Millis ts_ms = 0;
    int index = 0;
    StimulusShape shape = StimulusShape::Target;
    TrialOutcome outcome;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

// Controller input in log order: routed gaze, a reset when the task starts,
// and a release when it ends.
struct ControlEvent {
    enum class Kind { Reset, Gaze, Release };
    Kind kind = Kind::Gaze;
    GazeSample sample;
};

// Streams reconstructed from one session log file.
struct ReplayedSession {
    std::string participant_id;
    int session_index = -1;
    std::optional<SessionConfig> config;
    FilterParams filter;
    std::vector<TrialSpec> plan;

    std::vector<GazeSample> gaze;       // every gaze record
    std::vector<GazeSample> routed_gaze; // Ready/Running samples that reached the controller
    std::vector<ControlEvent> control;
    std::vector<ActuatorIntent> intents;
    std::vector<PhaseRecord> phases;
    std::vector<TrialTiming> timing;     // one per onset, in trial order
    std::vector<KeyEvent> keys;
    std::vector<TrialRecord> trials;
    std::optional<QuestionnaireResponse> questionnaire;

    Millis start_ts = 0;
    Millis end_ts = 0;
    std::size_t record_count = 0;
};

// Semantic problems (unknown kinds, bad payloads, mixed sessions) raise
// ReplayError with the 1-based record number.
ReplayedSession replay(std::span<const EventRecord> records);
ReplayedSession replay_file(const std::filesystem::path& path);

// Feeds the logged controller input through a fresh controller.
std::vector<ActuatorIntent> reenact_intents(const ReplayedSession& s);
// Re-scores every logged trial from the plan, onsets and key presses.
std::vector<TrialOutcome> rescore_trials(const ReplayedSession& s);

struct ReplayCheck {
    bool intents_match = false;
    bool outcomes_match = false;
    bool ok() const { return intents_match && outcomes_match; }
};

ReplayCheck verify_replay(const ReplayedSession& s);

// ---- tabular export ----------------------------------------------------------

struct TrialRow {
    std::string participant;
    int session = 0;
    SessionConfig config;
    int trial = 0;
    StimulusShape shape = StimulusShape::Target;
    TrialOutcome outcome;

    friend bool operator==(const TrialRow&, const TrialRow&) = default;
};

struct GazeRow {
    std::string participant;
    int session = 0;
    Millis ts_ms = 0;
    double x = 0;
    double y = 0;
    bool valid = false;

    friend bool operator==(const GazeRow&, const GazeRow&) = default;
};

struct QuestionnaireRow {
    std::string participant;
    int session = 0;
    QuestionnaireResponse response;

    friend bool operator==(const QuestionnaireRow&, const QuestionnaireRow&) = default;
};

struct SessionRow {
    std::string participant;
    int session = 0;
    SessionConfig config;
    Millis start_ts = 0;
    Millis end_ts = 0;

    friend bool operator==(const SessionRow&, const SessionRow&) = default;
};

struct StudyTables {
    std::vector<TrialRow> trials;
    std::vector<GazeRow> gaze;
    std::vector<QuestionnaireRow> questionnaire;
    std::vector<SessionRow> sessions;

    friend bool operator==(const StudyTables&, const StudyTables&) = default;
};

// The gaze table keeps the task-period samples (those routed to the
// controller), which is what the entropy analysis consumes.
StudyTables export_tables(std::span<const ReplayedSession> sessions);
StudyTables export_tables_from_dir(const std::filesystem::path& log_dir);

void write_tables(const StudyTables& t, const std::filesystem::path& dir);
StudyTables read_tables(const std::filesystem::path& dir);

} // namespace eyero
