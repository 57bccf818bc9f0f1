#pragma once

#include "eyero/event_log.hpp"
#include "eyero/replay.hpp"
#include "eyero/session_service.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace eyero {

// Synthetic participant. Gaze follows a mean-reverting walk toward the screen
// center; during a lapse the spring weakens and a wander bias pulls gaze
// toward a point away from the center. Rates are per second, lambda1 is the
// per-minute growth of the lapse hazard.
struct AgentParams {
    double kappa_attentive = 4.0;
    double kappa_lapse = 0.15;
    double sigma = 0.06;
    double lambda0 = 0.008;
    double lambda1 = 0.0064;
    double distraction_mult = 2.0;
    double rho = 0.8;
    double rt_base_ms = 450.0;
    double rt_slope_ms_per_unit_dist = 1500.0;
    double rt_noise_ms = 60.0;
    double sample_hz = 30.0;
    // Pull toward the wander target while lapsed.
    double wander_gain = 2.0;
    // Rate of spontaneous recovery from a lapse.
    double recovery_rate = 0.08;
    // Chance of pressing the wrong key, or any key on a distractor.
    double p_wrong_key = 0.03;

    // Throws ConfigError naming the first violated constraint.
    void validate() const;
};

// Flat "key = value" text, one per line; '#' starts a comment. Unknown keys
// and malformed numbers raise ConfigError. Missing keys keep their defaults.
AgentParams parse_agent_params(std::istream& in);
AgentParams load_agent_params(const std::filesystem::path& path);
std::string format_agent_params(const AgentParams& p);

struct SimulationOptions {
    std::string participant_id = "P01";
    EngineOptions engine{};
    // Keep the event log of the session (gaze records follow engine.log_gaze).
    bool record_log = true;
    // Keep the routed gaze stream in memory.
    bool record_gaze = true;
};

struct AgentReaction {
    Millis ts_ms = 0;
    BodySite site = BodySite::LeftWrist;
    bool ended_lapse = false;
};

struct SimulatedSession {
    ScheduledSession session;
    std::vector<TrialSpec> plan;
    std::vector<EventRecord> log;
    std::vector<GazeSample> gaze; // routed samples, as sent
    std::vector<ActuatorIntent> intents;
    std::vector<TrialOutcome> outcomes;
    std::vector<AgentReaction> reactions; // activation edges met while lapsed
    QuestionnaireResponse questionnaire;
    Millis end_ts = 0;
    double entropy = 0.0;                 // 8x8 grid over the routed samples
    Millis lapse_ms = 0;
    int lapses = 0;
};

// Runs one session end to end against an in-process SessionEngine on a virtual
// clock. Deterministic in (session, params, seed).
SimulatedSession simulate_session(const ScheduledSession& session, const AgentParams& params,
                                  std::uint64_t seed, const SimulationOptions& options = {});
SimulatedSession simulate_session(const SessionConfig& config, const AgentParams& params,
                                  std::uint64_t seed, const SimulationOptions& options = {});

struct SimulatedParticipant {
    std::string participant_id;
    StudyPlan plan;
    AgentParams params; // after jitter
    std::vector<SimulatedSession> sessions;
};

struct StudySimulationOptions {
    bool record_log = true;
    bool log_gaze = true;
    bool record_gaze = false;
    // Restrict which configs are run; all twelve when empty.
    std::function<bool(const SessionConfig&)> include;
};

// Per-participant parameters get lognormal jitter (log-SD 0.1).
AgentParams jitter_params(const AgentParams& base, std::uint64_t seed);

std::string participant_label(int index); // 0 -> "P01"

std::vector<SimulatedParticipant> simulate_study(int participants, const AgentParams& params,
                                                 std::uint64_t seed,
                                                 const StudySimulationOptions& options = {});

// Tables built straight from the in-memory simulation results (sessions must
// have been run with record_gaze). Rows come out in the same order as
// export_tables over the replayed logs.
StudyTables live_tables(const std::vector<SimulatedParticipant>& participants);

} // namespace eyero
