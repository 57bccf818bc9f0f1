#include "eyero/session_service.hpp"

#include "eyero/errors.hpp"

#include <string>

namespace eyero {

std::string_view to_string(PhaseKind kind) {
    switch (kind) {
        case PhaseKind::Calibration:   return "calibration";
        case PhaseKind::Ready:         return "ready";
        case PhaseKind::Running:       return "running";
        case PhaseKind::Questionnaire: return "questionnaire";
        case PhaseKind::Rest:          return "rest";
        case PhaseKind::Done:          return "done";
    }
    return "?";
}

PhaseKind phase_kind_from_string(std::string_view name) {
    for (auto k : {PhaseKind::Calibration, PhaseKind::Ready, PhaseKind::Running,
                   PhaseKind::Questionnaire, PhaseKind::Rest, PhaseKind::Done}) {
        if (to_string(k) == name) return k;
    }
    throw ValidationError("unknown phase '" + std::string(name) + "'");
}

std::vector<ScheduledSession> schedule_for(const StudyPlan& plan) {
    std::vector<ScheduledSession> out;
    for (std::size_t i = 0; i < plan.sessions.size(); ++i) {
        const int index = static_cast<int>(i);
        out.push_back({index, plan.sessions[i], trial_seed_for(plan.seed, index)});
    }
    return out;
}

// ---- json helpers ----------------------------------------------------------------

json to_json(const TrialOutcome& o) {
    return {
        {"responded", o.responded},
        {"key", o.key ? json(std::string(to_string(*o.key))) : json(nullptr)},
        {"rt_ms", o.rt_ms ? json(*o.rt_ms) : json(nullptr)},
        {"correct", o.correct},
        {"missed", o.missed},
    };
}

TrialOutcome trial_outcome_from_json(const json& j) {
    TrialOutcome o;
    o.responded = j.at("responded").get<bool>();
    if (!j.at("key").is_null()) o.key = response_key_from_string(j.at("key").get<std::string>());
    if (!j.at("rt_ms").is_null()) o.rt_ms = j.at("rt_ms").get<Millis>();
    o.correct = j.at("correct").get<bool>();
    o.missed = j.at("missed").get<bool>();
    return o;
}

json to_json(const TrialSpec& t) {
    return {{"index", t.index},
            {"shape", std::string(to_string(t.shape))},
            {"pre_interval_ms", t.pre_interval_ms},
            {"display_ms", t.display_ms}};
}

TrialSpec trial_spec_from_json(const json& j) {
    return TrialSpec{j.at("index").get<int>(),
                     stimulus_shape_from_string(j.at("shape").get<std::string>()),
                     j.at("pre_interval_ms").get<Millis>(), j.at("display_ms").get<Millis>()};
}

json to_json(const SessionConfig& c) {
    return {{"feedback", std::string(to_string(c.feedback))},
            {"duration", std::string(to_string(c.duration))},
            {"distraction", c.distraction}};
}

SessionConfig session_config_from_json(const json& j) {
    return SessionConfig{feedback_mode_from_string(j.at("feedback").get<std::string>()),
                         duration_class_from_string(j.at("duration").get<std::string>()),
                         j.at("distraction").get<bool>()};
}

json to_json(const QuestionnaireResponse& q) {
    json j = json::object();
    for (std::size_t i = 0; i < q.q.size(); ++i) j["q" + std::to_string(i + 1)] = q.q[i];
    return j;
}

QuestionnaireResponse questionnaire_from_json(const json& j) {
    QuestionnaireResponse q;
    for (std::size_t i = 0; i < q.q.size(); ++i) q.q[i] = j.at("q" + std::to_string(i + 1)).get<int>();
    return q;
}

namespace {

json site_or_null(const std::optional<BodySite>& site) {
    return site ? json(std::string(to_string(*site))) : json(nullptr);
}

bool in_unit_square(double x, double y) {
    return x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0;
}

} // namespace

// ---- engine ------------------------------------------------------------------------

SessionEngine::SessionEngine(EngineOptions options, std::vector<ScheduledSession> sessions)
    : options_(std::move(options)), sessions_(std::move(sessions)) {
    if (sessions_.empty()) throw ConfigError("session engine needs at least one session");
    if (options_.filter.r_off > options_.filter.r_on) {
        throw ConfigError("filter r_off must not exceed r_on");
    }
}

SessionEngine SessionEngine::for_study(const StudyPlan& plan, EngineOptions options) {
    if (!is_complete_design(plan.sessions)) {
        throw ConfigError("study plan is not a permutation of the 12 session configs");
    }
    options.participant_id = plan.participant_id;
    return SessionEngine(std::move(options), schedule_for(plan));
}

void SessionEngine::log(Millis ts, const char* kind, json payload, Effects& out) const {
    out.log.push_back(EventRecord{ts, options_.participant_id, sessions_[current_].index, kind,
                                  std::move(payload)});
}

wire::OutboundMessage SessionEngine::session_start_message(Millis now) const {
    json payload = to_json(sessions_[current_].config);
    payload["session"] = sessions_[current_].index;
    return {"session_start", now, std::move(payload)};
}

wire::OutboundMessage SessionEngine::phase_message(Millis now) const {
    json payload = {{"name", std::string(to_string(phase_.kind))}};
    if (phase_.kind == PhaseKind::Running) payload["trial_index"] = phase_.trial_index;
    return {"phase", now, std::move(payload)};
}

void SessionEngine::start(Millis now_ms, Effects& out) {
    if (started_) throw ContractError("session engine already started");
    started_ = true;
    enter_session(0, now_ms, out);
}

void SessionEngine::enter_session(std::size_t position, Millis now, Effects& out) {
    current_ = position;
    const auto& s = sessions_[current_];
    plan_ = generate_trial_plan(s.config.duration, s.trial_seed, options_.display_ms);
    timing_.clear();
    onset_sent_.assign(plan_.size(), false);
    keys_.clear();
    outcomes_.clear();
    calibration_points_ = 0;
    controller_ = initial_controller_state(s.config.feedback, now);
    broadcast_once_ = false;

    json start = to_json(s.config);
    start["trial_seed"] = s.trial_seed;
    start["r_on"] = options_.filter.r_on;
    start["r_off"] = options_.filter.r_off;
    log(now, log_kind::kSessionStart, std::move(start), out);
    json trials = json::array();
    for (const auto& t : plan_) trials.push_back(to_json(t));
    log(now, log_kind::kTrialPlan, {{"trials", std::move(trials)}}, out);
    out.messages.push_back(session_start_message(now));

    transition({PhaseKind::Calibration, 0, now}, now, out);
}

void SessionEngine::transition(SessionPhase next, Millis now, Effects& out) {
    next.started_ms = now;
    phase_ = next;
    json payload = {{"name", std::string(to_string(phase_.kind))}};
    if (phase_.kind == PhaseKind::Running) payload["trial_index"] = phase_.trial_index;
    log(now, log_kind::kPhase, std::move(payload), out);
    out.messages.push_back(phase_message(now));

    if (phase_.kind == PhaseKind::Ready) {
        controller_ = initial_controller_state(sessions_[current_].config.feedback, now);
    } else if (phase_.kind == PhaseKind::Running && phase_.trial_index == 0) {
        timing_ = schedule_trials(plan_, now, options_.max_window_ms);
    }
}

void SessionEngine::reject(Millis now, const std::string& code, const std::string& detail,
                           Effects& out) {
    log(now, log_kind::kRejected, {{"code", code}, {"detail", detail}}, out);
    out.messages.push_back(wire::error_message(now, code, detail));
}

std::optional<Millis> SessionEngine::next_deadline() const {
    if (!started_) return std::nullopt;
    switch (phase_.kind) {
        case PhaseKind::Ready:
            return phase_.started_ms + options_.ready_lead_ms;
        case PhaseKind::Running: {
            const auto i = static_cast<std::size_t>(phase_.trial_index);
            return onset_sent_[i] ? timing_[i].window_end_ms : timing_[i].onset_ms;
        }
        default:
            return std::nullopt;
    }
}

void SessionEngine::tick(Millis now_ms, Effects& out) {
    while (auto deadline = next_deadline()) {
        if (*deadline > now_ms) return;
        const Millis ts = *deadline;
        if (phase_.kind == PhaseKind::Ready) {
            transition({PhaseKind::Running, 0, ts}, ts, out);
            continue;
        }
        const int i = phase_.trial_index;
        const auto& spec = plan_[static_cast<std::size_t>(i)];
        if (!onset_sent_[static_cast<std::size_t>(i)]) {
            onset_sent_[static_cast<std::size_t>(i)] = true;
            json payload = {{"index", i}, {"shape", std::string(to_string(spec.shape))}};
            out.messages.push_back({"trial_onset", ts, payload});
            payload["window_end_ms"] = timing_[static_cast<std::size_t>(i)].window_end_ms;
            payload["display_ms"] = spec.display_ms;
            log(ts, log_kind::kTrialOnset, std::move(payload), out);
        } else {
            finish_trial(i, ts, out);
        }
    }
}

void SessionEngine::finish_trial(int index, Millis ts, Effects& out) {
    const auto i = static_cast<std::size_t>(index);
    const auto& t = timing_[i];
    const TrialOutcome outcome =
        score_response(plan_[i], keys_, t.onset_ms, t.window_end_ms - t.onset_ms);
    outcomes_.push_back(outcome);

    json payload = {{"index", index},
                    {"shape", std::string(to_string(plan_[i].shape))},
                    {"outcome", to_json(outcome)}};
    log(ts, log_kind::kTrialResult, payload, out);
    out.messages.push_back({"trial_result", ts, std::move(payload)});

    if (index + 1 < static_cast<int>(plan_.size())) {
        transition({PhaseKind::Running, index + 1, ts}, ts, out);
        return;
    }
    // Nothing may vibrate once the task is over.
    const std::size_t first = out.intents.size();
    controller_release(controller_, ts, out.intents);
    for (std::size_t k = first; k < out.intents.size(); ++k) {
        const auto& in = out.intents[k];
        log(ts, log_kind::kIntent,
            {{"site", std::string(to_string(in.site))}, {"active", in.active}}, out);
    }
    transition({PhaseKind::Questionnaire, 0, ts}, ts, out);
}

void SessionEngine::route_gaze(const wire::GazeSampleMsg& g, Millis client_ts, Millis now,
                               Effects& out) {
    const bool valid = g.valid && in_unit_square(g.x, g.y);
    const bool routed = phase_.kind == PhaseKind::Ready || phase_.kind == PhaseKind::Running;
    if (options_.log_gaze) {
        log(now, log_kind::kGaze,
            {{"x", g.x}, {"y", g.y}, {"valid", valid}, {"routed", routed},
             {"client_ts", client_ts}},
            out);
    }
    if (!routed) return;

    const std::size_t first = out.intents.size();
    controller_step_into(controller_, GazeSample{now, g.x, g.y, valid}, options_.filter,
                         out.intents);
    for (std::size_t k = first; k < out.intents.size(); ++k) {
        const auto& in = out.intents[k];
        log(now, log_kind::kIntent,
            {{"site", std::string(to_string(in.site))}, {"active", in.active}}, out);
    }

    if (!broadcast_once_ || now - last_broadcast_ms_ >= options_.feedback_broadcast_ms) {
        broadcast_once_ = true;
        last_broadcast_ms_ = now;
        out.messages.push_back(
            {"feedback_state", now, {{"active_site", site_or_null(controller_.active_site)}}});
    }
}

void SessionEngine::on_key(const wire::KeyEventMsg& k, Millis client_ts, Millis now,
                           Effects& out) {
    if (phase_.kind != PhaseKind::Running) {
        reject(now, "out_of_phase",
               "key_event is only accepted while running, phase is " +
                   std::string(to_string(phase_.kind)),
               out);
        return;
    }
    keys_.push_back({k.key, now});
    log(now, log_kind::kKey, {{"key", std::string(to_string(k.key))}, {"client_ts", client_ts}},
        out);
}

void SessionEngine::handle_line(std::string_view line, Millis now_ms, Effects& out) {
    wire::InboundMessage msg;
    try {
        msg = wire::parse_inbound(line);
    } catch (const wire::WireError& e) {
        tick(now_ms, out);
        reject(now_ms, e.code(), e.what(), out);
        return;
    }
    handle(msg, now_ms, out);
}

void SessionEngine::handle(const wire::InboundMessage& msg, Millis now, Effects& out) {
    if (!started_) throw ContractError("session engine not started");
    tick(now, out);

    const auto out_of_phase = [&](const char* type) {
        reject(now, "out_of_phase",
               std::string(type) + " not accepted in phase " + std::string(to_string(phase_.kind)),
               out);
    };

    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, wire::Hello>) {
                log(now, log_kind::kHello, json::object(), out);
                out.messages.push_back(session_start_message(now));
                out.messages.push_back(phase_message(now));
            } else if constexpr (std::is_same_v<T, wire::GazeSampleMsg>) {
                route_gaze(p, msg.client_ts_ms, now, out);
            } else if constexpr (std::is_same_v<T, wire::KeyEventMsg>) {
                on_key(p, msg.client_ts_ms, now, out);
            } else if constexpr (std::is_same_v<T, wire::CalibrationPoint>) {
                if (phase_.kind != PhaseKind::Calibration) return out_of_phase("calibration_point");
                ++calibration_points_;
                log(now, log_kind::kCalibrationPoint, {{"x", p.x}, {"y", p.y}}, out);
            } else if constexpr (std::is_same_v<T, wire::CalibrationDone>) {
                if (phase_.kind != PhaseKind::Calibration) return out_of_phase("calibration_done");
                if (p.count < options_.min_calibration_points) {
                    return reject(now, "calibration_incomplete",
                                  "calibration needs at least " +
                                      std::to_string(options_.min_calibration_points) +
                                      " points, got " + std::to_string(p.count),
                                  out);
                }
                transition({PhaseKind::Ready, 0, now}, now, out);
            } else if constexpr (std::is_same_v<T, wire::QuestionnaireMsg>) {
                if (phase_.kind != PhaseKind::Questionnaire) return out_of_phase("questionnaire");
                try {
                    validate(p.response);
                } catch (const ValidationError& e) {
                    return reject(now, "validation", e.what(), out);
                }
                log(now, log_kind::kQuestionnaire, to_json(p.response), out);
                transition({PhaseKind::Rest, 0, now}, now, out);
            } else if constexpr (std::is_same_v<T, wire::RestExitRequest>) {
                if (phase_.kind != PhaseKind::Rest) return out_of_phase("rest_exit_request");
                const Millis rested = now - phase_.started_ms;
                if (rested < options_.rest_min_ms) {
                    return reject(now, "rest_guard",
                                  "rest lasted " + std::to_string(rested) + " ms, minimum is " +
                                      std::to_string(options_.rest_min_ms) + " ms",
                                  out);
                }
                if (current_ + 1 < sessions_.size()) {
                    enter_session(current_ + 1, now, out);
                } else {
                    transition({PhaseKind::Done, 0, now}, now, out);
                }
            }
        },
        msg.payload);
}

} // namespace eyero
