#include "eyero/virtual_participant.hpp"

#include "eyero/errors.hpp"
#include "eyero/statistics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace eyero {

namespace {

struct ParamField {
    const char* name;
    double AgentParams::*member;
};

constexpr ParamField kParamFields[] = {
    {"kappa_attentive", &AgentParams::kappa_attentive},
    {"kappa_lapse", &AgentParams::kappa_lapse},
    {"sigma", &AgentParams::sigma},
    {"lambda0", &AgentParams::lambda0},
    {"lambda1", &AgentParams::lambda1},
    {"distraction_mult", &AgentParams::distraction_mult},
    {"rho", &AgentParams::rho},
    {"rt_base_ms", &AgentParams::rt_base_ms},
    {"rt_slope_ms_per_unit_dist", &AgentParams::rt_slope_ms_per_unit_dist},
    {"rt_noise_ms", &AgentParams::rt_noise_ms},
    {"sample_hz", &AgentParams::sample_hz},
    {"wander_gain", &AgentParams::wander_gain},
    {"recovery_rate", &AgentParams::recovery_rate},
    {"p_wrong_key", &AgentParams::p_wrong_key},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

void AgentParams::validate() const {
    for (const auto& f : kParamFields) {
        const double v = this->*f.member;
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError(std::string(f.name) + " must be a finite nonnegative number");
        }
    }
    if (rho > 1.0) throw ConfigError("rho must lie in [0, 1]");
    if (p_wrong_key > 1.0) throw ConfigError("p_wrong_key must lie in [0, 1]");
    if (distraction_mult < 1.0) throw ConfigError("distraction_mult must be at least 1");
    if (kappa_lapse > kappa_attentive) {
        throw ConfigError("kappa_lapse must not exceed kappa_attentive");
    }
    if (!(sample_hz > 0.0) || sample_hz > 1000.0) {
        throw ConfigError("sample_hz must lie in (0, 1000]");
    }
}

AgentParams parse_agent_params(std::istream& in) {
    AgentParams p;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("params line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto field = std::find_if(std::begin(kParamFields), std::end(kParamFields),
                                        [&](const ParamField& f) { return key == f.name; });
        if (field == std::end(kParamFields)) {
            throw ConfigError("params line " + std::to_string(number) + ": unknown key '" + key +
                              "'");
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
            throw ConfigError("params line " + std::to_string(number) + ": bad number '" + value +
                              "' for " + key);
        }
        p.*(field->member) = v;
    }
    p.validate();
    return p;
}

AgentParams load_agent_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open params file " + path.string());
    return parse_agent_params(in);
}

std::string format_agent_params(const AgentParams& p) {
    std::string out;
    for (const auto& f : kParamFields) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, p.*f.member);
        out += std::string(f.name) + " = " + std::string(buf, res.ptr) + "\n";
    }
    return out;
}

// ---- simulation ------------------------------------------------------------------------

namespace {

struct PendingKey {
    Millis ts_ms;
    ResponseKey key;
};

class Agent {
public:
    Agent(const AgentParams& p, bool distraction, std::uint64_t seed)
        : p_(p),
          distraction_(distraction),
          dynamics_(mix_seed(seed, 1)),
          responses_(mix_seed(seed, 2)),
          reactions_(mix_seed(seed, 3)) {}

    // Advances gaze by one sample period; t_min is the time since the task
    // became ready, in minutes.
    void step(double dt, double t_min) {
        const double hazard =
            (p_.lambda0 + p_.lambda1 * t_min) * (distraction_ ? p_.distraction_mult : 1.0);
        if (!lapsed_) {
            if (unit_(dynamics_) < 1.0 - std::exp(-hazard * dt)) begin_lapse();
        } else if (unit_(dynamics_) < 1.0 - std::exp(-p_.recovery_rate * dt)) {
            lapsed_ = false;
        }

        const double kappa = lapsed_ ? p_.kappa_lapse : p_.kappa_attentive;
        const double noise = p_.sigma * std::sqrt(dt);
        double dx = kappa * (0.5 - x_) * dt + noise * normal_(dynamics_);
        double dy = kappa * (0.5 - y_) * dt + noise * normal_(dynamics_);
        if (lapsed_) {
            dx += p_.wander_gain * (wx_ - x_) * dt;
            dy += p_.wander_gain * (wy_ - y_) * dt;
        }
        x_ = std::clamp(x_ + dx, 0.0, 1.0);
        y_ = std::clamp(y_ + dy, 0.0, 1.0);
    }

    // Returns whether the reaction ended a lapse; only called while lapsed.
    bool feel_activation() {
        if (unit_(reactions_) < p_.rho) {
            lapsed_ = false;
            return true;
        }
        return false;
    }

    std::optional<PendingKey> respond(StimulusShape shape, Millis onset, Millis window_end) {
        const double dist = std::hypot(x_ - 0.5, y_ - 0.5);
        const bool slip = unit_(responses_) < p_.p_wrong_key;
        const double rt_draw =
            p_.rt_base_ms + p_.rt_slope_ms_per_unit_dist * dist + p_.rt_noise_ms * normal_(responses_);
        const bool side = unit_(responses_) < 0.5;
        if (shape == StimulusShape::Distractor) {
            if (!slip) return std::nullopt;
            return PendingKey{clip_rt(rt_draw, onset, window_end),
                              side ? ResponseKey::Left : ResponseKey::Right};
        }
        if (lapsed_ && dist > 0.35) return std::nullopt;
        const ResponseKey right_key =
            shape == StimulusShape::Target ? ResponseKey::Left : ResponseKey::Right;
        const ResponseKey wrong_key =
            right_key == ResponseKey::Left ? ResponseKey::Right : ResponseKey::Left;
        return PendingKey{clip_rt(rt_draw, onset, window_end), slip ? wrong_key : right_key};
    }

    QuestionnaireResponse answer() {
        QuestionnaireResponse q;
        std::uniform_int_distribution<int> likert(2, 6);
        for (int& v : q.q) v = likert(responses_);
        return q;
    }

    bool lapsed() const { return lapsed_; }
    double x() const { return x_; }
    double y() const { return y_; }
    int lapses() const { return lapses_; }

private:
    void begin_lapse() {
        lapsed_ = true;
        ++lapses_;
        const double angle = 2.0 * std::numbers::pi * unit_(dynamics_);
        const double radius = 0.4 + 0.1 * unit_(dynamics_);
        wx_ = 0.5 + radius * std::cos(angle);
        wy_ = 0.5 + radius * std::sin(angle);
    }

    static Millis clip_rt(double rt, Millis onset, Millis window_end) {
        const Millis r = std::llround(rt);
        return onset + std::clamp<Millis>(r, 1, window_end - onset);
    }

    AgentParams p_;
    bool distraction_;
    std::mt19937_64 dynamics_;
    std::mt19937_64 responses_;
    std::mt19937_64 reactions_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
    double x_ = 0.5;
    double y_ = 0.5;
    double wx_ = 0.5;
    double wy_ = 0.5;
    bool lapsed_ = false;
    int lapses_ = 0;
};

bool in_task(const SessionEngine& e) {
    const auto k = e.phase().kind;
    return k == PhaseKind::Ready || k == PhaseKind::Running;
}

} // namespace

SimulatedSession simulate_session(const ScheduledSession& session, const AgentParams& params,
                                  std::uint64_t seed, const SimulationOptions& options) {
    params.validate();
    EngineOptions engine_options = options.engine;
    engine_options.participant_id = options.participant_id;
    SessionEngine engine(engine_options, {session});
    Agent agent(params, session.config.distraction, seed);

    SimulatedSession result;
    result.session = session;
    Effects fx;
    std::optional<Millis> ready_at;
    std::vector<PendingKey> keys;

    const auto drain = [&]() {
        for (const auto& in : fx.intents) {
            result.intents.push_back(in);
            if (in.active && agent.lapsed()) {
                result.reactions.push_back({in.ts_ms, in.site, agent.feel_activation()});
            }
        }
        for (const auto& m : fx.messages) {
            if (m.type == "trial_onset") {
                const auto i = m.payload.at("index").get<std::size_t>();
                const auto& t = engine.trial_timing().at(i);
                if (auto k = agent.respond(engine.trial_plan().at(i).shape, t.onset_ms,
                                           t.window_end_ms)) {
                    keys.push_back(*k);
                }
            } else if (m.type == "phase" && m.payload.at("name") == "ready") {
                ready_at = m.ts_ms;
            }
        }
        if (options.record_log) {
            for (auto& r : fx.log) result.log.push_back(std::move(r));
        }
        fx.clear();
    };
    const auto send = [&](Millis ts, wire::InboundPayload payload) {
        engine.handle(wire::InboundMessage{ts, std::move(payload)}, ts, fx);
        drain();
    };

    Millis now = 0;
    engine.start(now, fx);
    drain();

    // Nine-point calibration, one dot every 500 ms.
    for (int k = 0; k < 9; ++k) {
        now += 500;
        send(now, wire::CalibrationPoint{0.1 + 0.4 * (k % 3), 0.1 + 0.4 * (k / 3)});
    }
    now += 500;
    send(now, wire::CalibrationDone{9});
    if (!ready_at) throw Error("simulated session did not reach the ready phase");

    const double dt = 1.0 / params.sample_hz;
    std::size_t key_cursor = 0;
    std::int64_t sample = 0;
    Millis lapse_ms = 0;
    std::vector<GazeSample> gaze;
    while (in_task(engine)) {
        const Millis sample_ts =
            *ready_at + std::llround(static_cast<double>(sample) * 1000.0 / params.sample_hz);
        const Millis key_ts =
            key_cursor < keys.size() ? keys[key_cursor].ts_ms : std::numeric_limits<Millis>::max();
        const Millis deadline =
            engine.next_deadline().value_or(std::numeric_limits<Millis>::max());

        if (deadline <= sample_ts && deadline <= key_ts) {
            engine.tick(deadline, fx);
            drain();
            continue;
        }
        if (key_ts <= sample_ts) {
            send(key_ts, wire::KeyEventMsg{keys[key_cursor].key});
            ++key_cursor;
            continue;
        }

        const bool was_lapsed = agent.lapsed();
        agent.step(dt, static_cast<double>(sample_ts - *ready_at) / 60000.0);
        if (was_lapsed || agent.lapsed()) {
            lapse_ms += std::llround(1000.0 * dt);
        }
        send(sample_ts, wire::GazeSampleMsg{agent.x(), agent.y(), true});
        gaze.push_back({sample_ts, agent.x(), agent.y(), true});
        ++sample;
    }

    result.entropy = gaze.empty() ? 0.0 : gaze_entropy(gaze, 8, 8);
    if (options.record_gaze) result.gaze = std::move(gaze);
    result.outcomes = engine.outcomes();
    result.plan = engine.trial_plan();
    result.lapse_ms = lapse_ms;
    result.lapses = agent.lapses();

    now = engine.phase().started_ms + 3000;
    result.questionnaire = agent.answer();
    send(now, wire::QuestionnaireMsg{result.questionnaire});
    now += engine_options.rest_min_ms;
    send(now, wire::RestExitRequest{});
    result.end_ts = now;
    if (!engine.done()) throw Error("simulated session did not finish");
    return result;
}

SimulatedSession simulate_session(const SessionConfig& config, const AgentParams& params,
                                  std::uint64_t seed, const SimulationOptions& options) {
    return simulate_session(ScheduledSession{0, config, mix_seed(seed, 0x7472)}, params, seed,
                            options);
}

AgentParams jitter_params(const AgentParams& base, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> log_noise(0.0, 0.1);
    AgentParams p = base;
    for (double AgentParams::*m :
         {&AgentParams::kappa_attentive, &AgentParams::kappa_lapse, &AgentParams::sigma,
          &AgentParams::lambda0, &AgentParams::lambda1, &AgentParams::distraction_mult,
          &AgentParams::rt_base_ms, &AgentParams::rt_slope_ms_per_unit_dist,
          &AgentParams::rt_noise_ms, &AgentParams::wander_gain, &AgentParams::recovery_rate}) {
        p.*m *= std::exp(log_noise(rng));
    }
    p.distraction_mult = std::max(1.0, p.distraction_mult);
    p.kappa_lapse = std::min(p.kappa_lapse, p.kappa_attentive);
    p.validate();
    return p;
}

std::string participant_label(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%02d", index + 1);
    return buf;
}

std::vector<SimulatedParticipant> simulate_study(int participants, const AgentParams& params,
                                                 std::uint64_t seed,
                                                 const StudySimulationOptions& options) {
    if (participants < 2) throw ConfigError("a simulated study needs at least two participants");
    params.validate();
    std::vector<SimulatedParticipant> out;
    out.reserve(static_cast<std::size_t>(participants));
    for (int i = 0; i < participants; ++i) {
        SimulatedParticipant sp;
        sp.participant_id = participant_label(i);
        sp.plan = generate_study_plan(sp.participant_id, mix_seed(seed, 0x5000 + i));
        sp.params = jitter_params(params, mix_seed(seed, 0x4A00 + i));

        SimulationOptions so;
        so.participant_id = sp.participant_id;
        so.engine.log_gaze = options.log_gaze;
        so.record_log = options.record_log;
        so.record_gaze = options.record_gaze;
        for (const auto& s : schedule_for(sp.plan)) {
            if (options.include && !options.include(s.config)) continue;
            const auto agent_seed = mix_seed(sp.plan.seed, 0xA6E0 + static_cast<unsigned>(s.index));
            sp.sessions.push_back(simulate_session(s, sp.params, agent_seed, so));
        }
        out.push_back(std::move(sp));
    }
    return out;
}

} // namespace eyero

namespace eyero {

StudyTables live_tables(const std::vector<SimulatedParticipant>& participants) {
    std::vector<const SimulatedParticipant*> order;
    for (const auto& p : participants) order.push_back(&p);
    std::sort(order.begin(), order.end(),
              [](const auto* a, const auto* b) { return a->participant_id < b->participant_id; });

    StudyTables t;
    for (const auto* p : order) {
        std::vector<const SimulatedSession*> sessions;
        for (const auto& s : p->sessions) sessions.push_back(&s);
        std::sort(sessions.begin(), sessions.end(), [](const auto* a, const auto* b) {
            return a->session.index < b->session.index;
        });
        for (const auto* s : sessions) {
            const int index = s->session.index;
            const auto& config = s->session.config;
            for (std::size_t i = 0; i < s->outcomes.size(); ++i) {
                t.trials.push_back({p->participant_id, index, config, static_cast<int>(i),
                                    s->plan.at(i).shape, s->outcomes[i]});
            }
            for (const auto& g : s->gaze) {
                t.gaze.push_back({p->participant_id, index, g.ts_ms, g.x, g.y, g.valid});
            }
            t.questionnaire.push_back({p->participant_id, index, s->questionnaire});
            t.sessions.push_back({p->participant_id, index, config, 0, s->end_ts});
        }
    }
    return t;
}

} // namespace eyero
