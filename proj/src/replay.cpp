#include "eyero/replay.hpp"

#include "eyero/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace eyero {

ReplayedSession replay(std::span<const EventRecord> records) {
    ReplayedSession s;
    s.record_count = records.size();
    if (records.empty()) return s;
    s.participant_id = records.front().participant_id;
    s.session_index = records.front().session_index;
    s.start_ts = records.front().ts_ms;
    s.end_ts = records.back().ts_ms;

    for (std::size_t n = 0; n < records.size(); ++n) {
        const auto& r = records[n];
        const std::size_t line = n + 1;
        if (r.participant_id != s.participant_id || r.session_index != s.session_index) {
            throw ReplayError("record belongs to a different participant/session", line);
        }
        if (n > 0 && r.ts_ms < records[n - 1].ts_ms) {
            throw ReplayError("timestamps go backwards", line);
        }
        const json& p = r.payload;
        try {
            if (r.kind == log_kind::kSessionStart) {
                s.config = session_config_from_json(p);
                s.filter.r_on = p.at("r_on").get<double>();
                s.filter.r_off = p.at("r_off").get<double>();
            } else if (r.kind == log_kind::kTrialPlan) {
                s.plan.clear();
                for (const auto& t : p.at("trials")) s.plan.push_back(trial_spec_from_json(t));
            } else if (r.kind == log_kind::kPhase) {
                PhaseRecord ph{r.ts_ms, phase_kind_from_string(p.at("name").get<std::string>()),
                               p.value("trial_index", 0)};
                const bool was_task = !s.phases.empty() &&
                                      (s.phases.back().kind == PhaseKind::Ready ||
                                       s.phases.back().kind == PhaseKind::Running);
                if (ph.kind == PhaseKind::Ready) {
                    s.control.push_back({ControlEvent::Kind::Reset, GazeSample{r.ts_ms}});
                } else if (was_task && ph.kind != PhaseKind::Running) {
                    s.control.push_back({ControlEvent::Kind::Release, GazeSample{r.ts_ms}});
                }
                s.phases.push_back(ph);
            } else if (r.kind == log_kind::kGaze) {
                GazeSample g{r.ts_ms, p.at("x").get<double>(), p.at("y").get<double>(),
                             p.at("valid").get<bool>()};
                s.gaze.push_back(g);
                if (p.at("routed").get<bool>()) {
                    s.routed_gaze.push_back(g);
                    s.control.push_back({ControlEvent::Kind::Gaze, g});
                }
            } else if (r.kind == log_kind::kIntent) {
                s.intents.push_back({body_site_from_string(p.at("site").get<std::string>()),
                                     p.at("active").get<bool>(), r.ts_ms});
            } else if (r.kind == log_kind::kTrialOnset) {
                const auto index = p.at("index").get<std::size_t>();
                if (index != s.timing.size()) throw ReplayError("trial onsets out of order", line);
                s.timing.push_back({r.ts_ms, p.at("window_end_ms").get<Millis>()});
            } else if (r.kind == log_kind::kKey) {
                s.keys.push_back({response_key_from_string(p.at("key").get<std::string>()), r.ts_ms});
            } else if (r.kind == log_kind::kTrialResult) {
                s.trials.push_back({r.ts_ms, p.at("index").get<int>(),
                                    stimulus_shape_from_string(p.at("shape").get<std::string>()),
                                    trial_outcome_from_json(p.at("outcome"))});
            } else if (r.kind == log_kind::kQuestionnaire) {
                s.questionnaire = questionnaire_from_json(p);
            } else if (r.kind == log_kind::kHello || r.kind == log_kind::kCalibrationPoint ||
                       r.kind == log_kind::kRejected) {
                // informational
            } else {
                throw ReplayError("unknown record kind '" + r.kind + "'", line);
            }
        } catch (const json::exception& e) {
            throw ReplayError(std::string("bad payload: ") + e.what(), line);
        } catch (const ValidationError& e) {
            throw ReplayError(std::string("bad payload: ") + e.what(), line);
        }
    }
    return s;
}

ReplayedSession replay_file(const fs::path& path) {
    const auto records = read_log(path);
    return replay(records);
}

std::vector<ActuatorIntent> reenact_intents(const ReplayedSession& s) {
    std::vector<ActuatorIntent> intents;
    if (!s.config) return intents;
    ControllerState state = initial_controller_state(s.config->feedback);
    for (const auto& ev : s.control) {
        switch (ev.kind) {
            case ControlEvent::Kind::Reset:
                state = initial_controller_state(s.config->feedback, ev.sample.ts_ms);
                break;
            case ControlEvent::Kind::Gaze:
                controller_step_into(state, ev.sample, s.filter, intents);
                break;
            case ControlEvent::Kind::Release:
                controller_release(state, ev.sample.ts_ms, intents);
                break;
        }
    }
    return intents;
}

std::vector<TrialOutcome> rescore_trials(const ReplayedSession& s) {
    std::vector<TrialOutcome> out;
    for (const auto& t : s.trials) {
        const auto i = static_cast<std::size_t>(t.index);
        if (i >= s.plan.size() || i >= s.timing.size()) {
            throw ReplayError("trial result without plan or onset", s.record_count);
        }
        const auto& timing = s.timing[i];
        out.push_back(score_response(s.plan[i], s.keys, timing.onset_ms,
                                     timing.window_end_ms - timing.onset_ms));
    }
    return out;
}

ReplayCheck verify_replay(const ReplayedSession& s) {
    ReplayCheck check;
    check.intents_match = reenact_intents(s) == s.intents;
    std::vector<TrialOutcome> logged;
    for (const auto& t : s.trials) logged.push_back(t.outcome);
    check.outcomes_match = rescore_trials(s) == logged;
    return check;
}

// ---- tables ---------------------------------------------------------------------

StudyTables export_tables(std::span<const ReplayedSession> sessions) {
    StudyTables t;
    for (const auto& s : sessions) {
        if (!s.config) continue;
        for (const auto& tr : s.trials) {
            t.trials.push_back({s.participant_id, s.session_index, *s.config, tr.index, tr.shape,
                                tr.outcome});
        }
        for (const auto& g : s.routed_gaze) {
            t.gaze.push_back({s.participant_id, s.session_index, g.ts_ms, g.x, g.y, g.valid});
        }
        if (s.questionnaire) {
            t.questionnaire.push_back({s.participant_id, s.session_index, *s.questionnaire});
        }
        t.sessions.push_back({s.participant_id, s.session_index, *s.config, s.start_ts, s.end_ts});
    }
    return t;
}

StudyTables export_tables_from_dir(const fs::path& log_dir) {
    std::vector<ReplayedSession> sessions;
    for (const auto& f : find_log_files(log_dir)) sessions.push_back(replay_file(f));
    return export_tables(sessions);
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("not a number: '" + s + "'");
    }
    return v;
}

long long parse_int(const std::string& s) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("not an integer: '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw ValidationError("not a 0/1 flag: '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

const char* kTrialsHeader =
    "participant,session,feedback,duration,distraction,trial,shape,responded,key,rt_ms,correct,missed";
const char* kGazeHeader = "participant,session,ts_ms,x,y,valid";
const char* kQuestionnaireHeader = "participant,session,q1,q2,q3,q4,q5,q6";
const char* kSessionsHeader = "participant,session,feedback,duration,distraction,start_ts,end_ts";

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

void config_cells(std::ostream& out, const SessionConfig& c) {
    out << to_string(c.feedback) << ',' << to_string(c.duration) << ',' << (c.distraction ? 1 : 0);
}

template <class Row, class Parse>
std::vector<Row> read_csv(const fs::path& p, const char* header, std::size_t columns, Parse parse) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw ValidationError(p.filename().string() + ": unexpected header");
    }
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != columns) {
            throw ValidationError(p.filename().string() + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(columns) + " columns");
        }
        try {
            rows.push_back(parse(cells));
        } catch (const ValidationError& e) {
            throw ValidationError(p.filename().string() + ":" + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    return rows;
}

SessionConfig parse_config(const std::vector<std::string>& c, std::size_t at) {
    return SessionConfig{feedback_mode_from_string(c[at]), duration_class_from_string(c[at + 1]),
                         parse_bool(c[at + 2])};
}

} // namespace

void write_tables(const StudyTables& t, const fs::path& dir) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "trials.csv");
        out << kTrialsHeader << '\n';
        for (const auto& r : t.trials) {
            out << r.participant << ',' << r.session << ',';
            config_cells(out, r.config);
            out << ',' << r.trial << ',' << to_string(r.shape) << ','
                << (r.outcome.responded ? 1 : 0) << ','
                << (r.outcome.key ? to_string(*r.outcome.key) : "") << ','
                << (r.outcome.rt_ms ? std::to_string(*r.outcome.rt_ms) : "") << ','
                << (r.outcome.correct ? 1 : 0) << ',' << (r.outcome.missed ? 1 : 0) << '\n';
        }
    }
    {
        auto out = open_out(dir / "gaze.csv");
        out << kGazeHeader << '\n';
        for (const auto& r : t.gaze) {
            out << r.participant << ',' << r.session << ',' << r.ts_ms << ',' << fmt_double(r.x)
                << ',' << fmt_double(r.y) << ',' << (r.valid ? 1 : 0) << '\n';
        }
    }
    {
        auto out = open_out(dir / "questionnaire.csv");
        out << kQuestionnaireHeader << '\n';
        for (const auto& r : t.questionnaire) {
            out << r.participant << ',' << r.session;
            for (int q : r.response.q) out << ',' << q;
            out << '\n';
        }
    }
    {
        auto out = open_out(dir / "sessions.csv");
        out << kSessionsHeader << '\n';
        for (const auto& r : t.sessions) {
            out << r.participant << ',' << r.session << ',';
            config_cells(out, r.config);
            out << ',' << r.start_ts << ',' << r.end_ts << '\n';
        }
    }
}

StudyTables read_tables(const fs::path& dir) {
    StudyTables t;
    t.trials = read_csv<TrialRow>(dir / "trials.csv", kTrialsHeader, 12, [](const auto& c) {
        TrialRow r;
        r.participant = c[0];
        r.session = static_cast<int>(parse_int(c[1]));
        r.config = parse_config(c, 2);
        r.trial = static_cast<int>(parse_int(c[5]));
        r.shape = stimulus_shape_from_string(c[6]);
        r.outcome.responded = parse_bool(c[7]);
        if (!c[8].empty()) r.outcome.key = response_key_from_string(c[8]);
        if (!c[9].empty()) r.outcome.rt_ms = parse_int(c[9]);
        r.outcome.correct = parse_bool(c[10]);
        r.outcome.missed = parse_bool(c[11]);
        return r;
    });
    t.gaze = read_csv<GazeRow>(dir / "gaze.csv", kGazeHeader, 6, [](const auto& c) {
        return GazeRow{c[0], static_cast<int>(parse_int(c[1])), parse_int(c[2]),
                       parse_double(c[3]), parse_double(c[4]), parse_bool(c[5])};
    });
    t.questionnaire = read_csv<QuestionnaireRow>(
        dir / "questionnaire.csv", kQuestionnaireHeader, 8, [](const auto& c) {
            QuestionnaireRow r{c[0], static_cast<int>(parse_int(c[1])), {}};
            for (std::size_t i = 0; i < 6; ++i) r.response.q[i] = static_cast<int>(parse_int(c[2 + i]));
            return r;
        });
    t.sessions = read_csv<SessionRow>(dir / "sessions.csv", kSessionsHeader, 7, [](const auto& c) {
        return SessionRow{c[0], static_cast<int>(parse_int(c[1])), parse_config(c, 2),
                          parse_int(c[5]), parse_int(c[6])};
    });
    return t;
}

} // namespace eyero
