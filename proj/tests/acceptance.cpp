// Acceptance run: one PASS/FAIL line per criterion, with wall time against
// the allowed budget. Exits non-zero when any criterion fails.

#include "eyero/actuator_io.hpp"
#include "eyero/analysis.hpp"
#include "eyero/errors.hpp"
#include "eyero/feedback_controller.hpp"
#include "eyero/gaze_map.hpp"
#include "eyero/replay.hpp"
#include "eyero/session_service.hpp"
#include "eyero/special_functions.hpp"
#include "eyero/statistics.hpp"
#include "eyero/study_design.hpp"
#include "eyero/task_engine.hpp"
#include "eyero/virtual_participant.hpp"

#include "oracles.hpp"
#include "stat_fixtures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace eyero;

namespace {

enum class Verdict { Pass, Fail, Waived };

struct Outcome {
    Verdict verdict = Verdict::Pass;
    std::string detail;
};

// Collects the first failed check of a criterion.
class Checks {
public:
    void require(bool ok, const std::string& what) {
        ++count_;
        if (!ok && first_failure_.empty()) first_failure_ = what;
    }
    Outcome outcome(std::string summary) const {
        if (!first_failure_.empty()) return {Verdict::Fail, first_failure_};
        return {Verdict::Pass, std::to_string(count_) + " checks; " + summary};
    }

private:
    long count_ = 0;
    std::string first_failure_;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- 1: quadrant partition and body-site mapping ------------------------------------

Outcome mapping_suite() {
    Checks c;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long mismatches = 0;
    for (int i = 0; i < 1'000'000; ++i) {
        const GazeSample s{0, u(rng), u(rng), true};
        const Quadrant q = classify_quadrant(s);
        // Independent membership tests; exactly one must hold and match.
        const bool member[4] = {s.x < 0.5 && s.y < 0.5, s.x >= 0.5 && s.y < 0.5,
                                s.x < 0.5 && s.y >= 0.5, s.x >= 0.5 && s.y >= 0.5};
        const int holds = member[0] + member[1] + member[2] + member[3];
        if (holds != 1 || !member[static_cast<int>(q)]) ++mismatches;
    }
    c.require(mismatches == 0, std::to_string(mismatches) + " points misclassified");

    std::set<BodySite> image;
    for (Quadrant q : kAllQuadrants) image.insert(quadrant_to_body_site(q));
    c.require(image.size() == 4, "mapping is not a bijection");

    const auto at = [](double x, double y) { return classify_quadrant({0, x, y, true}); };
    c.require(at(0.5, 0.5) == Quadrant::LowerRight, "center");
    c.require(at(0.5, 0.0) == Quadrant::UpperRight, "x = 0.5 edge");
    c.require(at(0.0, 0.5) == Quadrant::LowerLeft, "y = 0.5 edge");
    c.require(at(0.0, 0.0) == Quadrant::UpperLeft, "origin");
    c.require(at(1.0, 1.0) == Quadrant::LowerRight, "far corner");
    const double below = std::nextafter(0.5, 0.0);
    c.require(at(below, below) == Quadrant::UpperLeft, "just below the center");
    bool rejected = false;
    try {
        at(1.01, 0.2);
    } catch (const ClassificationError&) {
        rejected = true;
    }
    c.require(rejected, "out-of-range sample accepted");
    return c.outcome("10^6 random points, boundary cases, bijection");
}

// ---- 2: controller properties ---------------------------------------------------------

Outcome controller_suite() {
    Checks c;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution dropout(0.05);
    std::uniform_int_distribution<int> gap(0, 40);
    const FilterParams hysteresis{0.20, 0.15};

    const auto run = [](FeedbackMode mode, const std::vector<GazeSample>& stream, FilterParams p) {
        auto state = initial_controller_state(mode);
        std::vector<ActuatorIntent> out;
        for (const auto& s : stream) controller_step_into(state, s, p, out);
        return out;
    };

    const int streams = 10'000;
    for (int n = 0; n < streams; ++n) {
        std::vector<GazeSample> stream;
        Millis ts = 0;
        for (int i = 0; i < 150; ++i) {
            ts += gap(rng);
            double x = u(rng), y = u(rng);
            if (x == 0.5 && y == 0.5) x = 0.25;
            stream.push_back({ts, x, y, !dropout(rng)});
        }
        c.require(run(FeedbackMode::Silence, stream, hysteresis).empty(), "silence emitted an intent");
        for (FeedbackMode mode : {FeedbackMode::Stationary, FeedbackMode::Filter}) {
            const auto intents = run(mode, stream, hysteresis);
            int active = 0;
            bool single = true;
            for (const auto& in : intents) {
                active += in.active ? 1 : -1;
                single = single && active >= 0 && active <= 1;
            }
            c.require(single, "more than one site active");
            c.require(intents == run(mode, stream, hysteresis), "controller is not deterministic");
        }
        c.require(run(FeedbackMode::Filter, stream, {0.0, 0.0}) ==
                      run(FeedbackMode::Stationary, stream, {}),
                  "filter(0,0) differs from stationary");

        // Samples confined to the hysteresis band never toggle the filter.
        std::vector<GazeSample> band;
        for (int i = 0; i < 100; ++i) {
            const double r = 0.15 + 1e-9 + (0.05 - 1e-9) * u(rng);
            const double a = 6.283185307179586 * u(rng);
            band.push_back({i, 0.5 + r * std::cos(a), 0.5 + r * std::sin(a), true});
        }
        c.require(run(FeedbackMode::Filter, band, hysteresis).empty(), "chatter inside the band");
    }
    return c.outcome(std::to_string(streams) + " random streams");
}

// ---- 3: serial protocol ----------------------------------------------------------------

Outcome protocol_suite() {
    Checks c;
    int commands = 0;
    for (BodySite s : kAllBodySites) {
        for (bool on : {false, true}) {
            const SerialCommand cmd{s, on};
            const std::string bytes = encode_command(cmd);
            const std::string want =
                std::string("V,") + std::string(site_code(s)) + (on ? ",1\n" : ",0\n");
            c.require(bytes == want, "encoding of " + want);
            c.require(decode_command(bytes) == cmd, "decoding of " + want);
            ++commands;
        }
    }
    c.require(commands == 8, "command count");

    MockDeviceTransport dev;
    bool ok = true;
    try {
        send_command(dev, {BodySite::LeftWrist, true});
    } catch (const Error&) {
        ok = false;
    }
    c.require(ok, "acknowledged command failed");
    dev.set_reply(MockDeviceTransport::Reply::Silent);
    bool timed_out = false;
    try {
        send_command(dev, {BodySite::LeftWrist, false});
    } catch (const DeviceTimeout&) {
        timed_out = true;
    }
    c.require(timed_out, "missing ack did not time out");
    dev.set_reply(MockDeviceTransport::Reply::Garbage);
    bool bad_ack = false;
    try {
        send_command(dev, {BodySite::RightAnkle, true});
    } catch (const ProtocolError&) {
        bad_ack = true;
    }
    c.require(bad_ack, "malformed ack accepted");
    return c.outcome("8 commands bit-exact, ack, timeout and bad-ack paths");
}

// ---- 4: trial plans -------------------------------------------------------------------

Outcome task_suite() {
    Checks c;
    const int seeds = 10'000;
    std::map<DurationClass, int> first_target;
    for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(seeds); ++seed) {
        for (DurationClass d : {DurationClass::Short, DurationClass::Long}) {
            const auto plan = generate_trial_plan(d, seed);
            int counts[3] = {0, 0, 0};
            bool in_range = true;
            const auto b = interval_bounds(d);
            for (const auto& t : plan) {
                ++counts[static_cast<int>(t.shape)];
                in_range = in_range && t.pre_interval_ms >= b.min_ms && t.pre_interval_ms <= b.max_ms;
            }
            c.require(plan.size() == 10 && counts[0] == 4 && counts[1] == 3 && counts[2] == 3,
                      "plan is not 4:3:3");
            c.require(in_range, "interval out of range");
            first_target[d] += plan[0].shape == StimulusShape::Target ? 1 : 0;
        }
    }
    c.require(interval_bounds(DurationClass::Short).min_ms == 2000 &&
                  interval_bounds(DurationClass::Short).max_ms == 5000,
              "short bounds");
    c.require(interval_bounds(DurationClass::Long).min_ms == 25000 &&
                  interval_bounds(DurationClass::Long).max_ms == 35000,
              "long bounds");
    std::string freq;
    for (auto [d, n] : first_target) {
        const double f = static_cast<double>(n) / seeds;
        c.require(std::fabs(f - 0.4) <= 0.02, "first-trial target frequency " + fmt("%.4f", f));
        freq += std::string(to_string(d)) + " " + fmt("%.4f", f) + " ";
    }
    return c.outcome("first-trial target frequency: " + freq);
}

// ---- 5: study design and rest guard ------------------------------------------------------

Outcome design_suite() {
    Checks c;
    for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
        const auto plan = generate_study_plan("P01", seed);
        c.require(plan.sessions.size() == 12 && is_complete_design(plan.sessions),
                  "plan is not a permutation of the 12 configs");
    }

    const auto rest_exit_accepted = [](Millis rested) {
        EngineOptions opts;
        SessionEngine e(opts, {ScheduledSession{0, {FeedbackMode::Silence, DurationClass::Short, false}, 1}});
        Effects fx;
        e.start(0, fx);
        e.handle({0, wire::CalibrationDone{9}}, 0, fx);
        Millis t = 0;
        while (auto d = e.next_deadline()) e.tick(t = *d, fx);
        e.handle({t, wire::QuestionnaireMsg{{{4, 4, 4, 4, 4, 4}}}}, t, fx);
        const Millis rest_at = e.phase().started_ms;
        e.handle({0, wire::RestExitRequest{}}, rest_at + rested, fx);
        return e.done();
    };
    c.require(!rest_exit_accepted(59'999), "rest exit at 59,999 ms accepted");
    c.require(!rest_exit_accepted(0), "immediate rest exit accepted");
    c.require(rest_exit_accepted(60'000), "rest exit at 60,000 ms rejected");
    return c.outcome("10^4 plans; rest guard at 60,000 ms");
}

// ---- 6: statistics against oracles ---------------------------------------------------------

Outcome statistics_suite() {
    Checks c;
    std::mt19937_64 rng(6);
    double worst_oneway = 0, worst_twoway = 0, worst_t = 0, worst_ft = 0, worst_h = 0;

    for (int i = 0; i < 100; ++i) {
        const auto y = fixtures::random_matrix(rng, 2 + rng() % 24, 2 + rng() % 4);
        const auto want = oracle::oneway(y);
        const auto got = rm_anova_oneway(fixtures::oneway_dataset(y));
        worst_oneway = std::max(worst_oneway, oracle::relative_error(got.F, want.F));
        c.require(got.df1 == want.df1 && got.df2 == want.df2, "one-way df");
    }
    for (int i = 0; i < 100; ++i) {
        const auto y = fixtures::random_cube(rng, 2 + rng() % 20, 2 + rng() % 3, 2 + rng() % 3);
        const auto want = oracle::twoway(y);
        const auto got = rm_anova_twoway_within(fixtures::twoway_dataset(y));
        for (auto [g, w] : {std::pair{got.a.F, want.F_a}, std::pair{got.b.F, want.F_b},
                            std::pair{got.ab.F, want.F_ab}}) {
            worst_twoway = std::max(worst_twoway, oracle::relative_error(g, w));
        }
    }
    c.require(worst_oneway < 1e-9, "one-way F error " + fmt("%.3g", worst_oneway));
    c.require(worst_twoway < 1e-9, "two-way F error " + fmt("%.3g", worst_twoway));

    const auto one = rm_anova_oneway(fixtures::oneway_dataset(fixtures::random_matrix(rng, 21, 3)));
    const auto two = rm_anova_twoway_within(fixtures::twoway_dataset(fixtures::random_cube(rng, 21, 3, 2)));
    c.require(one.df1 == 2 && one.df2 == 40, "one-way df for n=21");
    c.require(two.a.df1 == 2 && two.a.df2 == 40, "feedback df for n=21");
    c.require(two.b.df1 == 1 && two.b.df2 == 20, "duration df for n=21");
    c.require(two.ab.df1 == 2 && two.ab.df2 == 40, "interaction df for n=21");

    std::normal_distribution<double> g;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(21), y(21);
        const double shift = 0.6 * g(rng);
        for (std::size_t k = 0; k < 21; ++k) {
            x[k] = g(rng);
            y[k] = x[k] + shift + 0.8 * g(rng);
        }
        const auto r = paired_comparison(x, y);
        worst_t = std::max(worst_t, std::fabs(r.p - oracle::t_two_sided_p(r.t, r.df)));

        const auto m = fixtures::random_matrix(rng, 3 + rng() % 20, 2);
        std::vector<double> a, b;
        for (const auto& row : m) {
            a.push_back(row[0]);
            b.push_back(row[1]);
        }
        const auto t = paired_comparison(a, b);
        const auto f = rm_anova_oneway(fixtures::oneway_dataset(m));
        worst_ft = std::max(worst_ft, oracle::relative_error(f.F, t.t * t.t));
    }
    c.require(worst_t < 1e-8, "paired t p error " + fmt("%.3g", worst_t));
    c.require(worst_ft < 1e-9, "F = t^2 error " + fmt("%.3g", worst_ft));

    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<oracle::Point> pts;
        std::vector<GazeSample> samples;
        for (int k = 0; k < 500; ++k) {
            const oracle::Point p = k % 3 ? oracle::Point{u(rng), u(rng)}
                                          : oracle::Point{0.4 + 0.2 * u(rng), 0.45 + 0.1 * u(rng)};
            pts.push_back(p);
            samples.push_back({k, p.x, p.y, true});
        }
        worst_h = std::max(worst_h, std::fabs(gaze_entropy(samples) - oracle::histogram_entropy(pts, 8, 8)));
    }
    c.require(worst_h < 1e-12, "entropy error " + fmt("%.3g", worst_h));

    std::vector<GazeSample> single(30, GazeSample{0, 0.3, 0.3, true});
    std::vector<GazeSample> uniform;
    for (int r = 0; r < 8; ++r)
        for (int k = 0; k < 8; ++k) uniform.push_back({0, (k + 0.5) / 8, (r + 0.5) / 8, true});
    c.require(gaze_entropy(single) == 0.0, "single-bin entropy is not 0");
    c.require(std::fabs(gaze_entropy(uniform) - std::log2(64.0)) < 1e-12,
              "uniform entropy is not log2(64)");

    return c.outcome("max errors: one-way " + fmt("%.2g", worst_oneway) + ", two-way " +
                     fmt("%.2g", worst_twoway) + ", t p " + fmt("%.2g", worst_t) + ", F-t^2 " +
                     fmt("%.2g", worst_ft) + ", entropy " + fmt("%.2g", worst_h));
}

// ---- 7: replay determinism ------------------------------------------------------------------

std::string serialize(const std::vector<ActuatorIntent>& intents) {
    std::string s;
    for (const auto& in : intents) {
        s += json{{"ts", in.ts_ms}, {"site", std::string(to_string(in.site))}, {"active", in.active}}.dump();
        s += '\n';
    }
    return s;
}

std::string serialize(const std::vector<TrialOutcome>& outcomes) {
    std::string s;
    for (const auto& o : outcomes) s += to_json(o).dump() + '\n';
    return s;
}

std::vector<EventRecord> through_text(const std::vector<EventRecord>& log) {
    std::stringstream ss;
    for (const auto& r : log) ss << to_line(r) << '\n';
    return read_log(ss);
}

std::string full_report(const StudyTables& tables) {
    const auto m = compute_study_metrics(tables);
    std::vector<MetricReport> reports;
    for (Metric metric : kAllMetrics) reports.push_back(analyze_metric(m, metric));
    std::string text = format_report(reports, m.participants.size());
    for (const auto& row : condition_summary(m)) {
        for (const auto& ms : row.metrics) {
            text += ms ? fmt("%.17g ", ms->mean) + fmt("%.17g;", ms->sd) : std::string("-;");
        }
    }
    for (const auto& row : entropy_heatmap(m).cells)
        for (double v : row) text += fmt("%.17g,", v);
    return text;
}

Outcome replay_suite() {
    Checks c;
    int sessions = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        for (const auto& config : all_session_configs()) {
            const auto sim = simulate_session(config, AgentParams{}, seed);
            const auto s = replay(through_text(sim.log));
            c.require(serialize(reenact_intents(s)) == serialize(sim.intents),
                      "replayed intents differ for " + config_label(config));
            c.require(serialize(rescore_trials(s)) == serialize(sim.outcomes),
                      "replayed outcomes differ for " + config_label(config));
            ++sessions;
        }
    }

    StudySimulationOptions opts;
    opts.record_gaze = true;
    const auto study = simulate_study(4, AgentParams{}, 7, opts);
    std::vector<ReplayedSession> replayed;
    for (const auto& p : study)
        for (const auto& s : p.sessions) replayed.push_back(replay(through_text(s.log)));
    const std::string live = full_report(live_tables(study));
    const std::string from_logs = full_report(export_tables(replayed));
    c.require(live == from_logs, "analysis of the live study differs from the replayed logs");
    return c.outcome(std::to_string(sessions) + " sessions replayed; 4-participant study analysis identical");
}

// ---- 8: closed-loop directional experiment ------------------------------------------------------

struct Directional {
    PairedResult test;
    double filter_mean = 0;
    double silence_mean = 0;
};

Directional long_entropy_experiment(const AgentParams& params) {
    constexpr int kParticipants = 21;
    constexpr int kSeeds = 100;
    StudySimulationOptions opts;
    opts.record_log = false;
    opts.log_gaze = false;
    opts.include = [](const SessionConfig& c) {
        return c.duration == DurationClass::Long && c.feedback != FeedbackMode::Stationary;
    };
    std::vector<double> filter(kParticipants, 0.0), silence(kParticipants, 0.0);
    for (int seed = 0; seed < kSeeds; ++seed) {
        const auto study = simulate_study(kParticipants, params, static_cast<std::uint64_t>(seed), opts);
        for (std::size_t i = 0; i < study.size(); ++i) {
            double f = 0, s = 0;
            int nf = 0, ns = 0;
            for (const auto& sess : study[i].sessions) {
                if (sess.session.config.feedback == FeedbackMode::Filter) {
                    f += sess.entropy;
                    ++nf;
                } else {
                    s += sess.entropy;
                    ++ns;
                }
            }
            filter[i] += f / nf / kSeeds;
            silence[i] += s / ns / kSeeds;
        }
    }
    return {paired_comparison(filter, silence), mean_of(filter), mean_of(silence)};
}

Outcome closed_loop_suite() {
    Checks c;
    const auto active = long_entropy_experiment(AgentParams{});
    AgentParams severed;
    severed.rho = 0.0;
    const auto control = long_entropy_experiment(severed);
    c.require(active.test.p_less < 0.01,
              "rho=0.8: one-sided p = " + fmt("%.3g", active.test.p_less));
    c.require(control.test.p > 0.1, "rho=0: two-sided p = " + fmt("%.3g", control.test.p));
    return c.outcome("rho=0.8: H filter " + fmt("%.4f", active.filter_mean) + " vs silence " +
                     fmt("%.4f", active.silence_mean) + ", t(20) = " + fmt("%.3f", active.test.t) +
                     ", one-sided p = " + fmt("%.3g", active.test.p_less) + "; rho=0: t(20) = " +
                     fmt("%.3f", control.test.t) + ", p = " + fmt("%.3f", control.test.p));
}

// ---- 9: re-analysis of the released dataset ---------------------------------------------------

Outcome dataset_suite() {
    const char* env = std::getenv("EYEROFEEDBACK_DATASET");
    if (!env || !*env) {
        return {Verdict::Waived, "EYEROFEEDBACK_DATASET is not set; no released dataset available"};
    }
    StudyTables tables;
    try {
        tables = read_tables(env);
    } catch (const Error& e) {
        return {Verdict::Waived, std::string("dataset does not parse into the CSV schemas: ") + e.what()};
    }
    Checks c;
    const auto m = compute_study_metrics(tables);
    const auto rt = analyze_metric(m, Metric::ResponseTime);
    c.require(rt.error.empty(), "response time could not be analyzed: " + rt.error);
    double F = NAN, p = NAN, stationary = NAN;
    if (rt.feedback_by_duration) {
        F = rt.feedback_by_duration->a.F;
        p = rt.feedback_by_duration->a.p;
    }
    for (const auto& row : condition_summary(m)) {
        const auto& ms = row.metrics[static_cast<std::size_t>(Metric::ResponseTime)];
        if (row.config == SessionConfig{FeedbackMode::Stationary, DurationClass::Long, false} && ms) {
            stationary = ms->mean;
        }
    }
    c.require(std::fabs(F - 3.3135) <= 0.01, "feedback F = " + fmt("%.4f", F));
    c.require(std::fabs(p - 0.0466) <= 0.001, "feedback p = " + fmt("%.4f", p));
    c.require(std::fabs(stationary - (-0.5468)) <= 0.001,
              "stationary long/no-distraction mean = " + fmt("%.4f", stationary));
    const auto h = entropy_heatmap(m);
    c.require(h.cells.size() == 21 && h.columns.size() == 12, "heatmap shape");
    return c.outcome("F = " + fmt("%.4f", F) + ", p = " + fmt("%.4f", p) + ", stationary mean " +
                     fmt("%.4f", stationary));
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "mapping and partition", 1, mapping_suite},
        {2, "controller properties", 10, controller_suite},
        {3, "serial protocol", 1, protocol_suite},
        {4, "task structure", 10, task_suite},
        {5, "study design", 1, design_suite},
        {6, "statistics oracles", 60, statistics_suite},
        {7, "replay determinism", 10, replay_suite},
        {8, "closed-loop direction", 300, closed_loop_suite},
        {9, "dataset re-analysis", 60, dataset_suite},
    };

    int failures = 0;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {Verdict::Fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.verdict == Verdict::Pass && secs >= cr.budget_s) {
            o = {Verdict::Fail, "over the time budget; " + o.detail};
        }
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "WAIVED";
        std::printf("criterion %d %-24s %-6s %7.2fs / %.0fs  %s\n", cr.id, cr.name, tag, secs,
                    cr.budget_s, o.detail.c_str());
        std::fflush(stdout);
        failures += o.verdict == Verdict::Fail ? 1 : 0;
    }
    return failures == 0 ? 0 : 1;
}
