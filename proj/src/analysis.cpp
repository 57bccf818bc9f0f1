#include "eyero/analysis.hpp"

#include "eyero/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace eyero {

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::ResponseTime: return "rt";
        case Metric::Missed:       return "missed";
        case Metric::Accuracy:     return "accuracy";
        case Metric::Entropy:      return "entropy";
    }
    return "?";
}

Metric metric_from_string(std::string_view name) {
    for (Metric m : kAllMetrics) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown metric '" + std::string(name) + "'");
}

GridSize parse_grid(std::string_view text) {
    const auto x = text.find('x');
    GridSize g;
    try {
        if (x == std::string_view::npos) throw std::invalid_argument("no x");
        std::size_t used = 0;
        const std::string rows(text.substr(0, x));
        const std::string cols(text.substr(x + 1));
        g.rows = std::stoi(rows, &used);
        if (used != rows.size()) throw std::invalid_argument(rows);
        g.cols = std::stoi(cols, &used);
        if (used != cols.size()) throw std::invalid_argument(cols);
    } catch (const std::exception&) {
        throw ValidationError("grid must look like ROWSxCOLS, got '" + std::string(text) + "'");
    }
    if (g.rows <= 0 || g.cols <= 0) throw ValidationError("grid dimensions must be positive");
    return g;
}

StudyMetrics compute_study_metrics(const StudyTables& tables, GridSize grid) {
    using Key = std::pair<std::string, int>;
    std::map<Key, SessionConfig> config_of;
    std::set<std::string> ids;
    for (const auto& s : tables.sessions) {
        config_of[{s.participant, s.session}] = s.config;
        ids.insert(s.participant);
    }

    std::map<Key, std::vector<std::pair<int, TrialOutcome>>> trials;
    for (const auto& t : tables.trials) {
        trials[{t.participant, t.session}].emplace_back(t.trial, t.outcome);
        if (!config_of.count({t.participant, t.session})) {
            config_of[{t.participant, t.session}] = t.config;
            ids.insert(t.participant);
        }
    }
    std::map<Key, std::vector<GazeSample>> gaze;
    for (const auto& g : tables.gaze) {
        gaze[{g.participant, g.session}].push_back({g.ts_ms, g.x, g.y, g.valid});
    }

    StudyMetrics m;
    m.participants.assign(ids.begin(), ids.end());
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < m.participants.size(); ++i) row_of[m.participants[i]] = i;
    for (auto& v : m.values) v.assign(m.participants.size(), ConfigRow{});

    std::set<Key> seen_cells;
    for (const auto& [key, config] : config_of) {
        const std::size_t row = row_of.at(key.first);
        const auto col = static_cast<std::size_t>(config_index(config));
        if (!seen_cells.insert({key.first, static_cast<int>(col)}).second) {
            throw ValidationError("participant " + key.first + " has config " +
                                  config_label(config) + " more than once");
        }
        const auto set = [&](Metric metric, double v) {
            m.values[static_cast<std::size_t>(metric)][row][col] = v;
        };

        if (auto it = trials.find(key); it != trials.end()) {
            auto rows = it->second;
            std::sort(rows.begin(), rows.end(),
                      [](const auto& l, const auto& r) { return l.first < r.first; });
            if (rows.size() == static_cast<std::size_t>(kTrialsPerSession)) {
                std::vector<TrialOutcome> outcomes;
                for (auto& [_, o] : rows) outcomes.push_back(o);
                const auto sm = session_metrics(outcomes);
                if (sm.mean_rt_ms) set(Metric::ResponseTime, *sm.mean_rt_ms);
                set(Metric::Missed, sm.missed_count);
                set(Metric::Accuracy, sm.accuracy);
            }
        }
        if (auto it = gaze.find(key); it != gaze.end()) {
            const auto binned = bin_gaze(it->second, grid.rows, grid.cols);
            if (binned.total() > 0) set(Metric::Entropy, gaze_entropy(binned));
        }
    }
    return m;
}

std::vector<std::array<double, kSessionsPerStudy>> normalized_metric(const StudyMetrics& m,
                                                                     Metric metric) {
    const auto configs = all_session_configs();
    std::vector<std::string> missing;
    const auto& rows = m.of(metric);
    for (std::size_t p = 0; p < rows.size(); ++p) {
        for (std::size_t c = 0; c < kSessionsPerStudy; ++c) {
            if (!rows[p][c]) {
                missing.push_back(m.participants[p] + "/" + config_label(configs[c]));
            }
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
        throw MissingCellError("metric " + std::string(to_string(metric)) + " is missing cells: " +
                               list);
    }

    std::vector<std::array<double, kSessionsPerStudy>> out(rows.size());
    for (std::size_t p = 0; p < rows.size(); ++p) {
        std::vector<double> v;
        for (const auto& cell : rows[p]) v.push_back(*cell);
        const auto z = z_normalize(v, m.participants[p]);
        std::copy(z.begin(), z.end(), out[p].begin());
    }
    return out;
}

namespace {

MeanSd summarize(const std::vector<double>& v) {
    MeanSd s;
    s.mean = mean_of(v);
    s.sd = v.size() >= 2 ? sample_sd(v) : 0.0;
    return s;
}

} // namespace

std::vector<ConditionSummaryRow> condition_summary(const StudyMetrics& m) {
    if (m.participants.size() < 2) {
        throw ContractError("condition summary needs at least two participants");
    }
    const auto configs = all_session_configs();
    std::vector<ConditionSummaryRow> rows(kSessionsPerStudy);
    for (std::size_t c = 0; c < kSessionsPerStudy; ++c) rows[c].config = configs[c];

    for (Metric metric : kAllMetrics) {
        std::vector<std::array<double, kSessionsPerStudy>> z;
        try {
            z = normalized_metric(m, metric);
        } catch (const DegenerateError&) {
            continue;
        }
        for (std::size_t c = 0; c < kSessionsPerStudy; ++c) {
            std::vector<double> column;
            for (const auto& row : z) column.push_back(row[c]);
            rows[c].metrics[static_cast<std::size_t>(metric)] = summarize(column);
        }
    }
    return rows;
}

EntropyHeatmap entropy_heatmap(const StudyMetrics& m) {
    EntropyHeatmap h;
    h.participants = m.participants;
    for (const auto& c : all_session_configs()) h.columns.push_back(config_label(c));
    const auto configs = all_session_configs();
    std::vector<std::string> missing;
    for (std::size_t p = 0; p < m.participants.size(); ++p) {
        std::array<double, kSessionsPerStudy> row{};
        for (std::size_t c = 0; c < kSessionsPerStudy; ++c) {
            const auto& cell = m.of(Metric::Entropy)[p][c];
            if (!cell) {
                missing.push_back(m.participants[p] + "/" + config_label(configs[c]));
                continue;
            }
            row[c] = *cell;
        }
        h.cells.push_back(row);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
        throw MissingCellError("entropy heatmap is missing cells: " + list);
    }
    return h;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::ofstream open_csv(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

} // namespace

void write_heatmap_csv(const EntropyHeatmap& h, const fs::path& path) {
    auto out = open_csv(path);
    out << "participant";
    for (const auto& c : h.columns) out << ',' << c;
    out << '\n';
    for (std::size_t p = 0; p < h.participants.size(); ++p) {
        out << h.participants[p];
        for (double v : h.cells[p]) out << ',' << num(v);
        out << '\n';
    }
}

void write_summary_csv(const std::vector<ConditionSummaryRow>& rows, const fs::path& path) {
    auto out = open_csv(path);
    out << "feedback,duration,distraction";
    for (Metric m : kAllMetrics) out << ',' << to_string(m) << "_mean," << to_string(m) << "_sd";
    out << '\n';
    for (const auto& r : rows) {
        out << to_string(r.config.feedback) << ',' << to_string(r.config.duration) << ','
            << (r.config.distraction ? 1 : 0);
        for (const auto& ms : r.metrics) {
            if (ms) out << ',' << num(ms->mean) << ',' << num(ms->sd);
            else out << ",,";
        }
        out << '\n';
    }
}

// ---- tests per metric -----------------------------------------------------------------------

RMDataset feedback_dataset(const StudyMetrics& m, Metric metric, bool by_duration) {
    const auto z = normalized_metric(m, metric);
    RMDataset d;
    d.subjects = m.participants;
    d.factors.push_back({"feedback", {"silence", "stationary", "filter"}});
    if (by_duration) {
        d.factors.push_back({"duration", {"short", "long"}});
    } else {
        d.factors.push_back({"distraction", {"without", "with"}});
    }
    for (const auto& row : z) {
        for (FeedbackMode f : kAllFeedbackModes) {
            for (int level = 0; level < 2; ++level) {
                double sum = 0.0;
                for (int other = 0; other < 2; ++other) {
                    const SessionConfig c =
                        by_duration
                            ? SessionConfig{f, static_cast<DurationClass>(level), other == 1}
                            : SessionConfig{f, static_cast<DurationClass>(other), level == 1};
                    sum += row[static_cast<std::size_t>(config_index(c))];
                }
                d.values.push_back(sum / 2.0);
            }
        }
    }
    return d;
}

RMDataset stratum_dataset(const StudyMetrics& m, Metric metric, DurationClass dur,
                          bool distraction) {
    const auto z = normalized_metric(m, metric);
    RMDataset d;
    d.subjects = m.participants;
    d.factors.push_back({"feedback", {"silence", "stationary", "filter"}});
    for (const auto& row : z) {
        for (FeedbackMode f : kAllFeedbackModes) {
            d.values.push_back(row[static_cast<std::size_t>(config_index({f, dur, distraction}))]);
        }
    }
    return d;
}

MetricReport analyze_metric(const StudyMetrics& m, Metric metric) {
    MetricReport report;
    report.metric = metric;
    try {
        report.feedback_by_duration = rm_anova_twoway_within(feedback_dataset(m, metric, true));
        report.feedback_by_distraction = rm_anova_twoway_within(feedback_dataset(m, metric, false));
    } catch (const Error& e) {
        report.error = e.what();
        return report;
    }

    for (DurationClass dur : {DurationClass::Short, DurationClass::Long}) {
        for (bool distraction : {false, true}) {
            StratumTests st{dur, distraction, std::nullopt, {}, {}};
            const RMDataset d = stratum_dataset(m, metric, dur, distraction);
            try {
                st.feedback = rm_anova_oneway(d);
            } catch (const DegenerateError& e) {
                st.feedback_error = e.what();
            }
            const auto column = [&](FeedbackMode f) {
                std::vector<double> v;
                for (std::size_t s = 0; s < d.subjects.size(); ++s) {
                    v.push_back(d.at(s, static_cast<std::size_t>(f)));
                }
                return v;
            };
            const std::pair<FeedbackMode, FeedbackMode> pairs[] = {
                {FeedbackMode::Stationary, FeedbackMode::Silence},
                {FeedbackMode::Filter, FeedbackMode::Silence},
                {FeedbackMode::Filter, FeedbackMode::Stationary},
            };
            for (auto [x, y] : pairs) {
                StratumTests::Pair pr{x, y, summarize(column(x)), summarize(column(y)), {}, {}};
                try {
                    pr.test = paired_comparison(column(x), column(y));
                } catch (const DegenerateError& e) {
                    pr.error = e.what();
                }
                st.pairs.push_back(pr);
            }
            report.strata.push_back(std::move(st));
        }
    }
    return report;
}

std::string format_anova(const AnovaResult& r) {
    std::string s = "F(" + std::to_string(r.df1) + "," + std::to_string(r.df2) + ")";
    if (r.degenerate) return s + " undefined (zero error term)";
    s += " = " + fixed4(r.F) + ", ";
    s += r.p < 0.0001 ? "p < 0.0001" : "p = " + fixed4(r.p);
    return s;
}

namespace {

std::string stratum_label(DurationClass d, bool distraction) {
    return std::string(to_string(d)) + (distraction ? "/with distraction" : "/no distraction");
}

std::string format_p(double p) {
    return p < 0.0001 ? "p < 0.0001" : "p = " + fixed4(p);
}

} // namespace

std::string format_report(const std::vector<MetricReport>& reports, std::size_t participants) {
    std::ostringstream out;
    out << "participants: " << participants << "\n";
    for (const auto& r : reports) {
        out << "\n== " << to_string(r.metric) << " (z-scored within participant) ==\n";
        if (!r.error.empty()) {
            out << "  not analyzable: " << r.error << "\n";
            continue;
        }
        const auto two_way = [&](const TwoWayAnova& t) {
            out << "  " << t.a.effect << ": " << format_anova(t.a) << "\n";
            out << "  " << t.b.effect << ": " << format_anova(t.b) << "\n";
            out << "  " << t.ab.effect << ": " << format_anova(t.ab) << "\n";
        };
        out << " feedback x duration (averaged over distraction)\n";
        two_way(*r.feedback_by_duration);
        out << " feedback x distraction (averaged over duration)\n";
        two_way(*r.feedback_by_distraction);
        for (const auto& st : r.strata) {
            out << " " << stratum_label(st.duration, st.distraction) << "\n";
            if (st.feedback) {
                out << "  feedback: " << format_anova(*st.feedback) << "\n";
            } else {
                out << "  feedback: undefined (" << st.feedback_error << ")\n";
            }
            for (const auto& p : st.pairs) {
                out << "  " << to_string(p.x) << " " << fixed4(p.x_summary.mean) << " ± "
                    << fixed4(p.x_summary.sd) << " vs " << to_string(p.y) << " "
                    << fixed4(p.y_summary.mean) << " ± " << fixed4(p.y_summary.sd) << ": ";
                if (p.test) {
                    out << "t(" << p.test->df << ") = " << fixed4(p.test->t) << ", "
                        << format_p(p.test->p) << "\n";
                } else {
                    out << "undefined (" << p.error << ")\n";
                }
            }
        }
    }
    return out.str();
}

void write_tests_csv(const std::vector<MetricReport>& reports, const fs::path& dir) {
    auto anova = open_csv(dir / "anova.csv");
    anova << "metric,model,effect,df1,df2,F,p\n";
    auto pairwise = open_csv(dir / "pairwise.csv");
    pairwise << "metric,duration,distraction,x,y,x_mean,x_sd,y_mean,y_sd,t,df,p\n";
    const auto row = [&](Metric m, const std::string& model, const AnovaResult& a) {
        anova << to_string(m) << ',' << model << ',' << a.effect << ',' << a.df1 << ',' << a.df2
              << ',' << num(a.F) << ',' << num(a.p) << '\n';
    };
    for (const auto& r : reports) {
        if (!r.error.empty()) continue;
        for (const auto* t : {&*r.feedback_by_duration, &*r.feedback_by_distraction}) {
            const std::string model = t == &*r.feedback_by_duration ? "feedback_x_duration"
                                                                    : "feedback_x_distraction";
            row(r.metric, model, t->a);
            row(r.metric, model, t->b);
            row(r.metric, model, t->ab);
        }
        for (const auto& st : r.strata) {
            const std::string model = "oneway_" + std::string(to_string(st.duration)) +
                                      (st.distraction ? "_distraction" : "_nodistraction");
            if (st.feedback) row(r.metric, model, *st.feedback);
            for (const auto& p : st.pairs) {
                pairwise << to_string(r.metric) << ',' << to_string(st.duration) << ','
                         << (st.distraction ? 1 : 0) << ',' << to_string(p.x) << ','
                         << to_string(p.y) << ',' << num(p.x_summary.mean) << ','
                         << num(p.x_summary.sd) << ',' << num(p.y_summary.mean) << ','
                         << num(p.y_summary.sd) << ',';
                if (p.test) {
                    pairwise << num(p.test->t) << ',' << p.test->df << ',' << num(p.test->p);
                } else {
                    pairwise << ",,";
                }
                pairwise << '\n';
            }
        }
    }
}

} // namespace eyero
