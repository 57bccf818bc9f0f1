#include "eyero/cli.hpp"

#include "eyero/analysis.hpp"
#include "eyero/errors.hpp"
#include "eyero/replay.hpp"
#include "eyero/server.hpp"
#include "eyero/virtual_participant.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;

namespace eyero::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
    std::string participant;
    std::uint64_t seed = 0;
    std::string listen = "127.0.0.1:7777";
    std::string actuator = "mock";
    std::string serial_port;
    int baud = 115200;
    std::string log_dir;
};

struct SimulateArgs {
    int participants = 21;
    std::uint64_t seed = 0;
    std::string params;
    std::string out_dir;
};

struct AnalyzeArgs {
    std::string input;
    std::string grid = "8x8";
    std::string metric;
    std::string export_dir;
};

struct ReplayArgs {
    std::vector<std::string> paths;
};

struct ExportArgs {
    std::string log_dir;
    std::string out_dir;
};

int serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
    const StudyPlan plan = generate_study_plan(a.participant, a.seed);
    SessionEngine engine = SessionEngine::for_study(plan, EngineOptions{});

    std::unique_ptr<ByteTransport> transport;
    if (a.actuator == "serial") {
        if (a.serial_port.empty()) throw ConfigError("--actuator serial needs --serial-port");
        transport = std::make_unique<PosixSerialTransport>(a.serial_port, a.baud);
    } else {
        transport = std::make_unique<MockDeviceTransport>();
    }
    PulsedActuator actuator(*transport);

    LogDirectoryWriter logs(a.log_dir);
    SessionServer server(engine, actuator, [&](const EventRecord& r) { logs.append(r); },
                         parse_listen_address(a.listen));
    out << "listening on port " << server.port() << " for participant " << a.participant
        << std::endl;
    err << "session order:";
    for (const auto& c : plan.sessions) err << ' ' << config_label(c);
    err << std::endl;

    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run(g_stop);
    actuator.queue().flush();
    logs.sync_all();
    for (const auto& e : actuator.queue().take_errors()) err << "actuator: " << e << '\n';
    out << (engine.done() ? "study complete" : "stopped before the study finished") << std::endl;
    return kExitOk;
}

int simulate(const SimulateArgs& a, std::ostream& out) {
    const AgentParams params = a.params.empty() ? AgentParams{} : load_agent_params(a.params);
    const auto participants = simulate_study(a.participants, params, a.seed);

    const fs::path dir(a.out_dir);
    LogDirectoryWriter logs(dir);
    std::size_t records = 0;
    for (const auto& p : participants) {
        for (const auto& s : p.sessions) {
            for (const auto& r : s.log) logs.append(r);
            records += s.log.size();
        }
    }
    logs.sync_all();
    std::ofstream(dir / "params.txt") << format_agent_params(params);
    out << "simulated " << participants.size() << " participants, "
        << participants.size() * kSessionsPerStudy << " sessions, " << records
        << " log records -> " << dir.string() << '\n';
    return kExitOk;
}

StudyTables load_input(const fs::path& input) {
    if (!fs::exists(input)) throw Error("input does not exist: " + input.string());
    if (fs::is_directory(input) && fs::exists(input / "trials.csv")) return read_tables(input);
    if (fs::is_regular_file(input)) {
        std::vector<ReplayedSession> one{replay_file(input)};
        return export_tables(one);
    }
    return export_tables_from_dir(input);
}

int analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    const GridSize grid = parse_grid(a.grid);
    std::vector<Metric> metrics(kAllMetrics.begin(), kAllMetrics.end());
    if (!a.metric.empty()) metrics = {metric_from_string(a.metric)};

    const StudyTables tables = load_input(a.input);
    const StudyMetrics m = compute_study_metrics(tables, grid);
    if (m.participants.size() < 2) throw Error("analysis needs at least two participants");

    std::vector<MetricReport> reports;
    for (Metric metric : metrics) reports.push_back(analyze_metric(m, metric));
    out << format_report(reports, m.participants.size());

    if (!a.export_dir.empty()) {
        const fs::path dir(a.export_dir);
        write_tests_csv(reports, dir);
        try {
            write_summary_csv(condition_summary(m), dir / "summary.csv");
        } catch (const Error& e) {
            err << "summary.csv not written: " << e.what() << '\n';
        }
        try {
            write_heatmap_csv(entropy_heatmap(m), dir / "entropy_heatmap.csv");
        } catch (const Error& e) {
            err << "entropy_heatmap.csv not written: " << e.what() << '\n';
        }
    }
    return kExitOk;
}

int replay_cmd(const ReplayArgs& a, std::ostream& out) {
    std::vector<fs::path> files;
    for (const auto& p : a.paths) {
        if (fs::is_directory(p)) {
            const auto found = find_log_files(p);
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.emplace_back(p);
        }
    }
    if (files.empty()) throw Error("no log files found");

    bool all_ok = true;
    for (const auto& f : files) {
        const ReplayedSession s = replay_file(f);
        const ReplayCheck check = verify_replay(s);
        all_ok = all_ok && check.ok();
        out << s.participant_id << " session " << s.session_index << ' '
            << (s.config ? config_label(*s.config) : std::string("?")) << ": " << s.record_count
            << " records, " << s.intents.size() << " intents, " << s.trials.size()
            << " trials, intents " << (check.intents_match ? "match" : "DIFFER") << ", outcomes "
            << (check.outcomes_match ? "match" : "DIFFER") << '\n';
    }
    return all_ok ? kExitOk : kExitRuntime;
}

int export_cmd(const ExportArgs& a, std::ostream& out) {
    const StudyTables t = export_tables_from_dir(a.log_dir);
    write_tables(t, a.out_dir);
    out << "wrote " << t.trials.size() << " trial rows, " << t.gaze.size() << " gaze rows, "
        << t.questionnaire.size() << " questionnaire rows, " << t.sessions.size()
        << " session rows -> " << a.out_dir << '\n';
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaze-contingent tactile feedback: study service, simulator and analysis",
                 "eyerofeedback"};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "More diagnostics on stderr");

    ServeArgs sa;
    auto* serve_cmd = app.add_subcommand("serve", "Run the study service for one participant");
    serve_cmd->add_option("--participant", sa.participant, "Participant id")->required();
    serve_cmd->add_option("--seed", sa.seed, "Study plan seed")->required();
    serve_cmd->add_option("--listen", sa.listen, "host:port to listen on")->capture_default_str();
    serve_cmd->add_option("--actuator", sa.actuator, "Actuator backend")
        ->check(CLI::IsMember({"serial", "mock"}))
        ->capture_default_str();
    serve_cmd->add_option("--serial-port", sa.serial_port, "Serial device path");
    serve_cmd->add_option("--baud", sa.baud, "Serial baud rate")->capture_default_str();
    serve_cmd->add_option("--log-dir", sa.log_dir, "Event log directory")
        ->envname("EYEROFEEDBACK_LOG_DIR")
        ->required();

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a study with virtual participants");
    sim_cmd->add_option("--participants", sim.participants, "Number of participants")
        ->check(CLI::Range(2, 1000))
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "Study seed")->required();
    sim_cmd->add_option("--params", sim.params, "Agent parameter file")
        ->check(CLI::ExistingFile);
    sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for the event logs")
        ->envname("EYEROFEEDBACK_LOG_DIR")
        ->required();

    AnalyzeArgs an;
    auto* an_cmd = app.add_subcommand("analyze", "Statistics report over logs or CSV tables");
    an_cmd->add_option("--input", an.input, "Log directory, log file or CSV table directory")
        ->envname("EYEROFEEDBACK_LOG_DIR")
        ->required();
    an_cmd->add_option("--grid", an.grid, "Entropy grid, ROWSxCOLS")->capture_default_str();
    an_cmd->add_option("--metric", an.metric, "Only this metric")
        ->check(CLI::IsMember({"rt", "missed", "accuracy", "entropy"}));
    an_cmd->add_option("--export", an.export_dir, "Write CSV tables here");

    ReplayArgs ra;
    auto* replay_sub = app.add_subcommand("replay", "Replay logs and verify intents and outcomes");
    replay_sub->add_option("paths", ra.paths, "Log files or directories")->required();

    ExportArgs ea;
    auto* export_sub = app.add_subcommand("export", "Convert event logs to CSV tables");
    export_sub->add_option("--log-dir", ea.log_dir, "Event log directory")
        ->envname("EYEROFEEDBACK_LOG_DIR")
        ->required();
    export_sub->add_option("--out-dir", ea.out_dir, "Output directory")->required();

    std::vector<std::string> argv_store{"eyerofeedback"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*serve_cmd) return serve(sa, out, err);
        if (*sim_cmd) return simulate(sim, out);
        if (*an_cmd) return analyze(an, out, err);
        if (*replay_sub) return replay_cmd(ra, out);
        if (*export_sub) return export_cmd(ea, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        if (verbosity > 0) err << "(runtime failure in subcommand)\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace eyero::cli
