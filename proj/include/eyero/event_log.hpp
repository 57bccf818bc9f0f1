#pragma once

#include "eyero/gaze_map.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eyero {

using json = nlohmann::json;

// One log line. Serialized as a single JSON object per line (JSON Lines).
struct EventRecord {
    Millis ts_ms = 0;
    std::string participant_id;
    int session_index = 0;
    std::string kind;
    json payload = json::object();

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

namespace log_kind {
inline constexpr const char* kSessionStart = "session_start";
inline constexpr const char* kTrialPlan = "trial_plan";
inline constexpr const char* kPhase = "phase";
inline constexpr const char* kHello = "hello";
inline constexpr const char* kCalibrationPoint = "calibration_point";
inline constexpr const char* kGaze = "gaze";
inline constexpr const char* kIntent = "intent";
inline constexpr const char* kTrialOnset = "trial_onset";
inline constexpr const char* kKey = "key";
inline constexpr const char* kTrialResult = "trial_result";
inline constexpr const char* kQuestionnaire = "questionnaire";
inline constexpr const char* kRejected = "rejected";
} // namespace log_kind

std::string to_line(const EventRecord& r);
// Throws ValidationError when the line is not a well-formed record.
EventRecord parse_record(const std::string& line);

// Append-only JSON Lines file. Reopening an existing file resumes after its
// last record and keeps the ordering guarantee.
class EventLogWriter {
public:
    explicit EventLogWriter(const std::filesystem::path& path);
    ~EventLogWriter();
    EventLogWriter(const EventLogWriter&) = delete;
    EventLogWriter& operator=(const EventLogWriter&) = delete;

    // Throws LogError if record.ts_ms is older than the last record; the
    // file is left untouched in that case.
    void append(const EventRecord& record);
    // Flushes and fsyncs.
    void sync();

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    std::optional<Millis> last_ts_;
};

// Writes each record to <dir>/<participant>/session_<NN>.jsonl.
class LogDirectoryWriter {
public:
    explicit LogDirectoryWriter(std::filesystem::path dir);
    void append(const EventRecord& record);
    void sync_all();

    static std::filesystem::path session_path(const std::filesystem::path& dir,
                                              const std::string& participant, int session);

private:
    std::filesystem::path dir_;
    std::map<std::pair<std::string, int>, std::unique_ptr<EventLogWriter>> writers_;
};

// Reads every record; corrupt or truncated lines raise ReplayError with the
// 1-based line number.
std::vector<EventRecord> read_log(std::istream& in);
std::vector<EventRecord> read_log(const std::filesystem::path& path);

// All *.jsonl files below dir, sorted by path.
std::vector<std::filesystem::path> find_log_files(const std::filesystem::path& dir);

} // namespace eyero
