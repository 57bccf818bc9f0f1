#include "eyero/event_log.hpp"

#include "eyero/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <unistd.h>

namespace fs = std::filesystem;

namespace eyero {

std::string to_line(const EventRecord& r) {
    json j = {
        {"ts_ms", r.ts_ms},
        {"participant", r.participant_id},
        {"session", r.session_index},
        {"kind", r.kind},
        {"payload", r.payload},
    };
    return j.dump();
}

EventRecord parse_record(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    try {
        EventRecord r;
        r.ts_ms = j.at("ts_ms").get<Millis>();
        r.participant_id = j.at("participant").get<std::string>();
        r.session_index = j.at("session").get<int>();
        r.kind = j.at("kind").get<std::string>();
        r.payload = j.at("payload");
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("record is missing a field: ") + e.what());
    }
}

// ---- writer ---------------------------------------------------------------------

EventLogWriter::EventLogWriter(const fs::path& path) : path_(path) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    if (fs::exists(path_) && fs::file_size(path_) > 0) {
        const auto existing = read_log(path_);
        if (!existing.empty()) last_ts_ = existing.back().ts_ms;
    }
    file_ = std::fopen(path_.c_str(), "ab");
    if (!file_) {
        throw Error("cannot open event log " + path_.string() + ": " + std::strerror(errno));
    }
}

EventLogWriter::~EventLogWriter() {
    if (file_) std::fclose(file_);
}

void EventLogWriter::append(const EventRecord& record) {
    if (last_ts_ && record.ts_ms < *last_ts_) {
        throw LogError("record at " + std::to_string(record.ts_ms) + " ms would precede " +
                       std::to_string(*last_ts_) + " ms in " + path_.string());
    }
    std::string line = to_line(record);
    line += '\n';
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
        std::fflush(file_) != 0) {
        throw Error("write to " + path_.string() + " failed: " + std::strerror(errno));
    }
    last_ts_ = record.ts_ms;
}

void EventLogWriter::sync() {
    if (std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
        throw Error("sync of " + path_.string() + " failed: " + std::strerror(errno));
    }
}

LogDirectoryWriter::LogDirectoryWriter(fs::path dir) : dir_(std::move(dir)) {}

fs::path LogDirectoryWriter::session_path(const fs::path& dir, const std::string& participant,
                                          int session) {
    char name[32];
    std::snprintf(name, sizeof name, "session_%02d.jsonl", session);
    return dir / participant / name;
}

void LogDirectoryWriter::append(const EventRecord& record) {
    auto key = std::make_pair(record.participant_id, record.session_index);
    auto it = writers_.find(key);
    if (it == writers_.end()) {
        auto writer = std::make_unique<EventLogWriter>(
            session_path(dir_, record.participant_id, record.session_index));
        it = writers_.emplace(std::move(key), std::move(writer)).first;
    }
    it->second->append(record);
}

void LogDirectoryWriter::sync_all() {
    for (auto& [_, w] : writers_) w->sync();
}

// ---- reader ---------------------------------------------------------------------

std::vector<EventRecord> read_log(std::istream& in) {
    std::vector<EventRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(parse_record(line));
        } catch (const ValidationError& e) {
            throw ReplayError(e.what(), line_no);
        }
    }
    return out;
}

std::vector<EventRecord> read_log(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read event log " + path.string());
    return read_log(in);
}

std::vector<fs::path> find_log_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::exists(dir)) return files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace eyero
