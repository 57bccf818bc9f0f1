#include "eyero/wire.hpp"

namespace eyero::wire {

namespace {

template <class T>
T field(const json& payload, const char* name) {
    if (!payload.contains(name)) {
        throw WireError("bad_payload", std::string("missing field '") + name + "'");
    }
    try {
        return payload.at(name).get<T>();
    } catch (const json::exception&) {
        throw WireError("bad_payload", std::string("field '") + name + "' has the wrong type");
    }
}

double number_field(const json& payload, const char* name) {
    if (!payload.contains(name) || !payload.at(name).is_number()) {
        throw WireError("bad_payload", std::string("field '") + name + "' must be a number");
    }
    return payload.at(name).get<double>();
}

int integer_field(const json& payload, const char* name) {
    if (!payload.contains(name) || !payload.at(name).is_number_integer()) {
        throw WireError("bad_payload", std::string("field '") + name + "' must be an integer");
    }
    return payload.at(name).get<int>();
}

} // namespace

InboundMessage parse_inbound(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw WireError("bad_json", e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw WireError("bad_json", "message must be an object with a string 'type'");
    }
    const auto type = j.at("type").get<std::string>();
    InboundMessage m;
    if (j.contains("ts_ms") && j.at("ts_ms").is_number()) {
        m.client_ts_ms = j.at("ts_ms").get<Millis>();
    }
    const json payload = j.contains("payload") ? j.at("payload") : json::object();
    if (!payload.is_object()) throw WireError("bad_payload", "payload must be an object");

    if (type == "hello") {
        m.payload = Hello{};
    } else if (type == "calibration_point") {
        m.payload = CalibrationPoint{number_field(payload, "x"), number_field(payload, "y")};
    } else if (type == "calibration_done") {
        m.payload = CalibrationDone{integer_field(payload, "count")};
    } else if (type == "gaze_sample") {
        m.payload = GazeSampleMsg{number_field(payload, "x"), number_field(payload, "y"),
                                  field<bool>(payload, "valid")};
    } else if (type == "key_event") {
        const auto key = field<std::string>(payload, "key");
        try {
            m.payload = KeyEventMsg{response_key_from_string(key)};
        } catch (const ValidationError&) {
            throw WireError("bad_payload", "key must be \"Left\" or \"Right\"");
        }
    } else if (type == "questionnaire") {
        QuestionnaireMsg q;
        for (std::size_t i = 0; i < q.response.q.size(); ++i) {
            const std::string name = "q" + std::to_string(i + 1);
            q.response.q[i] = integer_field(payload, name.c_str());
        }
        m.payload = q;
    } else if (type == "rest_exit_request") {
        m.payload = RestExitRequest{};
    } else {
        throw WireError("unknown_type", "unknown message type '" + type + "'");
    }
    return m;
}

std::string to_line(const InboundMessage& m) {
    json j = {{"ts_ms", m.client_ts_ms}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Hello>) {
                j["type"] = "hello";
                j["payload"] = json::object();
            } else if constexpr (std::is_same_v<T, CalibrationPoint>) {
                j["type"] = "calibration_point";
                j["payload"] = {{"x", p.x}, {"y", p.y}};
            } else if constexpr (std::is_same_v<T, CalibrationDone>) {
                j["type"] = "calibration_done";
                j["payload"] = {{"count", p.count}};
            } else if constexpr (std::is_same_v<T, GazeSampleMsg>) {
                j["type"] = "gaze_sample";
                j["payload"] = {{"x", p.x}, {"y", p.y}, {"valid", p.valid}};
            } else if constexpr (std::is_same_v<T, KeyEventMsg>) {
                j["type"] = "key_event";
                j["payload"] = {{"key", std::string(to_string(p.key))}};
            } else if constexpr (std::is_same_v<T, QuestionnaireMsg>) {
                j["type"] = "questionnaire";
                json q = json::object();
                for (std::size_t i = 0; i < p.response.q.size(); ++i) {
                    q["q" + std::to_string(i + 1)] = p.response.q[i];
                }
                j["payload"] = q;
            } else {
                j["type"] = "rest_exit_request";
                j["payload"] = json::object();
            }
        },
        m.payload);
    return j.dump();
}

std::string OutboundMessage::to_line() const {
    return json{{"type", type}, {"ts_ms", ts_ms}, {"payload", payload}}.dump();
}

OutboundMessage parse_outbound(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw WireError("bad_json", e.what());
    }
    OutboundMessage m;
    m.type = field<std::string>(j, "type");
    m.ts_ms = field<Millis>(j, "ts_ms");
    m.payload = j.contains("payload") ? j.at("payload") : json::object();
    return m;
}

OutboundMessage error_message(Millis ts, const std::string& code, const std::string& detail) {
    return {"error", ts, {{"code", code}, {"detail", detail}}};
}

} // namespace eyero::wire
