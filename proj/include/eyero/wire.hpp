#pragma once

#include "eyero/errors.hpp"
#include "eyero/event_log.hpp"
#include "eyero/study_design.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace eyero::wire {

// Newline-delimited JSON objects of the form {"type", "ts_ms", "payload"}.

struct Hello {};
struct CalibrationPoint { double x = 0; double y = 0; };
struct CalibrationDone { int count = 0; };
struct GazeSampleMsg { double x = 0; double y = 0; bool valid = true; };
struct KeyEventMsg { ResponseKey key = ResponseKey::Left; };
struct QuestionnaireMsg { QuestionnaireResponse response; };
struct RestExitRequest {};

using InboundPayload = std::variant<Hello, CalibrationPoint, CalibrationDone, GazeSampleMsg,
                                    KeyEventMsg, QuestionnaireMsg, RestExitRequest>;

struct InboundMessage {
    Millis client_ts_ms = 0;
    InboundPayload payload;
};

// Parse failures carry the error code sent back to the client:
// "bad_json", "unknown_type" or "bad_payload".
class WireError : public ValidationError {
public:
    WireError(std::string code, const std::string& detail)
        : ValidationError(detail), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

InboundMessage parse_inbound(std::string_view line);
std::string to_line(const InboundMessage& m);

struct OutboundMessage {
    std::string type;
    Millis ts_ms = 0;
    json payload = json::object();

    std::string to_line() const;
};

OutboundMessage parse_outbound(std::string_view line);

OutboundMessage error_message(Millis ts, const std::string& code, const std::string& detail);

} // namespace eyero::wire
