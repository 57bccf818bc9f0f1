#pragma once

#include <stdexcept>
#include <string>

namespace eyero {

// Every failure raised by the library derives from Error so callers can catch
// one type at the process boundary and still dispatch on the concrete kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ClassificationError : public Error { using Error::Error; };
class TimingError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class LogError : public Error { using Error::Error; };
class DegenerateError : public Error { using Error::Error; };
class MissingCellError : public Error { using Error::Error; };
class UndefinedEntropyError : public Error { using Error::Error; };

class ProtocolError : public Error {
public:
    ProtocolError(const std::string& what, std::string offending = {})
        : Error(what), offending_(std::move(offending)) {}
    const std::string& offending_bytes() const { return offending_; }

private:
    std::string offending_;
};

class DeviceTimeout : public Error { using Error::Error; };

class ReplayError : public Error {
public:
    ReplayError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DegenerateGroupError : public DegenerateError {
public:
    explicit DegenerateGroupError(std::string group)
        : DegenerateError("zero within-group variance for '" + group + "'"),
          group_(std::move(group)) {}
    const std::string& group() const { return group_; }

private:
    std::string group_;
};

} // namespace eyero
