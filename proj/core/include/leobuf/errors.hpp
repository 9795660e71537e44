#pragma once

#include <stdexcept>
#include <string>

namespace leobuf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-state chain with alpha = beta = 0 has no unique stationary law.
class DegenerateChainError : public Error {
public:
    using Error::Error;
};

/// Mean arrival rate is not below the mean service rate.
class InstabilityError : public Error {
public:
    using Error::Error;
};

/// Root bracket could not be established below the configured ceiling.
class NoBracketError : public Error {
public:
    using Error::Error;
};

/// Exponential overflow in an LMGF evaluation that rescaling could not avoid.
class OverflowGuardError : public Error {
public:
    using Error::Error;
};

/// Fractional allocation does not sum to the requested total.
class SumMismatchError : public Error {
public:
    using Error::Error;
};

/// Query for a threshold that the statistics do not track.
class UntrackedThresholdError : public Error {
public:
    using Error::Error;
};

/// Merging statistics collected against different threshold lists.
class ThresholdMismatchError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration. `key()` names the offending key when known and
/// `line()` is the 1-based source line (0 when not from a file).
class ConfigError : public Error {
public:
    ConfigError(std::string message, std::string key = {}, int line = 0)
        : Error(format(message, key, line)), detail_(std::move(message)), key_(std::move(key)), line_(line) {}

    const std::string& detail() const noexcept { return detail_; }
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& message, const std::string& key, int line) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!key.empty()) out += "`" + key + "`: ";
        return out + message;
    }

    std::string detail_;
    std::string key_;
    int line_;
};

} // namespace leobuf
