#pragma once

#include <stdexcept>
#include <string>

namespace cobra {

enum class ErrorCode {
    invalid_argument,
    invalid_split,
    shape,
    no_consensus,
    empty_ensemble,
    machine_output,
    label,
    invalid_weights,
    parse,
    config,
    io,
    runtime,
};

/// Library-wide exception type carrying a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace cobra
