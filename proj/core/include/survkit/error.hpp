#pragma once

#include <stdexcept>
#include <string>

namespace survkit {

/// Raised for any violated precondition or malformed input. The message is
/// meant to be shown to a user as-is.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An error tagged with the pipeline stage that produced it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error(stage + ": " + cause), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }
    /// The message without the stage prefix.
    const char* cause() const noexcept { return what() + stage_.size() + 2; }

private:
    std::string stage_;
};

}  // namespace survkit
