#pragma once

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace captune {

enum class ErrorCode {
    // caption_format
    EmptyFile,
    MalformedTimestamp,
    MalformedCue,
    NonMonotonicCue,
    // transform_space
    SliderOutOfRange,
    OutOfAnchorBounds,
    DegenerateCalibration,
    InvalidAnchorOrder,
    // media_context
    DescriberUnavailable,
    // prompt_engine
    LockedCue,
    NotNsi,
    // backend
    BackendUnavailable,
    MalformedResponse,
    PreconditionViolated,
    // config_io
    AnchorsNotSet,
    SchemaMismatch,
    ValidationFailed,
    // service_api
    NoNsiCues,
    NotCalibrated,
    DisabledCell,
    NotFound,
    BadRequest,
};

std::string_view to_string(ErrorCode code);

// Base exception for everything the library raises on purpose. `details`
// carries structured context (line numbers, JSON paths, offending values).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object());

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

    // Source line for parse errors, when known.
    std::optional<int> line() const;

private:
    ErrorCode code_;
    nlohmann::json details_;
};

} // namespace captune
