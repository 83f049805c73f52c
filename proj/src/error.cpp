#include "captune/error.hpp"

namespace captune {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
        case ErrorCode::MalformedCue: return "MalformedCue";
        case ErrorCode::NonMonotonicCue: return "NonMonotonicCue";
        case ErrorCode::SliderOutOfRange: return "SliderOutOfRange";
        case ErrorCode::OutOfAnchorBounds: return "OutOfAnchorBounds";
        case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
        case ErrorCode::InvalidAnchorOrder: return "InvalidAnchorOrder";
        case ErrorCode::DescriberUnavailable: return "DescriberUnavailable";
        case ErrorCode::LockedCue: return "LockedCue";
        case ErrorCode::NotNsi: return "NotNsi";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::AnchorsNotSet: return "AnchorsNotSet";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::ValidationFailed: return "ValidationFailed";
        case ErrorCode::NoNsiCues: return "NoNsiCues";
        case ErrorCode::NotCalibrated: return "NotCalibrated";
        case ErrorCode::DisabledCell: return "DisabledCell";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::BadRequest: return "BadRequest";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, nlohmann::json details)
    : std::runtime_error(message), code_(code), details_(std::move(details)) {}

std::optional<int> Error::line() const {
    if (details_.is_object() && details_.contains("line") && details_["line"].is_number_integer()) {
        return details_["line"].get<int>();
    }
    return std::nullopt;
}

} // namespace captune
