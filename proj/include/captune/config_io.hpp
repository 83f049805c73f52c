#pragma once

#include "captune/caption_format.hpp"
#include "captune/prompt_engine.hpp"
#include "captune/transform_space.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace captune {

inline constexpr std::string_view kSchemaVersion = "1";

// Everything a viewer needs to transform a track within the creator's bounds.
// The layout is documented in docs/config-schema.md.
struct ProjectConfig {
    std::string schema_version{kSchemaVersion};
    CaptionTrack original_track;
    std::optional<TransformSpace> space; // required for export and load
    std::map<int, AnchorTexts> anchor_preview_texts;
    std::map<int, std::string> context_descriptions;
    VideoMetadata metadata;
    std::string prompt_version{kPromptVersion};
    // Per-cue estimates that differ from the project baseline.
    std::map<int, ParamPoint> cue_estimates;

    bool operator==(const ProjectConfig&) const = default;
};

// Canonical JSON: sorted keys, two-space indent, numbers rounded to six
// decimals, trailing newline. Throws AnchorsNotSet without a space.
std::string export_config(const ProjectConfig& config);
nlohmann::json config_to_json(const ProjectConfig& config);

// Throws SchemaMismatch for an unknown schema_version and ValidationFailed
// with details {"path", "reason"} for anything else (parse errors also carry
// "byte", "line" and "column").
ProjectConfig load_config(std::string_view input);
ProjectConfig config_from_json(const nlohmann::json& doc);

// Building blocks shared with the HTTP layer. `path` prefixes error paths.
nlohmann::json to_json(const ParamPoint& p);
ParamPoint point_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const CaptionCue& cue);
nlohmann::json to_json(const DimensionCalibration& c);
nlohmann::json to_json(const CaptionTrack& track);
nlohmann::json to_json(const TransformSpace& space);
// Paths in errors start at "original_track" and "space".
CaptionTrack track_from_json(const nlohmann::json& j);
TransformSpace space_from_json(const nlohmann::json& j);

double round6(double v);

} // namespace captune
