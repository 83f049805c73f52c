#pragma once

#include "captune/caption_format.hpp"
#include "captune/transform_space.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace captune {

// Bumped whenever render_prompt output changes shape, so exported configs and
// session caches can tell prompts apart.
inline constexpr std::string_view kPromptVersion = "1";

enum class SoundRepresentation { Default, SourceFocused, Onomatopoeia, SensoryQuality };

// Wire names: "default", "source_focused", "onomatopoeia", "sensory_quality".
std::string_view to_string(SoundRepresentation mode);
std::optional<SoundRepresentation> parse_representation(std::string_view s);
// Human label used in assistant replies ("Sensory Quality-focused").
std::string_view display_name(SoundRepresentation mode);

struct VideoMetadata {
    std::string title;
    std::string genre;
    std::string synopsis;

    bool operator==(const VideoMetadata&) const = default;
};

struct ViewerPrefs {
    ParamPoint target;
    SoundRepresentation representation = SoundRepresentation::Default;
    bool genre_aligned = false;

    bool operator==(const ViewerPrefs&) const = default;
};

// The creator's accepted transformations at the two anchors, per cue.
struct AnchorTexts {
    std::optional<std::string> lower_text;
    std::optional<std::string> upper_text;

    bool operator==(const AnchorTexts&) const = default;
};

struct TransformRequest {
    std::string original_text;
    std::optional<std::string> lower_anchor_text;
    std::optional<std::string> upper_anchor_text;
    RatioPair detail;
    RatioPair expressiveness;
    SoundRepresentation representation = SoundRepresentation::Default;
    bool genre_aligned = false;
    VideoMetadata metadata;
    std::optional<std::string> scene_context;
    ParamPoint target_values;
    ParamPoint current_values;
    ParamPoint lower_anchor;
    ParamPoint upper_anchor;

    bool operator==(const TransformRequest&) const = default;
};

struct Quantified {
    RatioPair detail;
    RatioPair expressiveness;
};

// Interpolation and change ratios for both dimensions against the space's
// anchors. Throws OutOfAnchorBounds.
Quantified quantify(const TransformSpace& space, const ParamPoint& current, const ParamPoint& target);

// Round-half-up to an integer percentage.
int percent(double ratio);

// True when the request asks for nothing: no movement on either dimension,
// Default representation and no genre alignment.
bool is_identity(const TransformRequest& req);

std::string render_prompt(const TransformRequest& req);

struct RequestContext {
    std::optional<ParamPoint> current; // defaults to the space baseline
    std::optional<std::string> scene_context;
    std::optional<AnchorTexts> anchor_texts;
};

// Throws LockedCue, NotNsi, OutOfAnchorBounds, ValidationFailed (genre
// alignment without a genre).
TransformRequest build_request(const CaptionCue& cue, const TransformSpace& space, const ViewerPrefs& prefs,
                               const VideoMetadata& metadata, const RequestContext& context = {});

// Compact decimal rendering used in prompts and replies: 3, 7.2, 6.67.
std::string format_value(double v);

} // namespace captune
