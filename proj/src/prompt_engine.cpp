#include "captune/prompt_engine.hpp"

#include "captune/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace captune {

namespace {

std::string_view representation_directive(SoundRepresentation mode) {
    switch (mode) {
        case SoundRepresentation::Default:
            return "keep the caption's current way of representing the sound.";
        case SoundRepresentation::SourceFocused:
            return "emphasize the source of the sound (what or who is making it).";
        case SoundRepresentation::Onomatopoeia:
            return "use onomatopoeia, a phonetic imitation of the sound.";
        case SoundRepresentation::SensoryQuality:
            return "emphasize the sensory qualities of the sound such as pitch, texture or intensity.";
    }
    return "";
}

std::string signed_percent(double ratio) {
    const int p = percent(ratio);
    return p > 0 ? fmt::format("+{}%", p) : fmt::format("{}%", p);
}

void append_dimension(std::string& out, std::string_view name, const RatioPair& ratios, double target,
                      double current, double lower, double upper) {
    out += fmt::format("  -- {} (target {}, current {}, anchors {} to {})\n", name, format_value(target),
                       format_value(current), format_value(lower), format_value(upper));
    out += fmt::format("        distance from minimal anchor: {}%\n", percent(ratios.r));
    out += fmt::format("        distance from maximal anchor: {}%\n", percent(1.0 - ratios.r));
    out += fmt::format("        requested change: {}\n", signed_percent(ratios.delta));
}

} // namespace

std::string_view to_string(SoundRepresentation mode) {
    switch (mode) {
        case SoundRepresentation::Default: return "default";
        case SoundRepresentation::SourceFocused: return "source_focused";
        case SoundRepresentation::Onomatopoeia: return "onomatopoeia";
        case SoundRepresentation::SensoryQuality: return "sensory_quality";
    }
    return "default";
}

std::optional<SoundRepresentation> parse_representation(std::string_view s) {
    for (auto m : {SoundRepresentation::Default, SoundRepresentation::SourceFocused, SoundRepresentation::Onomatopoeia,
                   SoundRepresentation::SensoryQuality}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::string_view display_name(SoundRepresentation mode) {
    switch (mode) {
        case SoundRepresentation::Default: return "Default";
        case SoundRepresentation::SourceFocused: return "Source-focused";
        case SoundRepresentation::Onomatopoeia: return "Onomatopoeia";
        case SoundRepresentation::SensoryQuality: return "Sensory Quality-focused";
    }
    return "Default";
}

std::string format_value(double v) {
    std::string s = fmt::format("{:.2f}", v);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

int percent(double ratio) {
    // The epsilon keeps 0.285 (stored as 0.28499999...) rounding up like the
    // decimal it was written as.
    return static_cast<int>(std::floor(ratio * 100.0 + 0.5 + 1e-9));
}

Quantified quantify(const TransformSpace& space, const ParamPoint& current, const ParamPoint& target) {
    const auto& lo = space.lower_anchor();
    const auto& hi = space.upper_anchor();
    Quantified q;
    q.detail.r = interpolation_ratio(target.detail, lo.detail, hi.detail);
    q.detail.delta = change_ratio(target.detail, current.detail, lo.detail, hi.detail);
    q.expressiveness.r = interpolation_ratio(target.expressiveness, lo.expressiveness, hi.expressiveness);
    q.expressiveness.delta =
        change_ratio(target.expressiveness, current.expressiveness, lo.expressiveness, hi.expressiveness);
    return q;
}

bool is_identity(const TransformRequest& req) {
    return req.detail.delta == 0.0 && req.expressiveness.delta == 0.0 &&
           req.representation == SoundRepresentation::Default && !req.genre_aligned;
}

std::string render_prompt(const TransformRequest& req) {
    std::string out;
    out += fmt::format("prompt_version: {}\n", kPromptVersion);
    out += "Please transform the current caption based on the following specifications:\n";
    append_dimension(out, "Level of Detail", req.detail, req.target_values.detail, req.current_values.detail,
                     req.lower_anchor.detail, req.upper_anchor.detail);
    append_dimension(out, "Expressiveness", req.expressiveness, req.target_values.expressiveness,
                     req.current_values.expressiveness, req.lower_anchor.expressiveness,
                     req.upper_anchor.expressiveness);
    out += fmt::format("  -- Sound Representation: {}; {}\n", display_name(req.representation),
                       representation_directive(req.representation));
    if (req.genre_aligned) {
        out += fmt::format("  -- Genre Alignment: match the tone and style of the video's genre ({}).\n",
                           req.metadata.genre);
    }
    out += fmt::format("Original caption: {}\n", req.original_text);
    if (req.lower_anchor_text) out += fmt::format("Minimal anchor caption: {}\n", *req.lower_anchor_text);
    if (req.upper_anchor_text) out += fmt::format("Maximal anchor caption: {}\n", *req.upper_anchor_text);
    if (req.scene_context) out += fmt::format("Scene context: {}\n", *req.scene_context);
    out += fmt::format("Video title: {}\n", req.metadata.title);
    out += fmt::format("Video genre: {}\n", req.metadata.genre);
    out += fmt::format("Video synopsis: {}\n", req.metadata.synopsis);
    out += "Reply with the transformed caption only, on a single line, wrapped in the same brackets as the original.\n";
    return out;
}

TransformRequest build_request(const CaptionCue& cue, const TransformSpace& space, const ViewerPrefs& prefs,
                               const VideoMetadata& metadata, const RequestContext& context) {
    if (!cue.is_nsi()) {
        throw Error(ErrorCode::NotNsi, fmt::format("cue {} is speech and is never transformed", cue.index),
                    {{"cue_index", cue.index}});
    }
    if (cue.locked) {
        throw Error(ErrorCode::LockedCue, fmt::format("cue {} is locked", cue.index), {{"cue_index", cue.index}});
    }
    if (prefs.genre_aligned && metadata.genre.empty()) {
        throw Error(ErrorCode::ValidationFailed, "genre alignment needs a genre in the video metadata",
                    {{"path", "metadata.genre"}});
    }
    const ParamPoint current = context.current.value_or(space.baseline());
    const Quantified q = quantify(space, current, prefs.target);

    TransformRequest req;
    req.original_text = cue.text;
    if (context.anchor_texts) {
        req.lower_anchor_text = context.anchor_texts->lower_text;
        req.upper_anchor_text = context.anchor_texts->upper_text;
    }
    req.detail = q.detail;
    req.expressiveness = q.expressiveness;
    req.representation = prefs.representation;
    req.genre_aligned = prefs.genre_aligned;
    req.metadata = metadata;
    req.scene_context = context.scene_context;
    req.target_values = prefs.target;
    req.current_values = current;
    req.lower_anchor = space.lower_anchor();
    req.upper_anchor = space.upper_anchor();
    return req;
}

} // namespace captune
