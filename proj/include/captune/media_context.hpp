#pragma once

#include "captune/caption_format.hpp"

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace captune {

// Seconds of footage taken on each side of a cue.
inline constexpr Millis kContextPadding{5000};

// Instruction sent to an audio-visual describer for every window.
inline constexpr std::string_view kDescriberPrompt =
    "Can you describe the visual and audio content in this video clip?";

inline constexpr std::string_view kNoDescription = "no scene description available";

struct ContextWindow {
    int cue_index = 0;
    Millis window_start{0};
    Millis window_end{0};
    std::optional<std::string> description;

    bool operator==(const ContextWindow&) const = default;
};

// [max(0, start - 5 s), end + 5 s], the end clamped to media_duration when given.
ContextWindow compute_window(const CaptionCue& cue, std::optional<Millis> media_duration = std::nullopt);

class DescriberBackend {
public:
    virtual ~DescriberBackend() = default;
    // May throw DescriberUnavailable.
    virtual std::string describe(const ContextWindow& window) = 0;
};

// Serves descriptions from a `descriptions.json` sidecar
// ({"<cue index>": "<text>", ...}).
class SidecarDescriber final : public DescriberBackend {
public:
    SidecarDescriber() = default;
    explicit SidecarDescriber(std::map<int, std::string> entries);

    // Throws ValidationFailed on malformed sidecar content.
    static SidecarDescriber from_json(std::string_view json_text);

    std::string describe(const ContextWindow& window) override;

    const std::map<int, std::string>& entries() const { return entries_; }

private:
    std::map<int, std::string> entries_;
};

// Describes each cue window at most once; concurrent readers, exclusive writers.
class DescriptionCache {
public:
    std::string get_or_describe(const ContextWindow& window, DescriberBackend& describer);
    std::optional<std::string> lookup(int cue_index) const;
    void put(int cue_index, std::string description);
    std::map<int, std::string> snapshot() const;
    std::size_t describer_calls() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<int, std::string> entries_;
    std::size_t describer_calls_ = 0;
};

} // namespace captune
