#include "captune/media_context.hpp"

#include "captune/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <mutex>

namespace captune {

ContextWindow compute_window(const CaptionCue& cue, std::optional<Millis> media_duration) {
    ContextWindow w;
    w.cue_index = cue.index;
    w.window_start = std::max(Millis{0}, cue.start - kContextPadding);
    w.window_end = cue.end + kContextPadding;
    if (media_duration) {
        // Never cut into the cue itself, even if the duration is short.
        w.window_end = std::max(std::min(w.window_end, *media_duration), cue.end);
    }
    return w;
}

SidecarDescriber::SidecarDescriber(std::map<int, std::string> entries) : entries_(std::move(entries)) {}

SidecarDescriber SidecarDescriber::from_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ValidationFailed, std::string("descriptions sidecar: ") + e.what(),
                    {{"path", "$"}, {"byte", e.byte}});
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::ValidationFailed, "descriptions sidecar must be an object", {{"path", "$"}});
    }
    std::map<int, std::string> entries;
    for (const auto& [key, value] : doc.items()) {
        int index = 0;
        const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
        if (ec != std::errc{} || ptr != key.data() + key.size() || index < 1 || !value.is_string()) {
            throw Error(ErrorCode::ValidationFailed, "descriptions sidecar entries must map cue numbers to strings",
                        {{"path", "$." + key}});
        }
        entries.emplace(index, value.get<std::string>());
    }
    return SidecarDescriber(std::move(entries));
}

std::string SidecarDescriber::describe(const ContextWindow& window) {
    auto it = entries_.find(window.cue_index);
    return it == entries_.end() ? std::string(kNoDescription) : it->second;
}

std::string DescriptionCache::get_or_describe(const ContextWindow& window, DescriberBackend& describer) {
    {
        std::shared_lock lock(mutex_);
        if (auto it = entries_.find(window.cue_index); it != entries_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    // Re-check: another writer may have filled it while we waited.
    if (auto it = entries_.find(window.cue_index); it != entries_.end()) return it->second;
    std::string description = describer.describe(window);
    ++describer_calls_;
    entries_.emplace(window.cue_index, description);
    return description;
}

std::optional<std::string> DescriptionCache::lookup(int cue_index) const {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(cue_index); it != entries_.end()) return it->second;
    return std::nullopt;
}

void DescriptionCache::put(int cue_index, std::string description) {
    std::unique_lock lock(mutex_);
    entries_[cue_index] = std::move(description);
}

std::map<int, std::string> DescriptionCache::snapshot() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

std::size_t DescriptionCache::describer_calls() const {
    std::shared_lock lock(mutex_);
    return describer_calls_;
}

} // namespace captune
