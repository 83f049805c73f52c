#pragma once

#include "captune/backend.hpp"
#include "captune/caption_format.hpp"
#include "captune/config_io.hpp"
#include "captune/media_context.hpp"
#include "captune/prompt_engine.hpp"
#include "captune/transform_space.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace captune {

struct CreateProjectInput {
    std::string srt;
    std::string source_name;
    VideoMetadata metadata;
    std::map<int, std::string> descriptions; // describer sidecar, keyed by cue index
    bool lenient = false;
    std::optional<Millis> media_duration;
};

struct PreviewInput {
    int cue_index = 0;
    double slider_detail = 0.0;
    double slider_expr = 0.0;
    // "lower" or "upper": remember the preview text as that anchor's caption.
    std::optional<std::string> anchor;
};

struct PrefsUpdate {
    std::optional<ParamPoint> cell;   // grid cell, integers 1..10; DisabledCell outside the anchors
    std::optional<ParamPoint> target; // free values, clamped to the anchors
    std::optional<SoundRepresentation> representation;
    std::optional<bool> genre_aligned;
};

// The creator and viewer workflows over in-process state. All public methods
// are safe to call concurrently and return JSON ready to send.
class Service {
public:
    // With a data directory, every mutation is appended to
    // <data_dir>/store.jsonl and replayed on construction.
    explicit Service(std::shared_ptr<Backend> backend, std::optional<std::filesystem::path> data_dir = std::nullopt);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Creator workflow.
    nlohmann::json create_project(const CreateProjectInput& input);
    nlohmann::json get_project(const std::string& id) const;
    nlohmann::json calibrate(const std::string& id);
    nlohmann::json set_anchors(const std::string& id, const ParamPoint& lower, const ParamPoint& upper,
                               const std::map<int, AnchorTexts>& previews = {});
    nlohmann::json preview(const std::string& id, const PreviewInput& input);
    nlohmann::json edit_cue(const std::string& id, int cue_index, const std::optional<std::string>& text,
                            std::optional<bool> locked);
    ProjectConfig export_project(const std::string& id) const;

    // Viewer workflow.
    nlohmann::json create_session(const ProjectConfig& config);
    nlohmann::json get_session(const std::string& id) const;
    nlohmann::json set_prefs(const std::string& id, const PrefsUpdate& update);
    nlohmann::json chat(const std::string& id, const std::string& utterance);
    nlohmann::json get_captions(const std::string& id, std::optional<Millis> from, std::optional<Millis> to);

    nlohmann::json metrics() const;
    std::size_t backend_transform_calls() const { return transform_calls_.load(); }

private:
    struct PreviewState {
        DimensionCalibration calib_detail;
        DimensionCalibration calib_expr;
        double last_slider_detail = 0.0;
        double last_slider_expr = 0.0;
    };
    struct Project {
        mutable std::mutex mutex;
        std::string id;
        CaptionTrack track;
        VideoMetadata metadata;
        std::map<int, std::string> descriptions;
        std::optional<Millis> media_duration;
        std::optional<ParamPoint> baseline;
        std::map<int, ParamPoint> cue_estimates;
        std::optional<TransformSpace> space;
        std::map<int, AnchorTexts> previews;
        std::map<int, PreviewState> preview_state;
        DescriptionCache context_cache;
    };
    struct Session {
        mutable std::shared_mutex mutex;
        std::string id;
        ProjectConfig config;
        ViewerPrefs prefs;
        std::map<std::pair<int, std::string>, std::string> cache;
        std::size_t hits = 0;
        std::size_t misses = 0;
    };

    std::shared_ptr<Project> project(const std::string& id) const;
    std::shared_ptr<Session> session(const std::string& id) const;
    std::optional<std::string> scene_context(Project& p, const CaptionCue& cue);
    nlohmann::json project_json(const Project& p) const;
    nlohmann::json session_json(const Session& s) const;

    void persist(const nlohmann::json& record);
    void persist_project(const Project& p);
    void persist_session(const Session& s);
    void replay_store();
    std::string next_id(const char* prefix);

    std::shared_ptr<Backend> backend_;
    std::optional<std::filesystem::path> data_dir_;

    mutable std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Project>> projects_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::atomic<std::uint64_t> id_counter_{0};

    std::mutex store_mutex_;
    std::ofstream store_;

    std::atomic<std::size_t> transform_calls_{0};
    std::atomic<std::size_t> estimate_calls_{0};
};

struct CueRender {
    std::string text;
    bool backend_called = false;
};

// Text of one cue under `prefs`. Speech and locked cues, the baseline cell
// with default styling, and requests that change nothing come back verbatim
// without a backend call. The cue's own estimate (clamped to the anchors) is
// the starting point when the config has one, the baseline otherwise.
CueRender render_cue(const ProjectConfig& config, const CaptionCue& cue, const ViewerPrefs& prefs, Backend& backend);

// Whole track under `prefs`. Throws DisabledCell when the target lies
// outside the anchors.
CaptionTrack transform_track(const ProjectConfig& config, const ViewerPrefs& prefs, Backend& backend);

void require_enabled_cell(const TransformSpace& space, const ParamPoint& cell);

// Key identifying every preference that affects a transformed caption.
std::string prefs_key(const ViewerPrefs& prefs, std::string_view prompt_version);

// Assistant reply for an applied chat intent.
std::string chat_reply(const ViewerPrefs& before, const ViewerPrefs& after, const PreferenceIntent& intent,
                       const TransformSpace& space, bool genre_available);

} // namespace captune
