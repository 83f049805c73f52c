#include "captune/service.hpp"

#include "captune/error.hpp"
#include "captune/log.hpp"
#include "captune/text_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace captune {

namespace {

using json = nlohmann::json;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

json prefs_json(const ViewerPrefs& p) {
    return {{"target", to_json(p.target)},
            {"representation", to_string(p.representation)},
            {"genre_aligned", p.genre_aligned}};
}

json intent_json(const PreferenceIntent& i) {
    auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
    return {{"detail_delta", opt(i.detail_delta)},
            {"expressiveness_delta", opt(i.expressiveness_delta)},
            {"representation", i.representation ? json(to_string(*i.representation)) : json(nullptr)},
            {"genre_aligned", opt(i.genre_aligned)},
            {"recognized", i.recognized()},
            {"explanation", i.explanation}};
}

json previews_json(const std::map<int, AnchorTexts>& previews) {
    json out = json::object();
    for (const auto& [index, t] : previews) {
        json e = json::object();
        if (t.lower_text) e["lower_text"] = *t.lower_text;
        if (t.upper_text) e["upper_text"] = *t.upper_text;
        out[std::to_string(index)] = e;
    }
    return out;
}

json estimates_json(const std::map<int, ParamPoint>& estimates) {
    json out = json::object();
    for (const auto& [index, p] : estimates) out[std::to_string(index)] = to_json(p);
    return out;
}

json strings_json(const std::map<int, std::string>& m) {
    json out = json::object();
    for (const auto& [index, s] : m) out[std::to_string(index)] = s;
    return out;
}

const CaptionCue& require_cue(const CaptionTrack& track, int index) {
    const auto* cue = track.find(index);
    if (!cue) throw Error(ErrorCode::NotFound, fmt::format("no cue {}", index), {{"cue_index", index}});
    return *cue;
}

void require_nsi(const CaptionCue& cue) {
    if (!cue.is_nsi()) {
        throw Error(ErrorCode::NotNsi, fmt::format("cue {} is speech", cue.index), {{"cue_index", cue.index}});
    }
}

std::string dimension_phrase(const char* name, double before, double after, double lo, double hi) {
    if (after > before) {
        return fmt::format("increased the {} (now at {}{})", name, format_value(after),
                           after >= hi ? ", the highest the creator allows" : "");
    }
    return fmt::format("decreased the {} (now at {}{})", name, format_value(after),
                       after <= lo ? ", the lowest the creator allows" : "");
}

} // namespace

std::string prefs_key(const ViewerPrefs& prefs, std::string_view prompt_version) {
    return fmt::format("{}|{}|{}|{}|v{}", round6(prefs.target.detail), round6(prefs.target.expressiveness),
                       to_string(prefs.representation), prefs.genre_aligned ? "genre" : "plain", prompt_version);
}

std::string chat_reply(const ViewerPrefs& before, const ViewerPrefs& after, const PreferenceIntent& intent,
                       const TransformSpace& space, bool genre_available) {
    if (!intent.recognized()) return intent.explanation;

    std::vector<std::string> changes;
    std::vector<std::string> notes;
    const auto& lo = space.lower_anchor();
    const auto& hi = space.upper_anchor();

    auto dimension = [&](const char* name, const std::optional<double>& delta, double b, double a, double l,
                         double h) {
        if (!delta || *delta == 0.0) return;
        if (a != b) {
            changes.push_back(dimension_phrase(name, b, a, l, h));
        } else {
            notes.push_back(fmt::format("The {} is already at the creator's {} limit ({}).", name,
                                        *delta > 0 ? "upper" : "lower", format_value(a)));
        }
    };
    dimension("Level of Detail", intent.detail_delta, before.target.detail, after.target.detail, lo.detail, hi.detail);
    dimension("Expressiveness", intent.expressiveness_delta, before.target.expressiveness,
              after.target.expressiveness, lo.expressiveness, hi.expressiveness);

    if (intent.representation) {
        if (after.representation != before.representation) {
            changes.push_back(fmt::format("changed the sound representation mode to {}",
                                          display_name(after.representation)));
        } else {
            notes.push_back(fmt::format("The sound representation mode is already {}.",
                                        display_name(after.representation)));
        }
    }
    if (intent.genre_aligned) {
        if (*intent.genre_aligned && !genre_available) {
            notes.emplace_back("Genre alignment needs a video genre, and this video has none.");
        } else if (after.genre_aligned != before.genre_aligned) {
            changes.push_back(fmt::format("turned genre alignment {}", after.genre_aligned ? "on" : "off"));
        } else {
            notes.push_back(fmt::format("Genre alignment is already {}.", after.genre_aligned ? "on" : "off"));
        }
    }

    std::string reply;
    if (!changes.empty()) {
        reply = "I've ";
        for (std::size_t i = 0; i < changes.size(); ++i) {
            if (i > 0) reply += i + 1 == changes.size() ? " and " : ", ";
            reply += changes[i];
        }
        reply += ".";
    }
    for (const auto& n : notes) {
        if (!reply.empty()) reply += " ";
        reply += n;
    }
    reply += changes.empty() ? " Your preferences are unchanged." : " Your preferences have been updated.";
    if (reply.front() == ' ') reply.erase(0, 1);
    return reply;
}

// ─── construction and persistence ────────────────────────────────────────────

Service::Service(std::shared_ptr<Backend> backend, std::optional<std::filesystem::path> data_dir)
    : backend_(std::move(backend)), data_dir_(std::move(data_dir)) {
    if (!backend_) throw Error(ErrorCode::BackendUnavailable, "service needs a backend", {{"retryable", false}});
    if (data_dir_) {
        std::filesystem::create_directories(*data_dir_);
        replay_store();
        store_.open(*data_dir_ / "store.jsonl", std::ios::app | std::ios::binary);
        if (!store_) {
            throw Error(ErrorCode::ValidationFailed, "cannot open store in " + data_dir_->string(),
                        {{"path", data_dir_->string()}});
        }
    }
}

Service::~Service() = default;

std::string Service::next_id(const char* prefix) {
    return fmt::format("{}_{:06}", prefix, ++id_counter_);
}

void Service::persist(const json& record) {
    if (!data_dir_) return;
    std::lock_guard lock(store_mutex_);
    store_ << record.dump() << '\n';
    store_.flush();
}

json Service::project_json(const Project& p) const {
    return {{"id", p.id},
            {"original_track", to_json(p.track)},
            {"metadata", {{"title", p.metadata.title}, {"genre", p.metadata.genre}, {"synopsis", p.metadata.synopsis}}},
            {"context_descriptions", strings_json(p.descriptions)},
            {"media_duration_ms", p.media_duration ? json(p.media_duration->count()) : json(nullptr)},
            {"baseline", p.baseline ? to_json(*p.baseline) : json(nullptr)},
            {"cue_estimates", estimates_json(p.cue_estimates)},
            {"space", p.space ? to_json(*p.space) : json(nullptr)},
            {"anchor_preview_texts", previews_json(p.previews)},
            {"nsi_count", p.track.nsi_count()}};
}

json Service::session_json(const Session& s) const {
    return {{"id", s.id}, {"prefs", prefs_json(s.prefs)}, {"space", to_json(*s.config.space)},
            {"metadata", {{"title", s.config.metadata.title}, {"genre", s.config.metadata.genre}}}};
}

void Service::persist_project(const Project& p) {
    if (data_dir_) persist({{"type", "project"}, {"state", project_json(p)}});
}

void Service::persist_session(const Session& s) {
    if (data_dir_) {
        persist({{"type", "session"}, {"id", s.id}, {"config", config_to_json(s.config)}, {"prefs", prefs_json(s.prefs)}});
    }
}

void Service::replay_store() {
    std::ifstream in(*data_dir_ / "store.jsonl", std::ios::binary);
    if (!in) return;
    auto bump = [&](const std::string& id) {
        const auto us = id.rfind('_');
        if (us == std::string::npos) return;
        try {
            const std::uint64_t n = std::stoull(id.substr(us + 1));
            if (n > id_counter_) id_counter_ = n;
        } catch (const std::exception&) {
        }
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const json rec = json::parse(line);
            if (rec.at("type") == "project") {
                const auto& st = rec.at("state");
                auto p = std::make_shared<Project>();
                p->id = st.at("id").get<std::string>();
                p->track = track_from_json(st.at("original_track"));
                const auto& m = st.at("metadata");
                p->metadata = {m.at("title").get<std::string>(), m.at("genre").get<std::string>(),
                               m.at("synopsis").get<std::string>()};
                for (const auto& [k, v] : st.at("context_descriptions").items()) p->descriptions[std::stoi(k)] = v;
                if (!st.at("media_duration_ms").is_null()) p->media_duration = Millis(st["media_duration_ms"].get<long>());
                if (!st.at("baseline").is_null()) p->baseline = point_from_json(st["baseline"], "baseline");
                for (const auto& [k, v] : st.at("cue_estimates").items()) {
                    p->cue_estimates[std::stoi(k)] = point_from_json(v, "cue_estimates");
                }
                if (!st.at("space").is_null()) p->space = space_from_json(st["space"]);
                for (const auto& [k, v] : st.at("anchor_preview_texts").items()) {
                    AnchorTexts t;
                    if (v.contains("lower_text")) t.lower_text = v["lower_text"].get<std::string>();
                    if (v.contains("upper_text")) t.upper_text = v["upper_text"].get<std::string>();
                    p->previews[std::stoi(k)] = t;
                }
                bump(p->id);
                projects_[p->id] = std::move(p);
            } else if (rec.at("type") == "session") {
                auto s = std::make_shared<Session>();
                s->id = rec.at("id").get<std::string>();
                s->config = config_from_json(rec.at("config"));
                const auto& pr = rec.at("prefs");
                s->prefs.target = point_from_json(pr.at("target"), "prefs.target");
                s->prefs.representation =
                    parse_representation(pr.at("representation").get<std::string>()).value_or(SoundRepresentation::Default);
                s->prefs.genre_aligned = pr.at("genre_aligned").get<bool>();
                bump(s->id);
                sessions_[s->id] = std::move(s);
            }
        } catch (const std::exception& e) {
            log::warn("store.skip_record", {{"line", lineno}, {"error", e.what()}});
        }
    }
    log::info("store.replayed", {{"projects", projects_.size()}, {"sessions", sessions_.size()}});
}

std::shared_ptr<Service::Project> Service::project(const std::string& id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = projects_.find(id);
    if (it == projects_.end()) throw Error(ErrorCode::NotFound, "no project " + id, {{"project_id", id}});
    return it->second;
}

std::shared_ptr<Service::Session> Service::session(const std::string& id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no session " + id, {{"session_id", id}});
    return it->second;
}

std::optional<std::string> Service::scene_context(Project& p, const CaptionCue& cue) {
    if (!p.descriptions.count(cue.index)) return std::nullopt;
    SidecarDescriber describer(p.descriptions);
    return p.context_cache.get_or_describe(compute_window(cue, p.media_duration), describer);
}

// ─── creator workflow ────────────────────────────────────────────────────────

json Service::create_project(const CreateProjectInput& input) {
    ParseOptions opts;
    opts.lenient = input.lenient;
    opts.source_name = input.source_name;
    ParseResult parsed = parse_srt_with_warnings(input.srt, opts);

    auto p = std::make_shared<Project>();
    p->track = std::move(parsed.track);
    p->metadata = input.metadata;
    p->media_duration = input.media_duration;
    json warnings = json::array();
    for (const auto& w : parsed.warnings) warnings.push_back({{"line", w.line}, {"message", w.message}});
    for (const auto& [index, text] : input.descriptions) {
        if (p->track.find(index)) {
            p->descriptions[index] = text;
        } else if (input.lenient) {
            warnings.push_back({{"line", nullptr}, {"message", fmt::format("description for missing cue {} ignored", index)}});
        } else {
            throw Error(ErrorCode::ValidationFailed, fmt::format("description given for missing cue {}", index),
                        {{"path", fmt::format("descriptions.{}", index)}, {"reason", "no such cue"}});
        }
    }
    p->id = next_id("prj");
    {
        std::unique_lock lock(registry_mutex_);
        projects_[p->id] = p;
    }
    persist_project(*p);
    log::info("project.created", {{"id", p->id}, {"cues", p->track.cues.size()}, {"nsi", p->track.nsi_count()}});
    json out = project_json(*p);
    out["warnings"] = warnings;
    return out;
}

json Service::get_project(const std::string& id) const {
    auto p = project(id);
    std::lock_guard lock(p->mutex);
    return project_json(*p);
}

json Service::calibrate(const std::string& id) {
    auto p = project(id);
    std::lock_guard lock(p->mutex);
    if (p->track.nsi_count() == 0) throw Error(ErrorCode::NoNsiCues, "project has no NSI cues to calibrate on");

    std::map<int, ParamPoint> estimates;
    std::vector<double> details, exprs;
    for (const auto& cue : p->track.cues) {
        if (!cue.is_nsi()) continue;
        const auto e = backend_->estimate(cue.text, scene_context(*p, cue));
        ++estimate_calls_;
        estimates[cue.index] = e.point();
        details.push_back(e.detail);
        exprs.push_back(e.expressiveness);
    }
    const ParamPoint baseline{median(details), median(exprs)};
    p->baseline = baseline;
    p->cue_estimates.clear();
    for (const auto& [index, e] : estimates) {
        if (!(e == baseline)) p->cue_estimates[index] = e;
    }
    // A new baseline invalidates anchors and every slider calibration.
    p->space.reset();
    p->preview_state.clear();
    persist_project(*p);
    log::info("project.calibrated", {{"id", id}, {"baseline", to_json(baseline)}});
    return {{"baseline", to_json(baseline)}, {"estimates", estimates_json(estimates)}};
}

json Service::set_anchors(const std::string& id, const ParamPoint& lower, const ParamPoint& upper,
                          const std::map<int, AnchorTexts>& previews) {
    auto p = project(id);
    std::lock_guard lock(p->mutex);
    if (!p->baseline) throw Error(ErrorCode::NotCalibrated, "calibrate the project before setting anchors");
    for (const auto& [index, texts] : previews) require_nsi(require_cue(p->track, index));

    TransformSpace space(*p->baseline, lower, upper);
    p->space = space;
    for (const auto& [index, texts] : previews) {
        auto& slot = p->previews[index];
        if (texts.lower_text) slot.lower_text = texts.lower_text;
        if (texts.upper_text) slot.upper_text = texts.upper_text;
    }
    persist_project(*p);
    return {{"space", to_json(space)}, {"anchor_preview_texts", previews_json(p->previews)}};
}

json Service::preview(const std::string& id, const PreviewInput& in) {
    auto p = project(id);
    std::lock_guard lock(p->mutex);
    const CaptionCue& cue = require_cue(p->track, in.cue_index);
    require_nsi(cue);
    if (cue.locked) throw Error(ErrorCode::LockedCue, fmt::format("cue {} is locked", cue.index), {{"cue_index", cue.index}});
    if (!p->baseline) throw Error(ErrorCode::NotCalibrated, "calibrate the project before previewing");
    if (in.anchor && *in.anchor != "lower" && *in.anchor != "upper") {
        throw Error(ErrorCode::BadRequest, "anchor must be \"lower\" or \"upper\"", {{"anchor", *in.anchor}});
    }

    const ParamPoint current = p->cue_estimates.count(cue.index) ? p->cue_estimates[cue.index] : *p->baseline;
    auto [it, fresh] = p->preview_state.try_emplace(cue.index);
    PreviewState& st = it->second;
    if (fresh) {
        st.calib_detail = DimensionCalibration::centered(current.detail);
        st.calib_expr = DimensionCalibration::centered(current.expressiveness);
    }

    const ParamPoint target{map_slider(st.calib_detail, in.slider_detail), map_slider(st.calib_expr, in.slider_expr)};
    ViewerPrefs prefs{target, SoundRepresentation::Default, false};
    RequestContext ctx;
    ctx.current = current;
    ctx.scene_context = scene_context(*p, cue);
    const TransformRequest req = build_request(cue, TransformSpace::full_scale(current), prefs, p->metadata, ctx);

    std::string text = cue.text;
    const bool identity = is_identity(req);
    if (!identity) {
        text = backend_->transform(req);
        ++transform_calls_;
    }

    json recalibration = nullptr;
    if (in.slider_detail != st.last_slider_detail) {
        // Changing detail shifts how expressive the text reads; pin the
        // expressiveness slider's current position to the re-estimate.
        double reestimated = current.expressiveness;
        if (!identity) {
            reestimated = backend_->estimate(text, ctx.scene_context).expressiveness;
            ++estimate_calls_;
        }
        if (in.slider_expr > st.calib_expr.s_min && in.slider_expr < st.calib_expr.s_max &&
            reestimated != map_slider(st.calib_expr, in.slider_expr)) {
            st.calib_expr = recalibrate(st.calib_expr, in.slider_expr, reestimated);
            recalibration = {{"dimension", "expressiveness"},
                             {"slider", in.slider_expr},
                             {"value", round6(reestimated)},
                             {"calibration", to_json(st.calib_expr)}};
            log::info("preview.recalibrated", {{"project", id}, {"cue_index", cue.index}, {"event", recalibration}});
        }
    }
    st.last_slider_detail = in.slider_detail;
    st.last_slider_expr = in.slider_expr;

    if (in.anchor) {
        auto& slot = p->previews[cue.index];
        (*in.anchor == "lower" ? slot.lower_text : slot.upper_text) = text;
        persist_project(*p);
    }

    return {{"cue_index", cue.index},
            {"text", text},
            {"values", to_json(target)},
            {"recalibrated_expr", recalibration.is_null() ? json(nullptr) : recalibration["value"]},
            {"recalibration", recalibration},
            {"calibration", {{"detail", to_json(st.calib_detail)}, {"expressiveness", to_json(st.calib_expr)}}},
            {"backend_called", !identity}};
}

json Service::edit_cue(const std::string& id, int cue_index, const std::optional<std::string>& new_text,
                       std::optional<bool> locked) {
    auto p = project(id);
    std::lock_guard lock(p->mutex);
    CaptionCue* cue = p->track.find(cue_index);
    if (!cue) throw Error(ErrorCode::NotFound, fmt::format("no cue {}", cue_index), {{"cue_index", cue_index}});
    require_nsi(*cue);

    if (new_text) {
        const std::string trimmed(text::trim(*new_text));
        const NsiTag tag = detect_nsi(trimmed);
        if (tag.kind != CueKind::Nsi) {
            throw Error(ErrorCode::NotNsi, "an edited NSI caption must stay wrapped in brackets or parentheses",
                        {{"cue_index", cue_index}, {"text", trimmed}});
        }
        if (trimmed != cue->text) {
            cue->text = trimmed;
            cue->category = tag.category;
            p->previews.erase(cue_index);
            p->preview_state.erase(cue_index);
            p->context_cache.put(cue_index, p->descriptions.count(cue_index) ? p->descriptions[cue_index]
                                                                            : std::string(kNoDescription));
            if (p->baseline) {
                const auto e = backend_->estimate(cue->text, scene_context(*p, *cue)).point();
                ++estimate_calls_;
                if (e == *p->baseline) {
                    p->cue_estimates.erase(cue_index);
                } else {
                    p->cue_estimates[cue_index] = e;
                }
            }
        }
    }
    if (locked) cue->locked = *locked;
    persist_project(*p);
    return to_json(*cue);
}

ProjectConfig Service::export_project(const std::string& id) const {
    auto p = project(id);
    std::lock_guard lock(p->mutex);
    if (!p->space) throw Error(ErrorCode::AnchorsNotSet, "set anchors before exporting");
    ProjectConfig c;
    c.original_track = p->track;
    c.space = p->space;
    c.anchor_preview_texts = p->previews;
    c.context_descriptions = p->descriptions;
    c.metadata = p->metadata;
    c.cue_estimates = p->cue_estimates;
    return c;
}

// ─── viewer workflow ─────────────────────────────────────────────────────────

json Service::create_session(const ProjectConfig& config) {
    if (!config.space) throw Error(ErrorCode::AnchorsNotSet, "config has no transformation space");
    auto s = std::make_shared<Session>();
    s->config = config;
    s->prefs = ViewerPrefs{config.space->baseline(), SoundRepresentation::Default, false};
    s->id = next_id("ses");
    {
        std::unique_lock lock(registry_mutex_);
        sessions_[s->id] = s;
    }
    persist_session(*s);
    return session_json(*s);
}

json Service::get_session(const std::string& id) const {
    auto s = session(id);
    std::shared_lock lock(s->mutex);
    return session_json(*s);
}

json Service::set_prefs(const std::string& id, const PrefsUpdate& update) {
    auto s = session(id);
    std::unique_lock lock(s->mutex);
    const TransformSpace& space = *s->config.space;
    ViewerPrefs next = s->prefs;

    if (update.cell && update.target) throw Error(ErrorCode::BadRequest, "give either a grid cell or a target, not both");
    if (update.cell) {
        const ParamPoint c = *update.cell;
        auto grid_value = [](double v) { return v == std::floor(v) && v >= kValueMin && v <= kValueMax; };
        if (!grid_value(c.detail) || !grid_value(c.expressiveness)) {
            throw Error(ErrorCode::BadRequest, "grid cells are integers from 1 to 10", {{"cell", to_json(c)}});
        }
        if (!space.contains(c)) {
            throw Error(ErrorCode::DisabledCell,
                        fmt::format("cell ({}, {}) is outside the creator's bounds", format_value(c.detail),
                                    format_value(c.expressiveness)),
                        {{"cell", to_json(c)}, {"lower", to_json(space.lower_anchor())},
                         {"upper", to_json(space.upper_anchor())}});
        }
        next.target = c;
    }
    if (update.target) {
        if (!in_scale(*update.target)) {
            throw Error(ErrorCode::BadRequest, "target values must lie in [1, 10]", {{"target", to_json(*update.target)}});
        }
        next.target = clamp_to_anchors(space, *update.target);
    }
    if (update.representation) next.representation = *update.representation;
    if (update.genre_aligned) {
        if (*update.genre_aligned && s->config.metadata.genre.empty()) {
            throw Error(ErrorCode::ValidationFailed, "genre alignment needs a genre in the video metadata",
                        {{"path", "metadata.genre"}, {"reason", "empty"}});
        }
        next.genre_aligned = *update.genre_aligned;
    }
    s->prefs = next;
    persist_session(*s);
    return {{"prefs", prefs_json(next)}};
}

json Service::chat(const std::string& id, const std::string& utterance) {
    auto s = session(id);
    ViewerPrefs before;
    {
        std::shared_lock lock(s->mutex);
        before = s->prefs;
    }
    const PreferenceIntent intent = backend_->interpret_preference(utterance, before);

    std::unique_lock lock(s->mutex);
    before = s->prefs; // may have moved while the backend was thinking
    const TransformSpace& space = *s->config.space;
    const bool genre_available = !s->config.metadata.genre.empty();
    ViewerPrefs after = before;
    bool clamped = false;
    if (intent.detail_delta || intent.expressiveness_delta) {
        const ParamPoint wanted{before.target.detail + intent.detail_delta.value_or(0.0),
                                before.target.expressiveness + intent.expressiveness_delta.value_or(0.0)};
        after.target = clamp_to_anchors(space, wanted);
        clamped = !(after.target == wanted);
    }
    if (intent.representation) after.representation = *intent.representation;
    if (intent.genre_aligned && (!*intent.genre_aligned || genre_available)) after.genre_aligned = *intent.genre_aligned;

    s->prefs = after;
    if (!(after == before)) persist_session(*s);
    const std::string reply = chat_reply(before, after, intent, space, genre_available);
    return {{"intent", intent_json(intent)}, {"prefs", prefs_json(after)}, {"reply", reply}, {"clamped", clamped}};
}

json Service::get_captions(const std::string& id, std::optional<Millis> from, std::optional<Millis> to) {
    auto s = session(id);
    if (from && to && *to < *from) {
        throw Error(ErrorCode::BadRequest, "to_ms must not be before from_ms");
    }
    ViewerPrefs prefs;
    {
        std::shared_lock lock(s->mutex);
        prefs = s->prefs;
    }
    const ProjectConfig& config = s->config; // immutable after creation
    const std::string key = prefs_key(prefs, config.prompt_version);

    json cues = json::array();
    for (const auto& cue : config.original_track.cues) {
        if (from && cue.end <= *from) continue;
        if (to && cue.start >= *to) continue;
        json out = to_json(cue);
        out["transformed"] = false;
        if (cue.is_nsi() && !cue.locked) {
            std::optional<std::string> cached;
            {
                std::shared_lock lock(s->mutex);
                if (auto it = s->cache.find({cue.index, key}); it != s->cache.end()) cached = it->second;
            }
            std::string text;
            if (cached) {
                text = *cached;
                std::unique_lock lock(s->mutex);
                ++s->hits;
            } else {
                const CueRender r = render_cue(config, cue, prefs, *backend_);
                if (r.backend_called) ++transform_calls_;
                text = r.text;
                std::unique_lock lock(s->mutex);
                ++s->misses;
                s->cache.emplace(std::make_pair(cue.index, key), text);
            }
            out["text"] = text;
            out["transformed"] = text != cue.text;
        }
        cues.push_back(std::move(out));
    }
    return {{"cues", cues}, {"prefs", prefs_json(prefs)}};
}

json Service::metrics() const {
    std::shared_lock lock(registry_mutex_);
    std::size_t hits = 0, misses = 0, entries = 0;
    json per_session = json::object();
    for (const auto& [id, s] : sessions_) {
        std::shared_lock slock(s->mutex);
        hits += s->hits;
        misses += s->misses;
        entries += s->cache.size();
        per_session[id] = {{"hits", s->hits}, {"misses", s->misses}, {"entries", s->cache.size()}};
    }
    const std::size_t lookups = hits + misses;
    return {{"cache",
             {{"hits", hits},
              {"misses", misses},
              {"entries", entries},
              {"hit_rate", lookups ? static_cast<double>(hits) / static_cast<double>(lookups) : 0.0}}},
            {"sessions", per_session},
            {"projects", projects_.size()},
            {"backend",
             {{"kind", to_string(backend_->kind())},
              {"transform_calls", transform_calls_.load()},
              {"estimate_calls", estimate_calls_.load()}}}};
}

// ─── shared rendering ────────────────────────────────────────────────────────

CueRender render_cue(const ProjectConfig& config, const CaptionCue& cue, const ViewerPrefs& prefs, Backend& backend) {
    if (!cue.is_nsi() || cue.locked) return {cue.text, false};
    const TransformSpace& space = *config.space;
    // The baseline cell with default styling is the creator's own captions.
    if (prefs.target == space.baseline() && prefs.representation == SoundRepresentation::Default &&
        !prefs.genre_aligned) {
        return {cue.text, false};
    }
    RequestContext ctx;
    if (auto it = config.cue_estimates.find(cue.index); it != config.cue_estimates.end()) {
        ctx.current = clamp_to_anchors(space, it->second);
    }
    if (auto it = config.context_descriptions.find(cue.index); it != config.context_descriptions.end()) {
        ctx.scene_context = it->second;
    }
    if (auto it = config.anchor_preview_texts.find(cue.index); it != config.anchor_preview_texts.end()) {
        ctx.anchor_texts = it->second;
    }
    const TransformRequest req = build_request(cue, space, prefs, config.metadata, ctx);
    if (is_identity(req)) return {cue.text, false};
    log::debug("transform.prompt", {{"cue_index", cue.index}, {"prompt", render_prompt(req)}});
    return {backend.transform(req), true};
}

void require_enabled_cell(const TransformSpace& space, const ParamPoint& cell) {
    if (!space.contains(cell)) {
        throw Error(ErrorCode::DisabledCell,
                    fmt::format("({}, {}) is outside the creator's bounds", format_value(cell.detail),
                                format_value(cell.expressiveness)),
                    {{"cell", to_json(cell)}, {"lower", to_json(space.lower_anchor())},
                     {"upper", to_json(space.upper_anchor())}});
    }
}

CaptionTrack transform_track(const ProjectConfig& config, const ViewerPrefs& prefs, Backend& backend) {
    if (!config.space) throw Error(ErrorCode::AnchorsNotSet, "config has no transformation space");
    require_enabled_cell(*config.space, prefs.target);
    CaptionTrack out = config.original_track;
    for (auto& cue : out.cues) cue.text = render_cue(config, cue, prefs, backend).text;
    return out;
}

} // namespace captune
