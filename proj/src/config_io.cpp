#include "captune/config_io.hpp"

#include "captune/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

namespace captune {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
    throw Error(ErrorCode::ValidationFailed, fmt::format("{}: {}", path, reason), {{"path", path}, {"reason", reason}});
}

std::string child(const std::string& path, const char* key) {
    return path == "$" ? std::string(key) : path + "." + key;
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) invalid(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) invalid(child(path, key), "missing");
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_string()) invalid(child(path, key), "expected a string");
    return v.get<std::string>();
}

double number_field(const json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_number()) invalid(child(path, key), "expected a number");
    return v.get<double>();
}

std::int64_t integer_field(const json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_number_integer()) invalid(child(path, key), "expected an integer");
    return v.get<std::int64_t>();
}

int cue_key(const std::string& key, const std::string& path) {
    int n = 0;
    const auto* end = key.data() + key.size();
    auto [ptr, ec] = std::from_chars(key.data(), end, n);
    if (ec != std::errc{} || ptr != end || n <= 0) invalid(path + "." + key, "keys must be cue indices");
    return n;
}

// Optional object keyed by cue index.
const json* cue_map(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return nullptr;
    if (!it->is_object()) invalid(key, "expected an object keyed by cue index");
    return &*it;
}

DimensionCalibration calibration_from_json(const json& j, const std::string& path) {
    DimensionCalibration c;
    c.v_min = number_field(j, "v_min", path);
    c.v_max = number_field(j, "v_max", path);
    c.s_min = number_field(j, "s_min", path);
    c.s_max = number_field(j, "s_max", path);
    c.s_ref = number_field(j, "s_ref", path);
    c.v_ref = number_field(j, "v_ref", path);
    if (!c.valid()) invalid(path, "calibration must satisfy s_min < s_ref < s_max and v_min <= v_ref <= v_max");
    return c;
}

CaptionCue cue_from_json(const json& j, const std::string& path) {
    CaptionCue cue;
    const auto index = integer_field(j, "index", path);
    if (index <= 0) invalid(path + ".index", "must be positive");
    cue.index = static_cast<int>(index);
    cue.start = Millis(integer_field(j, "start_ms", path));
    cue.end = Millis(integer_field(j, "end_ms", path));
    if (cue.start.count() < 0 || cue.end <= cue.start) invalid(path, "need 0 <= start_ms < end_ms");
    cue.text = string_field(j, "text", path);
    if (cue.text.empty()) invalid(path + ".text", "must not be empty");

    const auto kind = parse_cue_kind(string_field(j, "kind", path));
    if (!kind) invalid(path + ".kind", "expected \"Speech\" or \"Nsi\"");
    cue.kind = *kind;
    const auto& cat = field(j, "category", path);
    if (cue.is_nsi()) {
        const auto parsed = cat.is_string() ? parse_nsi_category(cat.get<std::string>()) : std::nullopt;
        if (!parsed) invalid(path + ".category", "NSI cues need a known category");
        if (!split_wrapper(cue.text)) invalid(path + ".text", "NSI text must be wrapped in brackets or parentheses");
        cue.category = parsed;
    } else if (!cat.is_null()) {
        invalid(path + ".category", "speech cues have no category");
    }
    const auto& locked = field(j, "locked", path);
    if (!locked.is_boolean()) invalid(path + ".locked", "expected a boolean");
    cue.locked = locked.get<bool>();
    return cue;
}

} // namespace

CaptionTrack track_from_json(const json& j) {
    CaptionTrack track;
    if (j.contains("source_name")) track.source_name = string_field(j, "source_name", "original_track");
    const auto& cues = field(j, "cues", "original_track");
    if (!cues.is_array()) invalid("original_track.cues", "expected an array");
    for (std::size_t i = 0; i < cues.size(); ++i) {
        const std::string path = fmt::format("original_track.cues[{}]", i);
        CaptionCue cue = cue_from_json(cues[i], path);
        if (!track.cues.empty()) {
            const auto& prev = track.cues.back();
            if (cue.index <= prev.index) invalid(path + ".index", "indices must increase");
            if (cue.start < prev.start) invalid(path + ".start_ms", "cues must be ordered by start time");
        }
        track.cues.push_back(std::move(cue));
    }
    return track;
}

TransformSpace space_from_json(const json& j) {
    const auto& anchors = field(j, "anchors", "space");
    const ParamPoint baseline = point_from_json(field(j, "baseline", "space"), "space.baseline");
    const ParamPoint lower = point_from_json(field(anchors, "lower", "space.anchors"), "space.anchors.lower");
    const ParamPoint upper = point_from_json(field(anchors, "upper", "space.anchors"), "space.anchors.upper");
    if (!(lower.detail < upper.detail && lower.expressiveness < upper.expressiveness)) {
        invalid("space.anchors", "lower must be strictly below upper on both dimensions");
    }
    if (baseline.detail < lower.detail || baseline.detail > upper.detail ||
        baseline.expressiveness < lower.expressiveness || baseline.expressiveness > upper.expressiveness) {
        invalid("space.baseline", "baseline must lie within the anchors");
    }
    const auto& calib = field(j, "calibration", "space");
    const auto cd = calibration_from_json(field(calib, "detail", "space.calibration"), "space.calibration.detail");
    const auto ce =
        calibration_from_json(field(calib, "expressiveness", "space.calibration"), "space.calibration.expressiveness");
    try {
        return TransformSpace(baseline, lower, upper, cd, ce);
    } catch (const Error& e) {
        invalid("space", e.what());
    }
}

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

double round6(double v) {
    const double r = std::round(v * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r; // no "-0.0"
}

json to_json(const ParamPoint& p) {
    return {{"detail", round6(p.detail)}, {"expressiveness", round6(p.expressiveness)}};
}

ParamPoint point_from_json(const json& j, const std::string& path) {
    ParamPoint p{number_field(j, "detail", path), number_field(j, "expressiveness", path)};
    if (!in_scale(p)) invalid(path, "values must lie in [1, 10]");
    return p;
}

json to_json(const CaptionCue& cue) {
    return {{"index", cue.index},
            {"start_ms", cue.start.count()},
            {"end_ms", cue.end.count()},
            {"text", cue.text},
            {"kind", to_string(cue.kind)},
            {"category", cue.category ? json(to_string(*cue.category)) : json(nullptr)},
            {"locked", cue.locked}};
}

json to_json(const DimensionCalibration& c) {
    return {{"v_min", round6(c.v_min)}, {"v_max", round6(c.v_max)}, {"s_min", round6(c.s_min)},
            {"s_max", round6(c.s_max)}, {"s_ref", round6(c.s_ref)}, {"v_ref", round6(c.v_ref)}};
}

json to_json(const CaptionTrack& track) {
    json cues = json::array();
    for (const auto& cue : track.cues) cues.push_back(to_json(cue));
    return {{"source_name", track.source_name}, {"cues", cues}};
}

json to_json(const TransformSpace& space) {
    return {{"baseline", to_json(space.baseline())},
            {"anchors", {{"lower", to_json(space.lower_anchor())}, {"upper", to_json(space.upper_anchor())}}},
            {"calibration", {{"detail", to_json(space.calib_detail())}, {"expressiveness", to_json(space.calib_expr())}}}};
}

json config_to_json(const ProjectConfig& config) {
    if (!config.space) throw Error(ErrorCode::AnchorsNotSet, "anchors must be set before export");

    json previews = json::object();
    for (const auto& [index, texts] : config.anchor_preview_texts) {
        json entry = json::object();
        if (texts.lower_text) entry["lower_text"] = *texts.lower_text;
        if (texts.upper_text) entry["upper_text"] = *texts.upper_text;
        previews[std::to_string(index)] = entry;
    }
    json contexts = json::object();
    for (const auto& [index, text] : config.context_descriptions) contexts[std::to_string(index)] = text;
    json estimates = json::object();
    for (const auto& [index, p] : config.cue_estimates) estimates[std::to_string(index)] = to_json(p);

    return {{"schema_version", config.schema_version},
            {"prompt_version", config.prompt_version},
            {"metadata",
             {{"title", config.metadata.title},
              {"genre", config.metadata.genre},
              {"synopsis", config.metadata.synopsis}}},
            {"original_track", to_json(config.original_track)},
            {"space", to_json(*config.space)},
            {"anchor_preview_texts", previews},
            {"context_descriptions", contexts},
            {"cue_estimates", estimates}};
}

std::string export_config(const ProjectConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

ProjectConfig config_from_json(const json& doc) {
    if (!doc.is_object()) invalid("$", "expected a JSON object");
    const json version = doc.value("schema_version", json());
    if (!version.is_string() || version.get<std::string>() != kSchemaVersion) {
        throw Error(ErrorCode::SchemaMismatch,
                    fmt::format("unsupported schema_version {} (expected \"{}\")", version.dump(), kSchemaVersion),
                    {{"path", "schema_version"}, {"found", version}});
    }

    ProjectConfig config;
    config.prompt_version = string_field(doc, "prompt_version", "$");
    const auto& meta = field(doc, "metadata", "$");
    config.metadata.title = string_field(meta, "title", "metadata");
    config.metadata.genre = string_field(meta, "genre", "metadata");
    config.metadata.synopsis = string_field(meta, "synopsis", "metadata");
    config.original_track = track_from_json(field(doc, "original_track", "$"));
    config.space = space_from_json(field(doc, "space", "$"));

    const auto& track = config.original_track;
    auto nsi_cue = [&](int index, const std::string& path) {
        const auto* cue = track.find(index);
        if (!cue) invalid(path, "no such cue");
        if (!cue->is_nsi()) invalid(path, "cue is not NSI");
    };

    if (const auto* previews = cue_map(doc, "anchor_preview_texts")) {
        for (const auto& [key, value] : previews->items()) {
            const std::string path = "anchor_preview_texts." + key;
            const int index = cue_key(key, "anchor_preview_texts");
            nsi_cue(index, path);
            if (!value.is_object()) invalid(path, "expected an object");
            AnchorTexts texts;
            for (const auto& [k, v] : value.items()) {
                if (k != "lower_text" && k != "upper_text") invalid(path + "." + k, "unknown field");
                if (!v.is_string()) invalid(path + "." + k, "expected a string");
                (k == "lower_text" ? texts.lower_text : texts.upper_text) = v.get<std::string>();
            }
            config.anchor_preview_texts[index] = texts;
        }
    }
    if (const auto* contexts = cue_map(doc, "context_descriptions")) {
        for (const auto& [key, value] : contexts->items()) {
            const int index = cue_key(key, "context_descriptions");
            if (!track.find(index)) invalid("context_descriptions." + key, "no such cue");
            if (!value.is_string()) invalid("context_descriptions." + key, "expected a string");
            config.context_descriptions[index] = value.get<std::string>();
        }
    }
    if (const auto* estimates = cue_map(doc, "cue_estimates")) {
        for (const auto& [key, value] : estimates->items()) {
            const std::string path = "cue_estimates." + key;
            const int index = cue_key(key, "cue_estimates");
            nsi_cue(index, path);
            config.cue_estimates[index] = point_from_json(value, path);
        }
    }
    return config;
}

ProjectConfig load_config(std::string_view input) {
    json doc;
    try {
        doc = json::parse(input);
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
        const auto [line, column] = line_column(input, byte);
        throw Error(ErrorCode::ValidationFailed, fmt::format("config is not valid JSON (line {}, column {})", line, column),
                    {{"path", "$"}, {"reason", e.what()}, {"byte", byte}, {"line", line}, {"column", column}});
    }
    return config_from_json(doc);
}

} // namespace captune
