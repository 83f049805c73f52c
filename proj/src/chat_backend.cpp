#include "captune/chat_backend.hpp"

#include "captune/caption_format.hpp"
#include "captune/error.hpp"
#include "captune/log.hpp"
#include "captune/text_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace captune {

namespace {

using json = nlohmann::json;

constexpr std::string_view kTransformSystem =
    "You adapt non-speech captions (descriptions of sounds, music and tone) for deaf and hard of hearing "
    "viewers. Two 1-10 scales describe a caption: Level of Detail (information density) and Expressiveness "
    "(how evocative the wording is). The creator has fixed a minimal and a maximal anchor; never go beyond "
    "them. Percentages place the requested caption between the anchors and give the change from the "
    "current caption. When anchor captions are given, interpolate between them rather than writing from "
    "scratch. Reply with exactly one line: the caption wrapped in square brackets or parentheses, nothing "
    "else.";

// Calibration exemplars pin the 1, 5 and 10 points of both scales.
constexpr std::string_view kEstimateSystem =
    "Rate a non-speech caption on two 1-10 scales. Level of Detail: how much information it carries. "
    "Expressiveness: how stylistic and evocative its language is. Reference points:\n"
    "  [Sound] -> {\"detail\": 1, \"expressiveness\": 1}\n"
    "  [Thunder crashes violently] -> {\"detail\": 5, \"expressiveness\": 5}\n"
    "  [Shrill, persistent meowing echoing through the quiet street] -> {\"detail\": 10, \"expressiveness\": 10}\n"
    "Reply with only a JSON object {\"detail\": <number>, \"expressiveness\": <number>}.";

constexpr std::string_view kInterpretSystem =
    "You help a viewer adjust how non-speech captions are shown. Settings: Level of Detail (1-10), "
    "Expressiveness (1-10), sound representation (default, source_focused, onomatopoeia, sensory_quality) "
    "and genre alignment (on/off). Read the viewer's message and reply with only a JSON object: "
    "{\"detail_delta\": number|null, \"expressiveness_delta\": number|null, \"representation\": string|null, "
    "\"genre_aligned\": boolean|null, \"explanation\": string}. Deltas are signed steps on the 1-10 scale; "
    "use null for anything the viewer did not ask about.";

json messages(std::string_view system, const std::string& user) {
    return json::array({{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}});
}

[[noreturn]] void malformed(const std::string& why, const std::string& raw) {
    log::error("backend.malformed_response", {{"reason", why}, {"raw", raw}});
    throw Error(ErrorCode::MalformedResponse, "model response rejected: " + why, {{"raw", raw}});
}

json parse_object(const std::string& content) {
    json doc;
    try {
        doc = json::parse(text::trim(content));
    } catch (const json::parse_error&) {
        malformed("expected a JSON object", content);
    }
    if (!doc.is_object()) malformed("expected a JSON object", content);
    return doc;
}

double scale_value(const json& doc, const char* key, const std::string& raw) {
    if (!doc.contains(key) || !doc[key].is_number()) malformed(fmt::format("missing numeric '{}'", key), raw);
    const double v = doc[key].get<double>();
    if (v < kValueMin || v > kValueMax) malformed(fmt::format("'{}' outside 1-10", key), raw);
    return v;
}

std::string joined_contents(const json& body) {
    std::string all;
    if (body.contains("messages")) {
        for (const auto& m : body["messages"]) {
            if (m.contains("content") && m["content"].is_string()) {
                all += m["content"].get<std::string>();
                all.push_back('\n');
            }
        }
    }
    return all;
}

bool fixture_matches(const json& fx, const ChatRequest& req) {
    if (fx.contains("capability") && fx["capability"] != req.capability) return false;
    if (fx.contains("request")) {
        const auto& r = fx["request"];
        if (r.contains("messages") && (!req.body.contains("messages") || r["messages"] != req.body["messages"])) {
            return false;
        }
    }
    if (fx.contains("match")) {
        const std::string all = joined_contents(req.body);
        for (const auto& needle : fx["match"]) {
            if (!needle.is_string() || all.find(needle.get<std::string>()) == std::string::npos) return false;
        }
    }
    return true;
}

void load_fixture_file(const std::filesystem::path& path, std::vector<json>& out) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    json doc;
    try {
        doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ValidationFailed, fmt::format("fixture {}: {}", path.string(), e.what()),
                    {{"path", path.string()}});
    }
    if (doc.is_array()) {
        for (auto& fx : doc) out.push_back(std::move(fx));
    } else {
        out.push_back(std::move(doc));
    }
}

} // namespace

// ─── ReplayTransport ─────────────────────────────────────────────────────────

ReplayTransport::ReplayTransport(const std::filesystem::path& fixtures_dir) {
    if (!std::filesystem::is_directory(fixtures_dir)) {
        throw Error(ErrorCode::BackendUnavailable, "fixture directory not found: " + fixtures_dir.string(),
                    {{"retryable", false}});
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(fixtures_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) load_fixture_file(f, fixtures_);
}

ReplayTransport::ReplayTransport(std::vector<nlohmann::json> fixtures) : fixtures_(std::move(fixtures)) {}

nlohmann::json ReplayTransport::complete(const ChatRequest& request) {
    for (const auto& fx : fixtures_) {
        if (!fixture_matches(fx, request)) continue;
        const int status = fx.value("status", 200);
        if (status != 200) {
            throw Error(ErrorCode::BackendUnavailable, fmt::format("replayed HTTP status {}", status),
                        {{"status", status}, {"retryable", status == 429 || status >= 500}});
        }
        const auto& resp = fx.at("response");
        if (resp.contains("choices")) return resp;
        return json{{"choices", json::array({{{"index", 0},
                                              {"message", {{"role", "assistant"}, {"content", resp.at("content")}}},
                                              {"finish_reason", "stop"}}})}};
    }
    throw Error(ErrorCode::BackendUnavailable, "no recorded fixture matches the " + request.capability + " request",
                {{"retryable", false}, {"capability", request.capability}});
}

// ─── ChatCompletionBackend ───────────────────────────────────────────────────

ChatCompletionBackend::ChatCompletionBackend(std::unique_ptr<ChatTransport> transport, ChatBackendOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
    options_.max_in_flight = std::max(1, options_.max_in_flight);
    options_.retries = std::max(0, options_.retries);
}

std::size_t ChatCompletionBackend::transport_calls() const {
    std::lock_guard lock(mutex_);
    return transport_calls_;
}

std::size_t ChatCompletionBackend::cached_responses() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

nlohmann::json ChatCompletionBackend::transform_messages(const TransformRequest& req) {
    return messages(kTransformSystem, render_prompt(req));
}

nlohmann::json ChatCompletionBackend::estimate_messages(std::string_view caption_text,
                                                        const std::optional<std::string>& scene) {
    std::string user = fmt::format("Caption: {}\n", caption_text);
    if (scene) user += fmt::format("Scene context: {}\n", *scene);
    return messages(kEstimateSystem, user);
}

nlohmann::json ChatCompletionBackend::interpret_messages(std::string_view utterance, const ViewerPrefs& current) {
    const std::string user = fmt::format(
        "Current settings: Level of Detail {}, Expressiveness {}, representation {}, genre alignment {}.\n"
        "Viewer: {}\n",
        format_value(current.target.detail), format_value(current.target.expressiveness),
        to_string(current.representation), current.genre_aligned ? "on" : "off", utterance);
    return messages(kInterpretSystem, user);
}

std::string ChatCompletionBackend::complete(const std::string& capability, const nlohmann::json& msgs) {
    const std::string key =
        fmt::format("{}\x1f{}\x1f{}\x1f{}", capability, options_.model, kPromptVersion, msgs.dump());
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }

    ChatRequest request;
    request.capability = capability;
    request.body = {{"model", options_.model}, {"temperature", 0}, {"n", 1}, {"messages", msgs}};

    {
        std::unique_lock lock(mutex_);
        slot_free_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
        ++in_flight_;
    }
    struct SlotRelease {
        ChatCompletionBackend* self;
        ~SlotRelease() {
            {
                std::lock_guard lock(self->mutex_);
                --self->in_flight_;
            }
            self->slot_free_.notify_one();
        }
    } release{this};

    json response;
    auto delay = options_.backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            {
                std::lock_guard lock(mutex_);
                ++transport_calls_;
            }
            response = transport_->complete(request);
            break;
        } catch (const Error& e) {
            const bool retryable = e.code() == ErrorCode::BackendUnavailable && e.details().value("retryable", true);
            if (!retryable || attempt >= options_.retries) throw;
            log::warn("backend.retry", {{"capability", capability}, {"attempt", attempt + 1}, {"error", e.what()}});
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }

    const std::string raw = response.dump();
    if (!response.contains("choices") || !response["choices"].is_array() || response["choices"].empty()) {
        malformed("no choices in completion", raw);
    }
    const auto& message = response["choices"][0].value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string()) malformed("no message content", raw);
    std::string content = message["content"].get<std::string>();

    std::lock_guard lock(mutex_);
    cache_.emplace(key, content);
    return content;
}

std::string ChatCompletionBackend::transform(const TransformRequest& req) {
    const auto msgs = transform_messages(req);
    log::debug("backend.prompt", {{"capability", "transform"}, {"prompt", msgs[1]["content"]}});
    const std::string content = complete("transform", msgs);
    const auto line = text::trim(content);
    if (line.empty() || line.find('\n') != std::string_view::npos) malformed("expected a single line", content);
    const auto reply = split_wrapper(line);
    if (!reply) malformed("expected a bracketed caption", content);
    const auto original = split_wrapper(req.original_text);
    const Wrapper w = original ? original->wrapper : reply->wrapper;
    return std::string(1, w.open) + std::string(text::trim(reply->inner)) + std::string(1, w.close);
}

Estimate ChatCompletionBackend::estimate(std::string_view caption_text, const std::optional<std::string>& scene_context) {
    if (text::trim(caption_text).empty()) {
        throw Error(ErrorCode::PreconditionViolated, "cannot estimate an empty caption");
    }
    const std::string content = complete("estimate", estimate_messages(caption_text, scene_context));
    const json doc = parse_object(content);
    return {scale_value(doc, "detail", content), scale_value(doc, "expressiveness", content)};
}

PreferenceIntent ChatCompletionBackend::interpret_preference(std::string_view utterance, const ViewerPrefs& current) {
    const std::string content = complete("interpret", interpret_messages(utterance, current));
    const json doc = parse_object(content);
    PreferenceIntent intent;
    auto delta = [&](const char* key) -> std::optional<double> {
        if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
        if (!doc[key].is_number()) malformed(fmt::format("'{}' must be a number or null", key), content);
        return doc[key].get<double>();
    };
    intent.detail_delta = delta("detail_delta");
    intent.expressiveness_delta = delta("expressiveness_delta");
    if (doc.contains("representation") && !doc["representation"].is_null()) {
        const auto mode = doc["representation"].is_string()
                              ? parse_representation(doc["representation"].get<std::string>())
                              : std::nullopt;
        if (!mode) malformed("unknown representation", content);
        intent.representation = mode;
    }
    if (doc.contains("genre_aligned") && !doc["genre_aligned"].is_null()) {
        if (!doc["genre_aligned"].is_boolean()) malformed("'genre_aligned' must be boolean or null", content);
        intent.genre_aligned = doc["genre_aligned"].get<bool>();
    }
    intent.explanation = doc.value("explanation", std::string{});
    return intent;
}

} // namespace captune
