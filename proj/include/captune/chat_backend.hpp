#pragma once

#include "captune/backend.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace captune {

// One chat-completions call. `capability` ("transform", "estimate",
// "interpret") is not sent on the wire; replay fixtures match on it.
struct ChatRequest {
    std::string capability;
    nlohmann::json body; // OpenAI-compatible request body
};

class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    // Returns the chat-completion response object. Throws BackendUnavailable
    // (details["retryable"] tells whether a retry can help).
    virtual nlohmann::json complete(const ChatRequest& request) = 0;
};

// POSTs to {api_base}/chat/completions with a bearer token.
class HttpChatTransport final : public ChatTransport {
public:
    HttpChatTransport(std::string api_base, std::string api_key,
                      std::chrono::seconds timeout = std::chrono::seconds(60));
    nlohmann::json complete(const ChatRequest& request) override;

private:
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::string api_key_;
    std::chrono::seconds timeout_;
};

// Answers from recorded request/response pairs (fixtures/*.json). A fixture
// is matched when every criterion it states holds:
//   "capability": equal to the request's capability
//   "match":      list of substrings, all present in the joined message text
//   "request":    {"messages": [...]} equal to the request's messages
// Its "response" is either a full completion object or {"content": "..."};
// an optional "status" other than 200 replays a transport failure.
class ReplayTransport final : public ChatTransport {
public:
    explicit ReplayTransport(const std::filesystem::path& fixtures_dir);
    explicit ReplayTransport(std::vector<nlohmann::json> fixtures);

    nlohmann::json complete(const ChatRequest& request) override;
    std::size_t fixture_count() const { return fixtures_.size(); }

private:
    std::vector<nlohmann::json> fixtures_;
};

struct ChatBackendOptions {
    std::string model = "gpt-4o";
    int max_in_flight = 4;
    int retries = 2;
    std::chrono::milliseconds backoff{200}; // doubled after every failed attempt
};

// Live backend: temperature 0, one completion per call, strict response
// shapes (MalformedResponse otherwise, with the raw payload logged).
class ChatCompletionBackend final : public Backend {
public:
    ChatCompletionBackend(std::unique_ptr<ChatTransport> transport, ChatBackendOptions options = {});

    std::string transform(const TransformRequest& req) override;
    Estimate estimate(std::string_view caption_text, const std::optional<std::string>& scene_context) override;
    PreferenceIntent interpret_preference(std::string_view utterance, const ViewerPrefs& current) override;
    BackendKind kind() const override { return BackendKind::LiveChatCompletion; }

    std::size_t transport_calls() const;
    std::size_t cached_responses() const;

    // Exposed for fixtures and tests.
    static nlohmann::json transform_messages(const TransformRequest& req);
    static nlohmann::json estimate_messages(std::string_view caption_text, const std::optional<std::string>& scene);
    static nlohmann::json interpret_messages(std::string_view utterance, const ViewerPrefs& current);

private:
    std::string complete(const std::string& capability, const nlohmann::json& messages);

    std::unique_ptr<ChatTransport> transport_;
    ChatBackendOptions options_;

    mutable std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
    std::size_t transport_calls_ = 0;
    std::map<std::string, std::string> cache_; // (capability, model, prompt version, messages) -> content
};

} // namespace captune
