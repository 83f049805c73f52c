#include "captune/backend.hpp"

#include "captune/chat_backend.hpp"
#include "captune/error.hpp"
#include "captune/mock_backend.hpp"

#include <cstdlib>

namespace captune {

namespace {

void env_override(const char* name, std::string& field) {
    if (const char* v = std::getenv(name); v && *v) field = v;
}

} // namespace

BackendOptions BackendOptions::from_env(BackendKind kind) {
    BackendOptions o;
    o.kind = kind;
    env_override("CAPTUNE_API_BASE", o.api_base);
    env_override("CAPTUNE_MODEL", o.model);
    env_override("CAPTUNE_API_KEY", o.api_key);
    return o;
}

std::unique_ptr<Backend> make_backend(const BackendOptions& options) {
    if (options.kind == BackendKind::DeterministicMock) return std::make_unique<MockBackend>();

    ChatBackendOptions chat;
    chat.model = options.model;
    chat.max_in_flight = options.max_in_flight;
    if (options.replay_fixtures) {
        return std::make_unique<ChatCompletionBackend>(std::make_unique<ReplayTransport>(*options.replay_fixtures),
                                                       chat);
    }
    if (options.api_key.empty()) {
        throw Error(ErrorCode::BackendUnavailable, "live backend requires CAPTUNE_API_KEY", {{"retryable", false}});
    }
    return std::make_unique<ChatCompletionBackend>(
        std::make_unique<HttpChatTransport>(options.api_base, options.api_key), chat);
}

std::optional<BackendKind> parse_backend_kind(std::string_view s) {
    if (s == "mock") return BackendKind::DeterministicMock;
    if (s == "live") return BackendKind::LiveChatCompletion;
    return std::nullopt;
}

std::string_view to_string(BackendKind kind) {
    return kind == BackendKind::DeterministicMock ? "mock" : "live";
}

} // namespace captune
