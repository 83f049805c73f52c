#include "captune/chat_backend.hpp"
#include "captune/error.hpp"

#include <httplib.h>

#include <fmt/format.h>

namespace captune {

HttpChatTransport::HttpChatTransport(std::string api_base, std::string api_key, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
    while (!api_base.empty() && api_base.back() == '/') api_base.pop_back();
    const auto scheme_end = api_base.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::BackendUnavailable, "api base must be an absolute URL: " + api_base,
                    {{"retryable", false}});
    }
    const auto path_start = api_base.find('/', scheme_end + 3);
    scheme_host_port_ = api_base.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : api_base.substr(path_start);
}

nlohmann::json HttpChatTransport::complete(const ChatRequest& request) {
    httplib::Client client(scheme_host_port_);
    if (!client.is_valid()) {
        throw Error(ErrorCode::BackendUnavailable, "unsupported api base " + scheme_host_port_,
                    {{"retryable", false}});
    }
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    client.set_bearer_token_auth(api_key_);

    auto res = client.Post(path_prefix_ + "/chat/completions", request.body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::BackendUnavailable,
                    fmt::format("chat completion request failed: {}", httplib::to_string(res.error())),
                    {{"retryable", true}});
    }
    if (res->status != 200) {
        const bool retryable = res->status == 429 || res->status >= 500;
        throw Error(ErrorCode::BackendUnavailable, fmt::format("chat completion returned HTTP {}", res->status),
                    {{"status", res->status}, {"retryable", retryable}, {"body", res->body}});
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
        throw Error(ErrorCode::MalformedResponse, "chat completion body is not JSON", {{"raw", res->body}});
    }
}

} // namespace captune
