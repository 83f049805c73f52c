#pragma once

#include "captune/prompt_engine.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace captune {

enum class BackendKind { LiveChatCompletion, DeterministicMock };

struct Estimate {
    double detail = kValueMin;
    double expressiveness = kValueMin;

    ParamPoint point() const { return {detail, expressiveness}; }
    bool operator==(const Estimate&) const = default;
};

struct PreferenceIntent {
    std::optional<double> detail_delta;         // signed steps on the 1-10 scale
    std::optional<double> expressiveness_delta;
    std::optional<SoundRepresentation> representation;
    std::optional<bool> genre_aligned;
    std::string explanation;

    bool recognized() const {
        return detail_delta || expressiveness_delta || representation || genre_aligned;
    }
    bool operator==(const PreferenceIntent&) const = default;
};

// The three generative capabilities the pipeline needs. Implementations must
// be safe to call from several threads at once.
class Backend {
public:
    virtual ~Backend() = default;

    // Transformed NSI text, wrapped in the same bracket pair as the original.
    virtual std::string transform(const TransformRequest& req) = 0;

    // Level of Detail / Expressiveness of a caption on the 1-10 scale. Throws
    // PreconditionViolated for empty captions.
    virtual Estimate estimate(std::string_view caption_text, const std::optional<std::string>& scene_context) = 0;

    virtual PreferenceIntent interpret_preference(std::string_view utterance, const ViewerPrefs& current) = 0;

    virtual BackendKind kind() const = 0;
};

struct BackendOptions {
    BackendKind kind = BackendKind::DeterministicMock;
    // Live only. When set, requests are answered from recorded fixtures in
    // this directory instead of the network.
    std::optional<std::filesystem::path> replay_fixtures;
    std::string api_base = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string api_key;
    int max_in_flight = 4;

    // Reads CAPTUNE_API_BASE, CAPTUNE_MODEL and CAPTUNE_API_KEY over the defaults.
    static BackendOptions from_env(BackendKind kind);
};

// Throws BackendUnavailable when a live backend is requested without an API
// key and without replay fixtures.
std::unique_ptr<Backend> make_backend(const BackendOptions& options);

std::optional<BackendKind> parse_backend_kind(std::string_view s);
std::string_view to_string(BackendKind kind);

} // namespace captune
