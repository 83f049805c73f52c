#pragma once

#include "captune/backend.hpp"

#include <string>
#include <string_view>

namespace captune {

// Rule-based stand-in for the generative model. Everything it does is a pure
// function of its inputs and a fixed set of word tables, so output is stable
// across runs and platforms.
//
// Transformation pipeline for a non-identity request:
//   1. Representation / genre rewrite of the caption's words (source moved to
//      the front, onomatopoeia prefix, sensory descriptor, genre adjective).
//   2. Detail budget. The mock estimator reads a caption with k content words
//      as detail k + 1, so a target T asks for round(T) - 1 content words. The
//      sign of the requested change gates the move: asking for more detail
//      never removes words and asking for less never adds any. Zero change
//      keeps the content words as they are. Words are added from a per-source
//      pool, then from the scene description, then from a generic pool, and
//      removed lowest priority first (generic words, then plain content,
//      then sound words, then the sound's source).
//   3. Expressiveness budget, same scheme: m modifiers read as 1 + 3m, so a
//      target T asks for round((T - 1) / 3) modifiers from a per-source pool.
class MockBackend final : public Backend {
public:
    std::string transform(const TransformRequest& req) override;
    Estimate estimate(std::string_view caption_text, const std::optional<std::string>& scene_context) override;
    PreferenceIntent interpret_preference(std::string_view utterance, const ViewerPrefs& current) override;
    BackendKind kind() const override { return BackendKind::DeterministicMock; }
};

namespace mock {

// Words that are neither stopwords nor expressive modifiers. Brackets are
// ignored.
int content_word_count(std::string_view caption_text);
// Words drawn from the expressive modifier lexicon.
int modifier_count(std::string_view caption_text);

bool is_stopword(std::string_view lowercase_word);
bool is_modifier(std::string_view lowercase_word);

} // namespace mock

} // namespace captune
