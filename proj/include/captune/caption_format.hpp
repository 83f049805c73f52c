#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace captune {

using Millis = std::chrono::milliseconds;

enum class CueKind { Speech, Nsi };

enum class NsiCategory { CharacterSound, Music, EnvironmentSound, Paralinguistic, Other };

std::string_view to_string(CueKind kind);
std::string_view to_string(NsiCategory category);
std::optional<CueKind> parse_cue_kind(std::string_view s);
std::optional<NsiCategory> parse_nsi_category(std::string_view s);

struct NsiTag {
    CueKind kind = CueKind::Speech;
    std::optional<NsiCategory> category; // set iff kind == Nsi

    bool operator==(const NsiTag&) const = default;
};

struct CaptionCue {
    int index = 1;
    Millis start{0};
    Millis end{0};
    std::string text; // lines joined with '\n'
    CueKind kind = CueKind::Speech;
    std::optional<NsiCategory> category;
    bool locked = false;

    bool is_nsi() const { return kind == CueKind::Nsi; }
    bool operator==(const CaptionCue&) const = default;
};

struct CaptionTrack {
    std::vector<CaptionCue> cues;
    std::string source_name;

    const CaptionCue* find(int index) const;
    CaptionCue* find(int index);
    std::size_t nsi_count() const;

    bool operator==(const CaptionTrack&) const = default;
};

// A bracket pair that wraps a whole NSI caption: "[...]" or "(...)".
struct Wrapper {
    char open = '[';
    char close = ']';

    bool operator==(const Wrapper&) const = default;
};

// Splits a fully wrapped caption into its wrapper and inner text. Returns
// nullopt when the trimmed text is not wrapped end to end by one pair.
struct WrappedText {
    Wrapper wrapper;
    std::string inner;
};
std::optional<WrappedText> split_wrapper(std::string_view text);

// Classifies a caption. Only a bracket pair spanning the entire trimmed text
// marks NSI; inline brackets inside dialogue stay Speech.
NsiTag detect_nsi(std::string_view cue_text);

struct ParseWarning {
    int line = 0;
    std::string message;
};

struct ParseOptions {
    bool lenient = false; // skip malformed cues instead of failing
    std::string source_name;
};

struct ParseResult {
    CaptionTrack track;
    std::vector<ParseWarning> warnings;
};

// Throws captune::Error with EmptyFile, MalformedTimestamp, MalformedCue or
// NonMonotonicCue; details always carry "line".
CaptionTrack parse_srt(std::string_view input, const ParseOptions& options = {});
ParseResult parse_srt_with_warnings(std::string_view input, const ParseOptions& options = {});

enum class LineEnding { Lf, CrLf };

std::string serialize_srt(const CaptionTrack& track, LineEnding eol = LineEnding::Lf);

// "HH:MM:SS,mmm"
std::string format_timestamp(Millis t);
std::optional<Millis> parse_timestamp(std::string_view s);

} // namespace captune
