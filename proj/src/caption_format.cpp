#include "captune/caption_format.hpp"

#include "captune/error.hpp"
#include "captune/text_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace captune {

namespace {

constexpr std::string_view kUtf8Bom = "\xEF\xBB\xBF";

// Keyword stems per category, matched with text::inflection_of.
constexpr auto kMusicStems = std::to_array<std::string_view>({
    "music", "musical", "song", "sing", "singing", "melody", "piano", "guitar", "violin",
    "orchestra", "orchestral", "tune", "hum", "chorus", "drum", "choir", "symphony", "synth", "harp",
    "flute", "trumpet", "score", "lullaby", "jingle"});

constexpr auto kParalinguisticStems = std::to_array<std::string_view>({
    "whisper", "sarcastically", "mockingly", "mumble", "stammer", "stutter", "sarcastic"});

constexpr auto kCharacterStems = std::to_array<std::string_view>({
    "meow", "purr", "pant", "bark", "growl", "hiss", "whimper", "yelp", "chirp", "squeak",
    "roar", "laugh", "chuckle", "giggle", "sigh", "gasp", "scream", "cry", "cries", "sob", "cough",
    "sneeze", "snore", "groan", "grunt", "moan", "sniff", "sniffle", "yawn", "cat", "kitten", "dog",
    "puppy", "dolphin", "bird", "baby", "man", "woman", "child", "crowd", "cheer", "clap", "applause",
    "murmur", "shriek", "wail", "bleat", "moo", "neigh", "quack", "tweet", "hoot", "squeal", "snarl"});

constexpr auto kEnvironmentStems = std::to_array<std::string_view>({
    "thunder", "wind", "rain", "storm", "door", "slam", "creak", "crash", "knock", "bang",
    "rumble", "thud", "click", "ring", "beep", "buzz", "splash", "rustle", "footstep", "step", "car",
    "engine", "horn", "siren", "glass", "shatter", "water", "wave", "drip", "explosion", "explode",
    "gunshot", "gunfire", "clatter", "clang", "crackle", "fire", "boom", "whoosh", "swoosh", "traffic",
    "bell", "alarm", "phone", "static", "tick", "thump", "rattle", "squeal", "screech", "sound", "noise"});

template <std::size_t N>
int count_hits(const std::vector<std::string>& tokens, const std::array<std::string_view, N>& stems) {
    int hits = 0;
    for (const auto& tok : tokens) {
        for (auto stem : stems) {
            if (text::inflection_of(tok, stem)) {
                ++hits;
                break;
            }
        }
    }
    return hits;
}

// "[Name, adverb]" e.g. "[John, sarcastically]".
bool is_speaker_adverb(std::string_view inner) {
    const auto comma = inner.find(',');
    if (comma == std::string_view::npos || inner.find(',', comma + 1) != std::string_view::npos) return false;
    const auto name = text::words(inner.substr(0, comma));
    const auto manner = text::words(inner.substr(comma + 1));
    if (name.empty() || name.size() > 3 || manner.size() != 1) return false;
    for (const auto& w : name) {
        if (!std::isupper(static_cast<unsigned char>(w.front()))) return false;
    }
    const auto adverb = text::to_lower(manner.front());
    return adverb.size() > 3 && adverb.ends_with("ly");
}

NsiCategory categorize(std::string_view inner) {
    std::vector<std::string> tokens;
    for (auto& w : text::words(inner)) tokens.push_back(text::to_lower(w));

    if (count_hits(tokens, kMusicStems) > 0) return NsiCategory::Music;
    if (is_speaker_adverb(inner) || count_hits(tokens, kParalinguisticStems) > 0) {
        return NsiCategory::Paralinguistic;
    }
    const int character = count_hits(tokens, kCharacterStems);
    const int environment = count_hits(tokens, kEnvironmentStems);
    if (character == 0 && environment == 0) return NsiCategory::Other;
    return character >= environment ? NsiCategory::CharacterSound : NsiCategory::EnvironmentSound;
}

[[noreturn]] void fail(ErrorCode code, int line, const std::string& message, nlohmann::json extra = {}) {
    nlohmann::json details = {{"line", line}};
    if (extra.is_object()) details.update(extra);
    throw Error(code, fmt::format("line {}: {}", line, message), std::move(details));
}

bool is_blank(std::string_view line) { return text::trim(line).empty(); }

std::optional<int> parse_index(std::string_view s) {
    s = text::trim(s);
    if (s.empty() || s.size() > 9) return std::nullopt;
    int value = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        value = value * 10 + (c - '0');
    }
    if (value < 1) return std::nullopt;
    return value;
}

} // namespace

std::string_view to_string(CueKind kind) {
    return kind == CueKind::Nsi ? "Nsi" : "Speech";
}

std::string_view to_string(NsiCategory category) {
    switch (category) {
        case NsiCategory::CharacterSound: return "CharacterSound";
        case NsiCategory::Music: return "Music";
        case NsiCategory::EnvironmentSound: return "EnvironmentSound";
        case NsiCategory::Paralinguistic: return "Paralinguistic";
        case NsiCategory::Other: return "Other";
    }
    return "Other";
}

std::optional<CueKind> parse_cue_kind(std::string_view s) {
    if (s == "Nsi") return CueKind::Nsi;
    if (s == "Speech") return CueKind::Speech;
    return std::nullopt;
}

std::optional<NsiCategory> parse_nsi_category(std::string_view s) {
    for (auto c : {NsiCategory::CharacterSound, NsiCategory::Music, NsiCategory::EnvironmentSound,
                   NsiCategory::Paralinguistic, NsiCategory::Other}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

const CaptionCue* CaptionTrack::find(int index) const {
    auto it = std::find_if(cues.begin(), cues.end(), [&](const CaptionCue& c) { return c.index == index; });
    return it == cues.end() ? nullptr : &*it;
}

CaptionCue* CaptionTrack::find(int index) {
    return const_cast<CaptionCue*>(std::as_const(*this).find(index));
}

std::size_t CaptionTrack::nsi_count() const {
    return static_cast<std::size_t>(std::count_if(cues.begin(), cues.end(), [](const CaptionCue& c) { return c.is_nsi(); }));
}

std::optional<WrappedText> split_wrapper(std::string_view text) {
    const auto t = text::trim(text);
    if (t.size() < 2) return std::nullopt;
    Wrapper w;
    if (t.front() == '[' && t.back() == ']') {
        w = {'[', ']'};
    } else if (t.front() == '(' && t.back() == ')') {
        w = {'(', ')'};
    } else {
        return std::nullopt;
    }
    // The opening bracket must close at the very last character, so
    // "[door] and [wind]" is not a single wrap.
    int depth = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == w.open) {
            ++depth;
        } else if (t[i] == w.close) {
            --depth;
            if (depth == 0 && i + 1 != t.size()) return std::nullopt;
        }
    }
    if (depth != 0) return std::nullopt;
    return WrappedText{w, std::string(t.substr(1, t.size() - 2))};
}

NsiTag detect_nsi(std::string_view cue_text) {
    auto wrapped = split_wrapper(cue_text);
    if (!wrapped) return {CueKind::Speech, std::nullopt};
    return {CueKind::Nsi, categorize(wrapped->inner)};
}

std::optional<Millis> parse_timestamp(std::string_view s) {
    // HH:MM:SS,mmm
    if (s.size() != 12 || s[2] != ':' || s[5] != ':' || s[8] != ',') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    const auto h = digits(0, 2), m = digits(3, 2), sec = digits(6, 2), ms = digits(9, 3);
    if (!h || !m || !sec || !ms || *m > 59 || *sec > 59) return std::nullopt;
    return Millis{((static_cast<long long>(*h) * 60 + *m) * 60 + *sec) * 1000 + *ms};
}

std::string format_timestamp(Millis t) {
    const long long total = t.count();
    const long long ms = total % 1000;
    const long long s = (total / 1000) % 60;
    const long long m = (total / 60000) % 60;
    const long long h = total / 3600000;
    return fmt::format("{:02}:{:02}:{:02},{:03}", h, m, s, ms);
}

ParseResult parse_srt_with_warnings(std::string_view input, const ParseOptions& options) {
    if (input.starts_with(kUtf8Bom)) input.remove_prefix(kUtf8Bom.size());

    std::vector<std::string> lines = text::split_lines(input);
    for (auto& l : lines) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
    }
    if (std::all_of(lines.begin(), lines.end(), [](const std::string& l) { return is_blank(l); })) {
        fail(ErrorCode::EmptyFile, 1, "caption file contains no cues");
    }

    ParseResult result;
    result.track.source_name = options.source_name;

    std::size_t i = 0;
    const std::size_t n = lines.size();
    auto line_no = [](std::size_t idx) { return static_cast<int>(idx + 1); };

    while (i < n) {
        if (is_blank(lines[i])) {
            ++i;
            continue;
        }
        const std::size_t block_start = i;
        std::size_t block_end = i;
        while (block_end < n && !is_blank(lines[block_end])) ++block_end;

        try {
            const auto index = parse_index(lines[i]);
            if (!index) fail(ErrorCode::MalformedCue, line_no(i), fmt::format("expected cue number, got '{}'", lines[i]));
            if (i + 1 >= block_end) fail(ErrorCode::MalformedCue, line_no(i + 1), "missing timing line");

            const std::string& timing = lines[i + 1];
            const auto arrow = timing.find(" --> ");
            if (arrow == std::string::npos) {
                fail(ErrorCode::MalformedTimestamp, line_no(i + 1), fmt::format("expected 'start --> end', got '{}'", timing));
            }
            const auto start = parse_timestamp(text::trim(std::string_view(timing).substr(0, arrow)));
            const auto end = parse_timestamp(text::trim(std::string_view(timing).substr(arrow + 5)));
            if (!start || !end) {
                fail(ErrorCode::MalformedTimestamp, line_no(i + 1), fmt::format("timestamps must be HH:MM:SS,mmm, got '{}'", timing));
            }
            if (!(*start < *end)) {
                fail(ErrorCode::MalformedTimestamp, line_no(i + 1), "cue must end after it starts");
            }
            if (i + 2 >= block_end) fail(ErrorCode::MalformedCue, line_no(i + 2), "cue has no text");

            if (!result.track.cues.empty()) {
                const auto& prev = result.track.cues.back();
                if (*index <= prev.index || *start < prev.start) {
                    fail(ErrorCode::NonMonotonicCue, line_no(i),
                         fmt::format("cue {} does not follow cue {}", *index, prev.index), {{"index", *index}});
                }
            }

            CaptionCue cue;
            cue.index = *index;
            cue.start = *start;
            cue.end = *end;
            for (std::size_t k = i + 2; k < block_end; ++k) {
                if (!cue.text.empty()) cue.text.push_back('\n');
                cue.text += lines[k];
            }
            const auto tag = detect_nsi(cue.text);
            cue.kind = tag.kind;
            cue.category = tag.category;
            result.track.cues.push_back(std::move(cue));
        } catch (const Error& e) {
            if (!options.lenient) throw;
            result.warnings.push_back({e.line().value_or(line_no(block_start)), e.what()});
        }
        i = block_end;
    }
    return result;
}

CaptionTrack parse_srt(std::string_view input, const ParseOptions& options) {
    return parse_srt_with_warnings(input, options).track;
}

std::string serialize_srt(const CaptionTrack& track, LineEnding eol) {
    const std::string_view nl = eol == LineEnding::CrLf ? "\r\n" : "\n";
    std::string out;
    bool first = true;
    for (const auto& cue : track.cues) {
        if (!first) out += nl;
        first = false;
        out += std::to_string(cue.index);
        out += nl;
        out += format_timestamp(cue.start);
        out += " --> ";
        out += format_timestamp(cue.end);
        out += nl;
        for (const auto& line : text::split_lines(cue.text)) {
            out += line;
            out += nl;
        }
    }
    return out;
}

} // namespace captune
