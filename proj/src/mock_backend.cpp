#include "captune/mock_backend.hpp"

#include "captune/caption_format.hpp"
#include "captune/error.hpp"
#include "captune/text_util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cctype>
#include <regex>
#include <set>
#include <span>

namespace captune {

namespace {

// ─── Word tables ─────────────────────────────────────────────────────────────

const std::set<std::string, std::less<>> kStopwords = {
    "a",    "an",   "the",  "of",     "with",  "from",    "in",    "on",      "at",     "to",   "into",
    "onto", "over", "across", "through", "and", "or",     "as",    "by",      "for",    "its",  "it",
    "is",   "are",  "her",  "his",    "their", "off",     "up",    "down",    "out",    "away", "around",
    "near", "under", "behind", "against", "then", "while", "that", "this",   "after",  "before", "upon",
    "beyond", "throughout", "again"};

// Expressive modifiers. Kept disjoint from stopwords and from the sensory
// descriptors and genre adjectives below.
const std::set<std::string, std::less<>> kModifiers = {
    "violently",  "intensely",   "crashing",     "echoing",     "menacingly",   "ominously",   "thunderously",
    "fiercely",   "furiously",   "dramatically", "wildly",      "relentlessly", "haunting",    "hauntingly",
    "eerily",     "sharply",     "harshly",      "mournfully",  "sorrowfully",  "sorrow",      "sorrowful",
    "cautious",   "weary",       "persistent",   "chilling",    "booming",      "thunderous",  "frantic",
    "frantically", "desperate",  "desperately",  "gentle",      "gently",       "tender",      "tenderly",
    "joyful",     "joyfully",    "playful",      "playfully",   "mysterious",   "mysteriously", "sinister",
    "ominous",    "sinuous",     "lively",       "happy",       "majestic",     "triumphant",  "triumphantly",
    "forcefully", "abruptly",    "howling",      "pounding",    "hypnotically", "plaintively", "longingly",
    "soaringly",  "excitedly",   "cheerfully",   "gleefully",   "vividly",      "weak",        "violent",
    "dramatic",   "fierce",      "furious",      "eerie",       "scary"};

constexpr std::array<std::string_view, 3> kGenericStems = {"sound", "noise", "audio"};

// Things that make sounds.
constexpr std::array<std::string_view, 36> kSourceStems = {
    "cat",   "kitten", "dog",   "puppy", "dolphin", "bird",  "door",   "thunder", "wind",   "rain",
    "storm", "piano",  "guitar", "violin", "music",  "car",  "engine", "phone",   "bell",   "glass",
    "water", "crowd",  "baby",  "man",   "woman",   "fire",  "clock",  "kettle",  "owl",    "wolf",
    "horse", "cow",    "train", "alarm", "orchestra", "footstep"};

// What the sound itself is doing.
constexpr std::array<std::string_view, 40> kSoundStems = {
    "creak",  "slam",  "knock",  "crash",  "rumble", "whistle", "meow",   "purr",   "bark",    "growl",
    "hiss",   "chirp", "squeak", "roar",   "laugh",  "sigh",    "gasp",   "scream", "howl",    "ring",
    "tick",   "splash", "drip",  "crackle", "bang",  "thud",    "click",  "buzz",   "beep",    "rustle",
    "whimper", "pant", "clang",  "clatter", "shatter", "blow",  "hum",    "play",   "rise",    "patter"};

struct SourceOfSound {
    std::string_view sound;
    std::string_view source;
};
constexpr std::array<SourceOfSound, 14> kSoundSources = {{{"creak", "door"},
                                                         {"slam", "door"},
                                                         {"knock", "door"},
                                                         {"meow", "cat"},
                                                         {"purr", "cat"},
                                                         {"bark", "dog"},
                                                         {"growl", "dog"},
                                                         {"chirp", "bird"},
                                                         {"ring", "phone"},
                                                         {"tick", "clock"},
                                                         {"splash", "water"},
                                                         {"drip", "water"},
                                                         {"crackle", "fire"},
                                                         {"whistle", "kettle"}}};

// A source whose characteristic sound is a different word.
constexpr std::array<SourceOfSound, 8> kImpliedSounds = {{{"whistle", "dolphin"},
                                                         {"meow", "cat"},
                                                         {"meow", "kitten"},
                                                         {"bark", "dog"},
                                                         {"bark", "puppy"},
                                                         {"creak", "door"},
                                                         {"chirp", "bird"},
                                                         {"crackle", "fire"}}};

struct Onomatopoeia {
    std::string_view stem;
    std::array<std::string_view, 2> words; // second may be empty
};
constexpr std::array<Onomatopoeia, 26> kOnomatopoeia = {{{"thunder", {"BOOM!", ""}},
                                                      {"storm", {"BOOM!", ""}},
                                                      {"explosion", {"KABOOM!", ""}},
                                                      {"door", {"CREAK", ""}},
                                                      {"creak", {"CREAK", ""}},
                                                      {"slam", {"BAM!", ""}},
                                                      {"knock", {"KNOCK,", "KNOCK!"}},
                                                      {"wind", {"WHOOSH", ""}},
                                                      {"rain", {"PITTER-PATTER", ""}},
                                                      {"meow", {"MEOW!", ""}},
                                                      {"cat", {"MEOW!", ""}},
                                                      {"purr", {"PRRR", ""}},
                                                      {"dog", {"WOOF!", ""}},
                                                      {"bark", {"WOOF!", ""}},
                                                      {"whistle", {"WHEEE", ""}},
                                                      {"dolphin", {"EEK-EEK!", ""}},
                                                      {"gunshot", {"BANG!", ""}},
                                                      {"bang", {"BANG!", ""}},
                                                      {"glass", {"CRASH!", ""}},
                                                      {"crash", {"CRASH!", ""}},
                                                      {"footstep", {"THUD,", "THUD"}},
                                                      {"splash", {"SPLASH!", ""}},
                                                      {"bell", {"DING!", ""}},
                                                      {"ring", {"RING,", "RING!"}},
                                                      {"laugh", {"HA-HA!", ""}},
                                                      {"clock", {"TICK-TOCK", ""}}}};

struct Sensory {
    std::string_view stem;
    std::array<std::string_view, 2> descriptor; // second may be empty
    std::array<std::string_view, 2> replacement;
};
constexpr std::array<Sensory, 16> kSensory = {{
    {"whistle", {"high-pitched", ""}, {"whistling", ""}},
    {"thunder", {"deep,", "low"}, {"rumbling", "thunder"}},
    {"rumble", {"deep,", "low"}, {"rumbling", ""}},
    {"creak", {"slow,", "grating"}, {"creaking", ""}},
    {"wind", {"hollow,", "airy"}, {"whooshing", "wind"}},
    {"rain", {"soft,", "steady"}, {"pattering", "rain"}},
    {"meow", {"thin,", "high"}, {"meowing", ""}},
    {"purr", {"soft,", "vibrating"}, {"purring", ""}},
    {"piano", {"bright,", "ringing"}, {"piano", "notes"}},
    {"music", {"warm,", "resonant"}, {"music", ""}},
    {"bark", {"sharp,", "loud"}, {"barking", ""}},
    {"knock", {"dull,", "hollow"}, {"knocking", ""}},
    {"crash", {"sharp,", "splintering"}, {"crash", ""}},
    {"slam", {"heavy,", "jarring"}, {"slam", ""}},
    {"crackle", {"dry,", "popping"}, {"crackling", ""}},
    {"chirp", {"bright,", "tinny"}, {"chirping", ""}},
}};

struct GenreAdjective {
    std::string_view genre;
    std::string_view adjective;
};
constexpr std::array<GenreAdjective, 14> kGenreAdjectives = {{{"horror", "menacing"},
                                                            {"animat", "whimsical"},
                                                            {"cartoon", "whimsical"},
                                                            {"fantasy", "mystical"},
                                                            {"sci-fi", "otherworldly"},
                                                            {"science fiction", "otherworldly"},
                                                            {"thriller", "tense"},
                                                            {"comedy", "comic"},
                                                            {"documentary", "natural"},
                                                            {"nature", "natural"},
                                                            {"drama", "somber"},
                                                            {"action", "explosive"},
                                                            {"romance", "romantic"},
                                                            {"musical", "melodic"}}};
constexpr std::string_view kDefaultGenreAdjective = "cinematic";

// Detail extension units, one countable word each.
struct DetailPool {
    std::string_view stem;
    std::array<std::string_view, 8> units;
};
constexpr std::array<DetailPool, 10> kDetailPools = {{
    {"thunder", {"rolling", "overhead", "across the sky", "through the storm", "rattling", "the windows", "after lightning", "deep"}},
    {"storm", {"rolling", "overhead", "across the sky", "through the storm", "rattling", "the windows", "after lightning", "deep"}},
    {"door", {"wooden", "shut", "behind her", "on rusty", "hinges", "in the hallway", "heavily", "frame"}},
    {"wind", {"gusting", "outside", "through the trees", "around the house", "cold", "night", "branches", "swaying"}},
    {"rain", {"falling", "steadily", "on the roof", "against the window", "puddles", "gutters", "outside", "heavy"}},
    {"cat", {"small", "stray", "in the alley", "near the bins", "hungry", "orange", "tabby", "nearby"}},
    {"meow", {"small", "stray", "cat", "in the alley", "near the bins", "hungry", "orange", "nearby"}},
    {"purr", {"small", "cat", "contented", "curled", "on the blanket", "close", "warm", "steady"}},
    {"piano", {"melody", "slow", "notes", "rising", "tempo", "in the background", "keys", "soft"}},
    {"music", {"melody", "slow", "instrumental", "rising", "tempo", "in the background", "strings", "soft"}},
}};
constexpr std::array<std::string_view, 14> kGenericDetailUnits = {
    "nearby",  "outside", "continuing", "in the background", "growing", "louder",      "closer",
    "fading",  "steady",  "off-screen", "beyond the walls",  "throughout the scene", "repeating", "distant"};

struct ModifierPool {
    std::string_view stem;
    std::array<std::string_view, 5> words;
};
constexpr std::array<ModifierPool, 12> kModifierPools = {{
    {"thunder", {"crashing", "intensely", "violently", "ominously", "relentlessly"}},
    {"storm", {"crashing", "intensely", "violently", "ominously", "relentlessly"}},
    {"door", {"sharply", "forcefully", "abruptly", "harshly", "echoing"}},
    {"wind", {"howling", "eerily", "relentlessly", "mournfully", "fiercely"}},
    {"rain", {"pounding", "relentlessly", "hypnotically", "gently", "mournfully"}},
    {"cat", {"plaintively", "tenderly", "desperately", "longingly", "mournfully"}},
    {"meow", {"plaintively", "tenderly", "desperately", "longingly", "mournfully"}},
    {"purr", {"tenderly", "gently", "longingly", "plaintively", "mournfully"}},
    {"piano", {"hauntingly", "tenderly", "soaringly", "mournfully", "triumphantly"}},
    {"music", {"hauntingly", "tenderly", "soaringly", "mournfully", "triumphantly"}},
    {"whistle", {"playfully", "joyfully", "excitedly", "cheerfully", "gleefully"}},
    {"dolphin", {"playfully", "joyfully", "excitedly", "cheerfully", "gleefully"}},
}};
constexpr std::array<std::string_view, 5> kDefaultModifiers = {"intensely", "dramatically", "vividly", "hauntingly",
                                                               "relentlessly"};

// ─── Tokens ──────────────────────────────────────────────────────────────────

enum class Role { Source, Onomatopoeia, Sound, Descriptor, Content, Generic, Stop, Modifier };

bool countable(Role r) { return r != Role::Stop && r != Role::Modifier; }

int priority(Role r) {
    switch (r) {
        case Role::Source: return 5;
        case Role::Onomatopoeia: return 4;
        case Role::Sound: return 3;
        case Role::Descriptor: return 2;
        case Role::Content: return 1;
        default: return 0;
    }
}

struct Token {
    std::string display;
    std::string key; // lowercase, punctuation stripped
    Role role;
    int original_pos = -1; // word index in the source caption, -1 if inserted
};

template <std::size_t N>
bool matches_any(std::string_view key, const std::array<std::string_view, N>& stems) {
    return std::any_of(stems.begin(), stems.end(), [&](std::string_view s) { return text::inflection_of(key, s); });
}

std::string key_of(std::string_view display) {
    auto ws = text::words(display);
    return ws.empty() ? std::string{} : text::to_lower(ws.front());
}

Role classify(std::string_view key) {
    if (kStopwords.contains(key)) return Role::Stop;
    if (kModifiers.contains(key)) return Role::Modifier;
    if (matches_any(key, kGenericStems)) return Role::Generic;
    if (matches_any(key, kSourceStems)) return Role::Source;
    if (matches_any(key, kSoundStems)) return Role::Sound;
    return Role::Content;
}

Token make_token(std::string_view display, std::optional<Role> role = std::nullopt) {
    Token t;
    t.display = std::string(display);
    t.key = key_of(display);
    t.role = role.value_or(classify(t.key));
    return t;
}

std::vector<Token> tokenize(std::string_view inner) {
    std::vector<Token> out;
    for (const auto& w : text::words(inner)) {
        Token t = make_token(w);
        t.original_pos = static_cast<int>(out.size());
        out.push_back(std::move(t));
    }
    return out;
}

int count_countable(const std::vector<Token>& tokens) {
    return static_cast<int>(std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return countable(t.role); }));
}

int count_modifiers(const std::vector<Token>& tokens) {
    return static_cast<int>(
        std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.role == Role::Modifier; }));
}

bool has_key(const std::vector<Token>& tokens, std::string_view key) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const Token& t) { return t.key == key; });
}

// First stem from `table` (via `stem_of`) matched by any token, scanning tokens in order.
template <typename Table, typename StemOf>
auto first_match(const std::vector<Token>& tokens, const Table& table, StemOf stem_of)
    -> std::optional<std::pair<std::size_t, const typename Table::value_type*>> {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (const auto& entry : table) {
            if (text::inflection_of(tokens[i].key, stem_of(entry))) return std::pair{i, &entry};
        }
    }
    return std::nullopt;
}

void drop_generic(std::vector<Token>& tokens) {
    std::erase_if(tokens, [](const Token& t) { return t.role == Role::Generic; });
}

// ─── Representation and genre rewrites ───────────────────────────────────────

void rewrite_source_focused(std::vector<Token>& tokens) {
    drop_generic(tokens);
    auto src = std::find_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.role == Role::Source; });
    if (src != tokens.end()) {
        // Adjectives directly in front of the source travel with it.
        auto first = src;
        while (first != tokens.begin()) {
            const Role r = std::prev(first)->role;
            if (r != Role::Content && r != Role::Descriptor && r != Role::Modifier) break;
            --first;
        }
        std::vector<Token> phrase(first, std::next(src));
        tokens.erase(first, std::next(src));
        tokens.insert(tokens.begin(), phrase.begin(), phrase.end());
        return;
    }
    if (auto hit = first_match(tokens, kSoundSources, [](const SourceOfSound& s) { return s.sound; })) {
        tokens.insert(tokens.begin(), make_token(hit->second->source, Role::Source));
    }
}

void insert_after_onomatopoeia(std::vector<Token>& tokens, std::vector<Token> insert) {
    auto pos = std::find_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.role != Role::Onomatopoeia; });
    tokens.insert(pos, std::make_move_iterator(insert.begin()), std::make_move_iterator(insert.end()));
}

void rewrite_onomatopoeia(std::vector<Token>& tokens) {
    auto hit = first_match(tokens, kOnomatopoeia, [](const Onomatopoeia& o) { return o.stem; });
    if (!hit) return;
    drop_generic(tokens);
    std::vector<Token> prefix;
    for (auto w : hit->second->words) {
        if (!w.empty()) prefix.push_back(make_token(w, Role::Onomatopoeia));
    }
    tokens.insert(tokens.begin(), prefix.begin(), prefix.end());
}

void rewrite_sensory(std::vector<Token>& tokens) {
    auto stem_of = [](const Sensory& s) { return s.stem; };
    std::optional<std::size_t> at;
    const Sensory* entry = nullptr;
    for (std::size_t i = 0; i < tokens.size() && !entry; ++i) {
        if (tokens[i].role != Role::Sound && tokens[i].role != Role::Source) continue;
        for (const auto& s : kSensory) {
            if (text::inflection_of(tokens[i].key, stem_of(s))) {
                at = i;
                entry = &s;
                break;
            }
        }
    }
    if (!entry) {
        // A source with a characteristic sound: describe that sound instead.
        for (std::size_t i = 0; i < tokens.size() && !entry; ++i) {
            for (const auto& implied : kImpliedSounds) {
                if (!text::inflection_of(tokens[i].key, implied.source)) continue;
                for (const auto& s : kSensory) {
                    if (s.stem == implied.sound) {
                        at = i;
                        entry = &s;
                        break;
                    }
                }
                if (entry) break;
            }
        }
    }
    if (!entry) return;

    std::vector<Token> replacement;
    for (auto w : entry->descriptor) {
        if (!w.empty()) replacement.push_back(make_token(w, Role::Descriptor));
    }
    for (auto w : entry->replacement) {
        if (!w.empty()) replacement.push_back(make_token(w));
    }
    std::vector<Token> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i == *at) {
            out.insert(out.end(), replacement.begin(), replacement.end());
            continue;
        }
        const Token& t = tokens[i];
        if (t.role == Role::Generic) continue;
        const bool implies_sound = std::any_of(kImpliedSounds.begin(), kImpliedSounds.end(), [&](const SourceOfSound& s) {
            return text::inflection_of(t.key, s.source);
        });
        if (t.role == Role::Source && implies_sound) continue;
        if (has_key(replacement, t.key)) continue;
        out.push_back(t);
    }
    tokens = std::move(out);
}

void rewrite_genre(std::vector<Token>& tokens, std::string_view genre) {
    std::string_view adjective = kDefaultGenreAdjective;
    for (const auto& g : kGenreAdjectives) {
        if (text::contains_ci(genre, g.genre)) {
            adjective = g.adjective;
            break;
        }
    }
    if (has_key(tokens, adjective)) return;
    insert_after_onomatopoeia(tokens, {make_token(adjective, Role::Descriptor)});
}

// ─── Budgets ─────────────────────────────────────────────────────────────────

int detail_budget(int current, double target, double delta) {
    const int ideal = std::max(1, static_cast<int>(std::lround(target)) - 1);
    if (delta > 0) return std::max(current, ideal);
    if (delta < 0) return std::min(current, ideal);
    return current;
}

int modifier_budget(int current, double target, double delta) {
    const int ideal = std::clamp(static_cast<int>(std::lround((target - kValueMin) / 3.0)), 0, 5);
    if (delta > 0) return std::max(current, ideal);
    if (delta < 0) return std::min(current, ideal);
    return current;
}

void reduce_content(std::vector<Token>& tokens, int keep) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (countable(tokens[i].role)) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return priority(tokens[a].role) > priority(tokens[b].role); });
    std::vector<bool> kept(tokens.size(), false);
    for (std::size_t k = 0; k < order.size() && static_cast<int>(k) < keep; ++k) kept[order[k]] = true;

    std::vector<Token> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].role == Role::Modifier || kept[i]) out.push_back(tokens[i]);
    }
    tokens = std::move(out);
}

std::vector<Token> unit_tokens(std::string_view unit) {
    std::vector<Token> out;
    for (const auto& w : text::words(unit)) out.push_back(make_token(w));
    return out;
}

void extend_content(std::vector<Token>& tokens, int target, const std::optional<std::string>& scene) {
    std::vector<std::vector<Token>> units;
    if (auto hit = first_match(tokens, kDetailPools, [](const DetailPool& p) { return p.stem; })) {
        for (auto u : hit->second->units) units.push_back(unit_tokens(u));
    }
    if (scene) {
        for (const auto& w : text::words(*scene)) {
            Token t = make_token(text::to_lower(w));
            if (countable(t.role)) units.push_back({std::move(t)});
        }
    }
    for (auto u : kGenericDetailUnits) units.push_back(unit_tokens(u));

    int have = count_countable(tokens);
    for (auto& unit : units) {
        if (have >= target) break;
        auto word = std::find_if(unit.begin(), unit.end(), [](const Token& t) { return countable(t.role); });
        if (word == unit.end() || has_key(tokens, word->key)) continue;
        tokens.insert(tokens.end(), unit.begin(), unit.end());
        have += count_countable(unit);
    }
}

std::span<const std::string_view> modifier_pool(const std::vector<Token>& tokens) {
    if (auto hit = first_match(tokens, kModifierPools, [](const ModifierPool& p) { return p.stem; })) {
        return hit->second->words;
    }
    return kDefaultModifiers;
}

void adjust_modifiers(std::vector<Token>& tokens, int target) {
    int have = count_modifiers(tokens);
    while (have > target) {
        auto it = std::find_if(tokens.rbegin(), tokens.rend(), [](const Token& t) { return t.role == Role::Modifier; });
        tokens.erase(std::next(it).base());
        --have;
    }
    if (have >= target) return;
    for (auto word : modifier_pool(tokens)) {
        if (have >= target) break;
        if (has_key(tokens, word)) continue;
        tokens.push_back(make_token(word, Role::Modifier));
        ++have;
    }
}

std::string assemble(const std::vector<Token>& tokens, bool all_caps) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string word = tokens[i].display;
        // The original's sentence-case capital does not travel with its word.
        if (tokens[i].original_pos == 0 && i > 0 && !text::is_all_caps(word)) {
            word[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(word[0])));
        }
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    if (all_caps) return text::to_upper(out);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string inner_text(std::string_view caption) {
    if (auto w = split_wrapper(caption)) return w->inner;
    return std::string(text::trim(caption));
}

// ─── Preference rules ────────────────────────────────────────────────────────

bool any_phrase(const std::string& s, std::initializer_list<std::string_view> phrases) {
    return std::any_of(phrases.begin(), phrases.end(), [&](std::string_view p) { return s.find(p) != std::string::npos; });
}

} // namespace

namespace mock {

bool is_stopword(std::string_view w) { return kStopwords.contains(w); }
bool is_modifier(std::string_view w) { return kModifiers.contains(w); }

int content_word_count(std::string_view caption_text) {
    int n = 0;
    for (const auto& w : text::words(inner_text(caption_text))) {
        const auto k = text::to_lower(w);
        if (!is_stopword(k) && !is_modifier(k)) ++n;
    }
    return n;
}

int modifier_count(std::string_view caption_text) {
    int n = 0;
    for (const auto& w : text::words(inner_text(caption_text))) {
        if (is_modifier(text::to_lower(w))) ++n;
    }
    return n;
}

} // namespace mock

std::string MockBackend::transform(const TransformRequest& req) {
    if (is_identity(req)) return req.original_text;
    const auto wrapped = split_wrapper(req.original_text);
    const Wrapper wrapper = wrapped ? wrapped->wrapper : Wrapper{};
    const std::string inner = wrapped ? wrapped->inner : std::string(text::trim(req.original_text));

    std::vector<Token> tokens = tokenize(inner);
    if (tokens.empty()) return req.original_text;

    switch (req.representation) {
        case SoundRepresentation::Default: break;
        case SoundRepresentation::SourceFocused: rewrite_source_focused(tokens); break;
        case SoundRepresentation::Onomatopoeia: rewrite_onomatopoeia(tokens); break;
        case SoundRepresentation::SensoryQuality: rewrite_sensory(tokens); break;
    }
    if (req.genre_aligned) rewrite_genre(tokens, req.metadata.genre);

    const int words_now = count_countable(tokens);
    const int words_wanted = detail_budget(words_now, req.target_values.detail, req.detail.delta);
    if (words_wanted < words_now) {
        reduce_content(tokens, words_wanted);
    } else if (words_wanted > words_now) {
        extend_content(tokens, words_wanted, req.scene_context);
    }

    const int mods_wanted =
        modifier_budget(count_modifiers(tokens), req.target_values.expressiveness, req.expressiveness.delta);
    adjust_modifiers(tokens, mods_wanted);

    std::string out(1, wrapper.open);
    out += assemble(tokens, text::is_all_caps(inner));
    out.push_back(wrapper.close);
    return out;
}

Estimate MockBackend::estimate(std::string_view caption_text, const std::optional<std::string>&) {
    if (text::trim(caption_text).empty()) {
        throw Error(ErrorCode::PreconditionViolated, "cannot estimate an empty caption");
    }
    Estimate e;
    e.detail = std::clamp(1.0 + mock::content_word_count(caption_text), kValueMin, kValueMax);
    e.expressiveness = std::clamp(1.0 + 3.0 * mock::modifier_count(caption_text), kValueMin, kValueMax);
    return e;
}

PreferenceIntent MockBackend::interpret_preference(std::string_view utterance, const ViewerPrefs&) {
    const std::string s = text::to_lower(utterance);
    PreferenceIntent intent;
    std::vector<std::string> parts;

    const bool less_detail = any_phrase(s, {"brief", "short", "less detail", "fewer words", "simpler", "concise",
                                            "minimal", "too long", "too much detail"});
    const bool more_detail = any_phrase(s, {"more detail", "better sense", "more information", "more descriptive",
                                            "describe more", "richer", "more context", "more detailed"});
    if (less_detail != more_detail) {
        intent.detail_delta = less_detail ? -2.0 : 2.0;
        parts.emplace_back(less_detail ? "lower Level of Detail" : "higher Level of Detail");
    }

    const bool more_expr = any_phrase(s, {"more expressive", "more dramatic", "more emotional", "more vivid",
                                          "more evocative", "more feeling", "more exciting"});
    const bool less_expr = any_phrase(s, {"less expressive", "less dramatic", "plain", "neutral", "straightforward",
                                          "less emotional", "toned down", "tone it down"});
    if (more_expr != less_expr) {
        intent.expressiveness_delta = more_expr ? 2.0 : -2.0;
        parts.emplace_back(more_expr ? "higher Expressiveness" : "lower Expressiveness");
    }

    static const std::regex sounds_like(R"(what\b.*\bsounds?\s+like)");
    if (any_phrase(s, {"what is making", "what's making", "who is making", "what makes", "where the sound", "source"})) {
        intent.representation = SoundRepresentation::SourceFocused;
    } else if (std::regex_search(s, sounds_like) || any_phrase(s, {"sensory", "pitch", "texture"})) {
        intent.representation = SoundRepresentation::SensoryQuality;
    } else if (any_phrase(s, {"onomatopoeia", "sound effect words", "like a comic"})) {
        intent.representation = SoundRepresentation::Onomatopoeia;
    } else if (any_phrase(s, {"default representation", "normal captions", "original style"})) {
        intent.representation = SoundRepresentation::Default;
    }
    if (intent.representation) {
        parts.push_back(std::string(display_name(*intent.representation)) + " sound representation");
    }

    if (any_phrase(s, {"don't match", "do not match", "no genre", "turn off genre", "without genre", "genre off"})) {
        intent.genre_aligned = false;
        parts.emplace_back("genre alignment off");
    } else if (any_phrase(s, {"match the movie", "match the genre", "match the film", "match the video",
                               "fit the mood", "match the mood", "genre"})) {
        intent.genre_aligned = true;
        parts.emplace_back("genre alignment on");
    }

    if (parts.empty()) {
        intent.explanation =
            "I couldn't tell which caption setting to change. You can ask for more or less detail, more or less "
            "expressive captions, a way of representing sounds (source, onomatopoeia, sensory qualities), or "
            "captions that match the video's genre.";
        return intent;
    }
    intent.explanation = "Interpreted as: ";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) intent.explanation += ", ";
        intent.explanation += parts[i];
    }
    intent.explanation += ".";
    return intent;
}

} // namespace captune
