#include "captune/text_util.hpp"

#include <algorithm>
#include <cctype>

namespace captune::text {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) || c == '\'' || c == '-';
}

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

} // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (prefix.size() > s.size()) return false;
    return to_lower(s.substr(0, prefix.size())) == to_lower(prefix);
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool is_all_caps(std::string_view s) {
    bool any = false;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::islower(u)) return false;
        if (std::isupper(u)) any = true;
    }
    return any;
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_word_char(c)) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    // Strip hyphens/apostrophes hanging off either end ("--", "'tis").
    for (auto& w : out) {
        while (!w.empty() && (w.front() == '-' || w.front() == '\'')) w.erase(w.begin());
        while (!w.empty() && (w.back() == '-' || w.back() == '\'')) w.pop_back();
    }
    std::erase_if(out, [](const std::string& w) { return w.empty(); });
    return out;
}

bool inflection_of(std::string_view token, std::string_view stem) {
    if (stem.empty() || token.size() < stem.size()) return false;
    if (token == stem) return true;
    auto has_suffix = [&](std::string_view base, std::string_view suffix) {
        return token.size() == base.size() + suffix.size() && token.substr(0, base.size()) == base &&
               token.substr(base.size()) == suffix;
    };
    for (std::string_view suffix : {"s", "es", "ed", "d", "ing", "er", "ers", "y"}) {
        if (has_suffix(stem, suffix)) return true;
    }
    if (stem.back() == 'e') {
        const auto base = stem.substr(0, stem.size() - 1);
        if (has_suffix(base, "ing") || has_suffix(base, "y")) return true;
    }
    // slam -> slamming, thud -> thudded
    const bool cvc = stem.size() >= 3 && !is_vowel(stem.back()) && is_vowel(stem[stem.size() - 2]);
    if (cvc && token.size() > stem.size() + 1 && token.substr(0, stem.size()) == stem &&
        token[stem.size()] == stem.back()) {
        const auto tail = token.substr(stem.size() + 1);
        return tail == "ing" || tail == "ed" || tail == "er" || tail == "y";
    }
    return false;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto nl = s.find('\n', pos);
        if (nl == std::string_view::npos) {
            out.emplace_back(s.substr(pos));
            break;
        }
        out.emplace_back(s.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

} // namespace captune::text
