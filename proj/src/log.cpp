#include "captune/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace captune::log {

namespace {

std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;
std::ostream* g_sink = &std::cerr;

std::string_view name(Level l) {
    switch (l) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
    }
    return "info";
}

} // namespace

std::optional<Level> parse_level(std::string_view s) {
    for (auto l : {Level::Debug, Level::Info, Level::Warn, Level::Error}) {
        if (name(l) == s) return l;
    }
    return std::nullopt;
}

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void set_sink(std::ostream* sink) {
    std::lock_guard lock(g_mutex);
    g_sink = sink ? sink : &std::cerr;
}

void write(Level lvl, std::string_view event, const nlohmann::json& fields) {
    if (lvl < g_level.load()) return;
    nlohmann::json line = {{"level", name(lvl)}, {"event", event}};
    if (fields.is_object()) {
        for (const auto& [k, v] : fields.items()) line[k] = v;
    }
    const std::string text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    std::lock_guard lock(g_mutex);
    *g_sink << text << '\n';
    g_sink->flush();
}

} // namespace captune::log
