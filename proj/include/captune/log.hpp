#pragma once

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string_view>

// Structured JSON-lines logging: one object per line with "level", "event" and
// any extra fields.
namespace captune::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

std::optional<Level> parse_level(std::string_view s);

void set_level(Level level);
Level level();

// Defaults to std::cerr. The stream must outlive all logging calls.
void set_sink(std::ostream* sink);

void write(Level level, std::string_view event, const nlohmann::json& fields = nlohmann::json::object());

inline void debug(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
    write(Level::Debug, event, fields);
}
inline void info(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
    write(Level::Info, event, fields);
}
inline void warn(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
    write(Level::Warn, event, fields);
}
inline void error(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
    write(Level::Error, event, fields);
}

} // namespace captune::log
