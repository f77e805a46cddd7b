#pragma once

// Configuration documents. JSON is read with nlohmann::json; TOML is read by a small
// parser covering the subset used by experiment configs: tables, dotted keys, strings,
// integers, floats (including inf/nan), booleans, arrays and inline tables.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace phmc {

/// Parses TOML text into a JSON object. Throws ConfigError with "line N" on bad input.
nlohmann::json parse_toml(const std::string& text);

/// Loads a config by extension: .toml as TOML, anything else as JSON.
nlohmann::json load_config(const std::filesystem::path& path);

}  // namespace phmc
