#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialogcap/pipeline.hpp"

namespace dialogcap {

// Parses a config file into a JSON object. JSON is detected by a leading '{'
// (or a .json extension); anything else goes through the TOML reader, which
// supports the subset this tool needs: `key = value` pairs, one-level
// `[table]` sections, strings with the usual escapes, integers, floats,
// booleans, string arrays (multi-line allowed), and `#` comments.
// Throws ConfigError with a line reference on malformed input.
nlohmann::json parse_config_text(const std::string& text, const std::string& file_name);
nlohmann::json load_config_file(const std::string& path);

// Materializes a RunConfig: role defaults (questioner temperature 1.0,
// answerer/summarizer 0.0), chat_http auth default OPENAI_API_KEY, and the
// summarizer falling back to the questioner descriptor with role=summarizer.
// Validates the result. Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

// Dotted-path overrides (e.g. {"questioner.temperature", "0.5"}), applied on
// top of the file config before materialization. Values are parsed as bool,
// integer, or float when they look like one, else kept as strings.
void apply_config_overrides(nlohmann::json& config,
                            const std::vector<std::pair<std::string, std::string>>& overrides);

// Known override keys, exposed so the CLI can mirror every RunConfig field as
// a dot-separated flag.
const std::vector<std::string>& config_override_keys();

}  // namespace dialogcap
