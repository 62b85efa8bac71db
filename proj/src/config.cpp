#include "dialogcap/config.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dialogcap/errors.hpp"
#include "dialogcap/text.hpp"

namespace dialogcap {

namespace {

[[noreturn]] void bad_config(const std::string& file, std::size_t line, const std::string& what) {
    throw ConfigError(file + ":" + std::to_string(line) + ": " + what);
}

// Cursor over one logical value (may span lines for arrays).
struct ValueParser {
    const std::string& file;
    std::size_t line;
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size() || text[pos] == '#';
    }

    std::string parse_basic_string() {
        if (text[pos] != '"') bad_config(file, line, "expected '\"'");
        ++pos;
        std::string out;
        while (pos < text.size() && text[pos] != '"') {
            char c = text[pos++];
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (pos >= text.size()) bad_config(file, line, "dangling escape");
            char esc = text[pos++];
            switch (esc) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: bad_config(file, line, std::string("unsupported escape \\") + esc);
            }
        }
        if (pos >= text.size()) bad_config(file, line, "unterminated string");
        ++pos;  // closing quote
        return out;
    }

    nlohmann::json parse_scalar() {
        skip_ws();
        if (pos >= text.size()) bad_config(file, line, "missing value");
        if (text[pos] == '"') return parse_basic_string();

        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ',' && text[pos] != ']' && text[pos] != '#')
            ++pos;
        std::string token = trim_ws(text.substr(start, pos - start));
        if (token == "true") return true;
        if (token == "false") return false;
        try {
            std::size_t used = 0;
            if (token.find_first_of(".eE") == std::string::npos) {
                long long v = std::stoll(token, &used);
                if (used == token.size()) return v;
            } else {
                double v = std::stod(token, &used);
                if (used == token.size()) return v;
            }
        } catch (const std::exception&) {
        }
        bad_config(file, line, "cannot parse value: " + token);
    }
};

nlohmann::json parse_toml_subset(const std::string& text, const std::string& file) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;

    std::istringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string stripped = trim_ws(line);
        if (stripped.empty() || stripped.front() == '#') continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']') bad_config(file, line_number, "unterminated section");
            std::string section = trim_ws(stripped.substr(1, stripped.size() - 2));
            if (section.empty()) bad_config(file, line_number, "empty section name");
            current = &root[section];
            if (!current->is_object()) *current = nlohmann::json::object();
            continue;
        }

        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) bad_config(file, line_number, "expected key = value");
        std::string key = trim_ws(stripped.substr(0, eq));
        if (key.empty()) bad_config(file, line_number, "empty key");
        std::string value_text = trim_ws(stripped.substr(eq + 1));
        if (value_text.empty()) bad_config(file, line_number, "missing value");

        if (value_text.front() == '[') {
            // Array of strings; may continue over following lines.
            std::string buffer = value_text;
            auto balanced = [](const std::string& s) {
                bool in_string = false;
                for (std::size_t i = 0; i < s.size(); ++i) {
                    char c = s[i];
                    if (in_string) {
                        if (c == '\\') ++i;
                        else if (c == '"') in_string = false;
                    } else if (c == '"') {
                        in_string = true;
                    } else if (c == ']') {
                        return true;
                    } else if (c == '#') {
                        break;
                    }
                }
                return false;
            };
            while (!balanced(buffer)) {
                std::string more;
                if (!std::getline(in, more))
                    bad_config(file, line_number, "unterminated array");
                ++line_number;
                buffer += "\n" + more;
            }
            ValueParser vp{file, line_number, buffer, 1};
            nlohmann::json array = nlohmann::json::array();
            while (true) {
                while (vp.pos < buffer.size() &&
                       (buffer[vp.pos] == ' ' || buffer[vp.pos] == '\t' ||
                        buffer[vp.pos] == '\n' || buffer[vp.pos] == ','))
                    ++vp.pos;
                if (vp.pos < buffer.size() && buffer[vp.pos] == '#') {
                    while (vp.pos < buffer.size() && buffer[vp.pos] != '\n') ++vp.pos;
                    continue;
                }
                if (vp.pos >= buffer.size()) bad_config(file, line_number, "unterminated array");
                if (buffer[vp.pos] == ']') break;
                if (buffer[vp.pos] != '"')
                    bad_config(file, line_number, "arrays may only contain strings");
                array.push_back(vp.parse_basic_string());
            }
            (*current)[key] = std::move(array);
            continue;
        }

        ValueParser vp{file, line_number, value_text, 0};
        (*current)[key] = vp.parse_scalar();
        if (!vp.at_end()) bad_config(file, line_number, "trailing characters after value");
    }
    return root;
}

}  // namespace

nlohmann::json parse_config_text(const std::string& text, const std::string& file_name) {
    std::string stripped = trim_ws(text);
    bool looks_like_json = !stripped.empty() && stripped.front() == '{';
    if (looks_like_json || std::filesystem::path(file_name).extension() == ".json") {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(file_name + ": " + e.what());
        }
    }
    return parse_toml_subset(text, file_name);
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

namespace {

BackendDescriptor backend_from_config(const nlohmann::json& config, const char* section,
                                      Role role, double default_temperature) {
    if (!config.contains(section))
        throw ConfigError(std::string("missing [") + section + "] backend section");
    nlohmann::json j = config.at(section);
    if (!j.is_object()) throw ConfigError(std::string(section) + " must be a table");
    if (!j.contains("kind"))
        throw ConfigError(std::string(section) + ".kind is required");
    if (!j.contains("temperature")) j["temperature"] = default_temperature;
    j["role"] = to_string(role);
    try {
        return descriptor_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(section) + ": " + e.what());
    }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig config;
    try {
        config.total_questions = j.value("total_questions", config.total_questions);
        config.max_question_retries = j.value("max_question_retries", config.max_question_retries);
        config.output_path = j.value("output_path", config.output_path);
        config.deterministic = j.value("deterministic", config.deterministic);
        if (j.contains("templates")) {
            if (!j.at("templates").is_object()) throw ConfigError("templates must be a table");
            apply_template_overrides(config.templates, j.at("templates"));
        }
        config.first_question = j.value("first_question", std::string());

        config.questioner = backend_from_config(j, "questioner", Role::questioner, 1.0);
        config.answerer = backend_from_config(j, "answerer", Role::answerer, 0.0);
        if (j.contains("summarizer")) {
            config.summarizer = backend_from_config(j, "summarizer", Role::summarizer, 0.0);
        } else {
            config.summarizer = config.questioner;
            config.summarizer.role = Role::summarizer;
            config.summarizer.temperature = 0.0;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    }
    validate_run_config(config);
    return config;
}

void apply_config_overrides(nlohmann::json& config,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [dotted, raw] : overrides) {
        std::string pointer = "/";
        for (char c : dotted) pointer += c == '.' ? '/' : c;

        nlohmann::json value;
        if (raw == "true") {
            value = true;
        } else if (raw == "false") {
            value = false;
        } else {
            try {
                std::size_t used = 0;
                if (raw.find_first_of(".eE") == std::string::npos && !raw.empty() &&
                    (std::isdigit(static_cast<unsigned char>(raw[0])) || raw[0] == '-')) {
                    long long v = std::stoll(raw, &used);
                    value = used == raw.size() ? nlohmann::json(v) : nlohmann::json(raw);
                } else {
                    double v = std::stod(raw, &used);
                    value = used == raw.size() ? nlohmann::json(v) : nlohmann::json(raw);
                }
            } catch (const std::exception&) {
                value = raw;
            }
        }
        config[nlohmann::json::json_pointer(pointer)] = std::move(value);
    }
}

const std::vector<std::string>& config_override_keys() {
    static const std::vector<std::string> keys = [] {
        // "deterministic" and "output_path" have dedicated CLI flags.
        std::vector<std::string> out{
            "total_questions",
            "first_question",
            "max_question_retries",
        };
        for (const char* field :
             {"task_q", "question_instr", "task_a", "answer_instr_prefix", "answer_instr_suffix",
              "summarize_instr", "first_question", "section_separator",
              "include_task_q_in_summary"})
            out.push_back(std::string("templates.") + field);
        for (const char* backend : {"questioner", "answerer", "summarizer"})
            for (const char* field : {"kind", "endpoint", "model_id", "temperature", "max_tokens",
                                      "timeout_ms", "max_retries", "auth_env_var", "on_exhausted"})
                out.push_back(std::string(backend) + "." + field);
        return out;
    }();
    return keys;
}

}  // namespace dialogcap
