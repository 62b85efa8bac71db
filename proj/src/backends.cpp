#include "dialogcap/backends.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "dialogcap/errors.hpp"

namespace dialogcap {

namespace {

constexpr std::chrono::milliseconds kBackoffBase{100};
constexpr std::chrono::milliseconds kBackoffCap{2000};

struct SplitUrl {
    std::string base;    // scheme://host[:port]
    std::string prefix;  // leading path, "" or "/v1"
};

SplitUrl split_url(const std::string& endpoint) {
    std::size_t scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint is not a URL: " + endpoint);
    std::size_t path_start = endpoint.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.base = endpoint;
    } else {
        out.base = endpoint.substr(0, path_start);
        out.prefix = endpoint.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

bool transient_status(int status) {
    return status == 408 || status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::string to_string(Role role) {
    switch (role) {
        case Role::questioner: return "questioner";
        case Role::answerer: return "answerer";
        case Role::summarizer: return "summarizer";
    }
    return "questioner";
}

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::chat_http: return "chat_http";
        case BackendKind::vqa_http: return "vqa_http";
        case BackendKind::scripted: return "scripted";
    }
    return "scripted";
}

Role role_from_string(std::string_view s) {
    if (s == "questioner") return Role::questioner;
    if (s == "answerer") return Role::answerer;
    if (s == "summarizer") return Role::summarizer;
    throw ConfigError("unknown role: " + std::string(s));
}

BackendKind kind_from_string(std::string_view s) {
    if (s == "chat_http") return BackendKind::chat_http;
    if (s == "vqa_http") return BackendKind::vqa_http;
    if (s == "scripted") return BackendKind::scripted;
    throw ConfigError("unknown backend kind: " + std::string(s));
}

std::string BackendDescriptor::identity() const {
    if (kind == BackendKind::scripted) return "scripted";
    if (!model_id.empty()) return model_id;
    return to_string(kind);
}

void validate_descriptor(const BackendDescriptor& d) {
    std::string where = to_string(d.role) + " backend";
    if (d.temperature < 0.0 || d.temperature > 2.0)
        throw ConfigError(where + ": temperature must be in [0, 2]");
    if (d.max_tokens < 1) throw ConfigError(where + ": max_tokens must be >= 1");
    if (d.max_retries < 0) throw ConfigError(where + ": max_retries must be >= 0");
    if (d.timeout.count() <= 0) throw ConfigError(where + ": timeout must be positive");
    if (d.kind == BackendKind::scripted) {
        if (!d.endpoint.empty() || !d.auth_env_var.empty())
            throw ConfigError(where + ": scripted backends must leave endpoint/auth empty");
        if (!d.script || d.script->responses.empty())
            throw ConfigError(where + ": scripted backends need a non-empty response list");
    } else {
        if (d.endpoint.empty()) throw ConfigError(where + ": endpoint is required");
        if (d.script) throw ConfigError(where + ": responses are only valid for scripted backends");
    }
}

nlohmann::json to_json(const BackendDescriptor& d) {
    nlohmann::json j{
        {"role", to_string(d.role)},
        {"kind", to_string(d.kind)},
        {"endpoint", d.endpoint},
        {"model_id", d.model_id},
        {"temperature", d.temperature},
        {"max_tokens", d.max_tokens},
        {"timeout_ms", d.timeout.count()},
        {"max_retries", d.max_retries},
        {"auth_env_var", d.auth_env_var},
    };
    if (d.script) {
        j["responses"] = d.script->responses;
        j["on_exhausted"] =
            d.script->on_exhausted == OnExhausted::repeat_last ? "repeat_last" : "error";
    }
    return j;
}

BackendDescriptor descriptor_from_json(const nlohmann::json& j) {
    BackendDescriptor d;
    if (j.contains("role")) d.role = role_from_string(j.at("role").get<std::string>());
    d.kind = kind_from_string(j.value("kind", "scripted"));
    d.endpoint = j.value("endpoint", "");
    d.model_id = j.value("model_id", "");
    d.temperature = j.value("temperature", d.temperature);
    d.max_tokens = j.value("max_tokens", d.max_tokens);
    d.timeout = std::chrono::milliseconds(j.value("timeout_ms", d.timeout.count()));
    d.max_retries = j.value("max_retries", d.max_retries);
    if (j.contains("auth_env_var")) {
        d.auth_env_var = j.at("auth_env_var").get<std::string>();
    } else if (d.kind == BackendKind::chat_http) {
        d.auth_env_var = "OPENAI_API_KEY";
    }
    if (j.contains("responses")) {
        ScriptedBehavior script;
        script.responses = j.at("responses").get<std::vector<std::string>>();
        std::string mode = j.value("on_exhausted", "repeat_last");
        if (mode == "repeat_last") {
            script.on_exhausted = OnExhausted::repeat_last;
        } else if (mode == "error") {
            script.on_exhausted = OnExhausted::error;
        } else {
            throw ConfigError("unknown on_exhausted mode: " + mode);
        }
        d.script = std::move(script);
    }
    return d;
}

Backend::Backend(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    validate_descriptor(descriptor_);
    if (descriptor_.script)
        script_queue_.assign(descriptor_.script->responses.begin(),
                             descriptor_.script->responses.end());
}

std::string Backend::pop_scripted() {
    std::lock_guard<std::mutex> lock(script_mutex_);
    if (script_queue_.empty()) {
        if (descriptor_.script->on_exhausted == OnExhausted::error) throw ScriptExhausted();
        return script_last_;
    }
    script_last_ = std::move(script_queue_.front());
    script_queue_.pop_front();
    return script_last_;
}

std::string Backend::auth_token() const {
    if (descriptor_.auth_env_var.empty()) return "";
    const char* value = std::getenv(descriptor_.auth_env_var.c_str());
    if (value == nullptr || *value == '\0') throw AuthMissing(descriptor_.auth_env_var);
    return value;
}

std::string Backend::post_with_retries(const std::string& path, const nlohmann::json& body,
                                       bool is_vqa, const std::string& image_ref) {
    SplitUrl url = split_url(descriptor_.endpoint);
    std::string token = auth_token();
    std::string payload = body.dump();

    int last_status = 0;
    std::string last_body;
    for (int attempt = 0; attempt <= descriptor_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = kBackoffBase * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::min(delay, kBackoffCap));
        }
        httplib::Client client(url.base);
        client.set_connection_timeout(descriptor_.timeout);
        client.set_read_timeout(descriptor_.timeout);
        client.set_write_timeout(descriptor_.timeout);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

        auto res = client.Post(url.prefix + path, headers, payload, "application/json");
        if (!res) {
            last_status = 0;
            last_body = httplib::to_string(res.error());
            continue;
        }
        last_status = res->status;
        last_body = res->body;
        if (res->status >= 200 && res->status < 300) return res->body;
        if (is_vqa && res->status >= 400 && res->status < 500) {
            auto parsed = nlohmann::json::parse(res->body, nullptr, false);
            if (parsed.is_object() && parsed.value("error", "") == "image_unavailable")
                throw ImageUnavailable(image_ref);
        }
        if (!transient_status(res->status)) break;
    }
    throw TransportError(last_status, last_body);
}

std::string Backend::complete_text(const std::string& context) {
    if (descriptor_.kind == BackendKind::scripted) return pop_scripted();
    if (descriptor_.kind != BackendKind::chat_http)
        throw ConfigError("complete_text requires a chat_http or scripted backend");

    nlohmann::json body{
        {"model", descriptor_.model_id},
        {"messages", {{{"role", "user"}, {"content", context}}}},
        {"temperature", descriptor_.temperature},
        {"max_tokens", descriptor_.max_tokens},
    };
    std::string response = post_with_retries("/chat/completions", body, false, "");
    nlohmann::json parsed = nlohmann::json::parse(response, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty())
        throw TransportError(200, "malformed chat completion response: " + response);
    if (parsed.contains("usage") && parsed["usage"].contains("total_tokens"))
        tokens_used_ += parsed["usage"]["total_tokens"].get<std::uint64_t>();
    try {
        return parsed["choices"][0].at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(200, "malformed chat completion response: " + std::string(e.what()));
    }
}

std::string Backend::answer_visual(const std::string& image_ref, const std::string& context) {
    if (descriptor_.kind == BackendKind::scripted) return pop_scripted();
    if (descriptor_.kind != BackendKind::vqa_http)
        throw ConfigError("answer_visual requires a vqa_http or scripted backend");

    nlohmann::json body{
        {"image_ref", image_ref},
        {"prompt", context},
        {"temperature", descriptor_.temperature},
        {"max_tokens", descriptor_.max_tokens},
    };
    std::string response = post_with_retries("/vqa", body, true, image_ref);
    nlohmann::json parsed = nlohmann::json::parse(response, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("answer"))
        throw TransportError(200, "malformed vqa response: " + response);
    return parsed["answer"].get<std::string>();
}

}  // namespace dialogcap
