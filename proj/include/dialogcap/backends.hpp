#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dialogcap {

enum class Role { questioner, answerer, summarizer };
enum class BackendKind { chat_http, vqa_http, scripted };
enum class OnExhausted { repeat_last, error };

std::string to_string(Role role);
std::string to_string(BackendKind kind);
Role role_from_string(std::string_view s);
BackendKind kind_from_string(std::string_view s);

// Deterministic test double: a fixed queue of responses.
struct ScriptedBehavior {
    std::vector<std::string> responses;  // must be non-empty
    OnExhausted on_exhausted = OnExhausted::repeat_last;

    bool operator==(const ScriptedBehavior&) const = default;
};

// Everything needed to reach one model endpoint. `script` is engaged exactly
// when kind == scripted; scripted backends must leave endpoint/auth empty.
struct BackendDescriptor {
    Role role = Role::questioner;
    BackendKind kind = BackendKind::scripted;
    std::string endpoint;  // e.g. "http://localhost:8000/v1"
    std::string model_id;
    double temperature = 0.0;  // <= 2.0
    int max_tokens = 256;      // >= 1
    std::chrono::milliseconds timeout{30000};
    int max_retries = 2;  // total attempts = max_retries + 1
    std::string auth_env_var;
    std::optional<ScriptedBehavior> script;

    // "scripted", or the model id, or the kind name as a last resort.
    std::string identity() const;

    bool operator==(const BackendDescriptor&) const = default;
};

// Throws ConfigError when an invariant is violated.
void validate_descriptor(const BackendDescriptor& descriptor);

nlohmann::json to_json(const BackendDescriptor& descriptor);
BackendDescriptor descriptor_from_json(const nlohmann::json& j);

// A live handle for one descriptor. HTTP calls retry transient failures
// (connect errors, 408/429/5xx) with exponential backoff up to max_retries;
// request bodies embed the context verbatim. Scripted pops are atomic, so a
// handle may be shared across workers.
class Backend {
public:
    explicit Backend(BackendDescriptor descriptor);

    // Sends `context` as a single user-role message to {endpoint}/chat/completions
    // and returns choices[0].message.content. Scripted backends pop the queue.
    // Throws TransportError, AuthMissing, ScriptExhausted.
    std::string complete_text(const std::string& context);

    // POSTs {image_ref, prompt, temperature, max_tokens} to {endpoint}/vqa and
    // returns the `answer` field. Throws ImageUnavailable when the service
    // reports it cannot load image_ref, otherwise as complete_text.
    std::string answer_visual(const std::string& image_ref, const std::string& context);

    const BackendDescriptor& descriptor() const { return descriptor_; }

    // Total tokens reported by the chat endpoint (0 when it reports none).
    std::uint64_t tokens_used() const { return tokens_used_.load(); }

private:
    std::string pop_scripted();
    std::string post_with_retries(const std::string& path, const nlohmann::json& body,
                                  bool is_vqa, const std::string& image_ref);
    std::string auth_token() const;

    BackendDescriptor descriptor_;
    std::mutex script_mutex_;
    std::deque<std::string> script_queue_;
    std::string script_last_;
    std::atomic<std::uint64_t> tokens_used_{0};
};

}  // namespace dialogcap
