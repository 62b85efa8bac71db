#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dialogcap {

// Markers injected by our own prompt templates. Matching is exact and
// case-sensitive: a model that drifts from them is already off-script, and we
// only truncate at the markers we planted.
inline constexpr std::string_view kAnswerMarker = "Answer:";
inline constexpr std::string_view kQuestionMarker = "Question:";

// One question/answer exchange. `question`/`answer` are post-trim; the raw
// model outputs are kept for auditability.
struct Turn {
    int index = 0;  // 1-based
    std::string question;
    std::string answer;
    std::string raw_question;
    std::string raw_answer;

    bool answered() const { return !answer.empty(); }
    bool operator==(const Turn&) const = default;
};

// A full dialogue about one image. `caption` stays empty until the summarizer
// ran; aborted dialogues are persisted without it.
struct Transcript {
    std::string image_ref;
    std::vector<Turn> turns;
    std::optional<std::string> caption;
    std::string questioner_id;
    std::string answerer_id;
    std::string summarizer_id;
    std::string config_digest;
    std::string created_at;  // RFC 3339 UTC, e.g. "2024-01-02T03:04:05Z"

    bool operator==(const Transcript&) const = default;
};

// Cuts `raw` at the first occurrence of "Answer:" (fabricated answers follow
// the prompt template, so everything from the marker on is unreliable), then
// strips surrounding whitespace. Idempotent.
// Throws EmptyQuestion when nothing remains.
std::string trim_question(std::string_view raw);

// Same for answerer output and the "Question:" marker.
// Throws EmptyAnswer when nothing remains.
std::string trim_answer(std::string_view raw);

// Renders the chat history as "Question: {q}\nAnswer: {a}" blocks joined by
// `separator`. Unanswered (in-progress) turns are excluded; an empty
// transcript renders to "".
std::string render_chat_log(const Transcript& transcript, std::string_view separator = "\n");

// JSONL persistence. Keys are lower_snake_case exactly as the field names;
// `caption` is omitted when absent so serialize -> parse is lossless.
nlohmann::json to_json(const Turn& turn);
nlohmann::json to_json(const Transcript& transcript);
Turn turn_from_json(const nlohmann::json& j);
Transcript transcript_from_json(const nlohmann::json& j);

// One compact JSON object, no trailing newline.
std::string to_jsonl_line(const Transcript& transcript);

// Throws ParseError carrying `line_number` when the line is not a valid record.
Transcript transcript_from_jsonl_line(const std::string& line, std::size_t line_number);

// Checks the structural invariants (contiguous 1-based indices, non-empty
// questions, no marker leakage, caption implies all turns answered). Returns
// an explanation for the first violation, or nullopt when the transcript is
// well-formed.
std::optional<std::string> validate_transcript(const Transcript& transcript);

// Current time as RFC 3339 UTC with second precision.
std::string now_rfc3339_utc();

}  // namespace dialogcap
