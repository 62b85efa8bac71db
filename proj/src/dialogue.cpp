#include "dialogcap/dialogue.hpp"

#include <cstdio>
#include <ctime>

#include "dialogcap/errors.hpp"
#include "dialogcap/text.hpp"

namespace dialogcap {

namespace {

std::string truncate_at_marker(std::string_view raw, std::string_view marker) {
    std::size_t pos = raw.find(marker);
    if (pos != std::string_view::npos) raw = raw.substr(0, pos);
    return trim_ws(raw);
}

}  // namespace

std::string trim_question(std::string_view raw) {
    std::string trimmed = truncate_at_marker(raw, kAnswerMarker);
    if (trimmed.empty()) throw EmptyQuestion();
    return trimmed;
}

std::string trim_answer(std::string_view raw) {
    std::string trimmed = truncate_at_marker(raw, kQuestionMarker);
    if (trimmed.empty()) throw EmptyAnswer();
    return trimmed;
}

std::string render_chat_log(const Transcript& transcript, std::string_view separator) {
    std::string out;
    for (const Turn& turn : transcript.turns) {
        if (!turn.answered()) continue;
        if (!out.empty()) out += separator;
        out += "Question: ";
        out += turn.question;
        out += "\nAnswer: ";
        out += turn.answer;
    }
    return out;
}

nlohmann::json to_json(const Turn& turn) {
    return {
        {"index", turn.index},
        {"question", turn.question},
        {"answer", turn.answer},
        {"raw_question", turn.raw_question},
        {"raw_answer", turn.raw_answer},
    };
}

nlohmann::json to_json(const Transcript& transcript) {
    nlohmann::json j{
        {"image_ref", transcript.image_ref},
        {"turns", nlohmann::json::array()},
        {"questioner_id", transcript.questioner_id},
        {"answerer_id", transcript.answerer_id},
        {"summarizer_id", transcript.summarizer_id},
        {"config_digest", transcript.config_digest},
        {"created_at", transcript.created_at},
    };
    for (const Turn& turn : transcript.turns) j["turns"].push_back(to_json(turn));
    if (transcript.caption) j["caption"] = *transcript.caption;
    return j;
}

Turn turn_from_json(const nlohmann::json& j) {
    Turn turn;
    turn.index = j.at("index").get<int>();
    turn.question = j.at("question").get<std::string>();
    turn.answer = j.at("answer").get<std::string>();
    turn.raw_question = j.at("raw_question").get<std::string>();
    turn.raw_answer = j.at("raw_answer").get<std::string>();
    return turn;
}

Transcript transcript_from_json(const nlohmann::json& j) {
    Transcript t;
    t.image_ref = j.at("image_ref").get<std::string>();
    for (const auto& turn_json : j.at("turns")) t.turns.push_back(turn_from_json(turn_json));
    if (j.contains("caption") && !j.at("caption").is_null())
        t.caption = j.at("caption").get<std::string>();
    t.questioner_id = j.at("questioner_id").get<std::string>();
    t.answerer_id = j.at("answerer_id").get<std::string>();
    t.summarizer_id = j.at("summarizer_id").get<std::string>();
    t.config_digest = j.at("config_digest").get<std::string>();
    t.created_at = j.at("created_at").get<std::string>();
    return t;
}

std::string to_jsonl_line(const Transcript& transcript) { return to_json(transcript).dump(); }

Transcript transcript_from_jsonl_line(const std::string& line, std::size_t line_number) {
    try {
        return transcript_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_number, e.what());
    }
}

std::optional<std::string> validate_transcript(const Transcript& transcript) {
    for (std::size_t i = 0; i < transcript.turns.size(); ++i) {
        const Turn& turn = transcript.turns[i];
        if (turn.index != static_cast<int>(i) + 1)
            return "turn " + std::to_string(i) + " has index " + std::to_string(turn.index);
        if (trim_ws(turn.question).empty())
            return "turn " + std::to_string(turn.index) + " has an empty question";
        if (turn.question.find(kAnswerMarker) != std::string::npos)
            return "turn " + std::to_string(turn.index) + " question contains 'Answer:'";
        if (turn.answer.find(kQuestionMarker) != std::string::npos)
            return "turn " + std::to_string(turn.index) + " answer contains 'Question:'";
        // Only the last turn may be awaiting its answer.
        if (!turn.answered() && i + 1 != transcript.turns.size())
            return "turn " + std::to_string(turn.index) + " is unanswered but not last";
    }
    if (transcript.caption) {
        for (const Turn& turn : transcript.turns)
            if (!turn.answered())
                return "caption present but turn " + std::to_string(turn.index) + " is unanswered";
    }
    return std::nullopt;
}

std::string now_rfc3339_utc() {
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", utc.tm_year + 1900,
                  utc.tm_mon + 1, utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec);
    return buf;
}

}  // namespace dialogcap
