#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dialogcap/dialogue.hpp"

namespace dialogcap {

// The instruction strings driving the dialogue, plus rendering separators.
// Defaults are the production prompts; every field can be overridden from a
// config file so ablations (e.g. dropping "Avoid asking yes/no questions")
// need no code change.
struct PromptTemplateSet {
    std::string task_q =
        "I have an image. Ask me questions about the content of this image. Carefully asking me "
        "informative questions to maximize your information about this image content. Each time "
        "ask one question only without giving an answer. Avoid asking yes/no questions. I'll put "
        "my answer beginning with \"Answer:\".";

    std::string question_instr = "Next Question. Avoid asking yes/no questions. Question:";

    std::string task_a =
        "Answer given questions. If you are not sure about the answer, say you don't know "
        "honestly. Don't imagine any contents that are not in the image.";

    std::string answer_instr_prefix = "Question: ";
    std::string answer_instr_suffix = " Answer:";

    std::string summarize_instr =
        "Now summarize the information you get in a few sentences. Ignore the questions with "
        "answers no or not sure. Don't add information. Don't miss information. Summary:";

    std::string first_question = "Describe the image in detail.";

    std::string section_separator = "\n";

    // Lead the summarizer with task_q to keep the model in the established
    // task frame.
    bool include_task_q_in_summary = true;

    bool operator==(const PromptTemplateSet&) const = default;
};

// task_q + sep + chat log + sep + question_instr. Pure concatenation: builders
// never alter template or chat-log bytes, and separators are emitted even when
// the chat log is empty.
std::string build_questioner_context(const PromptTemplateSet& templates,
                                     const Transcript& transcript);

// task_a + sep + chat log + sep + "Question: {question} Answer:". `question`
// must be post-trim and non-empty.
std::string build_answerer_context(const PromptTemplateSet& templates, const Transcript& transcript,
                                   std::string_view question);

// task_q + sep + chat log + sep + summarize_instr (the leading task_q part is
// dropped when include_task_q_in_summary is false).
std::string build_summarizer_context(const PromptTemplateSet& templates,
                                     const Transcript& transcript);

// Config-file overrides: one optional key per field.
nlohmann::json to_json(const PromptTemplateSet& templates);
void apply_template_overrides(PromptTemplateSet& templates, const nlohmann::json& overrides);

}  // namespace dialogcap
