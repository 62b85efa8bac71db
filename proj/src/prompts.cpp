#include "dialogcap/prompts.hpp"

namespace dialogcap {

std::string build_questioner_context(const PromptTemplateSet& templates,
                                     const Transcript& transcript) {
    std::string out = templates.task_q;
    out += templates.section_separator;
    out += render_chat_log(transcript);
    out += templates.section_separator;
    out += templates.question_instr;
    return out;
}

std::string build_answerer_context(const PromptTemplateSet& templates, const Transcript& transcript,
                                   std::string_view question) {
    std::string out = templates.task_a;
    out += templates.section_separator;
    out += render_chat_log(transcript);
    out += templates.section_separator;
    out += templates.answer_instr_prefix;
    out += question;
    out += templates.answer_instr_suffix;
    return out;
}

std::string build_summarizer_context(const PromptTemplateSet& templates,
                                     const Transcript& transcript) {
    std::string out;
    if (templates.include_task_q_in_summary) {
        out += templates.task_q;
        out += templates.section_separator;
    }
    out += render_chat_log(transcript);
    out += templates.section_separator;
    out += templates.summarize_instr;
    return out;
}

nlohmann::json to_json(const PromptTemplateSet& t) {
    return {
        {"task_q", t.task_q},
        {"question_instr", t.question_instr},
        {"task_a", t.task_a},
        {"answer_instr_prefix", t.answer_instr_prefix},
        {"answer_instr_suffix", t.answer_instr_suffix},
        {"summarize_instr", t.summarize_instr},
        {"first_question", t.first_question},
        {"section_separator", t.section_separator},
        {"include_task_q_in_summary", t.include_task_q_in_summary},
    };
}

void apply_template_overrides(PromptTemplateSet& t, const nlohmann::json& overrides) {
    auto set_string = [&](const char* key, std::string& field) {
        if (overrides.contains(key)) field = overrides.at(key).get<std::string>();
    };
    set_string("task_q", t.task_q);
    set_string("question_instr", t.question_instr);
    set_string("task_a", t.task_a);
    set_string("answer_instr_prefix", t.answer_instr_prefix);
    set_string("answer_instr_suffix", t.answer_instr_suffix);
    set_string("summarize_instr", t.summarize_instr);
    set_string("first_question", t.first_question);
    set_string("section_separator", t.section_separator);
    if (overrides.contains("include_task_q_in_summary"))
        t.include_task_q_in_summary = overrides.at("include_task_q_in_summary").get<bool>();
}

}  // namespace dialogcap
