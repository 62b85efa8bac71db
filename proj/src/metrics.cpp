#include "dialogcap/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "dialogcap/errors.hpp"
#include "dialogcap/text.hpp"

namespace dialogcap {

nlohmann::json to_json(const MetricsReport& r) {
    return {
        {"per_dialogue_unique_mean", r.per_dialogue_unique_mean},
        {"total_unique", r.total_unique},
        {"total_questions", r.total_questions},
        {"yes_no_count", r.yes_no_count},
        {"uncertain_answer_count", r.uncertain_answer_count},
        {"objects_covered", r.objects_covered},
        {"objects_total", r.objects_total},
        {"coverage_ratio", r.coverage_ratio},
    };
}

std::string normalize_question(std::string_view question) {
    std::string s = collapse_ws(casefold(question));
    // Trailing punctuation may expose whitespace ("red ?"), so scrub both.
    while (!s.empty() &&
           (std::ispunct(static_cast<unsigned char>(s.back())) != 0 || s.back() == ' '))
        s.pop_back();
    return s;
}

UniqueQuestionStats unique_question_stats(const std::vector<Transcript>& transcripts,
                                          bool questioner_turns_only) {
    UniqueQuestionStats stats;
    std::unordered_set<std::string> corpus_keys;
    std::size_t per_dialogue_sum = 0;
    for (const Transcript& t : transcripts) {
        std::unordered_set<std::string> dialogue_keys;
        for (const Turn& turn : t.turns) {
            if (questioner_turns_only && turn.index == 1) continue;
            std::string key = normalize_question(turn.question);
            dialogue_keys.insert(key);
            corpus_keys.insert(std::move(key));
            ++stats.total_questions;
        }
        per_dialogue_sum += dialogue_keys.size();
    }
    stats.total_unique = corpus_keys.size();
    if (!transcripts.empty())
        stats.per_dialogue_unique_mean =
            static_cast<double>(per_dialogue_sum) / static_cast<double>(transcripts.size());
    return stats;
}

bool is_yes_no_question(std::string_view question) {
    static const std::unordered_set<std::string> kAuxiliaries{
        "is",  "are",   "was",  "were",  "am",  "do",   "does", "did",  "can",  "could",
        "will", "would", "shall", "should", "has", "have", "had", "may", "might", "must"};
    std::string normalized = normalize_question(question);
    std::size_t space = normalized.find(' ');
    std::string first = space == std::string::npos ? normalized : normalized.substr(0, space);
    return kAuxiliaries.count(first) != 0;
}

const std::vector<std::string>& default_uncertainty_phrases() {
    static const std::vector<std::string> kPhrases{
        "don't know", "do not know", "not sure", "cannot tell", "can't tell"};
    return kPhrases;
}

bool is_uncertain_answer(std::string_view answer, const std::vector<std::string>& phrases) {
    std::string normalized = collapse_ws(casefold(answer));
    for (const auto& phrase : phrases)
        if (normalized.find(phrase) != std::string::npos) return true;
    return false;
}

std::size_t count_yes_no_questions(const std::vector<Transcript>& transcripts,
                                   bool questioner_turns_only) {
    std::size_t count = 0;
    for (const Transcript& t : transcripts)
        for (const Turn& turn : t.turns) {
            if (questioner_turns_only && turn.index == 1) continue;
            if (is_yes_no_question(turn.question)) ++count;
        }
    return count;
}

std::size_t count_uncertain_answers(const std::vector<Transcript>& transcripts,
                                    bool questioner_turns_only) {
    std::size_t count = 0;
    for (const Transcript& t : transcripts)
        for (const Turn& turn : t.turns) {
            if (questioner_turns_only && turn.index == 1) continue;
            if (turn.answered() && is_uncertain_answer(turn.answer)) ++count;
        }
    return count;
}

namespace {

std::string as_lemma(std::string_view word) {
    std::string lemma = casefold(word);
    std::replace(lemma.begin(), lemma.end(), ' ', '_');
    return lemma;
}

std::vector<std::string> select_synsets(const std::string& lemma, const Taxonomy& taxonomy,
                                        MatchPolicy policy) {
    const auto& all = taxonomy.synsets_of(lemma);
    if (policy == MatchPolicy::first_sense && all.size() > 1)
        return {all.front()};
    return all;
}

}  // namespace

bool words_match(std::string_view w1, std::string_view w2, const Taxonomy& taxonomy,
                 MatchPolicy policy) {
    auto s1 = select_synsets(as_lemma(w1), taxonomy, policy);
    auto s2 = select_synsets(as_lemma(w2), taxonomy, policy);
    if (s1.empty() || s2.empty()) return false;
    for (const auto& a : s1)
        for (const auto& b : s2) {
            if (taxonomy.wup_similarity(a, b) > 0.9) return true;
            if (taxonomy.in_closure(a, b)) return true;
        }
    return false;
}

std::vector<std::string> caption_terms(std::string_view caption, const Taxonomy& taxonomy) {
    // Tokens: casefolded whitespace runs with edge punctuation stripped;
    // internal apostrophes/hyphens/dots survive ("o'clock", "u.s.a.").
    std::vector<std::string> tokens;
    for (auto& raw : split_ws(casefold(caption))) {
        std::size_t begin = 0;
        std::size_t end = raw.size();
        auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; };
        while (begin < end && !is_word_char(raw[begin])) ++begin;
        while (end > begin && !is_word_char(raw[end - 1])) --end;
        if (end > begin) tokens.push_back(raw.substr(begin, end - begin));
    }

    std::vector<std::string> terms;
    std::unordered_set<std::string> seen;
    auto add_if_known = [&](const std::string& term) {
        if (!taxonomy.synsets_of(term).empty() && seen.insert(term).second) terms.push_back(term);
    };
    for (const auto& token : tokens) add_if_known(token);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        add_if_known(tokens[i] + "_" + tokens[i + 1]);
    return terms;
}

CoverageCounts object_coverage(const std::map<std::string, std::string>& captions,
                               const std::map<std::string, std::vector<std::string>>& labels,
                               const Taxonomy& taxonomy, MatchPolicy policy) {
    CoverageCounts counts;
    for (const auto& [image_id, image_labels] : labels) {
        auto caption_it = captions.find(image_id);
        if (caption_it == captions.end()) throw MissingCaption(image_id);
        auto terms = caption_terms(caption_it->second, taxonomy);
        for (const auto& label : image_labels) {
            ++counts.objects_total;
            for (const auto& term : terms) {
                if (words_match(term, label, taxonomy, policy)) {
                    ++counts.objects_covered;
                    break;
                }
            }
        }
    }
    return counts;
}

std::map<std::string, std::vector<std::string>> load_labels_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path);
    std::map<std::string, std::vector<std::string>> labels;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim_ws(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            labels[j.at("image_id").get<std::string>()] =
                j.at("labels").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_number, e.what());
        }
    }
    return labels;
}

std::string format_ratio_pct(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", ratio * 100.0);
    return buf;
}

std::string format_count_pct(std::size_t numerator, std::size_t denominator) {
    double pct = denominator == 0
                     ? 0.0
                     : 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f%%", pct);
    return buf;
}

std::string format_improvement_pct(std::size_t covered, std::size_t baseline_covered) {
    if (baseline_covered == 0) return "-";
    double improvement = (static_cast<double>(covered) - static_cast<double>(baseline_covered)) /
                         static_cast<double>(baseline_covered);
    return format_ratio_pct(improvement);
}

std::string format_mean(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

std::string render_coverage_table(const std::vector<CoverageRow>& rows) {
    std::size_t name_width = 6;
    for (const auto& row : rows) name_width = std::max(name_width, row.name.size());

    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-*s  %-12s  %-6s  %s\n", static_cast<int>(name_width),
                  "Method", "Covered/All", "Ratio", "Improved");
    out += buf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        std::string fraction = std::to_string(row.covered) + "/" + std::to_string(row.total);
        double ratio = row.total == 0 ? 0.0
                                      : static_cast<double>(row.covered) /
                                            static_cast<double>(row.total);
        std::string improved =
            i == 0 ? "-" : format_improvement_pct(row.covered, rows.front().covered);
        std::snprintf(buf, sizeof(buf), "%-*s  %-12s  %-6s  %s\n", static_cast<int>(name_width),
                      row.name.c_str(), fraction.c_str(), format_ratio_pct(ratio).c_str(),
                      improved.c_str());
        out += buf;
    }
    return out;
}

std::string render_unique_table(const UniqueQuestionStats& stats,
                                std::size_t questions_per_dialogue) {
    std::string out = "Unique Q/Total Q\n";
    out += "Per Dialogue   " + format_mean(stats.per_dialogue_unique_mean) + "/" +
           std::to_string(questions_per_dialogue) + "\n";
    out += "All Questions  " + std::to_string(stats.total_unique) + "/" +
           std::to_string(stats.total_questions) + "\n";
    return out;
}

}  // namespace dialogcap
