#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialogcap/dialogue.hpp"
#include "dialogcap/taxonomy.hpp"

namespace dialogcap {

// How a word's synsets are selected for matching: every noun synset of the
// word (the permissive default) or only its first sense.
enum class MatchPolicy { any_pair, first_sense };

// Aggregated evaluation statistics over a transcript corpus.
struct MetricsReport {
    double per_dialogue_unique_mean = 0.0;
    std::size_t total_unique = 0;
    std::size_t total_questions = 0;
    std::size_t yes_no_count = 0;
    std::size_t uncertain_answer_count = 0;
    std::size_t objects_covered = 0;
    std::size_t objects_total = 0;
    double coverage_ratio = 0.0;  // objects_covered / objects_total, 0 when empty

    bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const MetricsReport& report);

// Casefold, collapse whitespace, strip trailing punctuation. Idempotent; used
// for uniqueness keys and yes/no detection.
std::string normalize_question(std::string_view question);

struct UniqueQuestionStats {
    double per_dialogue_unique_mean = 0.0;
    std::size_t total_unique = 0;
    std::size_t total_questions = 0;
};

// Questions are compared through normalize_question. With
// questioner_turns_only, turn 1 (the hard-coded opener) is excluded.
UniqueQuestionStats unique_question_stats(const std::vector<Transcript>& transcripts,
                                          bool questioner_turns_only);

// True iff the first token of the normalized question is an auxiliary/modal
// verb ("is", "are", "do", "can", ...).
bool is_yes_no_question(std::string_view question);

// Phrases whose presence in a normalized answer marks it as uncertain.
const std::vector<std::string>& default_uncertainty_phrases();
bool is_uncertain_answer(std::string_view answer,
                         const std::vector<std::string>& phrases = default_uncertainty_phrases());

// Corpus counters over questioner turns (turn 1 excluded when
// questioner_turns_only) / all answers respectively.
std::size_t count_yes_no_questions(const std::vector<Transcript>& transcripts,
                                   bool questioner_turns_only);
std::size_t count_uncertain_answers(const std::vector<Transcript>& transcripts,
                                    bool questioner_turns_only);

// Two words match when any selected synset pair has Wu-Palmer similarity
// above 0.9 or one synset lies in the other's hypernym closure. Words are
// casefolded with spaces mapped to underscores; unknown words never match.
bool words_match(std::string_view w1, std::string_view w2, const Taxonomy& taxonomy,
                 MatchPolicy policy = MatchPolicy::any_pair);

// Candidate caption terms: unigrams and underscore-joined bigrams of the
// tokenized caption that exist in the taxonomy's lemma index.
std::vector<std::string> caption_terms(std::string_view caption, const Taxonomy& taxonomy);

struct CoverageCounts {
    std::size_t objects_covered = 0;
    std::size_t objects_total = 0;

    double ratio() const {
        return objects_total == 0 ? 0.0
                                  : static_cast<double>(objects_covered) /
                                        static_cast<double>(objects_total);
    }
};

// Labels are counted per image occurrence; a label is covered when any
// candidate term of that image's caption matches it. Throws
// MissingCaption(image_id) when a labeled image has no caption entry.
CoverageCounts object_coverage(const std::map<std::string, std::string>& captions,
                               const std::map<std::string, std::vector<std::string>>& labels,
                               const Taxonomy& taxonomy,
                               MatchPolicy policy = MatchPolicy::any_pair);

// Labels file: JSONL of {"image_id": ..., "labels": [...]}.
std::map<std::string, std::vector<std::string>> load_labels_jsonl(const std::string& path);

// Report formatting -------------------------------------------------------

// 0.508 -> "50.8%"
std::string format_ratio_pct(double ratio);
// 38, 1800 -> "2%"
std::string format_count_pct(std::size_t numerator, std::size_t denominator);
// 586 vs 383 -> "53.0%" ((new - base) / base)
std::string format_improvement_pct(std::size_t covered, std::size_t baseline_covered);
// 8.98 -> "8.98", 9.0 -> "9"
std::string format_mean(double value);

struct CoverageRow {
    std::string name;
    std::size_t covered = 0;
    std::size_t total = 0;
};

// "Covered/All | Ratio | Improved" rows; the first row is the baseline for
// the Improved column.
std::string render_coverage_table(const std::vector<CoverageRow>& rows);

// "Per Dialogue x/y | All Questions u/t" block; `questions_per_dialogue` is
// the per-dialogue denominator (9 for a 10-turn run without the opener).
std::string render_unique_table(const UniqueQuestionStats& stats,
                                std::size_t questions_per_dialogue);

}  // namespace dialogcap
