#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialogcap/backends.hpp"
#include "dialogcap/dialogue.hpp"
#include "dialogcap/errors.hpp"
#include "dialogcap/prompts.hpp"

namespace dialogcap {

// Configuration of one captioning run.
struct RunConfig {
    int total_questions = 10;
    std::string first_question;  // "" -> templates.first_question
    BackendDescriptor questioner;
    BackendDescriptor answerer;
    BackendDescriptor summarizer;
    PromptTemplateSet templates;
    int max_question_retries = 2;
    std::string output_path;
    bool deterministic = false;  // zero timestamps for byte-stable outputs

    const std::string& effective_first_question() const {
        return first_question.empty() ? templates.first_question : first_question;
    }
};

// Throws ConfigError on an invalid configuration.
void validate_run_config(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

// Stable 16-hex-digit FNV-1a digest of the canonical config serialization.
// Secrets never enter RunConfig (only env var names do), so nothing is
// stripped.
std::string config_digest(const RunConfig& config);

// A dialogue failed irrecoverably at `turn`; `partial` was already persisted
// (caption absent).
class DialogueAborted : public Error {
public:
    DialogueAborted(int turn, std::string cause, Transcript partial)
        : Error("dialogue aborted at turn " + std::to_string(turn) + ": " + cause),
          turn(turn),
          cause(std::move(cause)),
          partial(std::move(partial)) {}

    int turn;
    std::string cause;
    Transcript partial;
};

// Receives each finished (or aborted-partial) transcript exactly once.
using TranscriptSink = std::function<void(const Transcript&)>;

// Runs one full dialogue: the hard-coded first question, questioner-generated
// turns 2..N (each passed through trim_question, with up to
// max_question_retries re-asks on an empty result), answers through
// trim_answer, then the summarizer caption. The transcript goes to `sink`
// before the call returns — aborted partials included, caption absent.
Transcript run_caption_dialogue(const std::string& image_ref, const RunConfig& config,
                                const TranscriptSink& sink);

// Same, appending to config.output_path.
Transcript run_caption_dialogue(const std::string& image_ref, const RunConfig& config);

struct FailureRecord {
    std::size_t input_index = 0;
    std::string image_ref;
    int turn = 0;
    std::string cause;
};

struct BatchResult {
    std::vector<Transcript> transcripts;  // successful dialogues, input order
    std::vector<FailureRecord> failures;  // input order
};

// Runs every image with at most `parallelism` dialogues in flight. JSONL lines
// are appended in input order (never interleaved), one line per image whether
// it completed or aborted, so equal configs give byte-identical files at any
// parallelism. Per-image failures are collected, not fatal.
BatchResult run_batch(const std::vector<std::string>& image_refs, const RunConfig& config,
                      int parallelism);

// Parses a JSONL transcript file; blank lines are skipped. Throws
// ParseError(line_number, detail) on the first bad line and MissingFile when
// unreadable.
std::vector<Transcript> load_transcripts(const std::string& path);

// Appends one JSONL line (creates the file if needed).
void append_transcript(const std::string& path, const Transcript& transcript);

// Sidecar manifest: config (no secrets are ever stored), digest, start/end
// times, and the failure list. Written next to the output as
// "<output_path>.manifest.json".
nlohmann::json build_run_manifest(const RunConfig& config, const std::string& started_at,
                                  const std::string& finished_at, std::size_t images_total,
                                  const std::vector<FailureRecord>& failures);
void write_run_manifest(const std::string& output_path, const nlohmann::json& manifest);

}  // namespace dialogcap
