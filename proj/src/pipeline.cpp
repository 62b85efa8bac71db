#include "dialogcap/pipeline.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "dialogcap/text.hpp"

namespace dialogcap {

namespace {

constexpr const char* kZeroTimestamp = "1970-01-01T00:00:00Z";

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

}  // namespace

void validate_run_config(const RunConfig& config) {
    if (config.total_questions < 1) throw ConfigError("total_questions must be >= 1");
    if (config.max_question_retries < 0) throw ConfigError("max_question_retries must be >= 0");
    if (config.effective_first_question().empty())
        throw ConfigError("first_question must not be empty");
    validate_descriptor(config.questioner);
    validate_descriptor(config.answerer);
    validate_descriptor(config.summarizer);
}

nlohmann::json to_json(const RunConfig& config) {
    return {
        {"total_questions", config.total_questions},
        {"first_question", config.effective_first_question()},
        {"max_question_retries", config.max_question_retries},
        {"output_path", config.output_path},
        {"deterministic", config.deterministic},
        {"templates", to_json(config.templates)},
        {"questioner", to_json(config.questioner)},
        {"answerer", to_json(config.answerer)},
        {"summarizer", to_json(config.summarizer)},
    };
}

std::string config_digest(const RunConfig& config) {
    nlohmann::json canonical = to_json(config);
    // Storage location does not affect dialogue content; keeping it would give
    // two otherwise-identical runs different digests.
    canonical.erase("output_path");
    std::uint64_t hash = fnv1a64(canonical.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

Transcript run_caption_dialogue(const std::string& image_ref, const RunConfig& config,
                                const TranscriptSink& sink) {
    validate_run_config(config);

    Backend questioner(config.questioner);
    Backend answerer(config.answerer);
    Backend summarizer(config.summarizer);

    Transcript transcript;
    transcript.image_ref = image_ref;
    transcript.questioner_id = config.questioner.identity();
    transcript.answerer_id = config.answerer.identity();
    transcript.summarizer_id = config.summarizer.identity();
    transcript.config_digest = config_digest(config);
    transcript.created_at = config.deterministic ? kZeroTimestamp : now_rfc3339_utc();

    auto abort_dialogue = [&](int turn, const std::string& cause) -> DialogueAborted {
        sink(transcript);
        return DialogueAborted(turn, cause, transcript);
    };

    for (int k = 1; k <= config.total_questions; ++k) {
        std::string raw_question;
        std::string question;
        if (k == 1) {
            // Hard-coded opener; the questioner is never consulted for it.
            question = config.effective_first_question();
            raw_question = question;
        } else {
            std::string context = build_questioner_context(config.templates, transcript);
            int asks = 0;
            while (true) {
                try {
                    raw_question = questioner.complete_text(context);
                } catch (const Error& e) {
                    throw abort_dialogue(k, std::string("questioner: ") + e.what());
                }
                try {
                    question = trim_question(raw_question);
                    break;
                } catch (const EmptyQuestion&) {
                    if (asks++ >= config.max_question_retries)
                        throw abort_dialogue(
                            k, "question empty after " +
                                   std::to_string(config.max_question_retries) + " retries");
                }
            }
        }

        std::string answer_context = build_answerer_context(config.templates, transcript, question);
        std::string raw_answer;
        std::string answer;
        try {
            raw_answer = answerer.answer_visual(image_ref, answer_context);
            answer = trim_answer(raw_answer);
        } catch (const Error& e) {
            // Keep the unanswered question in the partial for auditability.
            transcript.turns.push_back(Turn{k, question, "", raw_question, raw_answer});
            throw abort_dialogue(k, std::string("answerer: ") + e.what());
        }
        transcript.turns.push_back(Turn{k, question, answer, raw_question, raw_answer});
    }

    std::string summary_context = build_summarizer_context(config.templates, transcript);
    try {
        transcript.caption = trim_ws(summarizer.complete_text(summary_context));
    } catch (const Error& e) {
        throw abort_dialogue(config.total_questions, std::string("summarizer: ") + e.what());
    }

    sink(transcript);
    return transcript;
}

Transcript run_caption_dialogue(const std::string& image_ref, const RunConfig& config) {
    return run_caption_dialogue(image_ref, config, [&](const Transcript& t) {
        append_transcript(config.output_path, t);
    });
}

namespace {

// Appends JSONL lines in input order no matter which dialogue finishes first.
// Every index must be reported exactly once, either with a line or as skipped.
class OrderedWriter {
public:
    OrderedWriter(const std::string& path, std::size_t total) : total_(total) {
        if (!path.empty()) {
            out_.open(path, std::ios::app);
            if (!out_) throw MissingFile(path);
        }
    }

    void submit(std::size_t index, std::string line) {
        std::lock_guard<std::mutex> lock(mutex_);
        pending_[index] = std::move(line);
        flush_ready();
    }

    void skip(std::size_t index) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (pending_.count(index) || index < next_) return;  // already reported
        pending_[index] = std::nullopt;
        flush_ready();
    }

    void finish() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (out_.is_open()) out_.flush();
    }

private:
    void flush_ready() {
        while (next_ < total_) {
            auto it = pending_.find(next_);
            if (it == pending_.end()) break;
            if (it->second && out_.is_open()) out_ << *it->second << '\n';
            pending_.erase(it);
            ++next_;
        }
    }

    std::size_t total_;
    std::size_t next_ = 0;
    std::map<std::size_t, std::optional<std::string>> pending_;
    std::ofstream out_;
    std::mutex mutex_;
};

}  // namespace

BatchResult run_batch(const std::vector<std::string>& image_refs, const RunConfig& config,
                      int parallelism) {
    validate_run_config(config);
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");

    OrderedWriter writer(config.output_path, image_refs.size());
    std::vector<std::optional<Transcript>> slots(image_refs.size());
    std::vector<std::optional<FailureRecord>> failure_slots(image_refs.size());
    std::atomic<std::size_t> next_index{0};

    auto worker = [&]() {
        while (true) {
            std::size_t index = next_index.fetch_add(1);
            if (index >= image_refs.size()) return;
            const std::string& image_ref = image_refs[index];
            bool submitted = false;
            auto sink = [&](const Transcript& t) {
                writer.submit(index, to_jsonl_line(t));
                submitted = true;
            };
            try {
                slots[index] = run_caption_dialogue(image_ref, config, sink);
            } catch (const DialogueAborted& e) {
                failure_slots[index] = FailureRecord{index, image_ref, e.turn, e.cause};
            } catch (const std::exception& e) {
                failure_slots[index] = FailureRecord{index, image_ref, 0, e.what()};
                if (!submitted) writer.skip(index);
            }
        }
    };

    std::size_t thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), image_refs.size());
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    writer.finish();

    BatchResult result;
    for (std::size_t i = 0; i < image_refs.size(); ++i) {
        if (slots[i]) result.transcripts.push_back(std::move(*slots[i]));
        if (failure_slots[i]) result.failures.push_back(std::move(*failure_slots[i]));
    }
    return result;
}

std::vector<Transcript> load_transcripts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path);
    std::vector<Transcript> transcripts;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim_ws(line).empty()) continue;
        transcripts.push_back(transcript_from_jsonl_line(line, line_number));
    }
    return transcripts;
}

void append_transcript(const std::string& path, const Transcript& transcript) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::app);
    if (!out) throw MissingFile(path);
    out << to_jsonl_line(transcript) << '\n';
}

nlohmann::json build_run_manifest(const RunConfig& config, const std::string& started_at,
                                  const std::string& finished_at, std::size_t images_total,
                                  const std::vector<FailureRecord>& failures) {
    nlohmann::json failure_list = nlohmann::json::array();
    for (const auto& f : failures)
        failure_list.push_back({{"input_index", f.input_index},
                                {"image_ref", f.image_ref},
                                {"turn", f.turn},
                                {"cause", f.cause}});
    return {
        {"config", to_json(config)},
        {"config_digest", config_digest(config)},
        {"started_at", started_at},
        {"finished_at", finished_at},
        {"images_total", images_total},
        {"images_failed", failures.size()},
        {"failures", failure_list},
    };
}

void write_run_manifest(const std::string& output_path, const nlohmann::json& manifest) {
    std::string path = output_path + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw MissingFile(path);
    out << manifest.dump(2) << '\n';
}

}  // namespace dialogcap
