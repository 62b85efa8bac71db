#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dialogcap/config.hpp"
#include "dialogcap/errors.hpp"
#include "dialogcap/metrics.hpp"
#include "dialogcap/pipeline.hpp"
#include "dialogcap/taxonomy.hpp"
#include "dialogcap/text.hpp"

namespace {

using namespace dialogcap;

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitConfigError = 2;

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        std::string stripped = trim_ws(line);
        if (!stripped.empty()) lines.push_back(std::move(stripped));
    }
    return lines;
}

struct CaptionArgs {
    std::string config_path;
    std::string images_path;
    std::string out_path;
    int parallelism = 1;
    bool deterministic = false;
    std::map<std::string, std::string> overrides;
};

int cmd_caption(const CaptionArgs& args) {
    nlohmann::json config_json = load_config_file(args.config_path);

    std::vector<std::pair<std::string, std::string>> overrides(args.overrides.begin(),
                                                               args.overrides.end());
    apply_config_overrides(config_json, overrides);
    if (!args.out_path.empty()) config_json["output_path"] = args.out_path;
    if (args.deterministic) config_json["deterministic"] = true;

    RunConfig config = run_config_from_json(config_json);
    if (config.output_path.empty()) throw ConfigError("no output path (--out or output_path)");
    std::vector<std::string> images = read_lines(args.images_path);
    if (images.empty()) throw ConfigError("image list is empty: " + args.images_path);

    // Each run owns its output file.
    { std::ofstream truncate(config.output_path, std::ios::trunc); }

    std::string started_at = config.deterministic ? "1970-01-01T00:00:00Z" : now_rfc3339_utc();
    BatchResult result = run_batch(images, config, args.parallelism);
    std::string finished_at = config.deterministic ? "1970-01-01T00:00:00Z" : now_rfc3339_utc();

    write_run_manifest(config.output_path,
                       build_run_manifest(config, started_at, finished_at, images.size(),
                                          result.failures));

    std::cout << "captioned " << result.transcripts.size() << "/" << images.size() << " images -> "
              << config.output_path << "\n";
    for (const auto& failure : result.failures)
        std::cerr << "failed: " << failure.image_ref << " (turn " << failure.turn
                  << "): " << failure.cause << "\n";
    return result.failures.empty() ? kExitOk : kExitPartialFailure;
}

struct EvalArgs {
    std::string transcripts_path;
    std::string metric = "all";
    std::string labels_path;
    std::string wordnet_dir;
    std::string taxonomy_tsv;
    std::string baseline_path;
    bool include_first = false;
    bool json_only = false;
};

int cmd_eval(const EvalArgs& args) {
    std::vector<Transcript> transcripts = load_transcripts(args.transcripts_path);
    bool questioner_only = !args.include_first;

    bool want_unique = args.metric == "unique" || args.metric == "all";
    bool want_yesno = args.metric == "yesno" || args.metric == "all";
    bool want_uncertain = args.metric == "uncertain" || args.metric == "all";
    bool want_coverage = args.metric == "coverage" ||
                         (args.metric == "all" && !args.labels_path.empty());

    MetricsReport report;
    std::string tables;

    std::size_t questions_considered = 0;
    std::size_t turns_per_dialogue = 0;
    for (const auto& t : transcripts)
        turns_per_dialogue = std::max(turns_per_dialogue, t.turns.size());
    std::size_t per_dialogue_denominator =
        questioner_only && turns_per_dialogue > 0 ? turns_per_dialogue - 1 : turns_per_dialogue;
    for (const auto& t : transcripts)
        questions_considered += t.turns.size() - (questioner_only && !t.turns.empty() ? 1 : 0);

    if (want_unique) {
        UniqueQuestionStats stats = unique_question_stats(transcripts, questioner_only);
        report.per_dialogue_unique_mean = stats.per_dialogue_unique_mean;
        report.total_unique = stats.total_unique;
        report.total_questions = stats.total_questions;
        tables += render_unique_table(stats, per_dialogue_denominator);
        tables += "\n";
    } else {
        report.total_questions = questions_considered;
    }

    if (want_yesno) {
        report.yes_no_count = count_yes_no_questions(transcripts, questioner_only);
        tables += "yes/no questions: " + std::to_string(report.yes_no_count) + "/" +
                  std::to_string(questions_considered) + " (" +
                  format_count_pct(report.yes_no_count, questions_considered) + ")\n";
    }

    if (want_uncertain) {
        report.uncertain_answer_count = count_uncertain_answers(transcripts, questioner_only);
        tables += "uncertain answers: " + std::to_string(report.uncertain_answer_count) + "/" +
                  std::to_string(questions_considered) + " (" +
                  format_count_pct(report.uncertain_answer_count, questions_considered) + ")\n";
    }

    if (want_coverage) {
        if (args.labels_path.empty())
            throw ConfigError("--metric coverage requires --labels");
        if (args.wordnet_dir.empty() == args.taxonomy_tsv.empty())
            throw ConfigError("coverage requires exactly one of --wordnet-dir or --taxonomy-tsv");
        Taxonomy taxonomy = args.taxonomy_tsv.empty() ? parse_wordnet_nouns(args.wordnet_dir)
                                                      : parse_tsv_taxonomy(args.taxonomy_tsv);
        auto labels = load_labels_jsonl(args.labels_path);

        auto captions_of = [](const std::vector<Transcript>& ts) {
            std::map<std::string, std::string> captions;
            for (const auto& t : ts) captions[t.image_ref] = t.caption.value_or("");
            return captions;
        };
        CoverageCounts counts = object_coverage(captions_of(transcripts), labels, taxonomy);
        report.objects_covered = counts.objects_covered;
        report.objects_total = counts.objects_total;
        report.coverage_ratio = counts.ratio();

        std::vector<CoverageRow> rows;
        if (!args.baseline_path.empty()) {
            std::vector<Transcript> baseline = load_transcripts(args.baseline_path);
            CoverageCounts base = object_coverage(captions_of(baseline), labels, taxonomy);
            rows.push_back({"baseline", base.objects_covered, base.objects_total});
        }
        rows.push_back({"captions", counts.objects_covered, counts.objects_total});
        tables += render_coverage_table(rows);
    }

    if (args.json_only) {
        std::cout << to_json(report).dump(2) << "\n";
    } else {
        std::cout << tables;
        std::cout << to_json(report).dump() << "\n";
    }
    return kExitOk;
}

struct ReplayArgs {
    std::string transcripts_path;
    std::string id;
    bool json = false;
};

int cmd_replay(const ReplayArgs& args) {
    std::vector<Transcript> transcripts = load_transcripts(args.transcripts_path);
    const Transcript* found = nullptr;
    for (const auto& t : transcripts)
        if (t.image_ref == args.id) found = &t;  // last record wins
    if (found == nullptr) {
        std::cerr << "no transcript for image: " << args.id << "\n";
        return kExitConfigError;
    }
    if (args.json) {
        std::cout << to_jsonl_line(*found) << "\n";
        return kExitOk;
    }
    std::cout << "image: " << found->image_ref << "\n";
    std::cout << "created: " << found->created_at << "\n\n";
    for (const auto& turn : found->turns) {
        std::cout << "Question: " << turn.question << "\n";
        std::cout << "Answer: " << (turn.answered() ? turn.answer : "<none>") << "\n";
    }
    std::cout << "\ncaption: " << (found->caption ? *found->caption : "<none>") << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dialogue-driven image captioning and evaluation"};
    app.require_subcommand(1);

    CaptionArgs caption_args;
    auto* caption = app.add_subcommand("caption", "run captioning dialogues over an image list");
    caption->add_option("--config", caption_args.config_path, "run config file (TOML or JSON)")
        ->required();
    caption->add_option("--images", caption_args.images_path, "file with one image_ref per line")
        ->required();
    caption->add_option("--out", caption_args.out_path, "output transcripts JSONL");
    caption->add_option("--parallelism", caption_args.parallelism, "dialogues in flight")
        ->check(CLI::PositiveNumber);
    caption->add_flag("--deterministic", caption_args.deterministic,
                      "zero timestamps for reproducible output bytes");
    for (const std::string& key : config_override_keys())
        caption->add_option_function<std::string>(
            "--" + key,
            [&caption_args, key](const std::string& value) { caption_args.overrides[key] = value; },
            "override config field " + key);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "compute metrics over a transcript corpus");
    eval->add_option("transcripts", eval_args.transcripts_path, "transcripts JSONL")->required();
    eval->add_option("--metric", eval_args.metric, "unique|yesno|uncertain|coverage|all")
        ->check(CLI::IsMember({"unique", "yesno", "uncertain", "coverage", "all"}));
    eval->add_option("--labels", eval_args.labels_path, "labels JSONL for coverage");
    eval->add_option("--wordnet-dir", eval_args.wordnet_dir, "directory with data.noun/index.noun");
    eval->add_option("--taxonomy-tsv", eval_args.taxonomy_tsv, "TSV mini-taxonomy");
    eval->add_option("--baseline", eval_args.baseline_path,
                     "baseline transcripts JSONL for the Improved column");
    eval->add_flag("--include-first", eval_args.include_first,
                   "include the hard-coded first question in question metrics");
    eval->add_flag("--json", eval_args.json_only, "print the JSON report only");

    ReplayArgs replay_args;
    auto* replay = app.add_subcommand("replay", "pretty-print one dialogue");
    replay->add_option("transcripts", replay_args.transcripts_path, "transcripts JSONL")
        ->required();
    replay->add_option("--id", replay_args.id, "image_ref to replay")->required();
    replay->add_flag("--json", replay_args.json, "echo the raw JSONL record");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (caption->parsed()) return cmd_caption(caption_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (replay->parsed()) return cmd_replay(replay_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const MissingFile& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
    return kExitConfigError;
}
