#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dialogcap/dialogue.hpp"
#include "dialogcap/pipeline.hpp"

using namespace dialogcap;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dialogcap-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string g_cli_path;  // set in main

RunResult run_cli(const std::string& args, const TempDir& dir) {
    fs::path out = dir.path / "stdout.txt";
    fs::path err = dir.path / "stderr.txt";
    std::string command = g_cli_path + " " + args + " > " + out.string() + " 2> " + err.string();
    int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

const char* kScriptedConfig = R"cfg(
total_questions = 3

[questioner]
kind = "scripted"
responses = ["What color is it?", "Is it large? Answer: yes"]

[answerer]
kind = "scripted"
responses = ["a dog by a tree", "brown", "I don't know"]

[summarizer]
kind = "scripted"
responses = ["A brown dog sits by a tree."]
)cfg";

std::vector<std::string> nonempty_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("missing config file exits with code 2") {
    TempDir dir;
    write_file(dir.path / "images.txt", "img-1\n");
    auto result = run_cli("caption --config " + (dir.path / "absent.toml").string() +
                              " --images " + (dir.path / "images.txt").string() + " --out " +
                              (dir.path / "out.jsonl").string(),
                          dir);
    CHECK(result.exit_code == 2);
    CHECK(!result.err.empty());
}

TEST_CASE("bad usage exits with code 2") {
    TempDir dir;
    auto result = run_cli("caption", dir);  // required flags missing
    CHECK(result.exit_code == 2);
    auto unknown = run_cli("frobnicate", dir);
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("caption runs a scripted batch end to end") {
    TempDir dir;
    write_file(dir.path / "c.toml", kScriptedConfig);
    write_file(dir.path / "images.txt", "img-1\nimg-2\n\nimg-3\n");

    std::string out_path = (dir.path / "out.jsonl").string();
    auto result = run_cli("caption --config " + (dir.path / "c.toml").string() + " --images " +
                              (dir.path / "images.txt").string() + " --out " + out_path +
                              " --deterministic",
                          dir);
    CHECK(result.exit_code == 0);

    std::vector<Transcript> transcripts = load_transcripts(out_path);
    REQUIRE(transcripts.size() == 3);
    for (const auto& t : transcripts) {
        CHECK(t.turns.size() == 3);
        CHECK(t.turns[0].question == "Describe the image in detail.");
        CHECK(t.caption == "A brown dog sits by a tree.");
        CHECK(t.created_at == "1970-01-01T00:00:00Z");
        // trim_question cut the fabricated answer
        CHECK(t.turns[2].question == "Is it large?");
    }

    CHECK(fs::exists(out_path + ".manifest.json"));
    json manifest = json::parse(slurp(out_path + ".manifest.json"));
    CHECK(manifest.at("images_total") == 3);
    CHECK(manifest.at("images_failed") == 0);

    SUBCASE("replay prints the dialogue in order") {
        auto replay = run_cli("replay " + out_path + " --id img-2", dir);
        CHECK(replay.exit_code == 0);
        auto q1 = replay.out.find("Question: Describe the image in detail.");
        auto a1 = replay.out.find("Answer: a dog by a tree");
        auto q2 = replay.out.find("Question: What color is it?");
        auto a2 = replay.out.find("Answer: brown");
        auto cap = replay.out.find("caption: A brown dog sits by a tree.");
        CHECK(q1 != std::string::npos);
        CHECK(a1 != std::string::npos);
        CHECK(q2 != std::string::npos);
        CHECK(a2 != std::string::npos);
        CHECK(cap != std::string::npos);
        CHECK(q1 < a1);
        CHECK(a1 < q2);
        CHECK(q2 < a2);
        CHECK(a2 < cap);
    }

    SUBCASE("replay --json echoes the raw record") {
        auto replay = run_cli("replay " + out_path + " --id img-1 --json", dir);
        CHECK(replay.exit_code == 0);
        Transcript echoed = transcript_from_jsonl_line(nonempty_lines(replay.out).at(0), 1);
        CHECK(echoed == transcripts[0]);
    }

    SUBCASE("replay with an unknown id exits 2") {
        auto replay = run_cli("replay " + out_path + " --id nope", dir);
        CHECK(replay.exit_code == 2);
    }

    SUBCASE("eval computes question metrics") {
        auto eval = run_cli("eval " + out_path + " --metric unique", dir);
        CHECK(eval.exit_code == 0);
        // 2 questioner questions per dialogue, both unique within a dialogue
        CHECK(eval.out.find("Per Dialogue   2/2") != std::string::npos);
        CHECK(eval.out.find("All Questions  2/6") != std::string::npos);
    }

    SUBCASE("eval yes/no ratio uses 0 decimals") {
        auto eval = run_cli("eval " + out_path + " --metric yesno", dir);
        CHECK(eval.exit_code == 0);
        // 1 of 2 questioner questions per dialogue starts with an auxiliary
        CHECK(eval.out.find("yes/no questions: 3/6 (50%)") != std::string::npos);
    }

    SUBCASE("eval uncertain answers") {
        auto eval = run_cli("eval " + out_path + " --metric uncertain", dir);
        CHECK(eval.exit_code == 0);
        CHECK(eval.out.find("uncertain answers: 3/6 (50%)") != std::string::npos);
    }

    SUBCASE("eval --json emits the report only") {
        auto eval = run_cli("eval " + out_path + " --metric all --json", dir);
        CHECK(eval.exit_code == 0);
        json report = json::parse(eval.out);
        CHECK(report.at("total_questions") == 6);
        CHECK(report.at("yes_no_count") == 3);
    }
}

TEST_CASE("caption flag overrides beat the config file") {
    TempDir dir;
    write_file(dir.path / "c.toml", kScriptedConfig);
    write_file(dir.path / "images.txt", "img-1\n");
    std::string out_path = (dir.path / "out.jsonl").string();

    auto result = run_cli("caption --config " + (dir.path / "c.toml").string() + " --images " +
                              (dir.path / "images.txt").string() + " --out " + out_path +
                              " --deterministic --total_questions 2 --first_question " +
                              "\"What do you see?\"",
                          dir);
    CHECK(result.exit_code == 0);
    auto transcripts = load_transcripts(out_path);
    REQUIRE(transcripts.size() == 1);
    CHECK(transcripts[0].turns.size() == 2);
    CHECK(transcripts[0].turns[0].question == "What do you see?");
}

TEST_CASE("a failing image yields exit 1 and a caption-less partial line") {
    httplib::Server server;
    server.Post("/vqa", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = json::parse(req.body);
        if (body.at("image_ref") == "img-bad") {
            res.status = 404;
            res.set_content(json{{"error", "image_unavailable"}}.dump(), "application/json");
        } else {
            res.set_content(json{{"answer", "a scene"}}.dump(), "application/json");
        }
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir;
    std::string config =
        "total_questions = 3\n"
        "\n"
        "[questioner]\n"
        "kind = \"scripted\"\n"
        "responses = [\"What color is it?\", \"Is it large?\"]\n"
        "\n"
        "[answerer]\n"
        "kind = \"vqa_http\"\n"
        "endpoint = \"http://127.0.0.1:" + std::to_string(port) + "\"\n"
        "max_retries = 0\n"
        "\n"
        "[summarizer]\n"
        "kind = \"scripted\"\n"
        "responses = [\"A brown dog sits by a tree.\"]\n";
    write_file(dir.path / "c.toml", config);
    write_file(dir.path / "images.txt", "img-1\nimg-bad\nimg-3\n");

    std::string out_path = (dir.path / "out.jsonl").string();
    auto result = run_cli("caption --config " + (dir.path / "c.toml").string() + " --images " +
                              (dir.path / "images.txt").string() + " --out " + out_path +
                              " --deterministic",
                          dir);
    server.stop();
    listener.join();

    CHECK(result.exit_code == 1);
    auto transcripts = load_transcripts(out_path);
    REQUIRE(transcripts.size() == 3);
    int with_caption = 0;
    for (const auto& t : transcripts)
        if (t.caption) ++with_caption;
    CHECK(with_caption == 2);
    CHECK(!transcripts[1].caption.has_value());
    CHECK(transcripts[1].image_ref == "img-bad");

    json manifest = json::parse(slurp(out_path + ".manifest.json"));
    CHECK(manifest.at("images_failed") == 1);
    CHECK(manifest.at("failures")[0].at("image_ref") == "img-bad");
}

TEST_CASE("eval coverage on the toy fixture reports 50.0%") {
    TempDir dir;
    write_file(dir.path / "toy.tsv",
               "e\tentity\t\n"
               "a\tanimal\te\n"
               "d\tdog\ta\n"
               "c\tcat\ta\n"
               "t\ttree\te\n");
    write_file(dir.path / "labels.jsonl",
               R"({"image_id": "img-1", "labels": ["dog", "cat"]})"
               "\n");

    Transcript t;
    t.image_ref = "img-1";
    t.turns.push_back(Turn{1, "Describe the image in detail.", "a dog", "", ""});
    t.caption = "a dog by a tree";
    t.created_at = "1970-01-01T00:00:00Z";
    append_transcript((dir.path / "out.jsonl").string(), t);

    auto eval = run_cli("eval " + (dir.path / "out.jsonl").string() +
                            " --metric coverage --labels " + (dir.path / "labels.jsonl").string() +
                            " --taxonomy-tsv " + (dir.path / "toy.tsv").string(),
                        dir);
    CHECK(eval.exit_code == 0);
    CHECK(eval.out.find("1/2") != std::string::npos);
    CHECK(eval.out.find("50.0%") != std::string::npos);
}

TEST_CASE("eval on unreadable input exits 2") {
    TempDir dir;
    auto eval = run_cli("eval " + (dir.path / "absent.jsonl").string() + " --metric unique", dir);
    CHECK(eval.exit_code == 2);

    write_file(dir.path / "bad.jsonl", "{broken\n");
    auto bad = run_cli("eval " + (dir.path / "bad.jsonl").string() + " --metric unique", dir);
    CHECK(bad.exit_code == 2);
}

int main(int argc, char** argv) {
    if (const char* env = std::getenv("DIALOGCAP_CLI")) {
        g_cli_path = env;
    } else {
        g_cli_path =
            (fs::path(argv[0]).parent_path().parent_path() / "tools" / "dialogcap").string();
    }
    return doctest::Context(argc, argv).run();
}
