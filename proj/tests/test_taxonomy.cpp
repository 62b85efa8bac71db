#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "dialogcap/errors.hpp"
#include "dialogcap/taxonomy.hpp"
#include "wup_oracle.hpp"

using namespace dialogcap;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dialogcap-tax-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

// dog -> animal -> entity chain plus a cat sibling; matches the layout of the
// real WNDB files including the leading license block.
const char* kMiniDataNoun =
    "  1 This fixture mimics the WNDB license header and must be skipped.\n"
    "00000001 03 n 01 entity 0 000 | that which exists\n"
    "00000002 05 n 01 animal 0 001 @ 00000001 n 0000 | a living organism\n"
    "00000003 05 n 02 dog 0 domestic_dog 0 001 @ 00000002 n 0000 | a domesticated carnivore\n";

const char* kMiniIndexNoun =
    "  1 Fixture header.\n"
    "entity n 1 0 1 0 00000001\n"
    "animal n 1 1 @ 1 0 00000002\n"
    "dog n 1 1 @ 1 1 00000003\n"
    "domestic_dog n 1 1 @ 1 0 00000003\n";

const char* kToyTsv =
    "e\tentity\t\n"
    "a\tanimal\te\n"
    "d\tdog\ta\n"
    "c\tcat\ta\n";

}  // namespace

TEST_CASE("miniature WNDB fixture parses into the expected chain") {
    TempDir dir;
    write_file(dir.path / "data.noun", kMiniDataNoun);
    write_file(dir.path / "index.noun", kMiniIndexNoun);

    Taxonomy t = parse_wordnet_nouns(dir.path.string());
    CHECK(t.size() == 3);
    CHECK(t.contains("00000001"));
    CHECK(t.contains("00000002"));
    CHECK(t.contains("00000003"));

    CHECK(t.synset("00000003").lemmas == std::vector<std::string>{"dog", "domestic_dog"});
    CHECK(t.synset("00000003").hypernyms == std::vector<std::string>{"00000002"});
    CHECK(t.synset("00000002").hypernyms == std::vector<std::string>{"00000001"});
    CHECK(t.synset("00000001").hypernyms ==
          std::vector<std::string>{Taxonomy::kVirtualRoot});

    CHECK(t.depth(Taxonomy::kVirtualRoot) == 1);
    CHECK(t.depth("00000001") == 2);
    CHECK(t.depth("00000002") == 3);
    CHECK(t.depth("00000003") == 4);

    CHECK(t.synsets_of("dog") == std::vector<std::string>{"00000003"});
    CHECK(t.synsets_of("domestic_dog") == std::vector<std::string>{"00000003"});
    CHECK(t.synsets_of("unknown").empty());
}

TEST_CASE("WNDB parser reports malformed lines with their line number") {
    TempDir dir;
    write_file(dir.path / "index.noun", kMiniIndexNoun);

    SUBCASE("non-hex word count") {
        write_file(dir.path / "data.noun",
                   "00000001 03 n 01 entity 0 000 | ok\n"
                   "00000002 05 n zz bird 0 000 | bad word count\n");
        try {
            parse_wordnet_nouns(dir.path.string());
            FAIL("expected MalformedLine");
        } catch (const MalformedLine& e) {
            CHECK(e.file == "data.noun");
            CHECK(e.line_number == 2);
        }
    }

    SUBCASE("truncated line") {
        write_file(dir.path / "data.noun",
                   "00000001 03 n 01 entity 0 000 | ok\n"
                   "00000002 05 n 01 cat 0\n");
        try {
            parse_wordnet_nouns(dir.path.string());
            FAIL("expected MalformedLine");
        } catch (const MalformedLine& e) {
            CHECK(e.line_number == 2);
        }
    }

    SUBCASE("bad synset offset") {
        write_file(dir.path / "data.noun", "123 03 n 01 entity 0 000 | bad offset\n");
        CHECK_THROWS_AS(parse_wordnet_nouns(dir.path.string()), MalformedLine);
    }

    SUBCASE("bad pointer block") {
        write_file(dir.path / "data.noun",
                   "00000001 03 n 01 entity 0 001 @ 0002 n 0000 | short pointer offset\n");
        CHECK_THROWS_AS(parse_wordnet_nouns(dir.path.string()), MalformedLine);
    }
}

TEST_CASE("missing WNDB files raise MissingFile") {
    TempDir dir;
    CHECK_THROWS_AS(parse_wordnet_nouns(dir.path.string()), MissingFile);
    write_file(dir.path / "data.noun", "00000001 03 n 01 entity 0 000 | ok\n");
    CHECK_THROWS_AS(parse_wordnet_nouns(dir.path.string()), MissingFile);
}

TEST_CASE("synsets with no pointers attach to the virtual root") {
    TempDir dir;
    write_file(dir.path / "data.noun",
               "00000001 03 n 01 entity 0 000 | root synset\n"
               "00000002 03 n 01 abstraction 0 000 | another root\n");
    write_file(dir.path / "index.noun",
               "entity n 1 0 1 0 00000001\n"
               "abstraction n 1 0 1 0 00000002\n");
    Taxonomy t = parse_wordnet_nouns(dir.path.string());
    CHECK(t.synset("00000002").hypernyms == std::vector<std::string>{Taxonomy::kVirtualRoot});
    CHECK(t.wup_similarity("00000001", "00000002") > 0.0);
}

TEST_CASE("TSV taxonomy parses the toy graph") {
    Taxonomy t = parse_tsv_taxonomy_text(kToyTsv);
    CHECK(t.size() == 4);
    CHECK(t.depth("e") == 2);
    CHECK(t.depth("a") == 3);
    CHECK(t.depth("d") == 4);
    CHECK(t.synsets_of("cat") == std::vector<std::string>{"c"});
}

TEST_CASE("TSV parser rejects bad inputs") {
    CHECK_THROWS_AS(parse_tsv_taxonomy_text("d\tdog\tmissing\n"), DanglingEdge);
    CHECK_THROWS_AS(parse_tsv_taxonomy_text("x\tself\tx\n"), CyclicTaxonomy);
    CHECK_THROWS_AS(parse_tsv_taxonomy_text("a\tlemma_a\tb\nb\tlemma_b\ta\n"), CyclicTaxonomy);
    CHECK_THROWS_AS(parse_tsv_taxonomy_text("only_one_field\n"), MalformedLine);
    CHECK_THROWS_AS(parse_tsv_taxonomy_text("a\tx\t\na\ty\t\n"), MalformedLine);

    try {
        parse_tsv_taxonomy_text("a\tlemma_a\tb\nb\tlemma_b\tc\nc\tlemma_c\ta\n");
        FAIL("expected CyclicTaxonomy");
    } catch (const CyclicTaxonomy& e) {
        CHECK(e.cycle.size() >= 3);
    }
}

TEST_CASE("wup_similarity matches the hand-computed toy values") {
    Taxonomy t = parse_tsv_taxonomy_text(kToyTsv);
    // depths: root 1, entity 2, animal 3, dog/cat 4
    CHECK(t.wup_similarity("d", "c") == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(t.wup_similarity("d", "d") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.wup_similarity("d", "e") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(t.wup_similarity("d", "nope"), UnknownSynset);
}

TEST_CASE("in_closure is reflexive and two-directional") {
    Taxonomy t = parse_tsv_taxonomy_text(kToyTsv);
    CHECK(t.in_closure("d", "a"));
    CHECK(t.in_closure("a", "d"));
    CHECK(!t.in_closure("d", "c"));
    CHECK(t.in_closure("d", "d"));
    CHECK_THROWS_AS(t.in_closure("d", "nope"), UnknownSynset);
}

TEST_CASE("wup_similarity equals the exhaustive-path oracle on random DAGs") {
    std::mt19937 rng(4242);
    for (int taxonomy_index = 0; taxonomy_index < 6; ++taxonomy_index) {
        Taxonomy t = parse_tsv_taxonomy_text(wup_oracle::random_taxonomy_tsv(rng, 50));
        std::vector<std::string> ids = t.ids();

        std::unordered_map<std::string, int> depths;
        depths[Taxonomy::kVirtualRoot] = 1;
        for (const auto& id : ids) {
            depths[id] = wup_oracle::depth(t, id);
            CHECK(depths[id] == t.depth(id));
        }

        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i; j < ids.size(); ++j) {
                double expected = wup_oracle::wup(t, ids[i], ids[j], depths);
                double actual = t.wup_similarity(ids[i], ids[j]);
                CHECK(std::abs(actual - expected) < 1e-12);
                // symmetry and range come along for free
                CHECK(t.wup_similarity(ids[j], ids[i]) == doctest::Approx(actual).epsilon(1e-12));
                CHECK(actual > 0.0);
                CHECK(actual <= 1.0 + 1e-12);
            }
            CHECK(t.wup_similarity(ids[i], ids[i]) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("lemma index is the exact inverse of the synset lemma lists") {
    std::mt19937 rng(777);
    Taxonomy t = parse_tsv_taxonomy_text(wup_oracle::random_taxonomy_tsv(rng, 40));
    for (const auto& id : t.ids())
        for (const auto& lemma : t.synset(id).lemmas) {
            const auto& ids = t.synsets_of(lemma);
            CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
        }
    for (const auto& [lemma, ids] : t.lemma_index())
        for (const auto& id : ids) {
            const auto& lemmas = t.synset(id).lemmas;
            CHECK(std::find(lemmas.begin(), lemmas.end(), lemma) != lemmas.end());
        }
}

TEST_CASE("TSV round-trip yields an isomorphic graph") {
    std::mt19937 rng(2025);
    for (int trial = 0; trial < 5; ++trial) {
        Taxonomy original = parse_tsv_taxonomy_text(wup_oracle::random_taxonomy_tsv(rng, 30));
        Taxonomy reparsed = parse_tsv_taxonomy_text(to_tsv(original));

        CHECK(original.ids() == reparsed.ids());
        for (const auto& id : original.ids()) {
            auto lemmas_a = original.synset(id).lemmas;
            auto lemmas_b = reparsed.synset(id).lemmas;
            std::sort(lemmas_a.begin(), lemmas_a.end());
            std::sort(lemmas_b.begin(), lemmas_b.end());
            CHECK(lemmas_a == lemmas_b);

            auto parents_a = original.synset(id).hypernyms;
            auto parents_b = reparsed.synset(id).hypernyms;
            std::sort(parents_a.begin(), parents_a.end());
            std::sort(parents_b.begin(), parents_b.end());
            CHECK(parents_a == parents_b);
            CHECK(original.depth(id) == reparsed.depth(id));
        }
    }

    TempDir dir;
    write_file(dir.path / "data.noun", kMiniDataNoun);
    write_file(dir.path / "index.noun", kMiniIndexNoun);
    Taxonomy from_wndb = parse_wordnet_nouns(dir.path.string());
    Taxonomy reparsed = parse_tsv_taxonomy_text(to_tsv(from_wndb));
    CHECK(from_wndb.ids() == reparsed.ids());
    CHECK(reparsed.synsets_of("domestic_dog") == std::vector<std::string>{"00000003"});
}

TEST_CASE("index.noun sense order drives synsets_of ordering") {
    TempDir dir;
    write_file(dir.path / "data.noun",
               "00000001 03 n 01 entity 0 000 | root\n"
               "00000002 05 n 01 bank 0 001 @ 00000001 n 0000 | river bank\n"
               "00000003 05 n 01 bank 0 001 @ 00000001 n 0000 | money bank\n");
    // index.noun puts the money sense first even though its offset is larger
    write_file(dir.path / "index.noun",
               "entity n 1 0 1 0 00000001\n"
               "bank n 2 1 @ 2 2 00000003 00000002\n");
    Taxonomy t = parse_wordnet_nouns(dir.path.string());
    CHECK(t.synsets_of("bank") == std::vector<std::string>{"00000003", "00000002"});
}
