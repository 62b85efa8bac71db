#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dialogcap {

struct Synset {
    std::vector<std::string> lemmas;     // lowercase, underscores preserved
    std::vector<std::string> hypernyms;  // parent synset ids
};

// Noun hypernym DAG with a lemma index. A virtual root sits above every
// otherwise-parentless synset, so any two synsets share at least one ancestor.
// Immutable after construction; all queries are const and thread-safe.
class Taxonomy {
public:
    static constexpr const char* kVirtualRoot = "*ROOT*";

    // `synsets` maps id -> Synset with hypernym ids that either exist in the
    // map or are absent from it (-> DanglingEdge). Cycles raise CyclicTaxonomy
    // listing one offending loop. `sense_order`, when given, reorders each
    // lemma's synset list (ids missing from the hint keep insertion order).
    static Taxonomy build(
        std::unordered_map<std::string, Synset> synsets,
        const std::unordered_map<std::string, std::vector<std::string>>& sense_order = {});

    bool contains(const std::string& id) const { return synsets_.count(id) != 0; }
    const Synset& synset(const std::string& id) const;  // throws UnknownSynset

    // Noun synsets of a lemma, in sense order; empty for unknown lemmas.
    const std::vector<std::string>& synsets_of(const std::string& lemma) const;

    // Node count on the longest root-to-id hypernym path; the virtual root has
    // depth 1.
    int depth(const std::string& id) const;  // throws UnknownSynset

    // True iff a is reachable from b or b from a via hypernym edges
    // (reflexive: in_closure(x, x) is true).
    bool in_closure(const std::string& a, const std::string& b) const;

    // max over common hypernyms c of 2*depth(c) / (depth_via(a,c) + depth_via(b,c))
    // where depth_via(x,c) = depth(c) + min hypernym-edge count from x to c.
    // The virtual root guarantees a result in (0, 1].
    double wup_similarity(const std::string& a, const std::string& b) const;

    // Ancestor ids (including `id` itself) with their minimal edge distance.
    std::unordered_map<std::string, int> ancestors(const std::string& id) const;

    // Real synsets only (the virtual root is excluded).
    std::vector<std::string> ids() const;
    std::size_t size() const { return synsets_.size() - 1; }

    const std::unordered_map<std::string, std::vector<std::string>>& lemma_index() const {
        return lemma_index_;
    }

private:
    std::unordered_map<std::string, Synset> synsets_;
    std::unordered_map<std::string, std::vector<std::string>> lemma_index_;
    std::unordered_map<std::string, int> depths_;
};

// Parses Princeton WNDB `data.noun` + `index.noun` from a directory. Only
// hypernym pointers (`@`, `@i`) between noun synsets are kept; lemmas are
// lowercased with underscores preserved. index.noun supplies the sense order
// of each lemma's synsets. Throws MissingFile and MalformedLine.
Taxonomy parse_wordnet_nouns(const std::string& db_dir);

// TSV rows: synset_id TAB comma-separated lemmas TAB comma-separated hypernym
// ids (empty for roots). Same semantics as parse_wordnet_nouns output.
Taxonomy parse_tsv_taxonomy(const std::string& path);
Taxonomy parse_tsv_taxonomy_text(const std::string& text, const std::string& file_name = "<tsv>");

// Inverse of parse_tsv_taxonomy: rows sorted by id, virtual-root edges
// rendered as empty hypernym lists. Reparsing yields an isomorphic graph.
std::string to_tsv(const Taxonomy& taxonomy);

}  // namespace dialogcap
