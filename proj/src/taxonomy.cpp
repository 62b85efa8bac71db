#include "dialogcap/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dialogcap/errors.hpp"
#include "dialogcap/text.hpp"

namespace dialogcap {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

bool all_hex(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isxdigit(c) != 0;
    });
}

// Finds a cycle in the hypernym graph via iterative coloring DFS. Returns the
// node sequence of one loop, or empty when the graph is acyclic.
std::vector<std::string> find_cycle(const std::unordered_map<std::string, Synset>& synsets) {
    enum class Color { white, gray, black };
    std::unordered_map<std::string, Color> color;
    for (const auto& [id, _] : synsets) color[id] = Color::white;

    std::vector<std::string> stack;
    // frame: (node, next hypernym position)
    std::vector<std::pair<std::string, std::size_t>> frames;
    for (const auto& [start, _] : synsets) {
        if (color[start] != Color::white) continue;
        frames.emplace_back(start, 0);
        color[start] = Color::gray;
        stack.push_back(start);
        while (!frames.empty()) {
            auto& [node, next] = frames.back();
            const auto& hypernyms = synsets.at(node).hypernyms;
            if (next < hypernyms.size()) {
                const std::string& parent = hypernyms[next++];
                auto it = color.find(parent);
                if (it == color.end()) continue;  // dangling, reported elsewhere
                if (it->second == Color::gray) {
                    auto from = std::find(stack.begin(), stack.end(), parent);
                    std::vector<std::string> cycle(from, stack.end());
                    cycle.push_back(parent);
                    return cycle;
                }
                if (it->second == Color::white) {
                    it->second = Color::gray;
                    frames.emplace_back(parent, 0);
                    stack.push_back(parent);
                }
            } else {
                color[node] = Color::black;
                frames.pop_back();
                stack.pop_back();
            }
        }
    }
    return {};
}

}  // namespace

Taxonomy Taxonomy::build(
    std::unordered_map<std::string, Synset> synsets,
    const std::unordered_map<std::string, std::vector<std::string>>& sense_order) {
    for (const auto& [id, synset] : synsets) {
        for (const auto& parent : synset.hypernyms)
            if (synsets.count(parent) == 0) throw DanglingEdge(id, parent);
    }

    auto cycle = find_cycle(synsets);
    if (!cycle.empty()) throw CyclicTaxonomy(std::move(cycle));

    // Parentless synsets hang off the virtual root.
    for (auto& [id, synset] : synsets)
        if (synset.hypernyms.empty()) synset.hypernyms.emplace_back(kVirtualRoot);
    synsets[kVirtualRoot] = Synset{};

    Taxonomy t;
    t.synsets_ = std::move(synsets);

    // Longest path from the root, computed as a DP over the DAG.
    for (const auto& [id, _] : t.synsets_) {
        // depth(x) = 1 + max over parents; iterative post-order on parents.
        if (t.depths_.count(id)) continue;
        std::vector<std::string> work{id};
        while (!work.empty()) {
            std::string cur = work.back();
            if (t.depths_.count(cur)) {
                work.pop_back();
                continue;
            }
            const auto& parents = t.synsets_.at(cur).hypernyms;
            int best = 0;
            bool ready = true;
            for (const auto& p : parents) {
                auto it = t.depths_.find(p);
                if (it == t.depths_.end()) {
                    work.push_back(p);
                    ready = false;
                } else {
                    best = std::max(best, it->second);
                }
            }
            if (ready) {
                t.depths_[cur] = parents.empty() ? 1 : best + 1;
                work.pop_back();
            }
        }
    }

    for (const auto& [id, synset] : t.synsets_)
        for (const auto& lemma : synset.lemmas) t.lemma_index_[lemma].push_back(id);

    // Stable default order, then sense order where known.
    for (auto& [lemma, ids] : t.lemma_index_) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        auto hint = sense_order.find(lemma);
        if (hint == sense_order.end()) continue;
        std::vector<std::string> ordered;
        for (const auto& id : hint->second) {
            auto it = std::find(ids.begin(), ids.end(), id);
            if (it != ids.end()) {
                ordered.push_back(*it);
                ids.erase(it);
            }
        }
        ordered.insert(ordered.end(), ids.begin(), ids.end());
        ids = std::move(ordered);
    }
    return t;
}

const Synset& Taxonomy::synset(const std::string& id) const {
    auto it = synsets_.find(id);
    if (it == synsets_.end()) throw UnknownSynset(id);
    return it->second;
}

const std::vector<std::string>& Taxonomy::synsets_of(const std::string& lemma) const {
    static const std::vector<std::string> empty;
    auto it = lemma_index_.find(lemma);
    return it == lemma_index_.end() ? empty : it->second;
}

int Taxonomy::depth(const std::string& id) const {
    auto it = depths_.find(id);
    if (it == depths_.end()) throw UnknownSynset(id);
    return it->second;
}

std::unordered_map<std::string, int> Taxonomy::ancestors(const std::string& id) const {
    if (!contains(id)) throw UnknownSynset(id);
    std::unordered_map<std::string, int> dist{{id, 0}};
    std::deque<std::string> queue{id};
    while (!queue.empty()) {
        std::string cur = std::move(queue.front());
        queue.pop_front();
        int d = dist[cur];
        for (const auto& parent : synsets_.at(cur).hypernyms) {
            auto it = dist.find(parent);
            if (it == dist.end() || it->second > d + 1) {
                dist[parent] = d + 1;
                queue.push_back(parent);
            }
        }
    }
    return dist;
}

bool Taxonomy::in_closure(const std::string& a, const std::string& b) const {
    auto up_a = ancestors(a);
    if (up_a.count(b)) return true;
    auto up_b = ancestors(b);
    return up_b.count(a) != 0;
}

double Taxonomy::wup_similarity(const std::string& a, const std::string& b) const {
    auto up_a = ancestors(a);
    auto up_b = ancestors(b);
    double best = 0.0;
    for (const auto& [candidate, dist_a] : up_a) {
        auto it = up_b.find(candidate);
        if (it == up_b.end()) continue;
        double d = depth(candidate);
        double via_a = d + dist_a;
        double via_b = d + it->second;
        best = std::max(best, 2.0 * d / (via_a + via_b));
    }
    return best;
}

std::vector<std::string> Taxonomy::ids() const {
    std::vector<std::string> out;
    out.reserve(synsets_.size());
    for (const auto& [id, _] : synsets_)
        if (id != kVirtualRoot) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// One data.noun line:
//   offset lex_filenum ss_type w_cnt (word lex_id)+ p_cnt (symbol offset pos src/tgt)* | gloss
Synset parse_data_line(const std::string& file, std::size_t line_number, const std::string& line,
                       std::string& id_out) {
    std::string fields = line.substr(0, line.find('|'));
    std::vector<std::string> tok = split_ws(fields);
    std::size_t pos = 0;
    auto next = [&](const char* what) -> const std::string& {
        if (pos >= tok.size())
            throw MalformedLine(file, line_number, std::string("truncated line, expected ") + what);
        return tok[pos++];
    };

    const std::string& offset = next("synset offset");
    if (offset.size() != 8 || !all_digits(offset))
        throw MalformedLine(file, line_number, "bad synset offset: " + offset);
    id_out = offset;

    const std::string& lex_filenum = next("lex_filenum");
    if (lex_filenum.size() != 2 || !all_digits(lex_filenum))
        throw MalformedLine(file, line_number, "bad lex_filenum: " + lex_filenum);

    const std::string& ss_type = next("ss_type");
    if (ss_type != "n")
        throw MalformedLine(file, line_number, "ss_type is not 'n': " + ss_type);

    const std::string& w_cnt_hex = next("word count");
    if (w_cnt_hex.size() != 2 || !all_hex(w_cnt_hex))
        throw MalformedLine(file, line_number, "word count is not 2-digit hex: " + w_cnt_hex);
    int w_cnt = std::stoi(w_cnt_hex, nullptr, 16);
    if (w_cnt < 1) throw MalformedLine(file, line_number, "word count must be >= 1");

    Synset synset;
    for (int i = 0; i < w_cnt; ++i) {
        synset.lemmas.push_back(casefold(next("word")));
        const std::string& lex_id = next("lex_id");
        if (lex_id.size() != 1 || !all_hex(lex_id))
            throw MalformedLine(file, line_number, "bad lex_id: " + lex_id);
    }

    const std::string& p_cnt_str = next("pointer count");
    if (p_cnt_str.size() != 3 || !all_digits(p_cnt_str))
        throw MalformedLine(file, line_number, "pointer count is not 3-digit decimal: " + p_cnt_str);
    int p_cnt = std::stoi(p_cnt_str);

    for (int i = 0; i < p_cnt; ++i) {
        const std::string& symbol = next("pointer symbol");
        const std::string& target = next("pointer offset");
        if (target.size() != 8 || !all_digits(target))
            throw MalformedLine(file, line_number, "bad pointer offset: " + target);
        const std::string& target_pos = next("pointer pos");
        const std::string& src_tgt = next("pointer source/target");
        if (src_tgt.size() != 4 || !all_hex(src_tgt))
            throw MalformedLine(file, line_number, "bad pointer source/target: " + src_tgt);
        if ((symbol == "@" || symbol == "@i") && target_pos == "n")
            synset.hypernyms.push_back(target);
    }
    return synset;
}

// index.noun line: lemma pos synset_cnt p_cnt (symbol)* sense_cnt tagsense_cnt offsets...
void parse_index_line(const std::string& file, std::size_t line_number, const std::string& line,
                      std::unordered_map<std::string, std::vector<std::string>>& order) {
    std::vector<std::string> tok = split_ws(line);
    if (tok.size() < 6) throw MalformedLine(file, line_number, "truncated index entry");
    const std::string& lemma = tok[0];
    if (tok[1] != "n") throw MalformedLine(file, line_number, "pos is not 'n': " + tok[1]);
    if (!all_digits(tok[2]) || !all_digits(tok[3]))
        throw MalformedLine(file, line_number, "bad synset/pointer counts");
    std::size_t synset_cnt = std::stoul(tok[2]);
    std::size_t p_cnt = std::stoul(tok[3]);
    std::size_t offsets_at = 4 + p_cnt + 2;  // skip pointer symbols, sense_cnt, tagsense_cnt
    if (tok.size() != offsets_at + synset_cnt)
        throw MalformedLine(file, line_number, "offset count mismatch");
    std::vector<std::string>& ids = order[casefold(lemma)];
    for (std::size_t i = offsets_at; i < tok.size(); ++i) {
        if (tok[i].size() != 8 || !all_digits(tok[i]))
            throw MalformedLine(file, line_number, "bad synset offset: " + tok[i]);
        ids.push_back(tok[i]);
    }
}

}  // namespace

Taxonomy parse_wordnet_nouns(const std::string& db_dir) {
    namespace fs = std::filesystem;
    fs::path data_path = fs::path(db_dir) / "data.noun";
    fs::path index_path = fs::path(db_dir) / "index.noun";
    if (!fs::exists(data_path)) throw MissingFile(data_path.string());
    if (!fs::exists(index_path)) throw MissingFile(index_path.string());

    std::unordered_map<std::string, Synset> synsets;
    {
        std::ifstream in(data_path);
        if (!in) throw MissingFile(data_path.string());
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            if (line.empty() || line.front() == ' ') continue;  // license header
            std::string id;
            Synset synset = parse_data_line("data.noun", line_number, line, id);
            synsets[id] = std::move(synset);
        }
    }

    std::unordered_map<std::string, std::vector<std::string>> sense_order;
    {
        std::ifstream in(index_path);
        if (!in) throw MissingFile(index_path.string());
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            if (line.empty() || line.front() == ' ') continue;
            parse_index_line("index.noun", line_number, line, sense_order);
        }
    }

    return Taxonomy::build(std::move(synsets), sense_order);
}

namespace {

std::vector<std::string> split_csv(const std::string& field) {
    std::vector<std::string> out;
    std::stringstream ss(field);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim_ws(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

Taxonomy parse_tsv_taxonomy_text(const std::string& text, const std::string& file_name) {
    std::unordered_map<std::string, Synset> synsets;
    std::stringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim_ws(line).empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() < 2 || fields.size() > 3)
            throw MalformedLine(file_name, line_number, "expected 2 or 3 tab-separated fields");
        std::string id = trim_ws(fields[0]);
        if (id.empty()) throw MalformedLine(file_name, line_number, "empty synset id");
        if (synsets.count(id))
            throw MalformedLine(file_name, line_number, "duplicate synset id: " + id);
        Synset synset;
        for (auto& lemma : split_csv(fields[1])) synset.lemmas.push_back(casefold(lemma));
        if (fields.size() == 3) synset.hypernyms = split_csv(fields[2]);
        synsets[id] = std::move(synset);
    }
    return Taxonomy::build(std::move(synsets));
}

Taxonomy parse_tsv_taxonomy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_tsv_taxonomy_text(buffer.str(), std::filesystem::path(path).filename().string());
}

std::string to_tsv(const Taxonomy& taxonomy) {
    std::string out;
    for (const auto& id : taxonomy.ids()) {
        const Synset& synset = taxonomy.synset(id);
        out += id;
        out += '\t';
        for (std::size_t i = 0; i < synset.lemmas.size(); ++i) {
            if (i) out += ',';
            out += synset.lemmas[i];
        }
        out += '\t';
        bool first = true;
        for (const auto& parent : synset.hypernyms) {
            if (parent == Taxonomy::kVirtualRoot) continue;
            if (!first) out += ',';
            out += parent;
            first = false;
        }
        out += '\n';
    }
    return out;
}

}  // namespace dialogcap
