// Test-only oracle for Wu-Palmer similarity: enumerates every upward path by
// plain recursive DFS (no memoization, no BFS layering, no topological DP) and
// derives min/max edge counts from the enumeration. Deliberately a different
// route than the library implementation so the two can check each other.
#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>

#include "dialogcap/taxonomy.hpp"

namespace wup_oracle {

inline void enumerate_paths(const dialogcap::Taxonomy& t, const std::string& node, int length,
                            std::unordered_map<std::string, std::pair<int, int>>& reach) {
    auto it = reach.find(node);
    if (it == reach.end()) {
        reach.emplace(node, std::make_pair(length, length));
    } else {
        it->second.first = std::min(it->second.first, length);
        it->second.second = std::max(it->second.second, length);
    }
    for (const auto& parent : t.synset(node).hypernyms)
        enumerate_paths(t, parent, length + 1, reach);
}

// For every ancestor of `node` (including itself): (min edges, max edges).
inline std::unordered_map<std::string, std::pair<int, int>> reach(const dialogcap::Taxonomy& t,
                                                                  const std::string& node) {
    std::unordered_map<std::string, std::pair<int, int>> out;
    enumerate_paths(t, node, 0, out);
    return out;
}

inline int depth(const dialogcap::Taxonomy& t, const std::string& node) {
    if (node == dialogcap::Taxonomy::kVirtualRoot) return 1;
    return 1 + reach(t, node).at(dialogcap::Taxonomy::kVirtualRoot).second;
}

inline double wup(const dialogcap::Taxonomy& t, const std::string& a, const std::string& b,
                  const std::unordered_map<std::string, int>& depths) {
    auto reach_a = reach(t, a);
    auto reach_b = reach(t, b);
    double best = 0.0;
    for (const auto& [candidate, min_max_a] : reach_a) {
        auto it = reach_b.find(candidate);
        if (it == reach_b.end()) continue;
        double d = depths.at(candidate);
        double via_a = d + min_max_a.first;
        double via_b = d + it->second.first;
        best = std::max(best, 2.0 * d / (via_a + via_b));
    }
    return best;
}

// Random DAG with at most `max_nodes` synsets. Nodes only point at
// lower-numbered nodes, and at most 12 nodes get two parents so exhaustive
// path enumeration stays tractable.
inline std::string random_taxonomy_tsv(std::mt19937& rng, int max_nodes) {
    std::uniform_int_distribution<int> size_dist(2, max_nodes);
    std::uniform_int_distribution<int> shape(0, 99);
    int n = size_dist(rng);
    int double_parents = 0;
    std::string tsv;
    for (int i = 0; i < n; ++i) {
        tsv += "n" + std::to_string(i) + "\tw" + std::to_string(i) + "\t";
        if (i > 0) {
            int roll = shape(rng);
            int parents = roll < 10 ? 0 : ((roll < 75 || double_parents >= 12) ? 1 : 2);
            std::uniform_int_distribution<int> pick(0, i - 1);
            if (parents >= 1) {
                int first = pick(rng);
                tsv += "n" + std::to_string(first);
                if (parents == 2) {
                    int second = pick(rng);
                    if (second != first) {
                        tsv += ",n" + std::to_string(second);
                        ++double_parents;
                    }
                }
            }
        }
        tsv += "\n";
    }
    return tsv;
}

}  // namespace wup_oracle
