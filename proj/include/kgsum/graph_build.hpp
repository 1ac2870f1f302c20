#pragma once
// Assembles the full-document knowledge graph from windowed IE output and the
// target graph from abstract-level annotation: span-level mention dedup across
// overlapping windows, per-window coref collapse, cross-window merging of
// clusters that share a non-generic mention string, and edge aggregation.

#include <array>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kgsum/core.hpp"
#include "kgsum/ingest.hpp"
#include "kgsum/text.hpp"

namespace kgsum {

enum class MergePolicy {
    Transitive,  // every cluster sharing the string merges (union-find closure)
    UniquePair,  // merge only when exactly two clusters share the string
};

inline MergePolicy parse_merge_policy(std::string_view s) {
    if (s == "transitive") return MergePolicy::Transitive;
    if (s == "unique-pair") return MergePolicy::UniquePair;
    throw ValidationError("unknown merge policy: " + std::string(s));
}

struct BuildOptions {
    MergePolicy merge_policy = MergePolicy::Transitive;
};

// A mention string is generic unless, after removing pronouns and
// determiners, it has more than one token, or it is a unigram whose IDF
// exceeds the threshold tau.
inline bool is_generic_mention(std::string_view text, const CorpusStats& stats) {
    std::vector<std::string> kept;
    for (const auto& tok : split_whitespace(text)) {
        std::string t = normalize_token(tok);
        if (t.empty() || is_pronoun_or_determiner(t)) continue;
        kept.push_back(std::move(t));
    }
    if (kept.size() > 1) return false;
    if (kept.size() == 1) return stats.idf(kept[0]) <= stats.idf_threshold;
    return true;
}

namespace detail {

// Deterministic union-find; groups are canonicalized by smallest member.
struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);  // smaller index becomes the root
        parent[b] = a;
    }
};

// One mention occurrence after span-level dedup.
struct Occurrence {
    TokenSpan span;
    std::string text;
    EntityType type = EntityType::Generic;
    int section = 0;
    int sentence = 0;
    std::set<int> windows;  // windows referencing this span (-1 for target builds)
};

// Relation mention identity by endpoint occurrence (occurrences are unique
// spans in full builds and individual mentions in target builds).
struct RelationKey {
    int head_occ = 0;
    int tail_occ = 0;
    RelationType type = RelationType::Compare;

    auto operator<=>(const RelationKey&) const = default;
};

}  // namespace detail

// Provenance retained by the detailed build so summary-sentence induction can
// trace nodes and edges back to mention occurrences.
struct FullGraphBuild {
    KnowledgeGraph graph;
    // occurrence index -> node index, plus occurrence positions
    std::vector<detail::Occurrence> occurrences;
    std::vector<int> occurrence_node;
    std::map<TokenSpan, int> span_to_occurrence;
    // deduplicated relation mentions with their final multiplicity
    struct RelationOccurrence {
        TokenSpan head;
        TokenSpan tail;
        RelationType type;
        int count = 1;
    };
    std::vector<RelationOccurrence> relation_occurrences;
};

namespace detail {

// Shared collapse: occurrences + cluster assignment -> nodes and edges.
// Cluster roots come from the union-find; nodes are ordered by their earliest
// occurrence span so node ids are stable under window permutation.
inline FullGraphBuild assemble(const std::string& doc_id, std::vector<Occurrence> occurrences,
                               UnionFind& uf,
                               const std::map<RelationKey, int>& relation_counts) {
    FullGraphBuild out;
    const int n = static_cast<int>(occurrences.size());

    std::map<TokenSpan, int> span_to_occ;
    for (int i = 0; i < n; ++i) span_to_occ[occurrences[i].span] = i;

    // Group occurrences by root, order members by span.
    std::unordered_map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);
    std::vector<std::vector<int>> clusters;
    clusters.reserve(groups.size());
    for (auto& [root, members] : groups) {
        std::sort(members.begin(), members.end(), [&](int a, int b) {
            return std::tie(occurrences[a].span, a) < std::tie(occurrences[b].span, b);
        });
        clusters.push_back(std::move(members));
    }
    std::sort(clusters.begin(), clusters.end(), [&](const auto& a, const auto& b) {
        return std::tie(occurrences[a.front()].span, a.front()) <
               std::tie(occurrences[b.front()].span, b.front());
    });

    std::vector<int> occ_node(n, -1);
    KnowledgeGraph g;
    g.doc_id = doc_id;
    for (size_t c = 0; c < clusters.size(); ++c) {
        EntityNode node;
        node.id = doc_id + ":" + std::to_string(c);
        node.mention_count = static_cast<int>(clusters[c].size());
        node.first_section = occurrences[clusters[c].front()].section;
        std::array<int, kNumEntityTypes> type_counts{};
        std::set<std::string> seen;
        for (int idx : clusters[c]) {
            const Occurrence& occ = occurrences[idx];
            occ_node[idx] = static_cast<int>(c);
            node.first_section = std::min(node.first_section, occ.section);
            ++type_counts[ordinal(occ.type)];
            if (seen.insert(occ.text).second) node.mentions.push_back(occ.text);
        }
        // Dominant type; ties prefer the non-Generic candidate, then enum order.
        int best = 0;
        for (int t = 1; t < kNumEntityTypes; ++t) {
            if (type_counts[t] > type_counts[best]) best = t;
        }
        node.type = static_cast<EntityType>(best);
        g.nodes.push_back(std::move(node));
    }

    // Aggregate relation mentions into unique (src, dst, type) edges.
    std::map<std::tuple<int, int, int>, int> edge_counts;
    for (const auto& [key, count] : relation_counts) {
        int src = occ_node[key.head_occ];
        int dst = occ_node[key.tail_occ];
        if (src == dst) continue;  // endpoints collapsed into one cluster
        edge_counts[{src, dst, ordinal(key.type)}] += count;
    }
    for (const auto& [key, count] : edge_counts) {
        RelationEdge e;
        e.src = g.nodes[std::get<0>(key)].id;
        e.dst = g.nodes[std::get<1>(key)].id;
        e.type = static_cast<RelationType>(std::get<2>(key));
        e.mention_count = count;
        g.edges.push_back(std::move(e));
    }

    for (const auto& [key, count] : relation_counts) {
        out.relation_occurrences.push_back(
            {occurrences[key.head_occ].span, occurrences[key.tail_occ].span, key.type, count});
    }
    out.graph = std::move(g);
    out.occurrences = std::move(occurrences);
    out.occurrence_node = std::move(occ_node);
    out.span_to_occurrence = std::move(span_to_occ);
    return out;
}

}  // namespace detail

// Full-document graph with provenance. Steps:
//  1. dedup mentions across windows by identical document-level span
//  2. union per-window coref clusters (singletons for unclustered mentions)
//  3. merge clusters sharing a normalized non-generic string when that string
//     occurs in at least two distinct windows (generic strings never merge;
//     clusters the model separated within one window are left apart)
//  4. clusters become nodes; 5. relation mentions become typed edges
inline FullGraphBuild build_full_graph_detailed(const DocumentRecord& doc,
                                                const CorpusStats& stats,
                                                const BuildOptions& opts = {}) {
    using detail::Occurrence;
    std::unordered_map<std::string, const Mention*> mention_by_id;
    for (const auto& m : doc.mentions) mention_by_id[m.id] = &m;

    auto resolve = [&](const std::string& id) -> const Mention& {
        auto it = mention_by_id.find(id);
        if (it == mention_by_id.end())
            throw ValidationError("undefined mention id referenced: " + id);
        return *it->second;
    };

    // Step 1: one occurrence per unique span.
    std::map<TokenSpan, int> span_to_occ;
    std::vector<Occurrence> occurrences;
    auto occurrence_of = [&](const Mention& m, int window) -> int {
        auto it = span_to_occ.find(m.span);
        if (it == span_to_occ.end()) {
            Occurrence occ{m.span, m.text, m.type, m.section, m.sentence, {}};
            occ.windows.insert(window);
            span_to_occ[m.span] = static_cast<int>(occurrences.size());
            occurrences.push_back(std::move(occ));
            return static_cast<int>(occurrences.size()) - 1;
        }
        occurrences[it->second].windows.insert(window);
        return it->second;
    };

    for (size_t w = 0; w < doc.windows.size(); ++w) {
        for (const auto& id : doc.windows[w].mention_ids) {
            occurrence_of(resolve(id), static_cast<int>(w));
        }
        for (const auto& cluster : doc.windows[w].coref_clusters) {
            for (const auto& id : cluster) occurrence_of(resolve(id), static_cast<int>(w));
        }
        for (const auto& rm : doc.windows[w].relations) {
            occurrence_of(resolve(rm.head), static_cast<int>(w));
            occurrence_of(resolve(rm.tail), static_cast<int>(w));
        }
    }

    // Canonical occurrence attributes come from the first mention-table entry
    // with that span, not from whichever window was scanned first; two windows
    // may list the same span under different ids with disagreeing types.
    {
        std::set<TokenSpan> fixed;
        for (const auto& m : doc.mentions) {
            auto it = span_to_occ.find(m.span);
            if (it == span_to_occ.end() || !fixed.insert(m.span).second) continue;
            Occurrence& occ = occurrences[it->second];
            occ.text = m.text;
            occ.type = m.type;
            occ.section = m.section;
            occ.sentence = m.sentence;
        }
    }

    // Step 2: within-window coref unions.
    detail::UnionFind uf(static_cast<int>(occurrences.size()));
    for (size_t w = 0; w < doc.windows.size(); ++w) {
        for (const auto& cluster : doc.windows[w].coref_clusters) {
            for (size_t k = 1; k < cluster.size(); ++k) {
                uf.unite(span_to_occ.at(resolve(cluster[0]).span),
                         span_to_occ.at(resolve(cluster[k]).span));
            }
        }
    }

    // Step 3: cross-window merges by shared non-generic string.
    std::map<std::string, std::vector<int>> by_key;
    for (size_t i = 0; i < occurrences.size(); ++i) {
        by_key[normalize_mention_key(occurrences[i].text)].push_back(static_cast<int>(i));
    }
    for (const auto& [key, members] : by_key) {
        if (members.size() < 2) continue;
        if (is_generic_mention(key, stats)) continue;
        std::set<int> windows;
        for (int idx : members) windows.insert(occurrences[idx].windows.begin(),
                                               occurrences[idx].windows.end());
        if (windows.size() < 2) continue;
        if (opts.merge_policy == MergePolicy::UniquePair) {
            std::set<int> roots;
            for (int idx : members) roots.insert(uf.find(idx));
            if (roots.size() != 2) continue;
        }
        for (size_t k = 1; k < members.size(); ++k) uf.unite(members[0], members[k]);
    }

    // Step 5 prep: relation mention multiplicity, deduplicated across windows.
    // A key seen in several windows is the same mention (window overlap), so
    // its multiplicity is the max per-window count, not the sum.
    std::map<detail::RelationKey, std::map<int, int>> per_window;
    for (size_t w = 0; w < doc.windows.size(); ++w) {
        for (const auto& rm : doc.windows[w].relations) {
            detail::RelationKey key{span_to_occ.at(resolve(rm.head).span),
                                    span_to_occ.at(resolve(rm.tail).span), rm.type};
            per_window[key][static_cast<int>(w)] += 1;
        }
    }
    std::map<detail::RelationKey, int> relation_counts;
    for (const auto& [key, wc] : per_window) {
        int best = 0;
        for (const auto& [_, c] : wc) best = std::max(best, c);
        relation_counts[key] = best;
    }

    return detail::assemble(doc.doc_id, std::move(occurrences), uf, relation_counts);
}

inline KnowledgeGraph build_full_graph(const DocumentRecord& doc, const CorpusStats& stats,
                                       const BuildOptions& opts = {}) {
    return build_full_graph_detailed(doc, stats, opts).graph;
}

// Target graph from abstract-level annotation: the same collapse without
// span dedup or cross-window string merging (single annotation scope).
inline KnowledgeGraph build_target_graph(const std::string& doc_id,
                                         const std::vector<Mention>& mentions,
                                         const std::vector<std::vector<std::string>>& coref_clusters,
                                         const std::vector<RelationMention>& relations) {
    using detail::Occurrence;
    std::unordered_map<std::string, int> index_by_id;
    std::vector<Occurrence> occurrences;
    occurrences.reserve(mentions.size());
    for (const auto& m : mentions) {
        if (!index_by_id.emplace(m.id, static_cast<int>(occurrences.size())).second)
            throw ValidationError("duplicate mention id: " + m.id);
        occurrences.push_back({m.span, m.text, m.type, m.section, m.sentence, {}});
    }
    auto resolve = [&](const std::string& id) -> int {
        auto it = index_by_id.find(id);
        if (it == index_by_id.end()) throw ValidationError("undefined mention id referenced: " + id);
        return it->second;
    };

    detail::UnionFind uf(static_cast<int>(occurrences.size()));
    for (const auto& cluster : coref_clusters) {
        for (size_t k = 1; k < cluster.size(); ++k) {
            uf.unite(resolve(cluster[0]), resolve(cluster[k]));
        }
    }

    std::map<detail::RelationKey, int> relation_counts;
    for (const auto& rm : relations) {
        detail::RelationKey key{resolve(rm.head), resolve(rm.tail), rm.type};
        relation_counts[key] += 1;
    }

    return detail::assemble(doc_id, std::move(occurrences), uf, relation_counts).graph;
}

}  // namespace kgsum
