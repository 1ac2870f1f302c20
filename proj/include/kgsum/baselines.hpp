#pragma once
// Non-learned summary-graph predictors: weighted PageRank over relation
// mention counts, top-K by mention frequency, the gold-entity oracle upper
// bound, and graph induction from externally selected summary sentences.
// All selectors end with the shared induced-subgraph step.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgsum/align.hpp"
#include "kgsum/core.hpp"
#include "kgsum/graph_build.hpp"

namespace kgsum {

struct BaselineConfig {
    int k = 18;                    // selection size for the K-bounded methods
    double pagerank_damping = 0.85;
    double pagerank_tol = 1e-9;    // L1 change per iteration
    int pagerank_max_iter = 200;
    double ge_threshold = 0.7;     // gold-entity inclusion (strictly above)
    bool pagerank_directed = false;

    void validate() const {
        if (k < 1) throw ValidationError("k must be >= 1");
        if (pagerank_damping <= 0.0 || pagerank_damping >= 1.0)
            throw ValidationError("damping must be in (0,1)");
        if (pagerank_tol <= 0.0) throw ValidationError("tol must be > 0");
        if (pagerank_max_iter < 1) throw ValidationError("max_iter must be >= 1");
    }
};

// nodes = keep, edges = all full-graph edges with both endpoints kept.
inline KnowledgeGraph induced_subgraph(const KnowledgeGraph& full,
                                       const std::set<std::string>& keep) {
    std::unordered_set<std::string> node_ids;
    for (const auto& n : full.nodes) node_ids.insert(n.id);
    for (const auto& id : keep) {
        if (!node_ids.count(id))
            throw ValidationError("induced_subgraph: unknown node id " + id);
    }
    KnowledgeGraph out;
    out.doc_id = full.doc_id;
    for (const auto& n : full.nodes) {
        if (keep.count(n.id)) out.nodes.push_back(n);
    }
    for (const auto& e : full.edges) {
        if (keep.count(e.src) && keep.count(e.dst)) out.edges.push_back(e);
    }
    return out;
}

struct PageRankResult {
    std::vector<double> scores;  // by node ordinal, sums to 1
    int iterations = 0;
    bool converged = false;
};

// Power iteration with damping d on mention-count edge weights:
//   r <- (1-d)/N + d * (W^T r over out-weight-normalized columns
//                       + dangling mass redistributed uniformly)
// Undirected by default: weight(u,v) sums relation mention counts between the
// pair in both directions.
inline PageRankResult pagerank_scores(const KnowledgeGraph& g, const BaselineConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(g.nodes.size());
    if (n == 0) throw ValidationError("pagerank on empty graph");
    std::unordered_map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[g.nodes[i].id] = i;

    // adjacency[u] = (v, weight)
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    {
        std::unordered_map<long long, double> weights;
        auto key = [n](int u, int v) { return static_cast<long long>(u) * n + v; };
        for (const auto& e : g.edges) {
            int u = index.at(e.src), v = index.at(e.dst);
            weights[key(u, v)] += e.mention_count;
            if (!cfg.pagerank_directed) weights[key(v, u)] += e.mention_count;
        }
        for (const auto& [k, w] : weights) {
            adj[static_cast<int>(k / n)].push_back({static_cast<int>(k % n), w});
        }
        for (auto& row : adj) std::sort(row.begin(), row.end());
    }
    std::vector<double> out_weight(n, 0.0);
    for (int u = 0; u < n; ++u)
        for (const auto& [v, w] : adj[u]) out_weight[u] += w;

    const double d = cfg.pagerank_damping;
    std::vector<double> rank(n, 1.0 / n), next(n);
    PageRankResult res;
    for (res.iterations = 0; res.iterations < cfg.pagerank_max_iter; ++res.iterations) {
        double dangling = 0.0;
        for (int u = 0; u < n; ++u)
            if (out_weight[u] == 0.0) dangling += rank[u];
        const double base = (1.0 - d) / n + d * dangling / n;
        std::fill(next.begin(), next.end(), base);
        for (int u = 0; u < n; ++u) {
            if (out_weight[u] == 0.0) continue;
            const double share = d * rank[u] / out_weight[u];
            for (const auto& [v, w] : adj[u]) next[v] += share * w;
        }
        double delta = 0.0;
        for (int i = 0; i < n; ++i) delta += std::abs(next[i] - rank[i]);
        rank.swap(next);
        if (delta < cfg.pagerank_tol) {
            ++res.iterations;
            res.converged = true;
            break;
        }
    }
    res.scores = std::move(rank);
    return res;
}

namespace detail {

// Top-k ordinals by score, ties by lower ordinal.
inline std::set<std::string> top_k_ids(const KnowledgeGraph& g, const std::vector<double>& score,
                                       int k) {
    std::vector<int> order(g.nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    std::set<std::string> keep;
    for (int i = 0; i < static_cast<int>(order.size()) && i < k; ++i)
        keep.insert(g.nodes[order[i]].id);
    return keep;
}

}  // namespace detail

inline KnowledgeGraph pagerank_select(const KnowledgeGraph& full, const BaselineConfig& cfg) {
    auto pr = pagerank_scores(full, cfg);
    return induced_subgraph(full, detail::top_k_ids(full, pr.scores, cfg.k));
}

inline KnowledgeGraph topk_freq_select(const KnowledgeGraph& full, const BaselineConfig& cfg) {
    cfg.validate();
    if (full.nodes.empty()) throw ValidationError("topk_freq on empty graph");
    std::vector<double> freq(full.nodes.size());
    for (size_t i = 0; i < full.nodes.size(); ++i) freq[i] = full.nodes[i].mention_count;
    return induced_subgraph(full, detail::top_k_ids(full, freq, cfg.k));
}

// For each target node, the most similar full-graph node (ties by lower full
// ordinal), included when similarity strictly exceeds the threshold. The
// performance upper bound given the IE output.
inline KnowledgeGraph gold_entity_select(const KnowledgeGraph& full, const KnowledgeGraph& target,
                                         const BaselineConfig& cfg) {
    std::set<std::string> keep;
    for (const auto& tn : target.nodes) {
        double best = -1.0;
        int best_i = -1;
        for (size_t i = 0; i < full.nodes.size(); ++i) {
            double s = node_similarity(tn, full.nodes[i]);
            if (s > best) {
                best = s;
                best_i = static_cast<int>(i);
            }
        }
        if (best_i >= 0 && best > cfg.ge_threshold) keep.insert(full.nodes[best_i].id);
    }
    return induced_subgraph(full, keep);
}

// Graph induction over an external summary-sentence selection: keep nodes
// with a mention occurrence inside the selected sentences, and edges with a
// relation mention whose head and tail both fall inside the selection.
// Sentences are (section, section-local sentence) ordinals.
inline KnowledgeGraph summary_induced_graph(const DocumentRecord& doc, const FullGraphBuild& build,
                                            const std::set<std::pair<int, int>>& selected_sentences) {
    for (const auto& [section, sentence] : selected_sentences) {
        if (section < 0 || section >= static_cast<int>(doc.sections.size()) || sentence < 0 ||
            sentence >= doc.sentence_count(section))
            throw ValidationError("selected sentence out of range: section " +
                                  std::to_string(section) + ", sentence " + std::to_string(sentence));
    }
    auto occurrence_selected = [&](int occ_idx) {
        const auto& occ = build.occurrences[occ_idx];
        return selected_sentences.count({occ.section, occ.sentence}) > 0;
    };

    std::set<std::string> keep;
    for (size_t i = 0; i < build.occurrences.size(); ++i) {
        if (occurrence_selected(static_cast<int>(i)))
            keep.insert(build.graph.nodes[build.occurrence_node[i]].id);
    }

    // Edge survives only with a fully-contained relation mention.
    std::set<std::tuple<std::string, std::string, int>> kept_edges;
    for (const auto& rel : build.relation_occurrences) {
        int ho = build.span_to_occurrence.at(rel.head);
        int to = build.span_to_occurrence.at(rel.tail);
        if (!occurrence_selected(ho) || !occurrence_selected(to)) continue;
        const std::string& src = build.graph.nodes[build.occurrence_node[ho]].id;
        const std::string& dst = build.graph.nodes[build.occurrence_node[to]].id;
        if (src == dst) continue;
        if (keep.count(src) && keep.count(dst)) kept_edges.insert({src, dst, ordinal(rel.type)});
    }

    KnowledgeGraph out;
    out.doc_id = build.graph.doc_id;
    for (const auto& n : build.graph.nodes)
        if (keep.count(n.id)) out.nodes.push_back(n);
    for (const auto& e : build.graph.edges)
        if (kept_edges.count({e.src, e.dst, ordinal(e.type)})) out.edges.push_back(e);
    return out;
}

}  // namespace kgsum
