#pragma once
// Independent reference implementations used only by tests. Each oracle
// follows the written definition directly with the simplest possible code
// path (brute-force scans, dense matrices, integer counting) and shares no
// code with the library implementations it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "kgsum/align.hpp"
#include "kgsum/core.hpp"
#include "kgsum/metrics.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Gestalt pattern matching: direct recursion with a quadratic start-position
// scan for the longest common substring (leftmost-in-a, then leftmost-in-b).

inline size_t gestalt_matched_brute(const std::string& a, size_t alo, size_t ahi,
                                    const std::string& b, size_t blo, size_t bhi) {
    size_t best_len = 0, best_i = alo, best_j = blo;
    for (size_t i = alo; i < ahi; ++i) {
        for (size_t j = blo; j < bhi; ++j) {
            size_t k = 0;
            while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
            if (k > best_len) {
                best_len = k;
                best_i = i;
                best_j = j;
            }
        }
    }
    if (best_len == 0) return 0;
    return best_len + gestalt_matched_brute(a, alo, best_i, b, blo, best_j) +
           gestalt_matched_brute(a, best_i + best_len, ahi, b, best_j + best_len, bhi);
}

inline double gestalt_brute(const std::string& raw_a, const std::string& raw_b) {
    std::string a = kgsum::normalize_for_match(raw_a);
    std::string b = kgsum::normalize_for_match(raw_b);
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    if (b < a) std::swap(a, b);  // canonical order, same as the implementation
    const size_t m = gestalt_matched_brute(a, 0, a.size(), b, 0, b.size());
    return 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

// ---------------------------------------------------------------------------
// Dense PageRank power iteration on an explicit column-stochastic matrix.

struct DensePageRank {
    std::vector<double> scores;
    int iterations = 0;
};

inline DensePageRank pagerank_dense(const kgsum::KnowledgeGraph& g, double damping, double tol,
                                    int max_iter, bool directed) {
    const int n = static_cast<int>(g.nodes.size());
    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[g.nodes[i].id] = i;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (const auto& e : g.edges) {
        const int u = index.at(e.src), v = index.at(e.dst);
        w[u][v] += e.mention_count;
        if (!directed) w[v][u] += e.mention_count;
    }
    // column u of P: w[u][v] / out(u), or uniform for dangling u
    std::vector<double> out(n, 0.0);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) out[u] += w[u][v];

    std::vector<double> r(n, 1.0 / n), next(n);
    DensePageRank res;
    for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
        for (int v = 0; v < n; ++v) {
            double acc = 0.0;
            for (int u = 0; u < n; ++u) {
                const double p = out[u] > 0.0 ? w[u][v] / out[u] : 1.0 / n;
                acc += p * r[u];
            }
            next[v] = (1.0 - damping) / n + damping * acc;
        }
        double delta = 0.0;
        for (int i = 0; i < n; ++i) delta += std::abs(next[i] - r[i]);
        r = next;
        if (delta < tol) {
            ++res.iterations;
            break;
        }
    }
    res.scores = r;
    return res;
}

// ---------------------------------------------------------------------------
// Salience metrics by literal enumeration with integer counts.

struct RationalPRF {
    long long matched = 0, predicted = 0, target = 0;

    double precision() const { return predicted > 0 ? double(matched) / double(predicted) : 0.0; }
    double recall() const { return target > 0 ? double(matched) / double(target) : 0.0; }
    double f1() const {
        const double p = precision(), r = recall();
        return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
};

// Entity scores: collapse predicted nodes mapping to one target; count every
// aligned target once, unaligned predicted nodes individually.
inline RationalPRF entity_oracle(const kgsum::Alignment& alignment,
                                 const kgsum::KnowledgeGraph& predicted,
                                 const kgsum::KnowledgeGraph& target, bool typed,
                                 bool require_all_types = false) {
    RationalPRF out;
    out.target = static_cast<long long>(target.nodes.size());
    std::map<std::string, std::vector<std::string>> aligned_to;  // target id -> predicted ids
    std::set<std::string> aligned_predicted;
    for (const auto& p : alignment.pairs) {
        aligned_to[p.target].push_back(p.predicted);
        aligned_predicted.insert(p.predicted);
    }
    long long unaligned = 0;
    for (const auto& n : predicted.nodes)
        if (!aligned_predicted.count(n.id)) ++unaligned;
    out.predicted = unaligned + static_cast<long long>(aligned_to.size());

    for (const auto& tn : target.nodes) {
        auto it = aligned_to.find(tn.id);
        if (it == aligned_to.end()) continue;
        if (!typed) {
            ++out.matched;
            continue;
        }
        int with_type = 0;
        for (const auto& pid : it->second) {
            for (const auto& pn : predicted.nodes) {
                if (pn.id == pid && pn.type == tn.type) ++with_type;
            }
        }
        const bool ok = require_all_types ? with_type == static_cast<int>(it->second.size())
                                          : with_type > 0;
        if (ok) ++out.matched;
    }
    return out;
}

// Relation scores: collapse endpoints through the alignment, then compare
// undirected pairs (untyped) or (src, dst, type) triples (typed).
inline RationalPRF relation_oracle(const kgsum::Alignment& alignment,
                                   const kgsum::KnowledgeGraph& predicted,
                                   const kgsum::KnowledgeGraph& target, bool typed) {
    std::map<std::string, std::string> to_target;
    for (const auto& p : alignment.pairs) to_target[p.predicted] = p.target;
    auto collapsed = [&](const std::string& id) {
        auto it = to_target.find(id);
        return it != to_target.end() ? it->second : "unaligned#" + id;
    };

    RationalPRF out;
    if (!typed) {
        std::set<std::set<std::string>> pred_pairs, targ_pairs;
        for (const auto& e : predicted.edges)
            pred_pairs.insert({collapsed(e.src), collapsed(e.dst)});
        for (const auto& e : target.edges) targ_pairs.insert({e.src, e.dst});
        out.predicted = static_cast<long long>(pred_pairs.size());
        out.target = static_cast<long long>(targ_pairs.size());
        for (const auto& p : pred_pairs)
            if (targ_pairs.count(p)) ++out.matched;
        return out;
    }
    std::set<std::tuple<std::string, std::string, kgsum::RelationType>> pred_triples, targ_triples;
    for (const auto& e : predicted.edges)
        pred_triples.insert({collapsed(e.src), collapsed(e.dst), e.type});
    for (const auto& e : target.edges) targ_triples.insert({e.src, e.dst, e.type});
    out.predicted = static_cast<long long>(pred_triples.size());
    out.target = static_cast<long long>(targ_triples.size());
    for (const auto& t : pred_triples)
        if (targ_triples.count(t)) ++out.matched;
    return out;
}

struct DuplicationOracle {
    bool defined = false;
    long long aligned_predicted = 0;
    long long aligned_targets = 0;

    double value() const { return double(aligned_predicted) / double(aligned_targets); }
};

inline DuplicationOracle duplication_oracle(const kgsum::Alignment& alignment) {
    DuplicationOracle out;
    std::map<std::string, long long> per_target;
    for (const auto& p : alignment.pairs) ++per_target[p.target];
    if (per_target.empty()) return out;
    out.defined = true;
    out.aligned_targets = static_cast<long long>(per_target.size());
    for (const auto& [_, c] : per_target) out.aligned_predicted += c;
    return out;
}

// ---------------------------------------------------------------------------
// Generators

inline std::string random_string(std::mt19937_64& rng, int min_len, int max_len,
                                 const std::string& alphabet) {
    const int len = min_len + static_cast<int>(rng() % (max_len - min_len + 1));
    std::string s;
    for (int i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

inline kgsum::KnowledgeGraph random_graph(std::mt19937_64& rng, const std::string& doc_id,
                                          int max_nodes, int max_edges) {
    kgsum::KnowledgeGraph g;
    g.doc_id = doc_id;
    const int n = 1 + static_cast<int>(rng() % max_nodes);
    for (int i = 0; i < n; ++i) {
        kgsum::EntityNode node;
        node.id = doc_id + ":" + std::to_string(i);
        node.mentions = {random_string(rng, 6, 14, "abcdefghijklmnopqrstuvwxyz ")};
        node.mention_count = 1 + static_cast<int>(rng() % 9);
        node.type = static_cast<kgsum::EntityType>(rng() % kgsum::kNumEntityTypes);
        node.first_section = static_cast<int>(rng() % 6);
        g.nodes.push_back(std::move(node));
    }
    std::set<std::tuple<int, int, int>> used;
    const int tries = static_cast<int>(rng() % (max_edges + 1));
    for (int e = 0; e < tries; ++e) {
        const int u = static_cast<int>(rng() % n);
        const int v = static_cast<int>(rng() % n);
        const int r = static_cast<int>(rng() % kgsum::kNumRelationTypes);
        if (u == v || !used.insert({u, v, r}).second) continue;
        g.edges.push_back({g.nodes[u].id, g.nodes[v].id, static_cast<kgsum::RelationType>(r),
                           1 + static_cast<int>(rng() % 4)});
    }
    return g;
}

}  // namespace oracles
