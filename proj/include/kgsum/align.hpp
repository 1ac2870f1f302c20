#pragma once
// Relaxed entity alignment between a predicted and a target knowledge graph.
// String similarity is gestalt pattern matching (Ratcliff-Obershelp):
// 2*M / (|a|+|b|) where M counts matched characters from recursive
// longest-common-substring decomposition.

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgsum/core.hpp"
#include "kgsum/text.hpp"

namespace kgsum {

namespace detail {

struct Match {
    size_t len = 0;
    size_t a_start = 0;
    size_t b_start = 0;
};

// Longest common substring of a[a_lo,a_hi) x b[b_lo,b_hi).
// Ties resolved leftmost-in-a, then leftmost-in-b, so M is deterministic.
// Rolling-row DP over common-suffix lengths; a strictly longer match wins,
// equal-length candidates never replace (scan order realizes the tie-break).
inline Match longest_common_substring(std::string_view a, size_t a_lo, size_t a_hi,
                                      std::string_view b, size_t b_lo, size_t b_hi) {
    Match best;
    const size_t bn = b_hi - b_lo;
    std::vector<size_t> prev(bn + 1, 0), cur(bn + 1, 0);
    for (size_t i = a_lo; i < a_hi; ++i) {
        for (size_t j = b_lo; j < b_hi; ++j) {
            size_t len = (a[i] == b[j]) ? prev[j - b_lo] + 1 : 0;
            cur[j - b_lo + 1] = len;
            if (len > best.len) {
                best.len = len;
                best.a_start = i + 1 - len;
                best.b_start = j + 1 - len;
            }
        }
        std::swap(prev, cur);
    }
    return best;
}

inline size_t matched_chars(std::string_view a, size_t a_lo, size_t a_hi,
                            std::string_view b, size_t b_lo, size_t b_hi) {
    if (a_lo >= a_hi || b_lo >= b_hi) return 0;
    Match m = longest_common_substring(a, a_lo, a_hi, b, b_lo, b_hi);
    if (m.len == 0) return 0;
    return m.len + matched_chars(a, a_lo, m.a_start, b, b_lo, m.b_start) +
           matched_chars(a, m.a_start + m.len, a_hi, b, m.b_start + m.len, b_hi);
}

}  // namespace detail

// Similarity in [0,1] over normalized strings (lowercased, whitespace
// collapsed; hyphens kept). Both inputs normalizing to empty gives 1.0,
// exactly one empty gives 0.0. Arguments are ordered lexicographically before
// matching: the positional tie-break alone can make M depend on argument
// order, and the canonical order keeps the score symmetric.
inline double gestalt_similarity(std::string_view a, std::string_view b) {
    std::string na = normalize_for_match(a);
    std::string nb = normalize_for_match(b);
    if (na.empty() && nb.empty()) return 1.0;
    if (na.empty() || nb.empty()) return 0.0;
    if (nb < na) std::swap(na, nb);
    const size_t m = detail::matched_chars(na, 0, na.size(), nb, 0, nb.size());
    return 2.0 * static_cast<double>(m) / static_cast<double>(na.size() + nb.size());
}

// Maximum gestalt similarity over all (target mention, predicted mention)
// string pairs.
inline double node_similarity(const EntityNode& target, const EntityNode& predicted) {
    double best = 0.0;
    for (const auto& tm : target.mentions) {
        for (const auto& pm : predicted.mentions) {
            double s = gestalt_similarity(tm, pm);
            if (s > best) best = s;
        }
    }
    return best;
}

struct AlignmentPair {
    std::string predicted;  // predicted node id
    std::string target;     // target node id
    double score = 0.0;
};

// Each predicted node maps to at most one target node; targets may receive
// several predicted nodes. Every stored score exceeds lambda.
struct Alignment {
    std::string doc_id;
    double lambda = 0.7;
    std::vector<AlignmentPair> pairs;  // in predicted-node order

    // target node id for a predicted node id, or nullptr.
    const AlignmentPair* find(std::string_view predicted_id) const {
        for (const auto& p : pairs) {
            if (p.predicted == predicted_id) return &p;
        }
        return nullptr;
    }
};

// For each predicted node independently: best-scoring target node, ties
// broken by lower target ordinal. A pair is recorded only when the score
// strictly exceeds lambda, so a borderline pair scoring exactly lambda
// (e.g. "routing" vs "word counting" at 0.7) stays unaligned.
inline Alignment align_graphs(const KnowledgeGraph& predicted, const KnowledgeGraph& target,
                              double lambda = 0.7) {
    Alignment out;
    out.doc_id = predicted.doc_id;
    out.lambda = lambda;
    for (const auto& pn : predicted.nodes) {
        double best = -1.0;
        int best_t = -1;
        for (size_t t = 0; t < target.nodes.size(); ++t) {
            double s = node_similarity(target.nodes[t], pn);
            if (s > best) {
                best = s;
                best_t = static_cast<int>(t);
            }
        }
        if (best_t >= 0 && best > lambda) {
            out.pairs.push_back({pn.id, target.nodes[best_t].id, best});
        }
    }
    return out;
}

}  // namespace kgsum
