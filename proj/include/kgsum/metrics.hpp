#pragma once
// Entity salience, relation salience and duplication-rate scoring from a
// relaxed alignment, typed and untyped, per document plus corpus aggregation
// (macro by default, micro behind a flag).
//
// Entity scoring collapses predicted nodes that share an aligned target, so
// duplicates are counted once; the duplication rate reports that redundancy
// separately. Relation scoring projects both graphs through the alignment:
// untyped over undirected node pairs, typed over (src, dst, type) triples.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kgsum/align.hpp"
#include "kgsum/core.hpp"

namespace kgsum {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static PRF from_counts(long long matched, long long predicted, long long target) {
        PRF out;
        out.precision = predicted > 0 ? static_cast<double>(matched) / predicted : 0.0;
        out.recall = target > 0 ? static_cast<double>(matched) / target : 0.0;
        out.f1 = (out.precision + out.recall) > 0.0
                     ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                     : 0.0;
        return out;
    }
};

// Raw counts kept alongside each PRF so micro-averaging can re-derive scores.
struct ScoreCounts {
    long long matched = 0;
    long long predicted = 0;
    long long target = 0;
};

enum class TypedEntityRule {
    AnyMatch,  // some predicted node aligned to the target carries its type
    AllMatch,  // every predicted node aligned to the target carries its type
};

inline TypedEntityRule parse_typed_entity_rule(std::string_view s) {
    if (s == "any") return TypedEntityRule::AnyMatch;
    if (s == "all") return TypedEntityRule::AllMatch;
    throw ValidationError("unknown typed-entity rule: " + std::string(s));
}

struct MetricsReport {
    std::string doc_id;
    PRF untyped_entity, typed_entity, untyped_relation, typed_relation;
    std::optional<double> duplication;  // >= 1 when defined

    ScoreCounts untyped_entity_counts, typed_entity_counts;
    ScoreCounts untyped_relation_counts, typed_relation_counts;
    long long aligned_predicted_nodes = 0;  // sum of |A(t)| over aligned targets
    long long aligned_targets = 0;
};

namespace detail {

// A(t): predicted node ids grouped by their aligned target, in target order.
inline std::map<int, std::vector<std::string>> group_by_target(const Alignment& alignment,
                                                               const KnowledgeGraph& target) {
    std::unordered_map<std::string, int> target_index;
    for (size_t i = 0; i < target.nodes.size(); ++i)
        target_index[target.nodes[i].id] = static_cast<int>(i);
    std::map<int, std::vector<std::string>> groups;
    for (const auto& p : alignment.pairs) {
        auto it = target_index.find(p.target);
        if (it == target_index.end())
            throw ValidationError("alignment references unknown target node " + p.target);
        groups[it->second].push_back(p.predicted);
    }
    return groups;
}

}  // namespace detail

inline ScoreCounts entity_score_counts(const Alignment& alignment, const KnowledgeGraph& predicted,
                                       const KnowledgeGraph& target, bool typed,
                                       TypedEntityRule rule = TypedEntityRule::AnyMatch) {
    auto groups = detail::group_by_target(alignment, target);
    std::unordered_map<std::string, EntityType> predicted_type;
    for (const auto& n : predicted.nodes) predicted_type[n.id] = n.type;
    for (const auto& p : alignment.pairs) {
        if (!predicted_type.count(p.predicted))
            throw ValidationError("alignment references unknown predicted node " + p.predicted);
    }

    const long long unaligned =
        static_cast<long long>(predicted.nodes.size()) - static_cast<long long>(alignment.pairs.size());
    const long long collapsed_predicted = unaligned + static_cast<long long>(groups.size());

    long long matched = 0;
    for (const auto& [t_idx, members] : groups) {
        if (!typed) {
            ++matched;
            continue;
        }
        const EntityType want = target.nodes[t_idx].type;
        bool any = false, all = true;
        for (const auto& pid : members) {
            bool ok = predicted_type.at(pid) == want;
            any = any || ok;
            all = all && ok;
        }
        if (rule == TypedEntityRule::AnyMatch ? any : all) ++matched;
    }
    return {matched, collapsed_predicted, static_cast<long long>(target.nodes.size())};
}

inline PRF entity_scores(const Alignment& alignment, const KnowledgeGraph& predicted,
                         const KnowledgeGraph& target, bool typed,
                         TypedEntityRule rule = TypedEntityRule::AnyMatch) {
    auto c = entity_score_counts(alignment, predicted, target, typed, rule);
    return PRF::from_counts(c.matched, c.predicted, c.target);
}

inline ScoreCounts relation_score_counts(const Alignment& alignment,
                                         const KnowledgeGraph& predicted,
                                         const KnowledgeGraph& target, bool typed) {
    // Collapse map: predicted node -> aligned target id, or a fresh token so
    // unaligned nodes stay distinct.
    std::unordered_map<std::string, std::string> collapse;
    for (const auto& p : alignment.pairs) collapse[p.predicted] = p.target;
    auto collapsed_id = [&](const std::string& pred_id) -> std::string {
        auto it = collapse.find(pred_id);
        if (it != collapse.end()) return it->second;
        return "\x1f" + pred_id;  // never collides with a target node id
    };

    if (!typed) {
        auto unordered_pair = [](std::string a, std::string b) {
            if (b < a) std::swap(a, b);
            return std::make_pair(std::move(a), std::move(b));
        };
        std::set<std::pair<std::string, std::string>> predicted_pairs;
        for (const auto& e : predicted.edges)
            predicted_pairs.insert(unordered_pair(collapsed_id(e.src), collapsed_id(e.dst)));
        std::set<std::pair<std::string, std::string>> target_pairs;
        for (const auto& e : target.edges) target_pairs.insert(unordered_pair(e.src, e.dst));
        long long matched = 0;
        for (const auto& p : predicted_pairs)
            if (target_pairs.count(p)) ++matched;
        return {matched, static_cast<long long>(predicted_pairs.size()),
                static_cast<long long>(target_pairs.size())};
    }

    using Triple = std::tuple<std::string, std::string, int>;
    std::set<Triple> predicted_triples;
    for (const auto& e : predicted.edges)
        predicted_triples.insert({collapsed_id(e.src), collapsed_id(e.dst), ordinal(e.type)});
    std::set<Triple> target_triples;
    for (const auto& e : target.edges) target_triples.insert({e.src, e.dst, ordinal(e.type)});
    long long matched = 0;
    for (const auto& t : predicted_triples)
        if (target_triples.count(t)) ++matched;
    return {matched, static_cast<long long>(predicted_triples.size()),
            static_cast<long long>(target_triples.size())};
}

inline PRF relation_scores(const Alignment& alignment, const KnowledgeGraph& predicted,
                           const KnowledgeGraph& target, bool typed) {
    auto c = relation_score_counts(alignment, predicted, target, typed);
    return PRF::from_counts(c.matched, c.predicted, c.target);
}

// Mean |A(t)| over targets with at least one aligned predicted node;
// undefined when nothing aligned.
inline std::optional<double> duplication_rate(const Alignment& alignment,
                                              const KnowledgeGraph& target) {
    auto groups = detail::group_by_target(alignment, target);
    if (groups.empty()) return std::nullopt;
    long long total = 0;
    for (const auto& [_, members] : groups) total += static_cast<long long>(members.size());
    return static_cast<double>(total) / static_cast<double>(groups.size());
}

inline MetricsReport evaluate_document(const Alignment& alignment, const KnowledgeGraph& predicted,
                                       const KnowledgeGraph& target,
                                       TypedEntityRule rule = TypedEntityRule::AnyMatch) {
    MetricsReport r;
    r.doc_id = predicted.doc_id;
    r.untyped_entity_counts = entity_score_counts(alignment, predicted, target, false, rule);
    r.typed_entity_counts = entity_score_counts(alignment, predicted, target, true, rule);
    r.untyped_relation_counts = relation_score_counts(alignment, predicted, target, false);
    r.typed_relation_counts = relation_score_counts(alignment, predicted, target, true);
    auto prf = [](const ScoreCounts& c) { return PRF::from_counts(c.matched, c.predicted, c.target); };
    r.untyped_entity = prf(r.untyped_entity_counts);
    r.typed_entity = prf(r.typed_entity_counts);
    r.untyped_relation = prf(r.untyped_relation_counts);
    r.typed_relation = prf(r.typed_relation_counts);
    r.duplication = duplication_rate(alignment, target);
    auto groups = detail::group_by_target(alignment, target);
    r.aligned_targets = static_cast<long long>(groups.size());
    for (const auto& [_, members] : groups)
        r.aligned_predicted_nodes += static_cast<long long>(members.size());
    return r;
}

enum class AverageMode { Macro, Micro };

inline AverageMode parse_average_mode(std::string_view s) {
    if (s == "macro") return AverageMode::Macro;
    if (s == "micro") return AverageMode::Micro;
    throw ValidationError("unknown average mode: " + std::string(s));
}

// Macro: arithmetic mean of every per-document field (F1 averaged directly,
// not recomputed from averaged P/R); duplication averaged where defined.
inline MetricsReport aggregate_macro(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw ValidationError("cannot aggregate zero reports");
    MetricsReport agg;
    agg.doc_id = "<aggregate>";
    auto add = [](PRF& acc, const PRF& x) {
        acc.precision += x.precision;
        acc.recall += x.recall;
        acc.f1 += x.f1;
    };
    double dup_sum = 0.0;
    long long dup_n = 0;
    for (const auto& r : reports) {
        add(agg.untyped_entity, r.untyped_entity);
        add(agg.typed_entity, r.typed_entity);
        add(agg.untyped_relation, r.untyped_relation);
        add(agg.typed_relation, r.typed_relation);
        if (r.duplication) {
            dup_sum += *r.duplication;
            ++dup_n;
        }
    }
    const double n = static_cast<double>(reports.size());
    auto div = [n](PRF& p) {
        p.precision /= n;
        p.recall /= n;
        p.f1 /= n;
    };
    div(agg.untyped_entity);
    div(agg.typed_entity);
    div(agg.untyped_relation);
    div(agg.typed_relation);
    if (dup_n > 0) agg.duplication = dup_sum / static_cast<double>(dup_n);
    return agg;
}

// Micro: pool raw counts across documents, then score once.
inline MetricsReport aggregate_micro(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw ValidationError("cannot aggregate zero reports");
    MetricsReport agg;
    agg.doc_id = "<aggregate>";
    auto add = [](ScoreCounts& acc, const ScoreCounts& x) {
        acc.matched += x.matched;
        acc.predicted += x.predicted;
        acc.target += x.target;
    };
    for (const auto& r : reports) {
        add(agg.untyped_entity_counts, r.untyped_entity_counts);
        add(agg.typed_entity_counts, r.typed_entity_counts);
        add(agg.untyped_relation_counts, r.untyped_relation_counts);
        add(agg.typed_relation_counts, r.typed_relation_counts);
        agg.aligned_predicted_nodes += r.aligned_predicted_nodes;
        agg.aligned_targets += r.aligned_targets;
    }
    auto prf = [](const ScoreCounts& c) { return PRF::from_counts(c.matched, c.predicted, c.target); };
    agg.untyped_entity = prf(agg.untyped_entity_counts);
    agg.typed_entity = prf(agg.typed_entity_counts);
    agg.untyped_relation = prf(agg.untyped_relation_counts);
    agg.typed_relation = prf(agg.typed_relation_counts);
    if (agg.aligned_targets > 0)
        agg.duplication = static_cast<double>(agg.aligned_predicted_nodes) /
                          static_cast<double>(agg.aligned_targets);
    return agg;
}

inline MetricsReport aggregate(const std::vector<MetricsReport>& reports,
                               AverageMode mode = AverageMode::Macro) {
    return mode == AverageMode::Macro ? aggregate_macro(reports) : aggregate_micro(reports);
}

}  // namespace kgsum
