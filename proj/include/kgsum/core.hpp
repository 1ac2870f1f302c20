#pragma once
// Core domain types shared by every module: entity/relation vocabularies,
// mentions, graph nodes and edges, knowledge graphs and windowed document
// records. All types are plain values, immutable by convention after
// construction, and safe to share read-only across worker threads.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgsum {

inline constexpr std::string_view kToolName = "kgsum";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Malformed input or a broken data invariant. what() carries
// "file:line: $.json.path: message" when the location is known.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Closed set of 6 entity types. Enum order is the documented tie-break order.
enum class EntityType : uint8_t {
    Task = 0,
    Method,
    Metric,
    Material,
    OtherScientificTerm,
    Generic,
};
inline constexpr int kNumEntityTypes = 6;

// Closed set of 7 relation types; one attention head per type.
enum class RelationType : uint8_t {
    Compare = 0,
    PartOf,
    Conjunction,
    EvaluateFor,
    FeatureOf,
    UsedFor,
    HyponymOf,
};
inline constexpr int kNumRelationTypes = 7;

inline constexpr std::string_view kEntityTypeNames[kNumEntityTypes] = {
    "Task", "Method", "Metric", "Material", "OtherScientificTerm", "Generic",
};

inline constexpr std::string_view kRelationTypeNames[kNumRelationTypes] = {
    "Compare", "PartOf", "Conjunction", "EvaluateFor", "FeatureOf", "UsedFor", "HyponymOf",
};

inline std::string_view to_string(EntityType t) {
    return kEntityTypeNames[static_cast<int>(t)];
}

inline std::string_view to_string(RelationType t) {
    return kRelationTypeNames[static_cast<int>(t)];
}

inline EntityType parse_entity_type(std::string_view s) {
    for (int i = 0; i < kNumEntityTypes; ++i) {
        if (kEntityTypeNames[i] == s) return static_cast<EntityType>(i);
    }
    throw ValidationError("unknown entity type label: \"" + std::string(s) + "\"");
}

inline RelationType parse_relation_type(std::string_view s) {
    for (int i = 0; i < kNumRelationTypes; ++i) {
        if (kRelationTypeNames[i] == s) return static_cast<RelationType>(i);
    }
    throw ValidationError("unknown relation type label: \"" + std::string(s) + "\"");
}

inline int ordinal(EntityType t) { return static_cast<int>(t); }
inline int ordinal(RelationType t) { return static_cast<int>(t); }

// Half-open document-level token offsets [start, end).
struct TokenSpan {
    int start = 0;
    int end = 0;

    auto operator<=>(const TokenSpan&) const = default;
    int length() const { return end - start; }
};

// One entity mention occurrence as produced by the IE system.
struct Mention {
    std::string id;
    std::string text;    // raw surface string, exactly as in the source tokens
    TokenSpan span;      // document-level token offsets
    int sentence = 0;    // sentence ordinal within the section
    int section = 0;
    EntityType type = EntityType::Generic;
};

// A mention cluster collapsed into a single graph node.
struct EntityNode {
    std::string id;                     // "{doc_id}:{ordinal}", stable across runs
    std::vector<std::string> mentions;  // distinct surface strings, first-occurrence order
    int mention_count = 1;              // number of mention occurrences, >= 1
    EntityType type = EntityType::Generic;  // dominant type among member mentions
    int first_section = 0;
};

// Typed directed edge; at most one per (src, dst, type) in a graph.
struct RelationEdge {
    std::string src;
    std::string dst;
    RelationType type = RelationType::Compare;
    int mention_count = 1;  // relation mentions collapsed into this edge
};

struct KnowledgeGraph {
    std::string doc_id;
    std::vector<EntityNode> nodes;
    std::vector<RelationEdge> edges;

    // Index of a node id, or -1.
    int node_index(std::string_view id) const {
        for (size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].id == id) return static_cast<int>(i);
        }
        return -1;
    }
};

// A relation mention inside one window, endpoints by mention id.
struct RelationMention {
    std::string head;
    std::string tail;
    RelationType type = RelationType::Compare;
};

// One IE processing chunk of a section. Consecutive windows of the same
// section share one overlap sentence upstream; we only consume the output.
struct Window {
    int id = 0;
    int section = 0;
    int first_sentence = 0;  // inclusive, section-local ordinals
    int last_sentence = 0;   // inclusive
    std::vector<std::string> mention_ids;
    std::vector<std::vector<std::string>> coref_clusters;
    std::vector<RelationMention> relations;
};

// A tokenized, sectioned document plus its windowed IE output and the
// optional abstract-derived target graph.
struct DocumentRecord {
    std::string doc_id;
    // sections[s] = sentences, each a list of tokens; section ordinals are
    // contiguous from 0 by position.
    std::vector<std::vector<std::vector<std::string>>> sections;
    std::vector<Mention> mentions;
    std::vector<Window> windows;
    std::optional<KnowledgeGraph> abstract_graph;
    std::optional<int> abstract_token_count;

    int total_tokens() const {
        int n = 0;
        for (const auto& sec : sections)
            for (const auto& sent : sec) n += static_cast<int>(sent.size());
        return n;
    }

    int sentence_count(int section) const {
        if (section < 0 || section >= static_cast<int>(sections.size())) return 0;
        return static_cast<int>(sections[section].size());
    }
};

struct Violation {
    std::string code;    // e.g. "dangling-endpoint"
    std::string detail;
};

// Total function: one violation descriptor per broken graph invariant,
// empty for a well-formed graph.
inline std::vector<Violation> validate_graph(const KnowledgeGraph& g) {
    std::vector<Violation> out;
    std::unordered_map<std::string, int> ids;
    for (const auto& n : g.nodes) {
        if (++ids[n.id] == 2)
            out.push_back({"duplicate-node-id", "node id repeated: " + n.id});
        if (n.mentions.empty())
            out.push_back({"empty-mentions", "node has no mention strings: " + n.id});
        if (n.mention_count < 1)
            out.push_back({"bad-mention-count", "node mention_count < 1: " + n.id});
    }
    std::unordered_set<std::string> edge_keys;
    for (const auto& e : g.edges) {
        if (!ids.count(e.src))
            out.push_back({"dangling-endpoint", "edge src not in graph: " + e.src});
        if (!ids.count(e.dst))
            out.push_back({"dangling-endpoint", "edge dst not in graph: " + e.dst});
        if (e.src == e.dst)
            out.push_back({"self-loop", "edge with identical endpoints: " + e.src});
        if (e.mention_count < 1)
            out.push_back({"bad-mention-count",
                           "edge mention_count < 1: " + e.src + "->" + e.dst});
        std::string key = e.src + "\x1f" + e.dst + "\x1f" + std::string(to_string(e.type));
        if (!edge_keys.insert(key).second)
            out.push_back({"duplicate-edge",
                           "repeated (src,dst,type): " + e.src + "->" + e.dst + " " +
                               std::string(to_string(e.type))});
    }
    return out;
}

}  // namespace kgsum
