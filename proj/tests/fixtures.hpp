#pragma once
// Programmatic construction of valid DocumentRecords for tests: token spans,
// section/sentence indices and mention texts are kept consistent by
// construction.

#include <string>
#include <vector>

#include "kgsum/core.hpp"
#include "kgsum/text.hpp"

namespace fixtures {

class DocBuilder {
public:
    explicit DocBuilder(std::string doc_id) { rec_.doc_id = std::move(doc_id); }

    // sentences: each a whitespace-joined token string, e.g. "we present a model"
    DocBuilder& section(const std::vector<std::string>& sentences) {
        std::vector<std::vector<std::string>> sec;
        for (const auto& s : sentences) sec.push_back(kgsum::split_whitespace(s));
        rec_.sections.push_back(std::move(sec));
        return *this;
    }

    // Mention spanning tokens [first, first+len) of the given sentence.
    DocBuilder& mention(const std::string& id, int section, int sentence, int first, int len,
                        kgsum::EntityType type) {
        int offset = 0;
        for (int s = 0; s < section; ++s)
            for (const auto& sent : rec_.sections[s]) offset += static_cast<int>(sent.size());
        for (int t = 0; t < sentence; ++t)
            offset += static_cast<int>(rec_.sections[section][t].size());
        kgsum::Mention m;
        m.id = id;
        m.section = section;
        m.sentence = sentence;
        m.span = {offset + first, offset + first + len};
        m.type = type;
        const auto& toks = rec_.sections[section][sentence];
        for (int k = 0; k < len; ++k) {
            if (k > 0) m.text += ' ';
            m.text += toks[first + k];
        }
        rec_.mentions.push_back(std::move(m));
        return *this;
    }

    DocBuilder& window(int section, int first_sentence, int last_sentence,
                       const std::vector<std::string>& mention_ids,
                       const std::vector<std::vector<std::string>>& clusters = {},
                       const std::vector<kgsum::RelationMention>& relations = {}) {
        kgsum::Window w;
        w.id = static_cast<int>(rec_.windows.size());
        w.section = section;
        w.first_sentence = first_sentence;
        w.last_sentence = last_sentence;
        w.mention_ids = mention_ids;
        w.coref_clusters = clusters;
        w.relations = relations;
        rec_.windows.push_back(std::move(w));
        return *this;
    }

    DocBuilder& abstract_graph(kgsum::KnowledgeGraph g) {
        rec_.abstract_graph = std::move(g);
        return *this;
    }

    DocBuilder& abstract_tokens(int n) {
        rec_.abstract_token_count = n;
        return *this;
    }

    kgsum::DocumentRecord build() const { return rec_; }

private:
    kgsum::DocumentRecord rec_;
};

inline kgsum::EntityNode node(std::string id, std::vector<std::string> mentions, int count,
                              kgsum::EntityType type, int first_section = 0) {
    return {std::move(id), std::move(mentions), count, type, first_section};
}

inline kgsum::KnowledgeGraph graph(std::string doc_id, std::vector<kgsum::EntityNode> nodes,
                                   std::vector<kgsum::RelationEdge> edges = {}) {
    kgsum::KnowledgeGraph g;
    g.doc_id = std::move(doc_id);
    g.nodes = std::move(nodes);
    g.edges = std::move(edges);
    return g;
}

}  // namespace fixtures
