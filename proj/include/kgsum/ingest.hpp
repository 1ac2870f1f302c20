#pragma once
// On-disk formats (line-delimited JSON documents, graphs, alignments,
// embedding tables), corpus IDF statistics, the dataset filter rules and the
// external embedding table with its deterministic hash fallback.
//
// Parsers reject rather than repair: any schema violation raises
// ValidationError carrying the JSON path (and file:line when read from disk).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "kgsum/align.hpp"
#include "kgsum/core.hpp"
#include "kgsum/text.hpp"

namespace kgsum {

using ojson = nlohmann::ordered_json;

using WarnSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

inline std::string hex64(uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return std::string(buf);
}

// Digest of a canonical config serialization, echoed in report headers so any
// table is reproducible from its own metadata.
inline std::string config_hash_hex(const ojson& config) { return hex64(fnv1a64(config.dump())); }

namespace jsonio {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw ValidationError(path + ": " + msg);
}

inline const ojson& member(const ojson& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing key \"") + key + "\"");
    return *it;
}

inline std::string get_string(const ojson& obj, const char* key, const std::string& path) {
    const ojson& v = member(obj, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected string");
    return v.get<std::string>();
}

inline int get_int(const ojson& obj, const char* key, const std::string& path) {
    const ojson& v = member(obj, key, path);
    if (!v.is_number_integer()) fail(path + "." + key, "expected integer");
    return v.get<int>();
}

inline const ojson& get_array(const ojson& obj, const char* key, const std::string& path) {
    const ojson& v = member(obj, key, path);
    if (!v.is_array()) fail(path + "." + key, "expected array");
    return v;
}

}  // namespace jsonio

// ---------------------------------------------------------------------------
// Knowledge graph lines

inline KnowledgeGraph parse_graph_json(const ojson& j, const std::string& path) {
    using namespace jsonio;
    KnowledgeGraph g;
    g.doc_id = get_string(j, "doc_id", path);
    if (g.doc_id.empty()) fail(path + ".doc_id", "must be nonempty");
    const ojson& nodes = get_array(j, "nodes", path);
    for (size_t i = 0; i < nodes.size(); ++i) {
        std::string p = path + ".nodes[" + std::to_string(i) + "]";
        const ojson& n = nodes[i];
        EntityNode node;
        node.id = get_string(n, "id", p);
        const ojson& ms = get_array(n, "mentions", p);
        for (size_t k = 0; k < ms.size(); ++k) {
            if (!ms[k].is_string()) fail(p + ".mentions[" + std::to_string(k) + "]", "expected string");
            node.mentions.push_back(ms[k].get<std::string>());
        }
        node.mention_count = get_int(n, "count", p);
        try {
            node.type = parse_entity_type(get_string(n, "type", p));
        } catch (const ValidationError& e) {
            fail(p + ".type", e.what());
        }
        node.first_section = get_int(n, "first_section", p);
        g.nodes.push_back(std::move(node));
    }
    const ojson& edges = get_array(j, "edges", path);
    for (size_t i = 0; i < edges.size(); ++i) {
        std::string p = path + ".edges[" + std::to_string(i) + "]";
        const ojson& e = edges[i];
        RelationEdge edge;
        edge.src = get_string(e, "src", p);
        edge.dst = get_string(e, "dst", p);
        try {
            edge.type = parse_relation_type(get_string(e, "type", p));
        } catch (const ValidationError& err) {
            fail(p + ".type", err.what());
        }
        edge.mention_count = get_int(e, "count", p);
        g.edges.push_back(std::move(edge));
    }
    auto violations = validate_graph(g);
    if (!violations.empty()) {
        fail(path, violations.front().code + ": " + violations.front().detail);
    }
    return g;
}

inline ojson graph_to_json(const KnowledgeGraph& g) {
    ojson j;
    j["doc_id"] = g.doc_id;
    j["nodes"] = ojson::array();
    for (const auto& n : g.nodes) {
        ojson jn;
        jn["id"] = n.id;
        jn["mentions"] = n.mentions;
        jn["count"] = n.mention_count;
        jn["type"] = std::string(to_string(n.type));
        jn["first_section"] = n.first_section;
        j["nodes"].push_back(std::move(jn));
    }
    j["edges"] = ojson::array();
    for (const auto& e : g.edges) {
        ojson je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["type"] = std::string(to_string(e.type));
        je["count"] = e.mention_count;
        j["edges"].push_back(std::move(je));
    }
    return j;
}

inline KnowledgeGraph parse_graph_line(const std::string& line) {
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("$: invalid JSON: ") + e.what());
    }
    return parse_graph_json(j, "$");
}

inline std::string serialize_graph(const KnowledgeGraph& g) { return graph_to_json(g).dump(); }

// ---------------------------------------------------------------------------
// Document record lines

inline DocumentRecord parse_document_record(const std::string& line,
                                            const WarnSink& warn = warn_to_stderr) {
    using namespace jsonio;
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("$: invalid JSON: ") + e.what());
    }
    const std::string path = "$";
    DocumentRecord rec;
    rec.doc_id = get_string(j, "doc_id", path);
    if (rec.doc_id.empty()) fail("$.doc_id", "must be nonempty");

    const ojson& sections = get_array(j, "sections", path);
    std::vector<std::string> doc_tokens;
    for (size_t s = 0; s < sections.size(); ++s) {
        std::string sp = "$.sections[" + std::to_string(s) + "]";
        if (!sections[s].is_array()) fail(sp, "expected array of sentences");
        std::vector<std::vector<std::string>> sec;
        for (size_t t = 0; t < sections[s].size(); ++t) {
            std::string tp = sp + "[" + std::to_string(t) + "]";
            const ojson& sent = sections[s][t];
            if (!sent.is_array()) fail(tp, "expected array of tokens");
            std::vector<std::string> toks;
            for (size_t k = 0; k < sent.size(); ++k) {
                if (!sent[k].is_string()) fail(tp + "[" + std::to_string(k) + "]", "expected string token");
                toks.push_back(sent[k].get<std::string>());
            }
            if (toks.size() > 150 && warn) {
                warn(rec.doc_id + ": sentence " + std::to_string(t) + " of section " +
                     std::to_string(s) + " has " + std::to_string(toks.size()) +
                     " tokens (>150); upstream windowing should have discarded it");
            }
            doc_tokens.insert(doc_tokens.end(), toks.begin(), toks.end());
            sec.push_back(std::move(toks));
        }
        rec.sections.push_back(std::move(sec));
    }

    const ojson& mentions = get_array(j, "mentions", path);
    std::unordered_set<std::string> mention_ids;
    for (size_t i = 0; i < mentions.size(); ++i) {
        std::string p = "$.mentions[" + std::to_string(i) + "]";
        const ojson& m = mentions[i];
        Mention mm;
        mm.id = get_string(m, "id", p);
        if (!mention_ids.insert(mm.id).second) fail(p + ".id", "duplicate mention id " + mm.id);
        mm.text = get_string(m, "text", p);
        const ojson& span = get_array(m, "span", p);
        if (span.size() != 2 || !span[0].is_number_integer() || !span[1].is_number_integer())
            fail(p + ".span", "expected [start, end] integers");
        mm.span = {span[0].get<int>(), span[1].get<int>()};
        if (mm.span.start < 0 || mm.span.start >= mm.span.end)
            fail(p + ".span", "require 0 <= start < end");
        if (mm.span.end > static_cast<int>(doc_tokens.size()))
            fail(p + ".span", "span end " + std::to_string(mm.span.end) +
                                  " beyond document length " + std::to_string(doc_tokens.size()));
        std::string joined;
        for (int k = mm.span.start; k < mm.span.end; ++k) {
            if (k > mm.span.start) joined += ' ';
            joined += doc_tokens[k];
        }
        if (joined != mm.text)
            fail(p + ".text", "text \"" + mm.text + "\" does not equal tokens over span (\"" +
                                  joined + "\")");
        mm.sentence = get_int(m, "sentence", p);
        mm.section = get_int(m, "section", p);
        if (mm.section < 0 || mm.section >= static_cast<int>(rec.sections.size()))
            fail(p + ".section", "section out of range");
        if (mm.sentence < 0 || mm.sentence >= rec.sentence_count(mm.section))
            fail(p + ".sentence", "sentence out of range for section");
        try {
            mm.type = parse_entity_type(get_string(m, "type", p));
        } catch (const ValidationError& e) {
            fail(p + ".type", e.what());
        }
        rec.mentions.push_back(std::move(mm));
    }

    const ojson& windows = get_array(j, "windows", path);
    for (size_t i = 0; i < windows.size(); ++i) {
        std::string p = "$.windows[" + std::to_string(i) + "]";
        const ojson& w = windows[i];
        Window win;
        win.id = get_int(w, "id", p);
        win.section = get_int(w, "section", p);
        if (win.section < 0 || win.section >= static_cast<int>(rec.sections.size()))
            fail(p + ".section", "section out of range");
        const ojson& sr = get_array(w, "sentences", p);
        if (sr.size() != 2 || !sr[0].is_number_integer() || !sr[1].is_number_integer())
            fail(p + ".sentences", "expected [first, last] integers");
        win.first_sentence = sr[0].get<int>();
        win.last_sentence = sr[1].get<int>();
        if (win.first_sentence < 0 || win.first_sentence > win.last_sentence ||
            win.last_sentence >= rec.sentence_count(win.section))
            fail(p + ".sentences", "sentence range outside section");
        const ojson& mids = get_array(w, "mention_ids", p);
        for (size_t k = 0; k < mids.size(); ++k) {
            if (!mids[k].is_string()) fail(p + ".mention_ids[" + std::to_string(k) + "]", "expected string");
            std::string id = mids[k].get<std::string>();
            if (!mention_ids.count(id))
                fail(p + ".mention_ids[" + std::to_string(k) + "]", "undefined mention id " + id);
            win.mention_ids.push_back(std::move(id));
        }
        const ojson& clusters = get_array(w, "coref_clusters", p);
        std::unordered_set<std::string> clustered;
        for (size_t c = 0; c < clusters.size(); ++c) {
            std::string cp = p + ".coref_clusters[" + std::to_string(c) + "]";
            if (!clusters[c].is_array()) fail(cp, "expected array of mention ids");
            std::vector<std::string> cluster;
            for (size_t k = 0; k < clusters[c].size(); ++k) {
                if (!clusters[c][k].is_string()) fail(cp + "[" + std::to_string(k) + "]", "expected string");
                std::string id = clusters[c][k].get<std::string>();
                if (!mention_ids.count(id)) fail(cp + "[" + std::to_string(k) + "]", "undefined mention id " + id);
                if (!clustered.insert(id).second)
                    fail(cp + "[" + std::to_string(k) + "]",
                         "mention " + id + " appears in two clusters of one window");
                cluster.push_back(std::move(id));
            }
            win.coref_clusters.push_back(std::move(cluster));
        }
        const ojson& rels = get_array(w, "relations", p);
        for (size_t r = 0; r < rels.size(); ++r) {
            std::string rp = p + ".relations[" + std::to_string(r) + "]";
            RelationMention rm;
            rm.head = jsonio::get_string(rels[r], "head", rp);
            rm.tail = jsonio::get_string(rels[r], "tail", rp);
            if (!mention_ids.count(rm.head)) fail(rp + ".head", "undefined mention id " + rm.head);
            if (!mention_ids.count(rm.tail)) fail(rp + ".tail", "undefined mention id " + rm.tail);
            try {
                rm.type = parse_relation_type(jsonio::get_string(rels[r], "type", rp));
            } catch (const ValidationError& e) {
                fail(rp + ".type", e.what());
            }
            win.relations.push_back(std::move(rm));
        }
        rec.windows.push_back(std::move(win));
    }

    if (j.contains("abstract_graph") && !j["abstract_graph"].is_null()) {
        KnowledgeGraph g = parse_graph_json(j["abstract_graph"], "$.abstract_graph");
        if (g.doc_id != rec.doc_id)
            fail("$.abstract_graph.doc_id", "does not match record doc_id");
        rec.abstract_graph = std::move(g);
    }
    if (j.contains("abstract_token_count") && !j["abstract_token_count"].is_null()) {
        if (!j["abstract_token_count"].is_number_integer())
            fail("$.abstract_token_count", "expected integer");
        rec.abstract_token_count = j["abstract_token_count"].get<int>();
        if (*rec.abstract_token_count < 0) fail("$.abstract_token_count", "must be >= 0");
    }
    return rec;
}

inline ojson document_record_to_json(const DocumentRecord& rec) {
    ojson j;
    j["doc_id"] = rec.doc_id;
    j["sections"] = rec.sections;
    j["mentions"] = ojson::array();
    for (const auto& m : rec.mentions) {
        ojson jm;
        jm["id"] = m.id;
        jm["text"] = m.text;
        jm["span"] = {m.span.start, m.span.end};
        jm["sentence"] = m.sentence;
        jm["section"] = m.section;
        jm["type"] = std::string(to_string(m.type));
        j["mentions"].push_back(std::move(jm));
    }
    j["windows"] = ojson::array();
    for (const auto& w : rec.windows) {
        ojson jw;
        jw["id"] = w.id;
        jw["section"] = w.section;
        jw["sentences"] = {w.first_sentence, w.last_sentence};
        jw["mention_ids"] = w.mention_ids;
        jw["coref_clusters"] = w.coref_clusters;
        jw["relations"] = ojson::array();
        for (const auto& r : w.relations) {
            ojson jr;
            jr["head"] = r.head;
            jr["tail"] = r.tail;
            jr["type"] = std::string(to_string(r.type));
            jw["relations"].push_back(std::move(jr));
        }
        j["windows"].push_back(std::move(jw));
    }
    if (rec.abstract_graph) j["abstract_graph"] = graph_to_json(*rec.abstract_graph);
    if (rec.abstract_token_count) j["abstract_token_count"] = *rec.abstract_token_count;
    return j;
}

inline std::string serialize_document_record(const DocumentRecord& rec) {
    return document_record_to_json(rec).dump();
}

// ---------------------------------------------------------------------------
// Alignment lines

inline Alignment parse_alignment_line(const std::string& line) {
    using namespace jsonio;
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("$: invalid JSON: ") + e.what());
    }
    Alignment a;
    a.doc_id = get_string(j, "doc_id", "$");
    const ojson& lam = member(j, "lambda", "$");
    if (!lam.is_number()) fail("$.lambda", "expected number");
    a.lambda = lam.get<double>();
    const ojson& pairs = get_array(j, "pairs", "$");
    std::unordered_set<std::string> seen;
    for (size_t i = 0; i < pairs.size(); ++i) {
        std::string p = "$.pairs[" + std::to_string(i) + "]";
        AlignmentPair ap;
        ap.predicted = get_string(pairs[i], "pred", p);
        if (!seen.insert(ap.predicted).second)
            fail(p + ".pred", "predicted node " + ap.predicted + " aligned twice");
        ap.target = get_string(pairs[i], "target", p);
        const ojson& sc = member(pairs[i], "score", p);
        if (!sc.is_number()) fail(p + ".score", "expected number");
        ap.score = sc.get<double>();
        a.pairs.push_back(std::move(ap));
    }
    return a;
}

inline std::string serialize_alignment(const Alignment& a) {
    ojson j;
    j["doc_id"] = a.doc_id;
    j["pairs"] = ojson::array();
    for (const auto& p : a.pairs) {
        ojson jp;
        jp["pred"] = p.predicted;
        jp["target"] = p.target;
        jp["score"] = p.score;
        j["pairs"].push_back(std::move(jp));
    }
    j["lambda"] = a.lambda;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Corpus IDF statistics

struct CorpusStats {
    int num_documents = 0;
    std::unordered_map<std::string, int> document_frequency;
    double idf_threshold = 2.0;  // tau

    // Smoothed IDF, >= 1 for every term: ln((1+N)/(1+df)) + 1.
    double idf(std::string_view normalized_term) const {
        int df = 0;
        auto it = document_frequency.find(std::string(normalized_term));
        if (it != document_frequency.end()) df = it->second;
        return std::log((1.0 + num_documents) / (1.0 + df)) + 1.0;
    }
};

// Distinct normalized unigrams of the document body text.
inline std::unordered_set<std::string> document_unigrams(const DocumentRecord& doc) {
    std::unordered_set<std::string> terms;
    for (const auto& sec : doc.sections) {
        for (const auto& sent : sec) {
            for (const auto& tok : sent) {
                std::string t = normalize_token(tok);
                if (!t.empty()) terms.insert(std::move(t));
            }
        }
    }
    return terms;
}

inline void accumulate_corpus_stats(CorpusStats& stats, const DocumentRecord& doc) {
    stats.num_documents += 1;
    for (const auto& t : document_unigrams(doc)) stats.document_frequency[t] += 1;
}

// Associative merge; a parallel fold must equal the sequential one.
inline CorpusStats merge_corpus_stats(CorpusStats a, const CorpusStats& b) {
    a.num_documents += b.num_documents;
    for (const auto& [t, df] : b.document_frequency) a.document_frequency[t] += df;
    return a;
}

template <typename DocRange>
CorpusStats compute_corpus_stats(const DocRange& docs, double tau = 2.0) {
    CorpusStats stats;
    stats.idf_threshold = tau;
    for (const auto& d : docs) accumulate_corpus_stats(stats, d);
    if (stats.num_documents == 0) throw ValidationError("corpus stats require at least 1 document");
    return stats;
}

// ---------------------------------------------------------------------------
// Dataset filter (target pairs)

struct FilterDecision {
    bool keep = true;
    std::string reason;  // "too-few-relations" | "abstract-too-long"
};

inline constexpr int kMinTargetRelations = 5;
inline constexpr int kMaxAbstractTokens = 500;

inline FilterDecision filter_pair(const DocumentRecord&, const KnowledgeGraph& target,
                                  std::optional<int> abstract_token_count) {
    if (static_cast<int>(target.edges.size()) < kMinTargetRelations)
        return {false, "too-few-relations"};
    if (abstract_token_count && *abstract_token_count > kMaxAbstractTokens)
        return {false, "abstract-too-long"};
    return {true, ""};
}

inline FilterDecision filter_pair(const DocumentRecord& doc, const KnowledgeGraph& target,
                                  int abstract_token_count) {
    return filter_pair(doc, target, std::optional<int>(abstract_token_count));
}

// ---------------------------------------------------------------------------
// Embedding table

enum class EmbeddingFallback { Error, Hash };

inline EmbeddingFallback parse_fallback_mode(std::string_view s) {
    if (s == "error") return EmbeddingFallback::Error;
    if (s == "hash") return EmbeddingFallback::Hash;
    throw ValidationError("unknown embedding fallback mode: " + std::string(s));
}

// Precomputed sentence-encoder outputs keyed by normalized mention string.
// In hash fallback mode a missing key yields a deterministic pseudo-embedding:
// a counter-based generator keyed by the 64-bit hash of the normalized string
// draws values i.i.d. uniform in [-0.5, 0.5].
struct EmbeddingTable {
    int dimension = 0;
    EmbeddingFallback fallback = EmbeddingFallback::Hash;
    std::unordered_map<std::string, std::vector<double>> entries;

    std::vector<double> lookup(std::string_view raw_key) const {
        const std::string key = normalize_for_match(raw_key);
        auto it = entries.find(key);
        if (it != entries.end()) return it->second;
        if (fallback == EmbeddingFallback::Error)
            throw ValidationError("embedding table has no entry for \"" + key + "\"");
        std::vector<double> v(dimension);
        const uint64_t h = fnv1a64(key);
        for (int i = 0; i < dimension; ++i) {
            v[i] = u64_to_unit_double(splitmix64(h + static_cast<uint64_t>(i))) - 0.5;
        }
        return v;
    }
};

inline EmbeddingTable load_embedding_table(const std::string& path,
                                           EmbeddingFallback mode = EmbeddingFallback::Hash) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open embedding table");
    EmbeddingTable table;
    table.fallback = mode;
    std::string line;
    size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        const std::string loc = path + ":" + std::to_string(line_no);
        if (!have_header) {
            if (!j.is_object() || !j.contains("dimension") || !j["dimension"].is_number_integer())
                throw ValidationError(loc + ": $.dimension: header line {\"dimension\": h} required");
            table.dimension = j["dimension"].get<int>();
            if (table.dimension < 1) throw ValidationError(loc + ": $.dimension: must be >= 1");
            have_header = true;
            continue;
        }
        std::string key;
        try {
            key = jsonio::get_string(j, "key", "$");
            const ojson& vec = jsonio::get_array(j, "vector", "$");
            std::vector<double> v;
            v.reserve(vec.size());
            for (size_t i = 0; i < vec.size(); ++i) {
                if (!vec[i].is_number())
                    jsonio::fail("$.vector[" + std::to_string(i) + "]", "expected number");
                v.push_back(vec[i].get<double>());
            }
            if (static_cast<int>(v.size()) != table.dimension)
                jsonio::fail("$.vector", "inconsistent dimension: got " + std::to_string(v.size()) +
                                             ", header says " + std::to_string(table.dimension));
            std::string norm = normalize_for_match(key);
            if (!table.entries.emplace(norm, std::move(v)).second)
                jsonio::fail("$.key", "duplicate key \"" + norm + "\"");
        } catch (const ValidationError& e) {
            throw ValidationError(loc + ": " + e.what());
        }
    }
    if (!have_header) throw ValidationError(path + ": empty embedding table (header line missing)");
    return table;
}

inline void save_embedding_table(const EmbeddingTable& table, std::ostream& out) {
    ojson header;
    header["dimension"] = table.dimension;
    out << header.dump() << "\n";
    std::vector<std::string> keys;
    keys.reserve(table.entries.size());
    for (const auto& [k, _] : table.entries) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) {
        ojson j;
        j["key"] = k;
        j["vector"] = table.entries.at(k);
        out << j.dump() << "\n";
    }
}

// ---------------------------------------------------------------------------
// Line-delimited file helpers

// Streams nonblank lines; fn(line_number, line). Errors thrown by fn are
// wrapped with "path:line:" so messages name file, line and JSON path.
inline void for_each_line(const std::string& path,
                          const std::function<void(size_t, const std::string&)>& fn) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open file");
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            fn(line_no, line);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

inline void for_each_document(const std::string& path,
                              const std::function<void(const DocumentRecord&)>& fn,
                              const WarnSink& warn = warn_to_stderr) {
    for_each_line(path, [&](size_t, const std::string& line) {
        fn(parse_document_record(line, warn));
    });
}

// Streaming variant: one parsed record in memory at a time, so the footprint
// is bounded by the vocabulary, not the corpus.
inline CorpusStats compute_corpus_stats_from_file(const std::string& path, double tau,
                                                  const WarnSink& warn = warn_to_stderr) {
    CorpusStats stats;
    stats.idf_threshold = tau;
    for_each_document(path, [&](const DocumentRecord& d) { accumulate_corpus_stats(stats, d); },
                      warn);
    if (stats.num_documents == 0)
        throw ValidationError(path + ": corpus stats require at least 1 document");
    return stats;
}

inline std::vector<DocumentRecord> read_document_file(const std::string& path,
                                                      const WarnSink& warn = warn_to_stderr) {
    std::vector<DocumentRecord> docs;
    for_each_document(path, [&](const DocumentRecord& d) { docs.push_back(d); }, warn);
    return docs;
}

inline std::vector<KnowledgeGraph> read_graph_file(const std::string& path) {
    std::vector<KnowledgeGraph> graphs;
    for_each_line(path, [&](size_t, const std::string& line) {
        graphs.push_back(parse_graph_line(line));
    });
    return graphs;
}

inline std::vector<Alignment> read_alignment_file(const std::string& path) {
    std::vector<Alignment> out;
    for_each_line(path, [&](size_t, const std::string& line) {
        out.push_back(parse_alignment_line(line));
    });
    return out;
}

// Atomic write: temp file in the same directory, then rename.
inline void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError(tmp.string() + ": cannot open for writing");
        out << content;
        if (!out.good()) throw ValidationError(tmp.string() + ": write failed");
    }
    fs::rename(tmp, target);
}

}  // namespace kgsum
