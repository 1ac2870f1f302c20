#pragma once
// Command-line entry point: build -> baseline/train/predict -> align -> eval,
// plus gradcheck and calibrate-tau. Every subcommand is a pure function of
// (inputs, config, seed); outputs are written atomically and reproduce
// byte-for-byte on rerun. Diagnostics go to stderr, data to files/stdout.
//
// Exit codes: 0 success, 1 input/validation error (message names file, line
// and JSON path), 2 internal error. gradcheck additionally exits 1 when the
// gradient comparison fails its bound.

#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kgsum/align.hpp"
#include "kgsum/baselines.hpp"
#include "kgsum/core.hpp"
#include "kgsum/gat.hpp"
#include "kgsum/graph_build.hpp"
#include "kgsum/ingest.hpp"
#include "kgsum/metrics.hpp"
#include "kgsum/parallel.hpp"

namespace kgsum::cli {

inline ojson run_header(const ojson& config_echo) {
    ojson h;
    h["tool"] = std::string(kToolName);
    h["version"] = std::string(kToolVersion);
    h["config_hash"] = config_hash_hex(config_echo);
    h["config"] = config_echo;
    return h;
}

inline void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
    } else {
        atomic_write_file(out_path, content);
    }
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
    std::string docs, out_full, out_target, report;
    double tau = 2.0;
    std::string merge_policy = "transitive";
    bool no_filter = false;
    int jobs = 1;
};

inline int cmd_build(const BuildArgs& args) {
    BuildOptions opts;
    opts.merge_policy = parse_merge_policy(args.merge_policy);

    std::vector<DocumentRecord> docs = read_document_file(args.docs);
    CorpusStats stats = compute_corpus_stats(docs, args.tau);

    struct Built {
        bool kept = true;
        std::string reason;
        std::string full_line;
        std::optional<std::string> target_line;
        int full_nodes = 0, full_edges = 0;
    };
    auto built = parallel_map<Built>(docs.size(), args.jobs, [&](size_t i) {
        const DocumentRecord& doc = docs[i];
        Built b;
        if (doc.abstract_graph && !args.no_filter) {
            FilterDecision d = filter_pair(doc, *doc.abstract_graph, doc.abstract_token_count);
            if (!d.keep) {
                b.kept = false;
                b.reason = d.reason;
                return b;
            }
        }
        KnowledgeGraph full = build_full_graph(doc, stats, opts);
        auto violations = validate_graph(full);
        if (!violations.empty())
            throw std::logic_error("built graph violates invariants: " + violations.front().detail);
        b.full_nodes = static_cast<int>(full.nodes.size());
        b.full_edges = static_cast<int>(full.edges.size());
        b.full_line = serialize_graph(full);
        if (doc.abstract_graph) b.target_line = serialize_graph(*doc.abstract_graph);
        return b;
    });

    std::string full_out, target_out;
    ojson doc_rows = ojson::array();
    for (size_t i = 0; i < docs.size(); ++i) {
        ojson row;
        row["doc_id"] = docs[i].doc_id;
        row["kept"] = built[i].kept;
        if (!built[i].kept) {
            row["reason"] = built[i].reason;
            std::cerr << "build: dropped " << docs[i].doc_id << " (" << built[i].reason << ")\n";
        } else {
            full_out += built[i].full_line + "\n";
            if (built[i].target_line) target_out += *built[i].target_line + "\n";
            row["full_nodes"] = built[i].full_nodes;
            row["full_edges"] = built[i].full_edges;
        }
        doc_rows.push_back(std::move(row));
    }
    atomic_write_file(args.out_full, full_out);
    atomic_write_file(args.out_target, target_out);

    if (!args.report.empty()) {
        ojson cfg;
        cfg["subcommand"] = "build";
        cfg["tau"] = args.tau;
        cfg["merge_policy"] = args.merge_policy;
        cfg["filter"] = !args.no_filter;
        ojson rep;
        rep["header"] = run_header(cfg);
        rep["documents"] = std::move(doc_rows);
        atomic_write_file(args.report, rep.dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// align

struct AlignArgs {
    std::string predicted, target, out;
    double lambda = 0.7;
    int jobs = 1;
};

inline std::map<std::string, const KnowledgeGraph*> index_by_doc(
    const std::vector<KnowledgeGraph>& graphs, const std::string& what) {
    std::map<std::string, const KnowledgeGraph*> m;
    for (const auto& g : graphs) {
        if (!m.emplace(g.doc_id, &g).second)
            throw ValidationError(what + ": duplicate doc_id " + g.doc_id);
    }
    return m;
}

// Predicted and target corpora must cover the same documents; a silently
// skipped target would distort corpus recall.
inline void require_same_docs(const std::vector<KnowledgeGraph>& predicted,
                              const std::map<std::string, const KnowledgeGraph*>& targets,
                              const std::string& target_file) {
    std::set<std::string> covered;
    for (const auto& g : predicted) covered.insert(g.doc_id);
    for (const auto& [doc_id, _] : targets) {
        if (!covered.count(doc_id))
            throw ValidationError(target_file + ": doc_id " + doc_id +
                                  " has no predicted graph");
    }
}

inline int cmd_align(const AlignArgs& args) {
    std::vector<KnowledgeGraph> predicted = read_graph_file(args.predicted);
    std::vector<KnowledgeGraph> target = read_graph_file(args.target);
    auto targets = index_by_doc(target, args.target);
    require_same_docs(predicted, targets, args.target);

    auto lines = parallel_map<std::string>(predicted.size(), args.jobs, [&](size_t i) {
        auto it = targets.find(predicted[i].doc_id);
        if (it == targets.end())
            throw ValidationError("no target graph for doc_id " + predicted[i].doc_id);
        Alignment a = align_graphs(predicted[i], *it->second, args.lambda);
        return serialize_alignment(a) + "\n";
    });
    std::string out;
    for (const auto& l : lines) out += l;
    emit(args.out, out);
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string predicted, target, alignment, out;
    double lambda = 0.7;
    std::string average = "macro";
    std::string typed_entity = "any";
    int jobs = 1;
};

inline ojson prf_to_json(const PRF& p) {
    ojson j;
    j["precision"] = p.precision;
    j["recall"] = p.recall;
    j["f1"] = p.f1;
    return j;
}

inline ojson metrics_report_to_json(const MetricsReport& r) {
    ojson j;
    j["untyped_entity"] = prf_to_json(r.untyped_entity);
    j["typed_entity"] = prf_to_json(r.typed_entity);
    j["untyped_relation"] = prf_to_json(r.untyped_relation);
    j["typed_relation"] = prf_to_json(r.typed_relation);
    if (r.duplication)
        j["duplication"] = *r.duplication;
    else
        j["duplication"] = nullptr;
    return j;
}

inline int cmd_eval(const EvalArgs& args) {
    const AverageMode mode = parse_average_mode(args.average);
    const TypedEntityRule rule = parse_typed_entity_rule(args.typed_entity);
    std::vector<KnowledgeGraph> predicted = read_graph_file(args.predicted);
    std::vector<KnowledgeGraph> target = read_graph_file(args.target);
    auto targets = index_by_doc(target, args.target);
    require_same_docs(predicted, targets, args.target);

    std::map<std::string, Alignment> given;
    if (!args.alignment.empty()) {
        for (auto& a : read_alignment_file(args.alignment)) {
            if (!given.emplace(a.doc_id, std::move(a)).second)
                throw ValidationError(args.alignment + ": duplicate doc_id");
        }
    }

    auto reports = parallel_map<MetricsReport>(predicted.size(), args.jobs, [&](size_t i) {
        auto it = targets.find(predicted[i].doc_id);
        if (it == targets.end())
            throw ValidationError("no target graph for doc_id " + predicted[i].doc_id);
        Alignment a;
        if (!args.alignment.empty()) {
            auto ga = given.find(predicted[i].doc_id);
            if (ga == given.end())
                throw ValidationError("no alignment for doc_id " + predicted[i].doc_id);
            a = ga->second;
        } else {
            a = align_graphs(predicted[i], *it->second, args.lambda);
        }
        return evaluate_document(a, predicted[i], *it->second, rule);
    });

    ojson cfg;
    cfg["subcommand"] = "eval";
    cfg["lambda"] = args.lambda;
    cfg["average"] = args.average;
    cfg["typed_entity"] = args.typed_entity;
    cfg["alignment_file"] = !args.alignment.empty();
    ojson out;
    out["header"] = run_header(cfg);
    out["documents"] = ojson::array();
    for (const auto& r : reports) {
        ojson row = metrics_report_to_json(r);
        ojson doc;
        doc["doc_id"] = r.doc_id;
        for (auto& [k, v] : row.items()) doc[k] = v;
        out["documents"].push_back(std::move(doc));
    }
    out["aggregate"] = metrics_report_to_json(aggregate(reports, mode));
    emit(args.out, out.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// baseline

struct BaselineArgs {
    std::string method;
    std::string full, target, docs, selections, out, report;
    BaselineConfig cfg;
    double tau = 2.0;
    std::string merge_policy = "transitive";
    int jobs = 1;
};

inline int cmd_baseline(const BaselineArgs& args) {
    args.cfg.validate();
    std::vector<std::string> lines;
    std::vector<std::string> doc_ids;

    if (args.method == "pagerank" || args.method == "topkfreq") {
        if (args.full.empty()) throw ValidationError("--full is required for " + args.method);
        std::vector<KnowledgeGraph> full = read_graph_file(args.full);
        lines = parallel_map<std::string>(full.size(), args.jobs, [&](size_t i) {
            KnowledgeGraph pred = args.method == "pagerank" ? pagerank_select(full[i], args.cfg)
                                                            : topk_freq_select(full[i], args.cfg);
            return serialize_graph(pred) + "\n";
        });
        for (const auto& g : full) doc_ids.push_back(g.doc_id);
    } else if (args.method == "goldentity") {
        if (args.full.empty() || args.target.empty())
            throw ValidationError("--full and --target are required for goldentity");
        std::vector<KnowledgeGraph> full = read_graph_file(args.full);
        std::vector<KnowledgeGraph> target = read_graph_file(args.target);
        auto targets = index_by_doc(target, args.target);
        lines = parallel_map<std::string>(full.size(), args.jobs, [&](size_t i) {
            auto it = targets.find(full[i].doc_id);
            if (it == targets.end())
                throw ValidationError("no target graph for doc_id " + full[i].doc_id);
            return serialize_graph(gold_entity_select(full[i], *it->second, args.cfg)) + "\n";
        });
        for (const auto& g : full) doc_ids.push_back(g.doc_id);
    } else if (args.method == "summary-induced") {
        if (args.docs.empty() || args.selections.empty())
            throw ValidationError("--docs and --selections are required for summary-induced");
        std::vector<DocumentRecord> docs = read_document_file(args.docs);
        CorpusStats stats = compute_corpus_stats(docs, args.tau);
        BuildOptions opts;
        opts.merge_policy = parse_merge_policy(args.merge_policy);

        std::map<std::string, std::set<std::pair<int, int>>> selections;
        for_each_line(args.selections, [&](size_t, const std::string& line) {
            ojson j;
            try {
                j = ojson::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ValidationError(std::string("$: invalid JSON: ") + e.what());
            }
            std::string doc_id = jsonio::get_string(j, "doc_id", "$");
            const ojson& sents = jsonio::get_array(j, "sentences", "$");
            std::set<std::pair<int, int>> sel;
            for (size_t k = 0; k < sents.size(); ++k) {
                const ojson& p = sents[k];
                if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
                    !p[1].is_number_integer())
                    jsonio::fail("$.sentences[" + std::to_string(k) + "]",
                                 "expected [section, sentence] integers");
                sel.insert({p[0].get<int>(), p[1].get<int>()});
            }
            if (!selections.emplace(std::move(doc_id), std::move(sel)).second)
                jsonio::fail("$.doc_id", "duplicate doc_id");
        });

        lines = parallel_map<std::string>(docs.size(), args.jobs, [&](size_t i) {
            auto it = selections.find(docs[i].doc_id);
            if (it == selections.end())
                throw ValidationError("no sentence selection for doc_id " + docs[i].doc_id);
            FullGraphBuild build = build_full_graph_detailed(docs[i], stats, opts);
            return serialize_graph(summary_induced_graph(docs[i], build, it->second)) + "\n";
        });
        for (const auto& d : docs) doc_ids.push_back(d.doc_id);
    } else {
        throw ValidationError("unknown baseline method: " + args.method);
    }

    std::string out;
    for (const auto& l : lines) out += l;
    atomic_write_file(args.out, out);

    if (!args.report.empty()) {
        ojson cfg;
        cfg["subcommand"] = "baseline";
        cfg["method"] = args.method;
        cfg["k"] = args.cfg.k;
        cfg["damping"] = args.cfg.pagerank_damping;
        cfg["tol"] = args.cfg.pagerank_tol;
        cfg["max_iter"] = args.cfg.pagerank_max_iter;
        cfg["ge_threshold"] = args.cfg.ge_threshold;
        cfg["directed"] = args.cfg.pagerank_directed;
        ojson rep;
        rep["header"] = run_header(cfg);
        rep["documents"] = doc_ids;
        atomic_write_file(args.report, rep.dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string graphs, targets, embeddings, docs, config, out, log;
    std::string dev_graphs, dev_targets;
    double lambda = 0.7;
    std::optional<uint64_t> seed;
    std::optional<int> steps;
    std::string fallback = "hash";
};

inline int cmd_train(const TrainArgs& args) {
    GatConfig cfg;
    if (!args.config.empty()) {
        std::ifstream in(args.config);
        if (!in) throw ValidationError(args.config + ": cannot open config file");
        ojson j;
        try {
            j = ojson::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(args.config + ": invalid JSON: " + e.what());
        }
        try {
            cfg = gat_config_from_json(j);
        } catch (const ValidationError& e) {
            throw ValidationError(args.config + ": " + e.what());
        }
    }
    if (args.seed) cfg.seed = *args.seed;
    if (args.steps) cfg.max_steps = *args.steps;
    if (!args.docs.empty()) {
        int max_sections = 1;
        for_each_document(args.docs, [&](const DocumentRecord& d) {
            max_sections = std::max(max_sections, static_cast<int>(d.sections.size()));
        });
        cfg.num_sections = max_sections;
    }
    cfg.validate();

    EmbeddingTable table = load_embedding_table(args.embeddings, parse_fallback_mode(args.fallback));
    std::vector<KnowledgeGraph> full = read_graph_file(args.graphs);
    std::vector<KnowledgeGraph> target = read_graph_file(args.targets);
    auto targets = index_by_doc(target, args.targets);

    std::vector<TrainExample> examples;
    for (auto& g : full) {
        auto it = targets.find(g.doc_id);
        if (it == targets.end())
            throw ValidationError("no target graph for doc_id " + g.doc_id);
        Alignment a = align_graphs(g, *it->second, args.lambda);
        TrainExample ex;
        ex.positive.assign(g.nodes.size(), 0);
        for (const auto& p : a.pairs) {
            int idx = g.node_index(p.predicted);
            if (idx >= 0) ex.positive[idx] = 1;
        }
        ex.graph = std::move(g);
        examples.push_back(std::move(ex));
    }

    std::vector<DevExample> dev;
    if (!args.dev_graphs.empty() || !args.dev_targets.empty()) {
        if (args.dev_graphs.empty() || args.dev_targets.empty())
            throw ValidationError("--dev-graphs and --dev-targets must be given together");
        std::vector<KnowledgeGraph> dg = read_graph_file(args.dev_graphs);
        std::vector<KnowledgeGraph> dt = read_graph_file(args.dev_targets);
        auto dts = index_by_doc(dt, args.dev_targets);
        for (auto& g : dg) {
            auto it = dts.find(g.doc_id);
            if (it == dts.end())
                throw ValidationError("no dev target graph for doc_id " + g.doc_id);
            dev.push_back({std::move(g), *it->second});
        }
    }

    TrainResult result = train(examples, table, cfg, dev, args.lambda);
    save_model(result.model, args.out);

    if (!args.log.empty()) {
        ojson log;
        log["header"] = run_header(gat_config_to_json(cfg));
        log["entries"] = ojson::array();
        for (const auto& e : result.log) {
            ojson je;
            je["step"] = e.step;
            je["loss"] = e.loss;
            if (e.dev_typed_relation_f1 >= 0.0) je["dev_typed_relation_f1"] = e.dev_typed_relation_f1;
            log["entries"].push_back(std::move(je));
        }
        log["best_step"] = result.best_step;
        log["best_dev_f1"] = result.best_dev_f1;
        atomic_write_file(args.log, log.dump(2) + "\n");
    }
    std::cerr << "train: " << examples.size() << " graphs, " << cfg.max_steps << " steps";
    if (result.best_step > 0) std::cerr << ", best dev step " << result.best_step;
    std::cerr << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string graphs, embeddings, model, out;
    std::optional<double> threshold;
    std::string fallback = "hash";
    int jobs = 1;
};

inline int cmd_predict(const PredictArgs& args) {
    GatModel model = load_model(args.model);
    GatConfig cfg = model.config;
    if (args.threshold) cfg.threshold = *args.threshold;
    EmbeddingTable table = load_embedding_table(args.embeddings, parse_fallback_mode(args.fallback));
    std::vector<KnowledgeGraph> full = read_graph_file(args.graphs);
    auto lines = parallel_map<std::string>(full.size(), args.jobs, [&](size_t i) {
        return serialize_graph(predict(full[i], model, table, cfg)) + "\n";
    });
    std::string out;
    for (const auto& l : lines) out += l;
    atomic_write_file(args.out, out);
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradCheckArgs {
    int nodes = 6;
    uint64_t seed = 17;
    int samples = 200;
    bool mutate = false;
    std::string out;
};

// Small random graph with distinct mention strings for self-checks.
inline KnowledgeGraph make_random_graph(int n, std::mt19937_64& rng) {
    KnowledgeGraph g;
    g.doc_id = "synthetic";
    for (int i = 0; i < n; ++i) {
        EntityNode node;
        node.id = "synthetic:" + std::to_string(i);
        std::string name = "entity ";
        for (int k = 0; k < 8; ++k) name.push_back('a' + static_cast<char>(rng() % 26));
        node.mentions = {name};
        node.mention_count = 1 + static_cast<int>(rng() % 7);
        node.type = static_cast<EntityType>(rng() % kNumEntityTypes);
        node.first_section = static_cast<int>(rng() % 4);
        g.nodes.push_back(std::move(node));
    }
    std::set<std::tuple<int, int, int>> used;
    const int edges = std::max(1, n * 2);
    for (int e = 0; e < edges; ++e) {
        int u = static_cast<int>(rng() % n);
        int v = static_cast<int>(rng() % n);
        int r = static_cast<int>(rng() % kNumRelationTypes);
        if (u == v) continue;
        if (!used.insert({u, v, r}).second) continue;
        g.edges.push_back({g.nodes[u].id, g.nodes[v].id, static_cast<RelationType>(r),
                           1 + static_cast<int>(rng() % 3)});
    }
    return g;
}

inline int cmd_gradcheck(const GradCheckArgs& args) {
    if (args.nodes < 1) throw ValidationError("--nodes must be >= 1");
    GatConfig cfg;
    cfg.dropout = 0.0;
    cfg.embed_dim = 32;  // hash-fallback embeddings; smaller keeps the check quick
    std::mt19937_64 rng(args.seed);
    KnowledgeGraph graph = make_random_graph(args.nodes, rng);
    GatModel model = init_model(cfg, rng);
    EmbeddingTable table;
    table.dimension = cfg.embed_dim;
    table.fallback = EmbeddingFallback::Hash;

    GradCheckResult res =
        grad_check(graph, model, table, cfg, args.seed ^ 0x9e3779b9ull, args.samples, args.mutate);
    const bool pass = args.mutate ? res.max_rel_error > 1e-2 : res.max_rel_error <= 1e-3;

    ojson cfg_echo;
    cfg_echo["subcommand"] = "gradcheck";
    cfg_echo["nodes"] = args.nodes;
    cfg_echo["seed"] = args.seed;
    cfg_echo["samples"] = args.samples;
    cfg_echo["mutate"] = args.mutate;
    ojson out;
    out["header"] = run_header(cfg_echo);
    out["max_rel_error"] = res.max_rel_error;
    out["checked"] = res.checked;
    out["pass"] = pass;
    emit(args.out, out.dump(2) + "\n");
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// calibrate-tau

struct CalibrateArgs {
    std::string docs, taus = "1.0,1.5,2.0,2.5,3.0", out;
};

inline int cmd_calibrate_tau(const CalibrateArgs& args) {
    std::vector<double> taus;
    {
        std::stringstream ss(args.taus);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            try {
                taus.push_back(std::stod(item));
            } catch (...) {
                throw ValidationError("bad --taus entry: " + item);
            }
        }
        if (taus.empty()) throw ValidationError("--taus has no values");
    }

    CorpusStats stats;
    stats.idf_threshold = taus.front();
    std::set<std::string> mention_keys;
    for_each_document(args.docs, [&](const DocumentRecord& d) {
        accumulate_corpus_stats(stats, d);
        for (const auto& m : d.mentions) mention_keys.insert(normalize_mention_key(m.text));
    });
    if (stats.num_documents == 0)
        throw ValidationError(args.docs + ": corpus stats require at least 1 document");

    ojson cfg;
    cfg["subcommand"] = "calibrate-tau";
    cfg["taus"] = taus;
    ojson out;
    out["header"] = run_header(cfg);
    out["distinct_mentions"] = mention_keys.size();
    out["candidates"] = ojson::array();
    for (double tau : taus) {
        stats.idf_threshold = tau;
        long long generic = 0;
        std::vector<std::string> generic_examples, non_generic_examples;
        for (const auto& key : mention_keys) {
            if (is_generic_mention(key, stats)) {
                ++generic;
                if (generic_examples.size() < 5) generic_examples.push_back(key);
            } else if (non_generic_examples.size() < 5) {
                non_generic_examples.push_back(key);
            }
        }
        ojson row;
        row["tau"] = tau;
        row["generic"] = generic;
        row["non_generic"] = static_cast<long long>(mention_keys.size()) - generic;
        row["generic_fraction"] =
            mention_keys.empty() ? 0.0 : static_cast<double>(generic) / mention_keys.size();
        row["generic_examples"] = generic_examples;
        row["non_generic_examples"] = non_generic_examples;
        out["candidates"].push_back(std::move(row));
    }
    emit(args.out, out.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// dispatcher

inline int run(int argc, const char* const* argv) {
    CLI::App app{"knowledge-graph summarization toolkit: build full-document "
                 "graphs from IE output, predict summary subgraphs, align and "
                 "evaluate them"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    BuildArgs build_args;
    auto* build = app.add_subcommand("build", "assemble full and target graph files from documents");
    build->add_option("--docs", build_args.docs, "documents file (line-delimited JSON)")->required();
    build->add_option("--out-full", build_args.out_full, "output path for full graphs")->required();
    build->add_option("--out-target", build_args.out_target, "output path for target graphs")->required();
    build->add_option("--tau", build_args.tau, "IDF threshold for generic unigrams (default 2.0)");
    build->add_option("--merge-policy", build_args.merge_policy,
                      "cluster merge policy: transitive|unique-pair (default transitive)");
    build->add_flag("--no-filter", build_args.no_filter, "keep pairs the dataset filter would drop");
    build->add_option("--jobs", build_args.jobs, "worker threads (default 1)");
    build->add_option("--report", build_args.report, "optional run report path");

    AlignArgs align_args;
    auto* align = app.add_subcommand("align", "align predicted graphs to target graphs");
    align->add_option("--predicted", align_args.predicted, "predicted graph file")->required();
    align->add_option("--target", align_args.target, "target graph file")->required();
    align->add_option("--lambda", align_args.lambda, "alignment threshold (default 0.7)");
    align->add_option("--out", align_args.out, "output alignment file")->required();
    align->add_option("--jobs", align_args.jobs, "worker threads (default 1)");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "score predicted graphs against target graphs");
    eval->add_option("--predicted", eval_args.predicted, "predicted graph file")->required();
    eval->add_option("--target", eval_args.target, "target graph file")->required();
    eval->add_option("--alignment", eval_args.alignment, "precomputed alignment file (optional)");
    eval->add_option("--lambda", eval_args.lambda, "alignment threshold (default 0.7)");
    eval->add_option("--average", eval_args.average, "corpus aggregation: macro|micro (default macro)");
    eval->add_option("--typed-entity", eval_args.typed_entity,
                     "typed entity match rule: any|all (default any)");
    eval->add_option("--out", eval_args.out, "report path (default stdout)");
    eval->add_option("--jobs", eval_args.jobs, "worker threads (default 1)");

    BaselineArgs baseline_args;
    auto* baseline = app.add_subcommand("baseline", "non-learned summary-graph predictors");
    baseline
        ->add_option("--method", baseline_args.method,
                     "pagerank|topkfreq|goldentity|summary-induced")
        ->required();
    baseline->add_option("--full", baseline_args.full, "full graph file");
    baseline->add_option("--target", baseline_args.target, "target graph file (goldentity)");
    baseline->add_option("--docs", baseline_args.docs, "documents file (summary-induced)");
    baseline->add_option("--selections", baseline_args.selections,
                         "summary sentence selections file (summary-induced)");
    baseline->add_option("--k", baseline_args.cfg.k, "selection size (default 18)");
    baseline->add_option("--damping", baseline_args.cfg.pagerank_damping,
                         "PageRank damping (default 0.85)");
    baseline->add_option("--tol", baseline_args.cfg.pagerank_tol,
                         "PageRank convergence tolerance (default 1e-9)");
    baseline->add_option("--max-iter", baseline_args.cfg.pagerank_max_iter,
                         "PageRank iteration cap (default 200)");
    baseline->add_option("--ge-threshold", baseline_args.cfg.ge_threshold,
                         "gold-entity inclusion threshold (default 0.7)");
    baseline->add_flag("--directed", baseline_args.cfg.pagerank_directed,
                       "directed PageRank walk (default undirected)");
    baseline->add_option("--tau", baseline_args.tau, "IDF threshold (summary-induced rebuild)");
    baseline->add_option("--merge-policy", baseline_args.merge_policy,
                         "merge policy for summary-induced rebuild");
    baseline->add_option("--out", baseline_args.out, "output predicted graph file")->required();
    baseline->add_option("--jobs", baseline_args.jobs, "worker threads (default 1)");
    baseline->add_option("--report", baseline_args.report, "optional run report path");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train the graph-attention salience classifier");
    train->add_option("--graphs", train_args.graphs, "full graph file")->required();
    train->add_option("--targets", train_args.targets, "target graph file")->required();
    train->add_option("--embeddings", train_args.embeddings, "embedding table file")->required();
    train->add_option("--docs", train_args.docs,
                      "documents file (derives the section vocabulary size)");
    train->add_option("--config", train_args.config, "JSON config file (GatConfig keys)");
    train->add_option("--seed", train_args.seed, "RNG seed (overrides config)");
    train->add_option("--steps", train_args.steps, "training steps (overrides config)");
    train->add_option("--lambda", train_args.lambda, "alignment threshold for labels (default 0.7)");
    train->add_option("--out", train_args.out, "output model file")->required();
    train->add_option("--log", train_args.log, "optional training log path");
    train->add_option("--dev-graphs", train_args.dev_graphs, "dev full graph file");
    train->add_option("--dev-targets", train_args.dev_targets, "dev target graph file");
    train->add_option("--fallback", train_args.fallback,
                      "embedding fallback mode: hash|error (default hash)");

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "predict summary graphs with a trained model");
    predict->add_option("--graphs", predict_args.graphs, "full graph file")->required();
    predict->add_option("--embeddings", predict_args.embeddings, "embedding table file")->required();
    predict->add_option("--model", predict_args.model, "model file")->required();
    predict->add_option("--threshold", predict_args.threshold,
                        "salience threshold (default from model config)");
    predict->add_option("--out", predict_args.out, "output predicted graph file")->required();
    predict->add_option("--fallback", predict_args.fallback,
                        "embedding fallback mode: hash|error (default hash)");
    predict->add_option("--jobs", predict_args.jobs, "worker threads (default 1)");

    GradCheckArgs gradcheck_args;
    auto* gradcheck = app.add_subcommand(
        "gradcheck", "verify analytic gradients against central finite differences");
    gradcheck->add_option("--nodes", gradcheck_args.nodes, "random graph size (default 6)");
    gradcheck->add_option("--seed", gradcheck_args.seed, "RNG seed (default 17)");
    gradcheck->add_option("--samples", gradcheck_args.samples, "parameters to check (default 200)");
    gradcheck->add_flag("--mutate", gradcheck_args.mutate,
                        "corrupt one backward gradient; the check must then fail");
    gradcheck->add_option("--out", gradcheck_args.out, "report path (default stdout)");

    CalibrateArgs calibrate_args;
    auto* calibrate = app.add_subcommand(
        "calibrate-tau", "report the generic/non-generic mention split at candidate tau values");
    calibrate->add_option("--docs", calibrate_args.docs, "documents file")->required();
    calibrate->add_option("--taus", calibrate_args.taus,
                          "comma-separated candidates (default 1.0,1.5,2.0,2.5,3.0)");
    calibrate->add_option("--out", calibrate_args.out, "report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*build) return cmd_build(build_args);
        if (*align) return cmd_align(align_args);
        if (*eval) return cmd_eval(eval_args);
        if (*baseline) return cmd_baseline(baseline_args);
        if (*train) return cmd_train(train_args);
        if (*predict) return cmd_predict(predict_args);
        if (*gradcheck) return cmd_gradcheck(gradcheck_args);
        if (*calibrate) return cmd_calibrate_tau(calibrate_args);
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}

// Test-friendly entry: arguments without the program name.
inline int run(const std::vector<std::string>& args) {
    std::vector<std::string> full = {"kgsum"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& s : full) argv.push_back(s.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace kgsum::cli
