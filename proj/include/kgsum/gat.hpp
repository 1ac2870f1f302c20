#pragma once
// Relation-typed graph attention salience classifier: node embedding from
// (mention count, first section, entity type, mention-string encoding), one
// attention head per relation type in each layer, residual aggregation,
// concat + projection + ReLU between layers, and a sigmoid salience head.
// Training is mean NLL with per-graph negative resampling and Adam, driven by
// the tape in autodiff.hpp; grad_check verifies the backward pass against
// central finite differences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "kgsum/align.hpp"
#include "kgsum/autodiff.hpp"
#include "kgsum/baselines.hpp"
#include "kgsum/core.hpp"
#include "kgsum/ingest.hpp"
#include "kgsum/metrics.hpp"
#include "kgsum/text.hpp"

namespace kgsum {

struct GatConfig {
    int hidden_dim = 16;                     // h
    int num_layers = 6;
    int num_heads = kNumRelationTypes;       // one per relation type
    int num_sections = 20;                   // n_s, overflow clamps to last bucket
    int num_types = kNumEntityTypes;         // n_t
    int embed_dim = 768;                     // h_e
    double dropout = 0.2;
    double lr = 5e-5;
    int neg_ratio = 3;
    int batch_size = 10;
    int max_steps = 1000;
    uint64_t seed = 0;
    double threshold = 0.5;
    bool directed_attention = false;  // out-edges only when true
    bool log_count = false;           // log(1 + n_i) instead of raw count
    int eval_every = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (hidden_dim < 1 || num_layers < 1 || num_sections < 1 || embed_dim < 1)
            throw ValidationError("gat config: all dimensions must be >= 1");
        if (num_heads != kNumRelationTypes)
            throw ValidationError("gat config: num_heads is fixed by the relation vocabulary");
        if (num_types != kNumEntityTypes)
            throw ValidationError("gat config: num_types is fixed by the entity vocabulary");
        if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("gat config: dropout in [0,1)");
        if (neg_ratio < 1) throw ValidationError("gat config: neg_ratio must be >= 1");
        if (batch_size < 1) throw ValidationError("gat config: batch_size must be >= 1");
        if (max_steps < 0) throw ValidationError("gat config: max_steps must be >= 0");
        if (lr <= 0.0) throw ValidationError("gat config: lr must be > 0");
        if (eval_every < 1) throw ValidationError("gat config: eval_every must be >= 1");
    }
};

inline ojson gat_config_to_json(const GatConfig& c) {
    ojson j;
    j["hidden_dim"] = c.hidden_dim;
    j["num_layers"] = c.num_layers;
    j["num_heads"] = c.num_heads;
    j["num_sections"] = c.num_sections;
    j["num_types"] = c.num_types;
    j["embed_dim"] = c.embed_dim;
    j["dropout"] = c.dropout;
    j["lr"] = c.lr;
    j["neg_ratio"] = c.neg_ratio;
    j["batch_size"] = c.batch_size;
    j["max_steps"] = c.max_steps;
    j["seed"] = c.seed;
    j["threshold"] = c.threshold;
    j["directed_attention"] = c.directed_attention;
    j["log_count"] = c.log_count;
    j["eval_every"] = c.eval_every;
    return j;
}

// Unknown keys rejected so typos in config files fail loudly.
inline GatConfig gat_config_from_json(const ojson& j, const std::string& path = "$") {
    GatConfig c;
    if (!j.is_object()) jsonio::fail(path, "expected object");
    for (const auto& [key, val] : j.items()) {
        if (key == "hidden_dim") c.hidden_dim = val.get<int>();
        else if (key == "num_layers") c.num_layers = val.get<int>();
        else if (key == "num_heads") c.num_heads = val.get<int>();
        else if (key == "num_sections") c.num_sections = val.get<int>();
        else if (key == "num_types") c.num_types = val.get<int>();
        else if (key == "embed_dim") c.embed_dim = val.get<int>();
        else if (key == "dropout") c.dropout = val.get<double>();
        else if (key == "lr") c.lr = val.get<double>();
        else if (key == "neg_ratio") c.neg_ratio = val.get<int>();
        else if (key == "batch_size") c.batch_size = val.get<int>();
        else if (key == "max_steps") c.max_steps = val.get<int>();
        else if (key == "seed") c.seed = val.get<uint64_t>();
        else if (key == "threshold") c.threshold = val.get<double>();
        else if (key == "directed_attention") c.directed_attention = val.get<bool>();
        else if (key == "log_count") c.log_count = val.get<bool>();
        else if (key == "eval_every") c.eval_every = val.get<int>();
        else jsonio::fail(path + "." + key, "unknown config key");
    }
    c.validate();
    return c;
}

// Parameter set. Shapes: n (h x 1), W_s (h x n_s), W_t (h x n_t),
// W_e (h x h_e); per layer and relation type W_Q/W_K/W_V (h x h); per layer
// W_O (h x 7h) with bias (1 x h); classifier w (h x 1), b (1 x 1).
struct GatModel {
    GatConfig config;

    Mat n_vec, w_section, w_type, w_embed;
    struct Head {
        Mat wq, wk, wv;
    };
    struct Layer {
        std::array<Head, kNumRelationTypes> heads;
        Mat w_out;
        Mat b_out;
    };
    std::vector<Layer> layers;
    Mat w_cls, b_cls;

    // Visits parameters in declared shape order; the model file and Adam
    // state use this order.
    template <typename F>
    void visit_params(F&& f) {
        f("n", n_vec);
        f("w_section", w_section);
        f("w_type", w_type);
        f("w_embed", w_embed);
        for (size_t l = 0; l < layers.size(); ++l) {
            const std::string base = "layer" + std::to_string(l) + ".";
            for (int r = 0; r < kNumRelationTypes; ++r) {
                const std::string head = base + "head" + std::to_string(r) + ".";
                f(head + "wq", layers[l].heads[r].wq);
                f(head + "wk", layers[l].heads[r].wk);
                f(head + "wv", layers[l].heads[r].wv);
            }
            f(base + "w_out", layers[l].w_out);
            f(base + "b_out", layers[l].b_out);
        }
        f("w_cls", w_cls);
        f("b_cls", b_cls);
    }

    template <typename F>
    void visit_params(F&& f) const {
        const_cast<GatModel*>(this)->visit_params(
            [&](const std::string& name, Mat& m) { f(name, static_cast<const Mat&>(m)); });
    }

    size_t num_parameters() const {
        size_t n = 0;
        visit_params([&](const std::string&, const Mat& m) { n += m.size(); });
        return n;
    }
};

inline GatModel make_zero_model(const GatConfig& cfg) {
    cfg.validate();
    GatModel m;
    m.config = cfg;
    const int h = cfg.hidden_dim;
    m.n_vec = Mat(h, 1);
    m.w_section = Mat(h, cfg.num_sections);
    m.w_type = Mat(h, cfg.num_types);
    m.w_embed = Mat(h, cfg.embed_dim);
    m.layers.resize(cfg.num_layers);
    for (auto& layer : m.layers) {
        for (auto& head : layer.heads) {
            head.wq = Mat(h, h);
            head.wk = Mat(h, h);
            head.wv = Mat(h, h);
        }
        layer.w_out = Mat(h, kNumRelationTypes * h);
        layer.b_out = Mat(1, h);
    }
    m.w_cls = Mat(h, 1);
    m.b_cls = Mat(1, 1);
    return m;
}

// All parameters uniform in [-1/sqrt(h), 1/sqrt(h)], drawn in visit order.
inline GatModel init_model(const GatConfig& cfg, std::mt19937_64& rng) {
    GatModel m = make_zero_model(cfg);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
    m.visit_params([&](const std::string&, Mat& mat) {
        for (auto& v : mat.a) v = (u64_to_unit_double(rng()) * 2.0 - 1.0) * bound;
    });
    return m;
}

// ---------------------------------------------------------------------------
// Features and masks (constants per graph)

struct GraphInputs {
    int n = 0;
    Mat counts;       // n x 1
    Mat sec_onehot;   // n x n_s
    Mat type_onehot;  // n x n_t
    Mat embeds;       // n x h_e
    std::array<RowMask, kNumRelationTypes> masks;
};

// Longest mention string; ties prefer the lexicographically smallest.
inline const std::string& longest_mention(const EntityNode& node) {
    if (node.mentions.empty()) throw ValidationError("node without mentions: " + node.id);
    const std::string* best = &node.mentions[0];
    for (const auto& m : node.mentions) {
        if (m.size() > best->size() || (m.size() == best->size() && m < *best)) best = &m;
    }
    return *best;
}

inline GraphInputs build_graph_inputs(const KnowledgeGraph& g, const EmbeddingTable& table,
                                      const GatConfig& cfg) {
    GraphInputs in;
    in.n = static_cast<int>(g.nodes.size());
    in.counts = Mat(in.n, 1);
    in.sec_onehot = Mat(in.n, cfg.num_sections);
    in.type_onehot = Mat(in.n, cfg.num_types);
    in.embeds = Mat(in.n, cfg.embed_dim);
    for (int i = 0; i < in.n; ++i) {
        const EntityNode& node = g.nodes[i];
        const double c = static_cast<double>(node.mention_count);
        in.counts(i, 0) = cfg.log_count ? std::log1p(c) : c;
        in.sec_onehot(i, std::min(node.first_section, cfg.num_sections - 1)) = 1.0;
        in.type_onehot(i, ordinal(node.type)) = 1.0;
        std::vector<double> e = table.lookup(longest_mention(node));
        if (static_cast<int>(e.size()) != cfg.embed_dim)
            throw ValidationError("embedding dimension " + std::to_string(e.size()) +
                                  " does not match configured embed_dim " +
                                  std::to_string(cfg.embed_dim));
        for (int j = 0; j < cfg.embed_dim; ++j) in.embeds(i, j) = e[j];
    }

    std::unordered_map<std::string, int> index;
    for (int i = 0; i < in.n; ++i) index[g.nodes[i].id] = i;
    std::array<std::vector<std::set<int>>, kNumRelationTypes> nbrs;
    for (auto& v : nbrs) v.resize(in.n);
    for (const auto& e : g.edges) {
        const int u = index.at(e.src), v = index.at(e.dst);
        const int r = ordinal(e.type);
        nbrs[r][u].insert(v);
        if (!cfg.directed_attention) nbrs[r][v].insert(u);
    }
    for (int r = 0; r < kNumRelationTypes; ++r) {
        in.masks[r].resize(in.n);
        for (int i = 0; i < in.n; ++i)
            in.masks[r][i].assign(nbrs[r][i].begin(), nbrs[r][i].end());
    }
    return in;
}

// Eq-4 node embedding for a single node, computed directly (the tape path
// computes the same sum through matmuls).
inline std::vector<double> embed_node(const EntityNode& node, const GatModel& model,
                                      const EmbeddingTable& table, const GatConfig& cfg) {
    const int h = cfg.hidden_dim;
    std::vector<double> v(h, 0.0);
    const double c_raw = static_cast<double>(node.mention_count);
    const double c = cfg.log_count ? std::log1p(c_raw) : c_raw;
    const int s = std::min(node.first_section, cfg.num_sections - 1);
    const int t = ordinal(node.type);
    std::vector<double> e = table.lookup(longest_mention(node));
    if (static_cast<int>(e.size()) != cfg.embed_dim)
        throw ValidationError("embedding dimension mismatch for node " + node.id);
    for (int i = 0; i < h; ++i) {
        double x = c * model.n_vec(i, 0) + model.w_section(i, s) + model.w_type(i, t);
        for (int j = 0; j < cfg.embed_dim; ++j) x += model.w_embed(i, j) * e[j];
        v[i] = x;
    }
    return v;
}

namespace detail {

struct ParamLeaves {
    std::vector<int> ids;           // leaf id per parameter, visit order
    std::vector<std::string> names;
    std::vector<Mat*> mats;         // borrowed
};

inline ParamLeaves push_params(Tape& tape, GatModel& model) {
    ParamLeaves out;
    model.visit_params([&](const std::string& name, Mat& m) {
        out.ids.push_back(tape.leaf(m));
        out.names.push_back(name);
        out.mats.push_back(&m);
    });
    return out;
}

struct LayerLeaves {
    std::array<std::array<int, 3>, kNumRelationTypes> heads;  // wq, wk, wv
    int w_out = -1;
    int b_out = -1;
};

// One relation-typed attention layer on the tape:
//   per head R: alpha = softmax_{j in N_R(i)} (W_K v_j)^T (W_Q v_i)
//               head_R = H + alpha (H W_V^T)
//   output = ReLU(concat(head_1..head_7) W_O^T + b), dropout via mask.
inline int append_attention_layer(Tape& tape, int h_id,
                                  const std::array<RowMask, kNumRelationTypes>& masks,
                                  const LayerLeaves& leaves, const Mat* dropout_mask) {
    std::vector<int> heads;
    heads.reserve(kNumRelationTypes);
    for (int r = 0; r < kNumRelationTypes; ++r) {
        const int q = tape.matmul(h_id, leaves.heads[r][0], false, true);
        const int k = tape.matmul(h_id, leaves.heads[r][1], false, true);
        const int v = tape.matmul(h_id, leaves.heads[r][2], false, true);
        const int scores = tape.matmul(q, k, false, true);
        const int alpha = tape.masked_softmax_rows(scores, masks[r]);
        const int ctx = tape.matmul(alpha, v);
        heads.push_back(tape.add(h_id, ctx));
    }
    const int cat = tape.concat_cols(heads);
    const int proj = tape.matmul(cat, leaves.w_out, false, true);
    const int act = tape.relu(tape.add_row_bias(proj, leaves.b_out));
    if (dropout_mask) return tape.hadamard_const(act, *dropout_mask);
    return act;
}

struct ForwardGraph {
    ParamLeaves params;
    int probs = -1;   // n x 1
    int logits = -1;  // n x 1
};

// Full forward pass on the tape. dropout_masks, when given, holds one
// n x h mask per layer (training mode).
inline ForwardGraph build_forward(Tape& tape, const GraphInputs& in, GatModel& model,
                                  const GatConfig& cfg,
                                  const std::vector<Mat>* dropout_masks = nullptr) {
    ForwardGraph fg;
    fg.params = push_params(tape, model);

    std::unordered_map<std::string, int> leaf;
    for (size_t i = 0; i < fg.params.names.size(); ++i) leaf[fg.params.names[i]] = fg.params.ids[i];

    const int counts = tape.leaf(in.counts);
    const int sec = tape.leaf(in.sec_onehot);
    const int typ = tape.leaf(in.type_onehot);
    const int emb = tape.leaf(in.embeds);

    int h_id = tape.add(tape.add(tape.matmul(counts, leaf.at("n"), false, true),
                                 tape.matmul(sec, leaf.at("w_section"), false, true)),
                        tape.add(tape.matmul(typ, leaf.at("w_type"), false, true),
                                 tape.matmul(emb, leaf.at("w_embed"), false, true)));

    for (int l = 0; l < cfg.num_layers; ++l) {
        LayerLeaves ll;
        const std::string base = "layer" + std::to_string(l) + ".";
        for (int r = 0; r < kNumRelationTypes; ++r) {
            const std::string head = base + "head" + std::to_string(r) + ".";
            ll.heads[r] = {leaf.at(head + "wq"), leaf.at(head + "wk"), leaf.at(head + "wv")};
        }
        ll.w_out = leaf.at(base + "w_out");
        ll.b_out = leaf.at(base + "b_out");
        const Mat* mask = dropout_masks ? &(*dropout_masks)[l] : nullptr;
        h_id = append_attention_layer(tape, h_id, in.masks, ll, mask);
    }

    fg.logits = tape.add_row_bias(tape.matmul(h_id, leaf.at("w_cls")), leaf.at("b_cls"));
    fg.probs = tape.sigmoid(fg.logits);
    return fg;
}

}  // namespace detail

// One attention layer applied to an explicit node-representation matrix
// (row per node). Exposed for verification against straight-line fixtures.
inline Mat attention_layer(const Mat& H, const KnowledgeGraph& graph, int layer,
                           const GatModel& model, const GatConfig& cfg,
                           const Mat* dropout_mask = nullptr) {
    if (layer < 0 || layer >= static_cast<int>(model.layers.size()))
        throw ValidationError("attention layer index out of range");
    if (H.rows != static_cast<int>(graph.nodes.size()) || H.cols != cfg.hidden_dim)
        throw ValidationError("attention layer: H has wrong shape");
    std::unordered_map<std::string, int> index;
    for (size_t i = 0; i < graph.nodes.size(); ++i) index[graph.nodes[i].id] = static_cast<int>(i);
    std::array<std::vector<std::set<int>>, kNumRelationTypes> nbrs;
    for (auto& v : nbrs) v.resize(H.rows);
    for (const auto& e : graph.edges) {
        const int u = index.at(e.src), v = index.at(e.dst);
        nbrs[ordinal(e.type)][u].insert(v);
        if (!cfg.directed_attention) nbrs[ordinal(e.type)][v].insert(u);
    }
    std::array<RowMask, kNumRelationTypes> masks;
    for (int r = 0; r < kNumRelationTypes; ++r) {
        masks[r].resize(H.rows);
        for (int i = 0; i < H.rows; ++i) masks[r][i].assign(nbrs[r][i].begin(), nbrs[r][i].end());
    }

    Tape tape;
    const int h_id = tape.leaf(H);
    detail::LayerLeaves ll;
    const auto& L = model.layers[layer];
    for (int r = 0; r < kNumRelationTypes; ++r) {
        ll.heads[r] = {tape.leaf(L.heads[r].wq), tape.leaf(L.heads[r].wk), tape.leaf(L.heads[r].wv)};
    }
    ll.w_out = tape.leaf(L.w_out);
    ll.b_out = tape.leaf(L.b_out);
    const int out = detail::append_attention_layer(tape, h_id, masks, ll, dropout_mask);
    return tape.value(out);
}

// Per-node salience probabilities (evaluation mode, no dropout).
inline std::vector<double> forward(const KnowledgeGraph& graph, const GatModel& model,
                                   const EmbeddingTable& table, const GatConfig& cfg) {
    if (graph.nodes.empty()) return {};
    GraphInputs in = build_graph_inputs(graph, table, cfg);
    Tape tape;
    GatModel& m = const_cast<GatModel&>(model);  // leaves copy values; model is not mutated
    auto fg = detail::build_forward(tape, in, m, cfg, nullptr);
    const Mat& p = tape.value(fg.probs);
    return {p.a.begin(), p.a.end()};
}

// Mean NLL over contributing nodes with probabilities clamped at 1e-12.
inline double salience_nll(const std::vector<double>& probs, const std::vector<int>& positives,
                           const std::vector<int>& negatives) {
    static constexpr double kEps = 1e-12;
    const size_t n = positives.size() + negatives.size();
    if (n == 0) throw ValidationError("loss needs at least one contributing node");
    double total = 0.0;
    for (int i : positives) total -= std::log(std::clamp(probs.at(i), kEps, 1.0 - kEps));
    for (int i : negatives) total -= std::log(std::clamp(1.0 - probs.at(i), kEps, 1.0 - kEps));
    return total / static_cast<double>(n);
}

// Salient nodes (p >= threshold) plus all full-graph relations between them.
inline KnowledgeGraph predict(const KnowledgeGraph& graph, const GatModel& model,
                              const EmbeddingTable& table, const GatConfig& cfg) {
    std::vector<double> p = forward(graph, model, table, cfg);
    std::set<std::string> keep;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] >= cfg.threshold) keep.insert(graph.nodes[i].id);
    }
    return induced_subgraph(graph, keep);
}

// ---------------------------------------------------------------------------
// Training

struct TrainExample {
    KnowledgeGraph graph;
    std::vector<uint8_t> positive;  // one flag per node ordinal
};

struct DevExample {
    KnowledgeGraph full;
    KnowledgeGraph target;
};

struct TrainLogEntry {
    int step = 0;
    double loss = 0.0;
    double dev_typed_relation_f1 = -1.0;  // -1 when not evaluated this step
};

struct TrainResult {
    GatModel model;
    std::vector<TrainLogEntry> log;
    int best_step = -1;          // checkpoint step when a dev set was given
    double best_dev_f1 = -1.0;
};

namespace detail {

struct AdamState {
    std::vector<Mat> m, v;
    long long t = 0;
};

inline AdamState make_adam_state(GatModel& model) {
    AdamState s;
    model.visit_params([&](const std::string&, Mat& p) {
        s.m.emplace_back(p.rows, p.cols);
        s.v.emplace_back(p.rows, p.cols);
    });
    return s;
}

inline void adam_step(GatModel& model, const std::vector<Mat>& grads, AdamState& state,
                      const GatConfig& cfg) {
    ++state.t;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    size_t idx = 0;
    model.visit_params([&](const std::string&, Mat& p) {
        Mat& m = state.m[idx];
        Mat& v = state.v[idx];
        const Mat& g = grads[idx];
        for (size_t i = 0; i < p.size(); ++i) {
            m.a[i] = b1 * m.a[i] + (1.0 - b1) * g.a[i];
            v.a[i] = b2 * v.a[i] + (1.0 - b2) * g.a[i] * g.a[i];
            const double mhat = m.a[i] / bc1;
            const double vhat = v.a[i] / bc2;
            p.a[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
        ++idx;
    });
}

// Sample k indices without replacement (partial Fisher-Yates on a copy).
// Hand-rolled draw keeps the sequence identical across standard libraries.
inline std::vector<int> sample_without_replacement(std::vector<int> pool, size_t k,
                                                   std::mt19937_64& rng) {
    k = std::min(k, pool.size());
    for (size_t i = 0; i < k; ++i) {
        const size_t j = i + static_cast<size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

inline Mat dropout_mask(int rows, int cols, double p, std::mt19937_64& rng) {
    Mat m(rows, cols);
    const double keep_scale = 1.0 / (1.0 - p);
    for (auto& v : m.a) v = (u64_to_unit_double(rng()) < p) ? 0.0 : keep_scale;
    return m;
}

}  // namespace detail

// Macro-averaged typed relation F1 of predictions against dev targets.
inline double dev_typed_relation_f1(const std::vector<DevExample>& dev, const GatModel& model,
                                    const EmbeddingTable& table, const GatConfig& cfg,
                                    double lambda) {
    if (dev.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& ex : dev) {
        KnowledgeGraph pred = predict(ex.full, model, table, cfg);
        Alignment a = align_graphs(pred, ex.target, lambda);
        sum += relation_scores(a, pred, ex.target, true).f1;
    }
    return sum / static_cast<double>(dev.size());
}

// Minibatch Adam over mean per-graph NLL. Positives are fixed labels;
// negatives are resampled uniformly without replacement every step with
// count min(neg_ratio * |positives|, available). Fixed seed gives a
// bit-identical trajectory.
inline TrainResult train(const std::vector<TrainExample>& examples, const EmbeddingTable& table,
                         const GatConfig& cfg, const std::vector<DevExample>& dev = {},
                         double dev_lambda = 0.7) {
    cfg.validate();
    if (examples.empty()) throw ValidationError("train requires a nonempty corpus");
    for (const auto& ex : examples) {
        if (ex.positive.size() != ex.graph.nodes.size())
            throw ValidationError("label vector size mismatch for doc " + ex.graph.doc_id);
    }

    std::mt19937_64 rng(cfg.seed);
    TrainResult result;
    result.model = init_model(cfg, rng);
    if (cfg.max_steps == 0) return result;

    std::vector<GraphInputs> inputs;
    std::vector<std::vector<int>> positives(examples.size()), candidates(examples.size());
    inputs.reserve(examples.size());
    for (size_t i = 0; i < examples.size(); ++i) {
        inputs.push_back(build_graph_inputs(examples[i].graph, table, cfg));
        for (size_t j = 0; j < examples[i].positive.size(); ++j) {
            (examples[i].positive[j] ? positives[i] : candidates[i]).push_back(static_cast<int>(j));
        }
    }

    auto adam = detail::make_adam_state(result.model);
    std::vector<Mat> grads;
    result.model.visit_params(
        [&](const std::string&, Mat& p) { grads.emplace_back(p.rows, p.cols); });

    std::vector<int> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    size_t cursor = order.size();  // forces a shuffle at step 1

    GatModel best_model = result.model;
    for (int step = 1; step <= cfg.max_steps; ++step) {
        std::vector<int> batch;
        for (int b = 0; b < cfg.batch_size; ++b) {
            if (cursor >= order.size()) {
                for (size_t i = order.size(); i > 1; --i) {
                    const size_t j = static_cast<size_t>(rng() % i);
                    std::swap(order[i - 1], order[j]);
                }
                cursor = 0;
            }
            batch.push_back(order[cursor++]);
        }

        for (auto& g : grads) std::fill(g.a.begin(), g.a.end(), 0.0);
        double batch_loss = 0.0;
        int contributing = 0;
        for (int idx : batch) {
            const auto& pos = positives[idx];
            if (inputs[idx].n == 0) continue;
            const size_t want = static_cast<size_t>(cfg.neg_ratio) * pos.size();
            std::vector<int> negs = detail::sample_without_replacement(candidates[idx], want, rng);
            if (pos.empty() && negs.empty()) continue;

            std::vector<Mat> masks;
            if (cfg.dropout > 0.0) {
                masks.reserve(cfg.num_layers);
                for (int l = 0; l < cfg.num_layers; ++l)
                    masks.push_back(
                        detail::dropout_mask(inputs[idx].n, cfg.hidden_dim, cfg.dropout, rng));
            }

            Tape tape;
            auto fg = detail::build_forward(tape, inputs[idx], result.model, cfg,
                                            cfg.dropout > 0.0 ? &masks : nullptr);
            const int loss_id = tape.nll_loss(fg.probs, pos, negs);
            batch_loss += tape.value(loss_id)(0, 0);
            tape.backward(loss_id);
            for (size_t p = 0; p < fg.params.ids.size(); ++p) {
                const Mat& g = tape.grad(fg.params.ids[p]);
                for (size_t i = 0; i < g.size(); ++i) grads[p].a[i] += g.a[i];
            }
            ++contributing;
        }
        if (contributing == 0) continue;

        batch_loss /= contributing;
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("training diverged: non-finite loss at step " +
                                     std::to_string(step));
        const double scale = 1.0 / contributing;
        for (auto& g : grads)
            for (auto& v : g.a) v *= scale;
        detail::adam_step(result.model, grads, adam, cfg);

        TrainLogEntry entry{step, batch_loss, -1.0};
        if (!dev.empty() && (step % cfg.eval_every == 0 || step == cfg.max_steps)) {
            entry.dev_typed_relation_f1 =
                dev_typed_relation_f1(dev, result.model, table, cfg, dev_lambda);
            if (entry.dev_typed_relation_f1 > result.best_dev_f1) {
                result.best_dev_f1 = entry.dev_typed_relation_f1;
                result.best_step = step;
                best_model = result.model;
            }
        }
        result.log.push_back(entry);
    }

    if (!dev.empty() && result.best_step > 0) result.model = best_model;
    return result;
}

// ---------------------------------------------------------------------------
// Gradient verification

struct GradCheckResult {
    double max_rel_error = 0.0;
    int checked = 0;
};

// Central finite differences (step 1e-4, dropout off) against the tape
// gradients on >= `samples` randomly chosen parameters. `mutate_backward`
// deliberately corrupts one analytic gradient entry so the check must fail;
// used to prove the comparison has teeth.
inline GradCheckResult grad_check(const KnowledgeGraph& graph, const GatModel& model,
                                  const EmbeddingTable& table, const GatConfig& cfg,
                                  uint64_t sample_seed, int samples = 200,
                                  bool mutate_backward = false) {
    if (graph.nodes.empty()) throw ValidationError("grad_check needs a nonempty graph");
    GraphInputs in = build_graph_inputs(graph, table, cfg);
    std::vector<int> pos, neg;
    for (int i = 0; i < in.n; ++i) (i % 3 == 0 ? pos : neg).push_back(i);
    if (pos.empty()) pos.push_back(0);

    GatModel work = model;
    std::vector<Mat> analytic;
    {
        Tape tape;
        auto fg = detail::build_forward(tape, in, work, cfg, nullptr);
        const int loss_id = tape.nll_loss(fg.probs, pos, neg);
        tape.backward(loss_id);
        for (int id : fg.params.ids) analytic.push_back(tape.grad(id));
    }

    std::vector<Mat*> mats;
    work.visit_params([&](const std::string&, Mat& m) { mats.push_back(&m); });
    size_t total = 0;
    for (const auto* m : mats) total += m->size();

    std::mt19937_64 rng(sample_seed);
    std::vector<std::pair<size_t, size_t>> picks;  // (param, element)
    auto locate = [&](size_t flat) {
        for (size_t p = 0; p < mats.size(); ++p) {
            if (flat < mats[p]->size()) return std::make_pair(p, flat);
            flat -= mats[p]->size();
        }
        throw std::logic_error("flat index out of range");
    };
    for (int s = 0; s < samples; ++s) picks.push_back(locate(rng() % total));

    if (mutate_backward) {
        // Corrupt the largest sampled gradient entry.
        size_t at = 0;
        double best = -1.0;
        for (size_t i = 0; i < picks.size(); ++i) {
            const double g = std::abs(analytic[picks[i].first].a[picks[i].second]);
            if (g > best) {
                best = g;
                at = i;
            }
        }
        double& g = analytic[picks[at].first].a[picks[at].second];
        g = g * 1.5 + 1e-3;
    }

    auto loss_at = [&]() {
        Tape tape;
        auto fg = detail::build_forward(tape, in, work, cfg, nullptr);
        const int loss_id = tape.nll_loss(fg.probs, pos, neg);
        return tape.value(loss_id)(0, 0);
    };

    static constexpr double kStep = 1e-4;
    GradCheckResult res;
    for (const auto& [p, i] : picks) {
        double& theta = mats[p]->a[i];
        const double save = theta;
        theta = save + kStep;
        const double lp = loss_at();
        theta = save - kStep;
        const double lm = loss_at();
        theta = save;
        const double numeric = (lp - lm) / (2.0 * kStep);
        const double ga = analytic[p].a[i];
        const double err = std::abs(ga - numeric) / std::max(1e-8, std::abs(ga) + std::abs(numeric));
        res.max_rel_error = std::max(res.max_rel_error, err);
        ++res.checked;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Model file (JSON container: header, config echo, flat parameter arrays)

inline ojson model_to_json(const GatModel& model) {
    ojson j;
    ojson cfg = gat_config_to_json(model.config);
    j["header"] = {{"tool", std::string(kToolName)},
                   {"version", std::string(kToolVersion)},
                   {"format", 1},
                   {"config_hash", config_hash_hex(cfg)},
                   {"seed", model.config.seed}};
    j["config"] = cfg;
    j["params"] = ojson::object();
    model.visit_params([&](const std::string& name, const Mat& m) {
        j["params"][name] = m.a;
    });
    return j;
}

inline GatModel model_from_json(const ojson& j, const std::string& path = "$") {
    using namespace jsonio;
    if (!j.is_object()) fail(path, "expected object");
    if (!j.contains("header") || !j["header"].is_object() || !j["header"].contains("format"))
        fail(path + ".header", "missing model header");
    if (j["header"]["format"].get<int>() != 1) fail(path + ".header.format", "unsupported format");
    GatConfig cfg = gat_config_from_json(member(j, "config", path), path + ".config");
    GatModel model = make_zero_model(cfg);
    const ojson& params = member(j, "params", path);
    model.visit_params([&](const std::string& name, Mat& m) {
        if (!params.contains(name)) fail(path + ".params", "missing parameter " + name);
        const ojson& arr = params[name];
        if (!arr.is_array() || arr.size() != m.size())
            fail(path + ".params." + name, "wrong parameter size");
        for (size_t i = 0; i < m.size(); ++i) {
            if (!arr[i].is_number()) fail(path + ".params." + name, "expected numbers");
            m.a[i] = arr[i].get<double>();
            if (!std::isfinite(m.a[i])) fail(path + ".params." + name, "non-finite parameter");
        }
    });
    return model;
}

inline void save_model(const GatModel& model, const std::string& path) {
    atomic_write_file(path, model_to_json(model).dump(2) + "\n");
}

inline GatModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open model file");
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace kgsum
