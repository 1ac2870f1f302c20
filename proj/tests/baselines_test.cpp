#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "kgsum/baselines.hpp"
#include "kgsum/ingest.hpp"
#include "kgsum/metrics.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace kgsum;

namespace {

KnowledgeGraph triangle() {
    return fixtures::graph("doc",
                           {fixtures::node("doc:0", {"aa"}, 3, EntityType::Task),
                            fixtures::node("doc:1", {"bb"}, 2, EntityType::Method),
                            fixtures::node("doc:2", {"cc"}, 1, EntityType::Metric)},
                           {{"doc:0", "doc:1", RelationType::UsedFor, 1},
                            {"doc:1", "doc:2", RelationType::PartOf, 1},
                            {"doc:2", "doc:0", RelationType::Compare, 1}});
}

}  // namespace

TEST(InducedSubgraphTest, KeepAllIsIdentity) {
    KnowledgeGraph g = triangle();
    KnowledgeGraph out = induced_subgraph(g, {"doc:0", "doc:1", "doc:2"});
    EXPECT_EQ(serialize_graph(out), serialize_graph(g));
}

TEST(InducedSubgraphTest, KeepNothingIsEmpty) {
    KnowledgeGraph out = induced_subgraph(triangle(), {});
    EXPECT_TRUE(out.nodes.empty());
    EXPECT_TRUE(out.edges.empty());
}

TEST(InducedSubgraphTest, TriangleKeepTwoKeepsTheirEdge) {
    KnowledgeGraph out = induced_subgraph(triangle(), {"doc:0", "doc:1"});
    ASSERT_EQ(out.nodes.size(), 2u);
    ASSERT_EQ(out.edges.size(), 1u);
    EXPECT_EQ(out.edges[0].type, RelationType::UsedFor);
}

TEST(InducedSubgraphTest, UnknownNodeIdRejected) {
    EXPECT_THROW(induced_subgraph(triangle(), {"doc:9"}), ValidationError);
}

TEST(PageRankTest, SymmetricPairIsExactlyHalf) {
    auto g = fixtures::graph("doc",
                             {fixtures::node("doc:0", {"aa"}, 1, EntityType::Task),
                              fixtures::node("doc:1", {"bb"}, 1, EntityType::Task)},
                             {{"doc:0", "doc:1", RelationType::UsedFor, 3}});
    BaselineConfig cfg;
    auto pr = pagerank_scores(g, cfg);
    EXPECT_DOUBLE_EQ(pr.scores[0], 0.5);
    EXPECT_DOUBLE_EQ(pr.scores[1], 0.5);
    EXPECT_TRUE(pr.converged);
}

namespace {

KnowledgeGraph star_graph() {
    std::vector<EntityNode> nodes = {fixtures::node("doc:0", {"hub"}, 5, EntityType::Task)};
    std::vector<RelationEdge> edges;
    for (int i = 1; i <= 4; ++i) {
        nodes.push_back(fixtures::node("doc:" + std::to_string(i), {"leaf" + std::to_string(i)},
                                       1, EntityType::Method));
        edges.push_back({"doc:0", "doc:" + std::to_string(i), RelationType::Conjunction, 1});
    }
    return fixtures::graph("doc", nodes, edges);
}

}  // namespace

TEST(PageRankTest, StarGraphHubDominates) {
    KnowledgeGraph g = star_graph();
    BaselineConfig cfg;

    // fixed 20-iteration run against the dense oracle at the same horizon
    BaselineConfig twenty = cfg;
    twenty.pagerank_max_iter = 20;
    twenty.pagerank_tol = 1e-300;
    auto got = pagerank_scores(g, twenty);
    auto want = oracles::pagerank_dense(g, twenty.pagerank_damping, 1e-300, 20, false);
    ASSERT_EQ(got.iterations, 20);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(got.scores[i], want.scores[i], 1e-8);

    // converged run reaches the closed-form fixed point
    auto conv = pagerank_scores(g, cfg);
    EXPECT_TRUE(conv.converged);
    EXPECT_NEAR(conv.scores[0], 0.132 / 0.2775, 1e-8);  // hub = 0.47567567...
    for (int i = 1; i < 5; ++i) {
        EXPECT_NEAR(conv.scores[i], (1.0 - conv.scores[0]) / 4.0, 1e-8);
        EXPECT_GT(conv.scores[0], conv.scores[i]);
    }
}

TEST(PageRankTest, IsolatedNodeClosedForm) {
    auto g = fixtures::graph("doc",
                             {fixtures::node("doc:0", {"aa"}, 1, EntityType::Task),
                              fixtures::node("doc:1", {"bb"}, 1, EntityType::Task),
                              fixtures::node("doc:2", {"isolated"}, 1, EntityType::Task)},
                             {{"doc:0", "doc:1", RelationType::UsedFor, 1}});
    BaselineConfig cfg;
    auto pr = pagerank_scores(g, cfg);
    // fixed point: r = (1-d)/3 + d*r/3  =>  r = (1-d)/(3-d)
    const double d = cfg.pagerank_damping;
    EXPECT_NEAR(pr.scores[2], (1.0 - d) / (3.0 - d), 1e-8);
}

TEST(PageRankTest, ScoresSumToOneAndMatchDenseOracle) {
    std::mt19937_64 rng(97531);
    BaselineConfig cfg;
    cfg.pagerank_tol = 1e-13;
    cfg.pagerank_max_iter = 2000;
    for (int trial = 0; trial < 100; ++trial) {
        KnowledgeGraph g = oracles::random_graph(rng, "doc", 50, 120);
        auto pr = pagerank_scores(g, cfg);
        double sum = 0.0;
        for (double s : pr.scores) {
            EXPECT_GE(s, 0.0);
            sum += s;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
        auto want = oracles::pagerank_dense(g, cfg.pagerank_damping, 1e-13, 2000, false);
        for (size_t i = 0; i < pr.scores.size(); ++i) {
            ASSERT_NEAR(pr.scores[i], want.scores[i], 1e-8) << "trial " << trial << " node " << i;
        }
    }
}

TEST(PageRankTest, DirectedWalkDiffersAndMatchesOracle) {
    auto g = fixtures::graph("doc",
                             {fixtures::node("doc:0", {"aa"}, 1, EntityType::Task),
                              fixtures::node("doc:1", {"bb"}, 1, EntityType::Task)},
                             {{"doc:0", "doc:1", RelationType::UsedFor, 1}});
    BaselineConfig cfg;
    cfg.pagerank_directed = true;
    cfg.pagerank_tol = 1e-13;
    cfg.pagerank_max_iter = 2000;
    auto pr = pagerank_scores(g, cfg);
    EXPECT_GT(pr.scores[1], pr.scores[0]);  // sink collects mass
    auto want = oracles::pagerank_dense(g, cfg.pagerank_damping, 1e-13, 2000, true);
    EXPECT_NEAR(pr.scores[0], want.scores[0], 1e-10);
    EXPECT_NEAR(pr.scores[1], want.scores[1], 1e-10);
}

TEST(PageRankSelectTest, SelectsTopKAndInduces) {
    KnowledgeGraph g = star_graph();
    BaselineConfig cfg;
    cfg.k = 3;
    KnowledgeGraph out = pagerank_select(g, cfg);
    EXPECT_EQ(out.nodes.size(), 3u);
    EXPECT_EQ(out.nodes[0].id, "doc:0");  // hub always survives
    EXPECT_TRUE(validate_graph(out).empty());
    // leaves tie at the same score; ordinal break keeps doc:1 and doc:2
    EXPECT_EQ(out.nodes[1].id, "doc:1");
    EXPECT_EQ(out.nodes[2].id, "doc:2");
}

TEST(TopKFreqTest, RanksByMentionCount) {
    auto g = fixtures::graph("doc", {fixtures::node("doc:0", {"aa"}, 5, EntityType::Task),
                                     fixtures::node("doc:1", {"bb"}, 1, EntityType::Task),
                                     fixtures::node("doc:2", {"cc"}, 3, EntityType::Task)});
    BaselineConfig cfg;
    cfg.k = 2;
    KnowledgeGraph out = topk_freq_select(g, cfg);
    ASSERT_EQ(out.nodes.size(), 2u);
    EXPECT_EQ(out.nodes[0].id, "doc:0");  // count 5
    EXPECT_EQ(out.nodes[1].id, "doc:2");  // count 3
}

TEST(TopKFreqTest, KLargerThanGraphKeepsEverything) {
    KnowledgeGraph g = triangle();
    BaselineConfig cfg;
    cfg.k = 10;
    EXPECT_EQ(serialize_graph(topk_freq_select(g, cfg)), serialize_graph(g));
}

TEST(TopKFreqTest, EqualCountsBreakByOrdinal) {
    auto g = fixtures::graph("doc", {fixtures::node("doc:0", {"aa"}, 2, EntityType::Task),
                                     fixtures::node("doc:1", {"bb"}, 2, EntityType::Task),
                                     fixtures::node("doc:2", {"cc"}, 2, EntityType::Task)});
    BaselineConfig cfg;
    cfg.k = 2;
    KnowledgeGraph out = topk_freq_select(g, cfg);
    ASSERT_EQ(out.nodes.size(), 2u);
    EXPECT_EQ(out.nodes[0].id, "doc:0");
    EXPECT_EQ(out.nodes[1].id, "doc:1");
}

TEST(GoldEntityTest, ExactCopiesAreSelected) {
    auto full = fixtures::graph(
        "doc", {fixtures::node("doc:0", {"question answering"}, 3, EntityType::Task),
                fixtures::node("doc:1", {"reading comprehension benchmark"}, 1, EntityType::Material),
                fixtures::node("doc:2", {"zzz qqq www"}, 9, EntityType::Generic)});
    auto target = fixtures::graph(
        "t", {fixtures::node("t:0", {"question answering"}, 1, EntityType::Task),
              fixtures::node("t:1", {"reading comprehension benchmark"}, 1, EntityType::Material)});
    BaselineConfig cfg;
    KnowledgeGraph out = gold_entity_select(full, target, cfg);
    ASSERT_EQ(out.nodes.size(), 2u);
    EXPECT_EQ(out.nodes[0].id, "doc:0");
    EXPECT_EQ(out.nodes[1].id, "doc:1");
}

TEST(GoldEntityTest, BelowAndAtThresholdContributesNothing) {
    auto full = fixtures::graph("doc",
                                {fixtures::node("doc:0", {"word counting"}, 1, EntityType::Task)});
    auto target = fixtures::graph("t", {fixtures::node("t:0", {"routing"}, 1, EntityType::Task)});
    BaselineConfig cfg;
    // best similarity is exactly 0.7; inclusion is strict
    KnowledgeGraph out = gold_entity_select(full, target, cfg);
    EXPECT_TRUE(out.nodes.empty());
}

TEST(GoldEntityTest, SharedBestMatchSelectedOnce) {
    auto full = fixtures::graph("doc",
                                {fixtures::node("doc:0", {"neural machine translation"}, 1,
                                                EntityType::Task)});
    auto target = fixtures::graph(
        "t", {fixtures::node("t:0", {"neural machine translation"}, 1, EntityType::Task),
              fixtures::node("t:1", {"neural machine translations"}, 1, EntityType::Task)});
    BaselineConfig cfg;
    KnowledgeGraph out = gold_entity_select(full, target, cfg);
    EXPECT_EQ(out.nodes.size(), 1u);
}

TEST(GoldEntityTest, UntypedPrecisionAlwaysPerfect) {
    std::mt19937_64 rng(24680);
    BaselineConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        generators::GeInstance inst = generators::ge_instance(rng);
        KnowledgeGraph predicted = gold_entity_select(inst.full, inst.target, cfg);
        ASSERT_FALSE(predicted.nodes.empty());
        Alignment a = align_graphs(predicted, inst.target, cfg.ge_threshold);
        PRF prf = entity_scores(a, predicted, inst.target, false);
        ASSERT_DOUBLE_EQ(prf.precision, 1.0) << "trial " << trial;
        auto dup = duplication_rate(a, inst.target);
        ASSERT_TRUE(dup.has_value());
        ASSERT_DOUBLE_EQ(*dup, 1.0) << "trial " << trial;  // unique best matches
    }
}

TEST(SummaryInducedTest, ContainmentRules) {
    auto doc = fixtures::DocBuilder("doc")
                   .section({"parser uses grammar", "treebank helps decoding"})
                   .mention("p", 0, 0, 0, 1, EntityType::Method)
                   .mention("g", 0, 0, 2, 1, EntityType::OtherScientificTerm)
                   .mention("t", 0, 1, 0, 1, EntityType::Material)
                   .window(0, 0, 1, {"p", "g", "t"}, {},
                           {{"p", "g", RelationType::UsedFor}, {"p", "t", RelationType::EvaluateFor}})
                   .build();
    CorpusStats stats = compute_corpus_stats(std::vector<DocumentRecord>{doc}, 2.0);
    FullGraphBuild build = build_full_graph_detailed(doc, stats);
    ASSERT_EQ(build.graph.nodes.size(), 3u);
    ASSERT_EQ(build.graph.edges.size(), 2u);

    // selection = all sentences -> full graph
    KnowledgeGraph all = summary_induced_graph(doc, build, {{0, 0}, {0, 1}});
    EXPECT_EQ(serialize_graph(all), serialize_graph(build.graph));

    // empty selection -> empty graph
    KnowledgeGraph none = summary_induced_graph(doc, build, {});
    EXPECT_TRUE(none.nodes.empty());
    EXPECT_TRUE(none.edges.empty());

    // sentence 0 only: relation inside sentence 0 kept, cross-sentence dropped
    KnowledgeGraph first = summary_induced_graph(doc, build, {{0, 0}});
    ASSERT_EQ(first.nodes.size(), 2u);
    ASSERT_EQ(first.edges.size(), 1u);
    EXPECT_EQ(first.edges[0].type, RelationType::UsedFor);

    // out-of-range selection rejected
    EXPECT_THROW(summary_induced_graph(doc, build, {{0, 9}}), ValidationError);
    EXPECT_THROW(summary_induced_graph(doc, build, {{3, 0}}), ValidationError);
}

TEST(SelectorPropertiesTest, BoundedAndValidOnRandomGraphs) {
    std::mt19937_64 rng(8642);
    BaselineConfig cfg;
    cfg.k = 5;
    for (int trial = 0; trial < 100; ++trial) {
        KnowledgeGraph g = oracles::random_graph(rng, "doc", 12, 24);
        for (const KnowledgeGraph& out : {pagerank_select(g, cfg), topk_freq_select(g, cfg)}) {
            EXPECT_LE(out.nodes.size(), static_cast<size_t>(cfg.k));
            EXPECT_TRUE(validate_graph(out).empty());
        }
    }
}

TEST(BaselineConfigTest, ShippedDefaults) {
    BaselineConfig cfg;
    EXPECT_EQ(cfg.k, 18);
    EXPECT_DOUBLE_EQ(cfg.pagerank_damping, 0.85);
    EXPECT_DOUBLE_EQ(cfg.pagerank_tol, 1e-9);
    EXPECT_EQ(cfg.pagerank_max_iter, 200);
    EXPECT_DOUBLE_EQ(cfg.ge_threshold, 0.7);
    EXPECT_FALSE(cfg.pagerank_directed);
    EXPECT_THROW([] { BaselineConfig c; c.k = 0; c.validate(); }(), ValidationError);
}
