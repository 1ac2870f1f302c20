#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgsum/cli.hpp"

using namespace kgsum;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = KGSUM_FIXTURE_DIR;
const std::string kGolden = KGSUM_GOLDEN_DIR;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(CliBuildTest, ReproducesGoldenFilesByteForByte) {
    fs::path dir = fresh_dir("kgsum_cli_build");
    ASSERT_EQ(cli::run({"build", "--docs", kFixtures + "/docs.jsonl", "--out-full",
                        (dir / "full.jsonl").string(), "--out-target",
                        (dir / "target.jsonl").string(), "--tau", "1.5", "--report",
                        (dir / "build_report.json").string()}),
              0);
    EXPECT_EQ(read_file((dir / "full.jsonl").string()), read_file(kGolden + "/full.jsonl"));
    EXPECT_EQ(read_file((dir / "target.jsonl").string()), read_file(kGolden + "/target.jsonl"));
    EXPECT_EQ(read_file((dir / "build_report.json").string()),
              read_file(kGolden + "/build_report.json"));
}

TEST(CliPipelineTest, EndToEndReproducesGoldens) {
    fs::path dir = fresh_dir("kgsum_cli_pipeline");
    ASSERT_EQ(cli::run({"build", "--docs", kFixtures + "/docs.jsonl", "--out-full",
                        (dir / "full.jsonl").string(), "--out-target",
                        (dir / "target.jsonl").string(), "--tau", "1.5"}),
              0);
    ASSERT_EQ(cli::run({"baseline", "--method", "pagerank", "--full",
                        (dir / "full.jsonl").string(), "--k", "4", "--out",
                        (dir / "predicted.jsonl").string(), "--report",
                        (dir / "baseline_report.json").string()}),
              0);
    ASSERT_EQ(cli::run({"align", "--predicted", (dir / "predicted.jsonl").string(), "--target",
                        (dir / "target.jsonl").string(), "--out",
                        (dir / "alignment.jsonl").string()}),
              0);
    ASSERT_EQ(cli::run({"eval", "--predicted", (dir / "predicted.jsonl").string(), "--target",
                        (dir / "target.jsonl").string(), "--alignment",
                        (dir / "alignment.jsonl").string(), "--out",
                        (dir / "eval_report.json").string()}),
              0);
    EXPECT_EQ(read_file((dir / "predicted.jsonl").string()),
              read_file(kGolden + "/predicted_pagerank.jsonl"));
    EXPECT_EQ(read_file((dir / "alignment.jsonl").string()),
              read_file(kGolden + "/alignment.jsonl"));
    EXPECT_EQ(read_file((dir / "baseline_report.json").string()),
              read_file(kGolden + "/baseline_report.json"));
    // the golden eval report was produced without --alignment; supplying the
    // equivalent alignment file only changes the config echo in the header
    ojson got = ojson::parse(read_file((dir / "eval_report.json").string()));
    ojson want = ojson::parse(read_file(kGolden + "/eval_report.json"));
    EXPECT_EQ(got["documents"], want["documents"]);
    EXPECT_EQ(got["aggregate"], want["aggregate"]);
}

TEST(CliPipelineTest, JobsFlagKeepsOutputsByteIdentical) {
    fs::path dir = fresh_dir("kgsum_cli_jobs");
    ASSERT_EQ(cli::run({"build", "--docs", kFixtures + "/docs.jsonl", "--out-full",
                        (dir / "full.jsonl").string(), "--out-target",
                        (dir / "target.jsonl").string(), "--tau", "1.5", "--jobs", "4"}),
              0);
    ASSERT_EQ(cli::run({"baseline", "--method", "pagerank", "--full",
                        (dir / "full.jsonl").string(), "--k", "4", "--out",
                        (dir / "predicted.jsonl").string(), "--jobs", "3"}),
              0);
    ASSERT_EQ(cli::run({"align", "--predicted", (dir / "predicted.jsonl").string(), "--target",
                        (dir / "target.jsonl").string(), "--out",
                        (dir / "alignment.jsonl").string(), "--jobs", "5"}),
              0);
    EXPECT_EQ(read_file((dir / "full.jsonl").string()), read_file(kGolden + "/full.jsonl"));
    EXPECT_EQ(read_file((dir / "predicted.jsonl").string()),
              read_file(kGolden + "/predicted_pagerank.jsonl"));
    EXPECT_EQ(read_file((dir / "alignment.jsonl").string()),
              read_file(kGolden + "/alignment.jsonl"));
}

TEST(CliEvalTest, IdenticalGraphsScorePerfectly) {
    fs::path dir = fresh_dir("kgsum_cli_eval");
    ASSERT_EQ(cli::run({"eval", "--predicted", kGolden + "/target.jsonl", "--target",
                        kGolden + "/target.jsonl", "--out", (dir / "report.json").string()}),
              0);
    ojson report = ojson::parse(read_file((dir / "report.json").string()));
    for (const char* block :
         {"untyped_entity", "typed_entity", "untyped_relation", "typed_relation"}) {
        EXPECT_DOUBLE_EQ(report["aggregate"][block]["precision"].get<double>(), 1.0) << block;
        EXPECT_DOUBLE_EQ(report["aggregate"][block]["recall"].get<double>(), 1.0) << block;
        EXPECT_DOUBLE_EQ(report["aggregate"][block]["f1"].get<double>(), 1.0) << block;
    }
    EXPECT_DOUBLE_EQ(report["aggregate"]["duplication"].get<double>(), 1.0);
    EXPECT_EQ(report["header"]["config"]["lambda"].get<double>(), 0.7);
}

TEST(CliEvalTest, MicroAverageMode) {
    fs::path dir = fresh_dir("kgsum_cli_micro");
    ASSERT_EQ(cli::run({"eval", "--predicted", kGolden + "/predicted_pagerank.jsonl", "--target",
                        kGolden + "/target.jsonl", "--average", "micro", "--out",
                        (dir / "report.json").string()}),
              0);
    ojson report = ojson::parse(read_file((dir / "report.json").string()));
    EXPECT_EQ(report["header"]["config"]["average"], "micro");
    const double p = report["aggregate"]["untyped_entity"]["precision"].get<double>();
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
}

TEST(CliBaselineTest, SummaryInducedFromSelections) {
    fs::path dir = fresh_dir("kgsum_cli_ttg");
    ASSERT_EQ(cli::run({"baseline", "--method", "summary-induced", "--docs",
                        kFixtures + "/docs.jsonl", "--selections", kFixtures + "/selections.jsonl",
                        "--tau", "1.5", "--out", (dir / "predicted.jsonl").string()}),
              0);
    std::vector<KnowledgeGraph> predicted = read_graph_file((dir / "predicted.jsonl").string());
    std::vector<KnowledgeGraph> full = read_graph_file(kGolden + "/full.jsonl");
    ASSERT_EQ(predicted.size(), 3u);
    for (size_t i = 0; i < predicted.size(); ++i) {
        EXPECT_TRUE(validate_graph(predicted[i]).empty());
        EXPECT_LE(predicted[i].nodes.size(), full[i].nodes.size());
        EXPECT_FALSE(predicted[i].nodes.empty());
    }
}

TEST(CliBaselineTest, GoldEntityGivesPerfectPrecision) {
    fs::path dir = fresh_dir("kgsum_cli_ge");
    ASSERT_EQ(cli::run({"baseline", "--method", "goldentity", "--full", kGolden + "/full.jsonl",
                        "--target", kGolden + "/target.jsonl", "--out",
                        (dir / "ge.jsonl").string()}),
              0);
    ASSERT_EQ(cli::run({"eval", "--predicted", (dir / "ge.jsonl").string(), "--target",
                        kGolden + "/target.jsonl", "--out", (dir / "report.json").string()}),
              0);
    ojson report = ojson::parse(read_file((dir / "report.json").string()));
    EXPECT_DOUBLE_EQ(report["aggregate"]["untyped_entity"]["precision"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(report["aggregate"]["duplication"].get<double>(), 1.0);
}

TEST(CliTrainTest, TrainPredictRoundTrip) {
    fs::path dir = fresh_dir("kgsum_cli_train");
    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({"hidden_dim":8,"num_layers":2,"num_sections":4,"embed_dim":16,)"
            << R"("dropout":0.1,"lr":0.001,"neg_ratio":3,"batch_size":2,"max_steps":30,)"
            << R"("eval_every":10,"threshold":0.5})";
    }
    ASSERT_EQ(cli::run({"train", "--graphs", kGolden + "/full.jsonl", "--targets",
                        kGolden + "/target.jsonl", "--embeddings",
                        kFixtures + "/embeddings.jsonl", "--config",
                        (dir / "config.json").string(), "--seed", "11", "--out",
                        (dir / "model.json").string(), "--log", (dir / "train_log.json").string(),
                        "--dev-graphs", kGolden + "/full.jsonl", "--dev-targets",
                        kGolden + "/target.jsonl"}),
              0);
    ojson model = ojson::parse(read_file((dir / "model.json").string()));
    EXPECT_EQ(model["header"]["tool"], "kgsum");
    EXPECT_EQ(model["config"]["hidden_dim"].get<int>(), 8);
    EXPECT_EQ(model["config"]["seed"].get<uint64_t>(), 11u);
    ojson log = ojson::parse(read_file((dir / "train_log.json").string()));
    EXPECT_EQ(log["entries"].size(), 30u);

    // deterministic rerun with identical inputs produces the same model bytes
    ASSERT_EQ(cli::run({"train", "--graphs", kGolden + "/full.jsonl", "--targets",
                        kGolden + "/target.jsonl", "--embeddings",
                        kFixtures + "/embeddings.jsonl", "--config",
                        (dir / "config.json").string(), "--seed", "11", "--out",
                        (dir / "model2.json").string(), "--dev-graphs", kGolden + "/full.jsonl",
                        "--dev-targets", kGolden + "/target.jsonl"}),
              0);
    EXPECT_EQ(read_file((dir / "model.json").string()), read_file((dir / "model2.json").string()));

    ASSERT_EQ(cli::run({"predict", "--graphs", kGolden + "/full.jsonl", "--embeddings",
                        kFixtures + "/embeddings.jsonl", "--model", (dir / "model.json").string(),
                        "--out", (dir / "predicted.jsonl").string()}),
              0);
    std::vector<KnowledgeGraph> predicted = read_graph_file((dir / "predicted.jsonl").string());
    ASSERT_EQ(predicted.size(), 3u);
    for (const auto& g : predicted) EXPECT_TRUE(validate_graph(g).empty());
}

TEST(CliGradCheckTest, PassesAndCatchesMutation) {
    fs::path dir = fresh_dir("kgsum_cli_gradcheck");
    ASSERT_EQ(cli::run({"gradcheck", "--nodes", "5", "--seed", "3", "--samples", "150", "--out",
                        (dir / "ok.json").string()}),
              0);
    ojson ok = ojson::parse(read_file((dir / "ok.json").string()));
    EXPECT_TRUE(ok["pass"].get<bool>());
    EXPECT_LE(ok["max_rel_error"].get<double>(), 1e-3);

    ASSERT_EQ(cli::run({"gradcheck", "--nodes", "5", "--seed", "3", "--samples", "150", "--mutate",
                        "--out", (dir / "mut.json").string()}),
              0);  // exit 0 because with --mutate, "pass" means the check caught it
    ojson mut = ojson::parse(read_file((dir / "mut.json").string()));
    EXPECT_TRUE(mut["pass"].get<bool>());
    EXPECT_GT(mut["max_rel_error"].get<double>(), 1e-2);
}

TEST(CliCalibrateTest, ReportsGenericSplitPerTau) {
    fs::path dir = fresh_dir("kgsum_cli_tau");
    ASSERT_EQ(cli::run({"calibrate-tau", "--docs", kFixtures + "/docs.jsonl", "--taus",
                        "1.0,1.5,2.0", "--out", (dir / "tau.json").string()}),
              0);
    ojson report = ojson::parse(read_file((dir / "tau.json").string()));
    ASSERT_EQ(report["candidates"].size(), 3u);
    long long prev_generic = -1;
    for (const auto& row : report["candidates"]) {
        const long long g = row["generic"].get<long long>();
        const long long n = row["non_generic"].get<long long>();
        EXPECT_EQ(g + n, report["distinct_mentions"].get<long long>());
        EXPECT_GE(g, prev_generic);  // raising tau can only add generics
        prev_generic = g;
    }
}

TEST(CliErrorsTest, UnknownFlagExitsOneInProcess) {
    EXPECT_EQ(cli::run({"build", "--bogus-flag"}), 1);
    EXPECT_EQ(cli::run({"no-such-subcommand"}), 1);
    EXPECT_EQ(cli::run({}), 1);  // subcommand required
}

TEST(CliErrorsTest, MissingAndMalformedInputsExitOne) {
    fs::path dir = fresh_dir("kgsum_cli_errors");
    EXPECT_EQ(cli::run({"eval", "--predicted", (dir / "nope.jsonl").string(), "--target",
                        kGolden + "/target.jsonl"}),
              1);
    {
        std::ofstream bad(dir / "bad.jsonl");
        bad << "{\"doc_id\":\"x\",\"sections\":[[ not json\n";
    }
    EXPECT_EQ(cli::run({"build", "--docs", (dir / "bad.jsonl").string(), "--out-full",
                        (dir / "f.jsonl").string(), "--out-target", (dir / "t.jsonl").string()}),
              1);
}

TEST(CliErrorsTest, HelpExitsZeroForEverySubcommand) {
    for (const char* sub : {"build", "align", "eval", "baseline", "train", "predict", "gradcheck",
                            "calibrate-tau"}) {
        EXPECT_EQ(cli::run({sub, "--help"}), 0) << sub;
    }
    EXPECT_EQ(cli::run({"--help"}), 0);
    EXPECT_EQ(cli::run({"--version"}), 0);
}

TEST(CliBinaryTest, SpawnedProcessExitCodes) {
    const std::string bin = KGSUM_CLI_BIN;
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " --help > /dev/null 2>&1").c_str())), 0);
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " build --bogus > /dev/null 2>&1").c_str())), 1);
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " eval --predicted /nonexistent.jsonl --target "
                                             "/nonexistent.jsonl > /dev/null 2>&1")
                                          .c_str())),
              1);
}
