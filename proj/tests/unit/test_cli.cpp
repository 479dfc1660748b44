#include "support.hpp"

#include "forgetbench/cli/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace fbtest;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "forgetbench");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// A CSV dataset directory plus a config with small models.
struct Workspace {
    std::filesystem::path root;
    std::string dataset;
    std::string config;
    std::string out;
};

Workspace make_workspace(const std::string& name) {
    Workspace w;
    w.root = temp_dir(name);
    const auto ds = blobs_split(4, 40, 5, 0.5, 31);
    const auto dir = w.root / "toy";
    std::filesystem::create_directories(dir);
    data::write_csv_features(dir / "train.csv", ds.train);
    data::write_csv_features(dir / "test.csv", ds.test);
    w.dataset = dir.string();
    w.out = (w.root / "results").string();
    const harness::Json net = {{"hidden", {12}}, {"max_epochs", 10}, {"batch_size", 16}, {"learning_rate", 5e-3}};
    const harness::Json cfg = {{"sessions", 3}, {"seed", 2}, {"hyper", {{"mlp", net}, {"ideal", net}, {"ewc", net}}}};
    w.config = (w.root / "cfg.json").string();
    std::ofstream(w.config) << cfg.dump(2);
    return w;
}

}  // namespace

TEST(Cli, VersionAndHelp) {
    auto r = invoke({"--version"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find(harness::kToolVersion), std::string::npos);
    EXPECT_EQ(invoke({"run", "--help"}).code, 0);
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"train"}).code, 1);
}

TEST(Cli, MissingProtocolPrintsUsage) {
    const auto w = make_workspace("cli_usage");
    const auto r = invoke({"run", "--model", "mlp", "--dataset", w.dataset});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--protocol is required"), std::string::npos);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, RejectsBadCombinationsBeforeTraining) {
    const auto w = make_workspace("cli_bad");
    auto r = invoke({"run", "--protocol", "incremental-class", "--model", "mlp", "--model", "pathnet", "--dataset", w.dataset,
                  "--out", w.out});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("task id"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(w.out));
    r = invoke({"run", "--protocol", "permutation", "--model", "rnn", "--dataset", w.dataset});
    EXPECT_EQ(r.code, 1);
    r = invoke({"run", "--protocol", "permutation", "--model", "mlp", "--dataset", (w.root / "missing").string(), "--out", w.out});
    EXPECT_EQ(r.code, 1);
}

TEST(Cli, RunMetricsSummarizePlot) {
    const auto w = make_workspace("cli_flow");
    auto r = invoke({"run", "--config", w.config, "--protocol", "permutation", "--model", "mlp", "--model", "ewc", "--dataset",
                  w.dataset, "--out", w.out, "--jobs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto record = std::filesystem::path(w.out) / "mlp_permutation_toy_2.json";
    ASSERT_TRUE(std::filesystem::exists(record));
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(w.out) / "ewc_permutation_toy_2.json"));
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(w.out) / "ideal"));

    const auto rec = harness::load_record(record);
    EXPECT_EQ(rec.sessions, 3);  // from the config file
    r = invoke({"metrics", "--record", record.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("omega_all " + harness::format_double(rec.omega_all)), std::string::npos);

    // Flags override the file.
    r = invoke({"run", "--config", w.config, "--protocol", "permutation", "--model", "mlp", "--dataset", w.dataset, "--out",
             w.out, "--sessions", "2", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(harness::load_record(std::filesystem::path(w.out) / "mlp_permutation_toy_5.json").sessions, 2);

    r = invoke({"summarize", "--dir", w.out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("mlp,permutation,2,"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(w.out) / "summary.csv"));

    r = invoke({"plot", "--dir", w.out, "--figure", "all"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(w.out) / "permutation_all.svg"));
    EXPECT_EQ(invoke({"plot", "--dir", w.out, "--figure", "loss"}).code, 1);
    EXPECT_EQ(invoke({"plot", "--dir", w.out, "--figure", "base", "--protocol", "multimodal"}).code, 1);
}

TEST(Cli, MetricsDetectsTamperedRecord) {
    const auto w = make_workspace("cli_tamper");
    ASSERT_EQ(invoke({"run", "--config", w.config, "--protocol", "permutation", "--model", "mlp", "--dataset", w.dataset, "--out",
                   w.out, "--alpha-ideal", "0.9"})
                  .code,
              0);
    const auto path = std::filesystem::path(w.out) / "mlp_permutation_toy_2.json";
    auto j = harness::read_json_file(path);
    j["omega"]["all"] = j["omega"]["all"].get<double>() + 0.01;
    std::ofstream(path) << j.dump();
    const auto r = invoke({"metrics", "--record", path.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("differ"), std::string::npos);
}

TEST(Cli, IdealCachesItsValue) {
    const auto w = make_workspace("cli_ideal");
    auto r = invoke({"ideal", "--config", w.config, "--dataset", w.dataset, "--out", w.out});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto first = r.out;
    EXPECT_EQ(first.rfind("alpha_ideal ", 0), 0u);
    EXPECT_EQ(invoke({"ideal", "--config", w.config, "--dataset", w.dataset, "--out", w.out}).out, first);
    EXPECT_EQ(invoke({"ideal", "--config", w.config, "--dataset", w.dataset, "--out", w.out, "--refresh"}).out, first);
}

TEST(Cli, Fcbf) {
    const auto w = make_workspace("cli_fcbf");
    const auto r = invoke({"fcbf", "--dataset", w.dataset, "--out", w.out, "--su-matrix"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("toy: kept "), std::string::npos);
    EXPECT_NE(r.out.find(" of 5 features ("), std::string::npos);
    const auto j = harness::read_json_file(std::filesystem::path(w.out) / "fcbf_toy.json");
    EXPECT_EQ(j.at("features").get<int>(), 5);
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(w.out) / "su_toy.csv"));
    EXPECT_EQ(invoke({"fcbf", "--dataset", w.dataset, "--bins", "0"}).code, 1);
}
