#include <molcap/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace molcap;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / ("molcap_cli_" + std::string(info->name()));
        fs::remove_all(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    int run(std::vector<std::string> args)
    {
        args.insert(args.begin(), {"molcap", "run"});
        out.str("");
        err.str("");
        return cli::main(args, out, err);
    }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    }

    static std::string first_line(const fs::path& p)
    {
        std::ifstream f(p);
        std::string line;
        std::getline(f, line);
        return line;
    }

    fs::path dir;
    std::ostringstream out;
    std::ostringstream err;
};

} // namespace

TEST_F(CliTest, CustomRunWritesArtifacts)
{
    ASSERT_EQ(run({"--nodes", "10", "--molecules", "100", "--runs", "3", "--seed", "7", "--trace", "--out", dir.string()}),
              0)
        << err.str();
    EXPECT_EQ(first_line(dir / "run_steps.csv"), "step,reactions_left,optimistic_nodes,pessimistic_nodes");
    EXPECT_EQ(first_line(dir / "run_cycles.csv"), "cycle,messages_useful,messages_useless");
    EXPECT_EQ(first_line(dir / "run_reactions.csv"), "step,requester_node,rule_name,consumed_ids,produced_ids");
    EXPECT_EQ(first_line(dir / "run_trace.csv"), "step,from,to,kind,molecule_id,attempt_id,request_type");

    const auto summary = nlohmann::json::parse(slurp(dir / "run_summary.json"));
    EXPECT_EQ(summary["config"]["nodes"], 10);
    EXPECT_EQ(summary["config"]["molecules"], 100);
    EXPECT_EQ(summary["config"]["mode"], "mixed");
    EXPECT_EQ(summary["runs"], 3);
    EXPECT_TRUE(summary.contains("inertia_fraction"));
    EXPECT_TRUE(summary["steps_to_inertia"].contains("mean"));
    EXPECT_TRUE(summary["messages"].contains("mean_total"));
}

TEST_F(CliTest, RerunIsByteIdentical)
{
    const std::vector<std::string> args{"--nodes", "12", "--molecules", "200", "--runs", "2", "--mode", "optimistic"};
    auto a = args;
    a.insert(a.end(), {"--out", (dir / "a").string()});
    auto b = args;
    b.insert(b.end(), {"--out", (dir / "b").string()});
    ASSERT_EQ(run(a), 0);
    ASSERT_EQ(run(b), 0);
    for (const char* f : {"run_steps.csv", "run_cycles.csv", "run_reactions.csv", "run_summary.json"})
    {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
}

TEST_F(CliTest, Exp1PresetWritesThreeCurvesAndOptimum)
{
    ASSERT_EQ(run({"--preset", "exp1-modes", "--nodes", "8", "--molecules", "80", "--runs", "2", "--out", dir.string()}),
              0)
        << err.str();
    for (const char* m : {"optimistic", "pessimistic", "mixed"})
    {
        EXPECT_TRUE(fs::exists(dir / ("exp1_" + std::string(m) + "_steps.csv"))) << m;
    }
    EXPECT_EQ(slurp(dir / "exp1_optimum.csv").substr(0, 24), "step,reactions_left\n0,40");
}

TEST_F(CliTest, Exp2PresetSweepsFiveThresholds)
{
    ASSERT_EQ(run({"--preset", "exp2-threshold-sweep", "--nodes", "6", "--molecules", "40", "--runs", "1", "--out",
                   dir.string()}),
              0);
    for (const char* s : {"0.1", "0.3", "0.5", "0.7", "0.9"})
    {
        const auto p = dir / ("exp2_s" + std::string(s) + "_summary.json");
        ASSERT_TRUE(fs::exists(p)) << p;
        EXPECT_DOUBLE_EQ(nlohmann::json::parse(slurp(p))["config"]["threshold"].get<double>(), std::stod(s));
    }
}

TEST_F(CliTest, CountAggregatePresetReportsFinalMultiset)
{
    ASSERT_EQ(run({"--preset", "scenario-count-aggregate", "--runs", "1", "--out", dir.string()}), 0) << err.str();
    const auto j = nlohmann::json::parse(slurp(dir / "count_aggregate_pessimistic_summary.json"));
    EXPECT_EQ(j["config"]["nodes"], 10);
    auto finals = j["final_multiset_first_run"];
    ASSERT_EQ(finals.size(), 2u);
    EXPECT_TRUE((finals[0] == "a" && finals[1] == 49) || (finals[0] == 49 && finals[1] == "a"));
}

TEST_F(CliTest, ConfigFileWithFlagOverride)
{
    fs::create_directories(dir);
    const auto cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"nodes": 5, "molecules": 30, "runs": 1, "threshold": 0.4, "mode": "pessimistic"})";
    ASSERT_EQ(run({"--config", cfg.string(), "--threshold", "0.6", "--out", dir.string()}), 0) << err.str();
    const auto j = nlohmann::json::parse(slurp(dir / "run_summary.json"));
    EXPECT_EQ(j["config"]["nodes"], 5);
    EXPECT_EQ(j["config"]["mode"], "pessimistic");
    EXPECT_DOUBLE_EQ(j["config"]["threshold"].get<double>(), 0.6);
}

TEST_F(CliTest, UsageErrors)
{
    EXPECT_EQ(run({"--threshold", "1.5", "--out", dir.string()}), 2);
    EXPECT_NE(err.str().find("threshold"), std::string::npos);
    EXPECT_EQ(run({"--threshold", "0", "--out", dir.string()}), 2);
    EXPECT_EQ(run({"--preset", "exp9", "--out", dir.string()}), 2);
    EXPECT_NE(err.str().find("unknown preset"), std::string::npos);
    EXPECT_EQ(run({"--mode", "greedy", "--out", dir.string()}), 2);
    EXPECT_NE(run({"--nodes", "many", "--out", dir.string()}), 0);
    EXPECT_EQ(run({"--config", (dir / "missing.json").string()}), 2);
    EXPECT_FALSE(fs::exists(dir / "run_summary.json"));
}

TEST_F(CliTest, RequiresSubcommand)
{
    std::ostringstream o;
    std::ostringstream e;
    EXPECT_NE(cli::main(std::vector<std::string>{"molcap"}, o, e), 0);
}
