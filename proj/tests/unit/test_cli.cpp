#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wobs/cli.hpp"

using namespace wobs;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("wobs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string scenario(const nlohmann::json& j, const std::string& name = "s.json") {
        const auto path = (dir_ / name).string();
        std::ofstream(path) << j.dump();
        return path;
    }

    std::string out(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static nlohmann::json small() {
        return {{"grid", {{"cells", {50}}, {"time_cells", 50}, {"s_cells", 50}}},
                {"observability", {{"modes", 6}}},
                {"energy", {{"draws", 2}}},
                {"carleman", {{"identity_points", 20}, {"sweep_points", 50}}}};
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RegionsIsDeterministic) {
    const auto s = scenario(small());
    const std::vector<std::string> files{"summary.json", "K.pgm",     "K1.pgm",     "D.pgm",
                                         "K2.pgm",       "omega.pgm", "omega0.pgm", "K.csv"};
    ASSERT_EQ(run_cli({"regions", "--scenario", s, "--out", out("a")}), kExitOk);
    std::vector<std::string> first;
    for (const auto& f : files) first.push_back(slurp(out("a") + "/" + f));
    fs::remove_all(out("a"));
    ASSERT_EQ(run_cli({"regions", "--scenario", s, "--out", out("a")}), kExitOk);
    for (std::size_t i = 0; i < files.size(); ++i) EXPECT_EQ(slurp(out("a") + "/" + files[i]), first[i]) << files[i];
    const auto j = nlohmann::json::parse(slurp(out("a") + "/summary.json"));
    EXPECT_TRUE(j["verified"].get<bool>());
    EXPECT_TRUE(j["chain"]["holds"].get<bool>());
    EXPECT_EQ(j["scenario"]["grid"]["cells"], nlohmann::json({50}));
    EXPECT_DOUBLE_EQ(j["times"]["Tstar"].get<double>(), 1.6);
}

TEST_F(CliTest, EveryCommandWritesASchemaTaggedCsv) {
    const auto s = scenario(small());
    const std::vector<std::pair<std::string, std::string>> cmds{
        {"identity", "identity.csv"}, {"sweep", "sweep.csv"}, {"observe", "observability.csv"}, {"energy", "energy.csv"}};
    for (const auto& [cmd, csv] : cmds) {
        ASSERT_EQ(run_cli({cmd, "--scenario", s, "--out", out(cmd)}), kExitOk) << cmd;
        const std::string text = slurp(out(cmd) + "/" + csv);
        EXPECT_EQ(text.rfind("# schema: wobs-", 0), 0u) << cmd;
        EXPECT_TRUE(fs::exists(out(cmd) + "/summary.json"));
    }
    EXPECT_TRUE(fs::exists(out("energy") + "/trajectory.bin"));
    EXPECT_TRUE(fs::exists(out("energy") + "/energy_draws.csv"));
}

TEST_F(CliTest, SeedOverrideIsRecorded) {
    const auto s = scenario(small());
    ASSERT_EQ(run_cli({"energy", "--scenario", s, "--out", out("e"), "--seed", "42"}), kExitOk);
    const auto j = nlohmann::json::parse(slurp(out("e") + "/summary.json"));
    EXPECT_EQ(j["scenario"]["seed"], 42);
}

TEST_F(CliTest, ConfigErrorsExitWithOne) {
    auto bad = small();
    bad["geometry"] = {{"delta", 0.1}, {"delta0", 0.2}};
    EXPECT_EQ(run_cli({"regions", "--scenario", scenario(bad), "--out", out("x")}), kExitUsage);
    EXPECT_EQ(run_cli({"regions", "--scenario", out("missing.json")}), kExitUsage);
    EXPECT_EQ(run_cli({"frobnicate"}), kExitUsage);
    EXPECT_EQ(run_cli({}), kExitUsage);
    auto early = small();
    early["time"] = {{"T", 1.0}};
    EXPECT_EQ(run_cli({"regions", "--scenario", scenario(early), "--out", out("y")}), kExitUsage);
}

TEST_F(CliTest, FailedHypothesisExitsWithTwo) {
    auto interior = small();
    interior["weight"] = {{"center", {0.5}}};
    EXPECT_EQ(run_cli({"regions", "--scenario", scenario(interior), "--out", out("z")}), kExitVerification);
}

TEST_F(CliTest, ShiftedScenarioWritesTheEnvelope) {
    auto j = small();
    j["weight"] = {{"center", {0.5}}};
    j["geometry"] = {{"zeta", {0.05}}};
    ASSERT_EQ(run_cli({"regions", "--scenario", scenario(j), "--out", out("w")}), kExitOk);
    for (const char* f : {"W.pgm", "Kzeta.pgm", "Dzeta.pgm", "Kzeta.csv"}) EXPECT_TRUE(fs::exists(out("w") + "/" + f)) << f;
    const auto s = nlohmann::json::parse(slurp(out("w") + "/summary.json"));
    EXPECT_EQ(s["envelope"]["closure_violations"], 0);
    EXPECT_EQ(run_cli({"sweep", "--scenario", scenario(j), "--out", out("v")}), kExitUsage);
}
