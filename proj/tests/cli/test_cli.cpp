#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int status = -1;
    std::string output;
};

/// Runs the CLI with the given arguments and captures its standard output.
RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path log = dir / "stdout.txt";
    const std::string cmd = std::string("\"") + PUFEM_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
    return n;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("pufem_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& text) {
        const fs::path p = dir_ / "config.json";
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, FrfOnStripWritesTablesAndRecord) {
    const auto cfg = write_config(R"({
        "geometry": {"shape": "strip", "length": 0.5},
        "mesh": {"elements_per_side": 4},
        "enrichment": {"p": 3, "q": 2},
        "loads": [{"kind": "point", "magnitude": 1.0, "x": 0.125}],
        "frequencies": {"list": [300, 1000]},
        "reference": {"min_modes": 5000}
    })");
    const fs::path out = dir_ / "out";
    const auto r = run_cli("frf --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --threads 1", dir_);
    ASSERT_EQ(r.status, 0) << r.output;
    for (const char* f : {"frf.csv", "study.csv", "timings.csv", "run.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
    EXPECT_EQ(line_count(out / "study.csv"), 3u);
    const auto record = nlohmann::json::parse(read_text(out / "run.json"));
    EXPECT_EQ(record.at("config").at("enrichment").at("q"), 2);
    EXPECT_EQ(read_text(out / "study.csv").find("wall"), std::string::npos);
}

TEST_F(CliTest, FieldReportsContinuity) {
    const auto cfg = write_config(R"({
        "mesh": {"elements_per_side": 2},
        "enrichment": {"p": 2, "q": 8},
        "loads": [{"kind": "uniform"}],
        "field": {"frequency": 800, "nx": 11, "ny": 11, "continuity_samples": 20}
    })");
    const fs::path out = dir_ / "out";
    const auto r = run_cli("field --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"", dir_);
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(line_count(out / "field.csv"), 1u + 121u);
    const auto record = nlohmann::json::parse(read_text(out / "run.json"));
    const auto& results = record.at("results");
    ASSERT_TRUE(results.contains("continuity_max_relative_jump"));
    EXPECT_LT(results.at("continuity_max_relative_jump").get<double>(), 1e-8);
}

TEST_F(CliTest, ConvergePrintsSlope) {
    const auto cfg = write_config(R"({
        "geometry": {"shape": "strip"},
        "enrichment": {"p": 3, "q": 0},
        "loads": [{"kind": "point", "x": 0.125}],
        "converge": {"mode": "h", "ladder": [16, 32, 64], "frequency": 1000},
        "reference": {"min_modes": 5000}
    })");
    const fs::path out = dir_ / "out";
    const auto r = run_cli("converge --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"", dir_);
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("fitted slope:"), std::string::npos) << r.output;
    EXPECT_EQ(line_count(out / "study.csv"), 4u);
}

TEST_F(CliTest, InvalidConfigurationExitsWithTwo) {
    const auto cfg = write_config(R"({"geometry": {"shape": "circle"}})");
    EXPECT_EQ(run_cli("frf --config \"" + cfg.string() + "\" --out \"" + (dir_ / "out").string() + "\"", dir_).status, 2);
    const auto bad_q = write_config(R"({"geometry": {"shape": "strip"}, "enrichment": {"q": 4}})");
    EXPECT_EQ(run_cli("frf --config \"" + bad_q.string() + "\" --out \"" + (dir_ / "out").string() + "\"", dir_).status, 2);
    EXPECT_NE(run_cli("nonsense", dir_).status, 0);
}

TEST_F(CliTest, ShippedStripDemoRuns) {
    const fs::path demos(PUFEM_DEMO_DIR);
    ASSERT_TRUE(fs::exists(demos / "strip_frf.json"));
    const auto r = run_cli("frf --config \"" + (demos / "strip_frf.json").string() + "\" --out \"" +
                               (dir_ / "out").string() + "\"",
                           dir_);
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_GT(line_count(dir_ / "out" / "frf.csv"), 10u);
}
