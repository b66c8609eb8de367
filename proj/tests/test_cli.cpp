#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"
#include "fixtures.hpp"

using namespace compidx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "compidx");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("compidx_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& content) const {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << content;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& p) { return text::read_file(p); }

    fs::path dir_;
};

std::string complete_panel_csv() {
    auto m = fixtures::five_by_eight();
    m.values(1, 6) = 7.5;
    m.values(3, 0) = 2.2;
    return write_dataset_csv(m, {});
}

}  // namespace

TEST_F(CliTest, IndexMatchesIndependentComputation) {
    const auto data = write("panel.csv", complete_panel_csv());
    const auto r = run_cli({"index", "--data", data, "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;

    // independent route: library calls without the CLI
    const auto m = load_dataset(complete_panel_csv(), reference_indicator_specs());
    const auto rs = aggregate(z_convert(m), equal_weight_scheme(m.indicators));
    const auto body = composites_csv(rs, {});
    ASSERT_GE(r.out.size(), body.size());
    EXPECT_EQ(r.out.substr(r.out.size() - body.size()), body);
    EXPECT_NE(r.out.find("# compidx index"), std::string::npos);
}

TEST_F(CliTest, OutputIsDeterministic) {
    const auto data = write("panel.csv", complete_panel_csv());
    for (const char* fmt : {"text", "csv", "json"}) {
        const auto a = run_cli({"report", "--data", data, "--format", fmt, "--paper-tables"});
        const auto b = run_cli({"report", "--data", data, "--format", fmt, "--paper-tables"});
        ASSERT_EQ(a.code, 0) << a.err;
        EXPECT_EQ(a.out, b.out);
    }
}

TEST_F(CliTest, DiagnosePublishedTablesAllPass) {
    const auto r = run_cli({"diagnose", "--paper-tables"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("8/8"), std::string::npos);
    const auto j = run_cli({"diagnose", "--paper-tables", "--format", "json"});
    const auto doc = nlohmann::json::parse(j.out);
    EXPECT_EQ(doc["diagnostics"]["implied_extremes"]["passed"], 8);
}

TEST_F(CliTest, DuplicateCodeIsValidationErrorWithLine) {
    auto csv = complete_panel_csv();
    const auto first_row = csv.find("\nNLD,");
    const auto end = csv.find('\n', first_row + 1);
    csv += csv.substr(first_row + 1, end - first_row);
    const auto data = write("dup.csv", csv);
    const auto r = run_cli({"ingest", "--data", data});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 7"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("NLD"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, ConvertThenIndexEqualsIndex) {
    const auto data = write("panel.csv", complete_panel_csv());
    const auto conv = run_cli({"convert", "--data", data, "--format", "csv", "--out", path("out")});
    ASSERT_EQ(conv.code, 0) << conv.err;
    const auto direct = run_cli({"index", "--data", data, "--format", "csv"});
    const auto via = run_cli({"index", "--converted", path("out/converted.csv"), "--format", "csv"});
    ASSERT_EQ(via.code, 0) << via.err;
    const auto body = [](const std::string& s) { return s.substr(s.find("code,score")); };
    EXPECT_EQ(body(direct.out), body(via.out));
}

TEST_F(CliTest, DegenerateColumnExitsTwo) {
    auto m = fixtures::five_by_eight();
    for (std::size_t i = 0; i < 5; ++i) m.values(i, 2) = 100.0;
    m.values(1, 6) = 1.0;
    m.values(3, 0) = 1.0;
    const auto data = write("flat.csv", write_dataset_csv(m, {}));
    const auto r = run_cli({"index", "--data", data});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("scientists"), std::string::npos) << r.err;
}

TEST_F(CliTest, MinMaxWithoutBoundsIsArgumentError) {
    const auto data = write("panel.csv", complete_panel_csv());
    EXPECT_EQ(run_cli({"convert", "--data", data, "--method", "minmax"}).code, 1);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
    EXPECT_EQ(run_cli({"index"}).code, 1);
}

TEST_F(CliTest, CoverageCutoffAndRank) {
    const auto data = write("panel.csv", write_dataset_csv(fixtures::five_by_eight(), {}));
    const auto strict = run_cli({"rank", "--data", data, "--format", "csv"});
    ASSERT_EQ(strict.code, 0) << strict.err;
    EXPECT_EQ(strict.out.find("KOR"), std::string::npos);
    const auto loose = run_cli({"rank", "--data", data, "--format", "csv", "--min-indicators", "7"});
    ASSERT_EQ(loose.code, 0) << loose.err;
    EXPECT_NE(loose.out.find("KOR"), std::string::npos);
    EXPECT_NE(loose.out.find("rank,code,name,score,band"), std::string::npos);
    EXPECT_EQ(run_cli({"ingest", "--data", data, "--min-indicators", "9"}).code, 1);
}

TEST_F(CliTest, SensitivityTargetedAndWeights) {
    const auto data = write("panel.csv", complete_panel_csv());
    const auto r = run_cli({"sensitivity", "--data", data, "--drop-country", "BRA", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["reports"][0]["subject"], "BRA");

    std::string weights = R"({"name":"a","weights":{)";
    std::string weights7 = R"({"name":"b","weights":{)";
    const auto specs = reference_indicator_specs();
    for (std::size_t j = 0; j < specs.size(); ++j) {
        weights += (j ? "," : "") + std::string("\"") + specs[j].id + "\":" + std::to_string(j + 1);
        weights7 += (j ? "," : "") + std::string("\"") + specs[j].id + "\":" + std::to_string(7 * (j + 1));
    }
    const auto wa = write("a.json", weights + "}}");
    const auto wb = write("b.json", weights7 + "}}");
    const auto c = run_cli({"sensitivity", "--data", data, "--weights", wa, "--weights-b", wb, "--format", "json"});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_EQ(nlohmann::json::parse(c.out)["reports"][0]["spearman"], 1.0);
}

TEST_F(CliTest, ReportWritesArtifactFiles) {
    const auto data = write("panel.csv", complete_panel_csv());
    const auto r = run_cli({"report", "--data", data, "--format", "csv", "--out", path("rep")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"coverage.csv", "converted.csv", "index.csv", "rank.csv",
                          "hist_composite.csv", "hist_converted_patents.csv"})
        EXPECT_TRUE(fs::exists(path("rep") + "/" + f)) << f;
    EXPECT_EQ(slurp(path("rep") + "/hist_composite.csv").substr(0, 17), "# compidx report\n");
}
