#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fairpool/cli.hpp"
#include "test_support.hpp"

using namespace fairpool;
using fairpool::testing::data_path;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "fairpool_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

const std::string kAlice = data_path("alice.json");
const std::string kBob = data_path("bob.json");

}  // namespace

TEST(CliValidate, Fixtures) {
    auto r = run({"validate", kAlice, kBob});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("alice.json: ok (7 variables, 8 edges)"), std::string::npos);
}

TEST(CliValidate, VertexSetMismatch) {
    auto r = run({"validate", kAlice, data_path("mismatch.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("vertex-set mismatch"), std::string::npos);
}

TEST(CliValidate, MalformedAndMissingFiles) {
    EXPECT_EQ(run({"validate", data_path("malformed.json")}).code, 3);
    EXPECT_EQ(run({"validate", data_path("nope.json")}).code, 3);
}

TEST(CliUsage, BadArguments) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"pool", kAlice}).code, 1);  // --protected missing
    EXPECT_EQ(run({"pool", kAlice, "--protected", "Gnd", "--rule", "plurality"}).code, 1);
    EXPECT_EQ(run({"pool", kAlice, "--protected", "Nope"}).code, 1);
}

TEST(CliPool, PoolingRemoval) {
    auto r = run({"pool", kAlice, kBob, "--protected", "Gnd"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["algorithm"], "pooling-removal");
    EXPECT_EQ(j["predictor_inputs"], json({"Cvr", "Dpt", "Mrk"}));
    EXPECT_EQ(j["removed_vertices"], json({"Gnd", "Job"}));
}

TEST(CliPool, RemovalPoolingAndCompare) {
    auto r = run({"pool", kAlice, kBob, "--protected", "Gnd", "--algorithm", "removal-pooling"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["predictor_inputs"], json({"Cvr"}));

    auto c = run({"pool", kAlice, kBob, "--protected", "Gnd", "--algorithm", "compare"});
    ASSERT_EQ(c.code, 0) << c.err;
    auto j = json::parse(c.out);
    EXPECT_EQ(j["summary"]["removal-pooling"]["predictor_inputs"], json({"Cvr"}));
    EXPECT_EQ(j["summary"]["pooling-removal"]["predictor_inputs"], json({"Cvr", "Dpt", "Mrk"}));
}

TEST(CliPool, DeterministicOutputAndDot) {
    auto dot = scratch("pooled.dot");
    std::filesystem::remove(dot);
    std::vector<std::string> args{"pool",          kAlice,   kBob, "--protected", "Gnd", "--tie-break",
                                  "random",        "--seed", "99", "--dot",       dot.string()};
    auto first = run(args);
    auto second = run(args);
    ASSERT_EQ(first.code, 0) << first.err;
    EXPECT_EQ(first.out, second.out);
    EXPECT_EQ(json::parse(first.out)["tie_break"]["seed"], 99);
    auto text = read_file(dot.string());
    EXPECT_EQ(text.rfind("digraph \"pooled\" {", 0), 0u);
    EXPECT_NE(text.find("\"Job\" [style=dashed, color=gray, label=\"Job\\n(removed)\"];"), std::string::npos);
}

TEST(CliPool, WithDistributionsKeepsSurvivingRoots) {
    auto text = [](double p_z) {
        json j = json::parse(R"({
          "schema_version": 1,
          "variables": [
            {"name": "U_A", "kind": "exogenous"}, {"name": "U_Z", "kind": "exogenous"},
            {"name": "A", "kind": "endogenous"}, {"name": "Z", "kind": "endogenous"},
            {"name": "Yhat", "kind": "endogenous"}],
          "edges": [["U_A", "A"], ["U_Z", "Z"], ["Z", "Yhat"]],
          "predictor": "Yhat",
          "equations": {
            "A": {"parents": ["U_A"], "table": [{"when": ["0"], "value": "0"}, {"when": ["1"], "value": "1"}]},
            "Z": {"parents": ["U_Z"], "table": [{"when": ["0"], "value": "0"}, {"when": ["1"], "value": "1"}]},
            "Yhat": {"parents": ["Z"], "table": [{"when": ["0"], "value": "0"}, {"when": ["1"], "value": "1"}]}},
          "exogenous_distributions": {"U_A": [0.5, 0.5]}
        })");
        j["exogenous_distributions"]["U_Z"] = {1.0 - p_z, p_z};
        return serialize(j);
    };
    auto a = scratch("model_a.json"), b = scratch("model_b.json");
    std::ofstream(a) << text(0.2);
    std::ofstream(b) << text(0.6);
    auto r = run({"pool", a.string(), b.string(), "--protected", "A", "--with-distributions"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto pooled = json::parse(r.out)["pooled_distributions"];
    EXPECT_FALSE(pooled.contains("U_A"));
    ASSERT_TRUE(pooled.contains("U_Z")) << pooled.dump();
    EXPECT_NEAR(pooled["U_Z"][0].get<double>(), 0.6, 1e-12);
    EXPECT_NEAR(pooled["U_Z"][1].get<double>(), 0.4, 1e-12);
}

TEST(CliCheckFair, StructuralVerdicts) {
    auto bob = run({"check-fair", kBob, "--protected", "Gnd"});
    EXPECT_EQ(bob.code, 2);
    EXPECT_EQ(json::parse(bob.out)["offenders"], json({"Job"}));
    EXPECT_EQ(run({"check-fair", kBob}).code, 1);
}

TEST(CliCheckFair, BruteForce) {
    auto constant = run({"check-fair", data_path("constant_predictor.json"), "--protected", "A", "--brute-force"});
    EXPECT_EQ(constant.code, 0) << constant.err;
    auto j = json::parse(constant.out);
    EXPECT_TRUE(j["fair"].get<bool>());
    EXPECT_FALSE(j["structural"]["fair"].get<bool>());

    auto copy = run({"check-fair", data_path("copy_predictor.json"), "--protected", "A", "--brute-force"});
    EXPECT_EQ(copy.code, 2);
    EXPECT_FALSE(json::parse(copy.out)["witnesses"].empty());

    EXPECT_EQ(run({"check-fair", kAlice, "--protected", "Gnd", "--brute-force"}).code, 1);
}

TEST(CliCheckFair, PoolingReportRoundTrip) {
    auto report = scratch("report.json");
    auto r = run({"pool", kAlice, kBob, "--protected", "Gnd"});
    ASSERT_EQ(r.code, 0);
    std::ofstream(report) << r.out;
    auto check = run({"check-fair", report.string()});
    EXPECT_EQ(check.code, 0) << check.err;
    EXPECT_EQ(json::parse(check.out)["diagrams_checked"], 2);

    auto exported = run({"export", report.string(), "--format", "json"});
    ASSERT_EQ(exported.code, 0) << exported.err;
    auto doc = parse_model(json::parse(exported.out));
    EXPECT_EQ(doc.diagram.parents("Yhat"), (std::vector<std::string>{"Cvr", "Dpt", "Mrk"}));
}

TEST(CliExport, ModelToDot) {
    auto r = run({"export", kAlice, "--protected", "Gnd"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("digraph \"model\" {", 0), 0u);
    EXPECT_NE(r.out.find("\"Gnd\" -> \"Dpt\";"), std::string::npos);
    EXPECT_EQ(run({"export", kAlice, "--format", "svg"}).code, 1);
}

TEST(CliBench, HeaderOnlyForZeroTrials) {
    auto r = run({"bench", "--trials", "0"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "trial,algorithm,edges,predictor_inputs,empty\n");
    EXPECT_TRUE(r.err.empty());
}

TEST(CliBench, RowsAndSummary) {
    auto r = run({"bench", "--trials", "5", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 11);
    EXPECT_NE(r.err.find("empty-rate,removal-pooling,"), std::string::npos);
    EXPECT_EQ(run({"bench", "--trials", "5", "--seed", "3"}).out, r.out);
    EXPECT_EQ(run({"bench", "--vars", "1"}).code, 1);
}
