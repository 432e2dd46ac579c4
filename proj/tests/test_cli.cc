#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.h"

namespace exactsdp {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "/" + name; }

TEST(Cli, DemoEx44AtThreshold) {
  const Outcome o = invoke({"demo", "ex44", "--gamma", "0.8", "--no-oracle"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("ExactByPairwisePSD"), std::string::npos);
  EXPECT_NE(o.out.find("verdict: ExactVerified"), std::string::npos);
}

TEST(Cli, DemoEx44BeyondThresholdNamesPair) {
  const Outcome o = invoke({"demo", "ex44", "--gamma", "1.0", "--no-oracle"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("ConditionFails"), std::string::npos);
  EXPECT_NE(o.out.find("(B1, B3)"), std::string::npos);
  EXPECT_NE(o.out.find("verdict: RelaxationOnly"), std::string::npos);
}

TEST(Cli, GenThenRunWithOracle) {
  const std::string path = temp_path("ex45_n4_s7.json");
  const Outcome g = invoke({"gen", "--family", "ex45", "--n", "4", "--seed", "7", "--out", path});
  ASSERT_EQ(g.code, 0) << g.err;
  ASSERT_TRUE(std::ifstream(path).good());
  const Outcome r = invoke({"run", path, "--oracle", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("verdict"), "ExactVerified");
  EXPECT_TRUE(j.contains("oracle"));
  EXPECT_EQ(j.at("recovery").at("replay_passed"), true);
}

TEST(Cli, RunWritesReportFile) {
  const std::string path = temp_path("ex42.json");
  ASSERT_EQ(invoke({"gen", "--family", "ex42", "--out", path}).code, 0);
  const std::string report = temp_path("ex42_report.json");
  const Outcome r = invoke({"run", path, "--out", report});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(report);
  const nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("verdict"), "ExactVerified");
  EXPECT_NEAR(j.at("sdp").at("zeta_p").get<double>(), 5.0, 1e-6);
}

TEST(Cli, CheckAndSolveSubcommands) {
  const std::string path = temp_path("ex41.json");
  ASSERT_EQ(invoke({"gen", "--family", "ex41", "--out", path}).code, 0);
  const Outcome c = invoke({"check", path});
  EXPECT_EQ(c.code, 0) << c.err;
  EXPECT_NE(c.out.find("certificate:"), std::string::npos);
  EXPECT_EQ(c.out.find("sdp:"), std::string::npos);
  const Outcome s = invoke({"solve", path});
  EXPECT_EQ(s.code, 0) << s.err;
  EXPECT_NE(s.out.find("Optimal"), std::string::npos);
}

TEST(Cli, UnionOfBranchFiles) {
  // Q = diag(3,5), H = I with one equality per branch: values 5 and 3.
  const char* a = R"({"n": 2, "Q": [[3, 0], [0, 5]], "H": [[1, 0], [0, 1]],
                      "constraints": [{"kind": "eq", "matrix": [[1, 0], [0, 0]]}]})";
  const char* b = R"({"n": 2, "Q": [[3, 0], [0, 5]], "H": [[1, 0], [0, 1]],
                      "constraints": [{"kind": "eq", "matrix": [[0, 0], [0, 1]]}]})";
  const std::string pa = temp_path("branch_a.json"), pb = temp_path("branch_b.json");
  std::ofstream(pa) << a;
  std::ofstream(pb) << b;
  const Outcome u = invoke({"union", pa, pb, "--json"});
  ASSERT_EQ(u.code, 0) << u.err << u.out;
  const nlohmann::json j = nlohmann::json::parse(u.out);
  EXPECT_NEAR(j.at("value").get<double>(), 3.0, 1e-6);
  EXPECT_EQ(j.at("branch"), 1);
}

TEST(Cli, MissingFileIsInputError) {
  const Outcome o = invoke({"check", temp_path("does_not_exist.json")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("cannot open"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"demo", "ex99"}).code, 2);
  EXPECT_EQ(invoke({"gen", "--family", "ex45"}).code, 2);
  EXPECT_EQ(invoke({"gen", "--family", "nope", "--out", temp_path("x.json")}).code, 2);
  const std::string bad = temp_path("bad.json");
  std::ofstream(bad) << "{not json";
  EXPECT_EQ(invoke({"run", bad}).code, 2);
}

TEST(Cli, HelpExitsCleanly) {
  const Outcome o = invoke({"--help"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("demo"), std::string::npos);
}

}  // namespace
}  // namespace exactsdp
