#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("wde_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string write_scenario(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + WDE_CLI_PATH + std::string(" ") + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kIdentity = R"({
  "matrices": {"C": {"dim": 1, "rows": [[1.0]]}},
  "wf": {"type": "constant", "c": 1.0}
})";

const char* kKyFan = R"({
  "matrices": {"C1": {"rows": [[1.0]]}, "C2": {"rows": [[4.0]]}},
  "wf": {"type": "exp_tilt", "t": [0.3]},
  "lambda": 0.5
})";

const char* kCorrelated = R"({
  "matrices": {"C": {"dim": 2, "rows": [[1.0, 0.5], [0.5, 1.0]]}},
  "wf": {"type": "exp_tilt", "t": [1.0, -1.0]}
})";

}  // namespace

TEST(Cli, EntropyOfStandardNormal) {
  const Result r = run("entropy --scenario " + write_scenario("id.json", kIdentity));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), 1.418939, 1e-6);
  EXPECT_EQ(j["command"], "entropy");
  EXPECT_EQ(j["config"]["seed"], 0);
  EXPECT_EQ(j["config"]["samples"], 100000);
}

TEST(Cli, IdentityHoldsWithZeroMargin) {
  const Result r = run("verify Identity6.7 --scenario " + write_scenario("id.json", kIdentity));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["report"]["margin"]["value"].get<double>(), 0.0);
}

TEST(Cli, KyFanHoldsWithFailedPrerequisite) {
  const Result r = run("verify KyFanW --scenario " + write_scenario("kf.json", kKyFan));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["report"]["verdict"], "Holds");
  EXPECT_NE(j["report"]["note"].get<std::string>().find("prerequisite failed"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const std::string sc = write_scenario("corr.json", kCorrelated);
  EXPECT_EQ(run("check C5.20 --scenario " + sc).code, 1);
  EXPECT_EQ(run("check C1.6 --scenario " + sc).code, 64);
  EXPECT_EQ(run("verify Bogus --scenario " + sc).code, 64);
  EXPECT_EQ(run("frobnicate").code, 64);
  EXPECT_EQ(run("entropy").code, 64);
  EXPECT_EQ(run("entropy --scenario " + sc + " --samples 0").code, 64);
  EXPECT_EQ(run("entropy --scenario " + sc + " --format xml").code, 64);
}

TEST(Cli, OversizedPrerequisiteStillVerifies) {
  const std::string sc = write_scenario("big.json", R"({
  "matrices": {"C": {"rows": [[1,0,0,0,0,0,0,0,0],[0,1,0,0,0,0,0,0,0],[0,0,1,0,0,0,0,0,0],
    [0,0,0,1,0,0,0,0,0],[0,0,0,0,1,0,0,0,0],[0,0,0,0,0,1,0,0,0],[0,0,0,0,0,0,1,0,0],
    [0,0,0,0,0,0,0,1,0],[0,0,0,0,0,0,0,0,1]]}}
})");
  const Result r = run("verify WHI --scenario " + sc);
  EXPECT_EQ(r.code, 0) << r.out;
  const Result c = run("verify Chain2.19 --scenario " + sc);
  EXPECT_EQ(c.code, 0) << c.out;
  const auto j = nlohmann::json::parse(c.out);
  EXPECT_NE(j["report"]["note"].get<std::string>().find("not evaluated"), std::string::npos);
}

TEST(Cli, MalformedJsonIsLineAnchored) {
  const std::string sc = write_scenario("bad.json", "{\n  \"matrices\": {\n    \"C\": [1, 2\n}\n");
  const Result r = run("entropy --scenario " + sc);
  EXPECT_EQ(r.code, 64);
  EXPECT_NE(r.out.find("bad.json:4:"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("malformed JSON"), std::string::npos);
}

TEST(Cli, UnknownKeyIsRejectedWithLine) {
  const std::string sc = write_scenario("typo.json", R"({
  "matrices": {"C": {"rows": [[1.0]]}},
  "lamda": 0.5
})");
  const Result r = run("entropy --scenario " + sc);
  EXPECT_EQ(r.code, 64);
  EXPECT_NE(r.out.find("typo.json:3: unknown scenario key 'lamda'"), std::string::npos) << r.out;
}

TEST(Cli, ByteIdenticalReports) {
  const std::string sc = write_scenario("kf.json", kKyFan);
  const fs::path a = scratch() / "a.json";
  const fs::path b = scratch() / "b.json";
  const std::string args = "verify KyFanW --mc --samples 20000 --seed 9 --scenario " + sc;
  ASSERT_EQ(run(args + " --out " + a.string()).code, 0);
  ASSERT_EQ(run(args + " --threads 3 --out " + b.string()).code, 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_FALSE(read_file(a).empty());
}

TEST(Cli, SeedEnvironmentOverridesDefaultOnly) {
  const std::string sc = write_scenario("corr.json", kCorrelated);
  const auto env_seed = nlohmann::json::parse(run("entropy --scenario " + sc, "WDE_SEED=42").out);
  EXPECT_EQ(env_seed["config"]["seed"], 42);
  const auto flag = nlohmann::json::parse(run("entropy --seed 7 --scenario " + sc, "WDE_SEED=42").out);
  EXPECT_EQ(flag["config"]["seed"], 7);
}

TEST(Cli, SweepCsv) {
  const std::string sc = write_scenario("kf.json", kKyFan);
  const Result r = run("sweep KyFanW --axis t --grid 0:2:0.1 --format csv --scenario " + sc);
  // large tilts break the inequality, so the sweep as a whole fails
  EXPECT_EQ(r.code, 1) << r.out;
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "grid_value,margin,margin_stderr,condition_verdict,inequality_verdict");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) rows += !line.empty();
  EXPECT_EQ(rows, 21);
  EXPECT_NE(r.out.find("\n0,0.2231435513142097"), std::string::npos);
}

TEST(Cli, ChainCsvAndMoments) {
  const std::string sc = write_scenario("corr.json", kCorrelated);
  const Result chain = run("chain h --format csv --scenario " + sc);
  ASSERT_EQ(chain.code, 0) << chain.out;
  EXPECT_EQ(chain.out.substr(0, chain.out.find('\n')), "label,d,k,value,stderr");
  const Result m = run("moments --scenario " + sc);
  ASSERT_EQ(m.code, 0) << m.out;
  const auto j = nlohmann::json::parse(m.out);
  EXPECT_NEAR(j["moments"]["alpha"]["value"].get<double>(), std::exp(0.5), 1e-12);
}

TEST(Cli, ListCarriesDescriptions) {
  const Result r = run("list");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["conditions"].size(), 14u);
  EXPECT_EQ(j["inequalities"].size(), 22u);
  EXPECT_TRUE(j["conditions"][0].contains("description"));
}

TEST(Cli, SelftestSmall) {
  const Result r = run("selftest --samples 20000");
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["reduction"]["passed"], 100);
  EXPECT_GE(j["moments"]["agreed"].get<int>(), 95);
}
