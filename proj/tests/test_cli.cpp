#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "melnikov_lab/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "melnikov-lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = mlab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) v.push_back(l);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("melnikov_lab_cli_" + name); }

}  // namespace

TEST(Cli, ListHasOneRowPerSystem) {
  const auto o = run({"list"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto ls = lines(o.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[1].rfind("duffing", 0), 0u);
  EXPECT_EQ(ls[4].rfind("beam", 0), 0u);
}

TEST(Cli, ListJson) {
  const auto o = run({"list", "--json"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[2]["id"], "rigidbody");
  EXPECT_FALSE(j[0]["tasks"].empty());
}

TEST(Cli, BeamOracleCompare) {
  const auto o = run({"oracle-compare", "--preset", "beam"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto ls = lines(o.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "j,k,l,numeric,oracle,abs_error,rel_error");
  EXPECT_EQ(ls[1].rfind("2,3,1,", 0), 0u);
}

TEST(Cli, ZeroCaseOfBeamIsZero) {
  const auto o = run({"obstruction", "--system", "beam", "--case", "1,1,1"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto ls = lines(o.out);
  ASSERT_EQ(ls.size(), 2u);
  const double v = std::stod(ls[1].substr(ls[1].rfind(',') + 1));
  EXPECT_LT(std::abs(v), 1e-8);
}

TEST(Cli, UnknownFlagIsRejected) {
  const auto o = run({"obstruction", "--system", "beam", "--bogus", "1"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("error"), std::string::npos);
}

TEST(Cli, KeyOfAnotherSystemIsRejected) {
  const auto o = run({"obstruction", "--system", "beam", "--omega0", "1"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("omega0"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyIsRejected) {
  const auto p = temp_path("bad.cfg");
  std::ofstream(p) << "system=beam\nfrobnicate=3\n";
  const auto o = run({"obstruction", "--config", p.string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("frobnicate"), std::string::npos);
  fs::remove(p);
}

TEST(Cli, MalformedConfigLineIsRejected) {
  const auto p = temp_path("malformed.cfg");
  std::ofstream(p) << "system=beam\njust words\n";
  const auto o = run({"obstruction", "--config", p.string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find(":2:"), std::string::npos);
  fs::remove(p);
}

TEST(Cli, EmptyGridIsAnError) {
  const auto o = run({"melnikov-scan", "--system", "duffing", "--tau", "0:1:0"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("tau"), std::string::npos);
}

TEST(Cli, TaskNotOfferedBySystem) {
  const auto o = run({"verify", "--system", "pendula"});
  EXPECT_EQ(o.code, 1);
  const auto p = run({"frobnicate", "--system", "beam"});
  EXPECT_EQ(p.code, 1);
}

TEST(Cli, BadNumberIsReported) {
  const auto o = run({"obstruction", "--system", "beam", "--c", "one"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("'c'"), std::string::npos);
}

TEST(Cli, NonConvergenceGivesExitTwo) {
  // the tail over a window this short stays far above the tolerance
  const auto o = run({"melnikov-scan", "--system", "duffing", "--window", "3", "--tau", "0:1:2"});
  EXPECT_EQ(o.code, 2) << o.err;
  EXPECT_NE(o.out.find("false"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigOverridePreset) {
  const auto p = temp_path("layer.cfg");
  std::ofstream(p) << "case=1,1,1\nc=2\n";
  const auto rc_args = std::vector<const char*>{"melnikov-lab", "obstruction", "--preset", "beam", "--config",
                                                p.c_str(), "--c", "3"};
  const auto rc = mlab::cli::parse(static_cast<int>(rc_args.size()), rc_args.data());
  EXPECT_EQ(rc.system, "beam");
  EXPECT_EQ(rc.params.at("case"), "1,1,1");
  EXPECT_EQ(rc.params.at("c"), "3");
  EXPECT_EQ(rc.params.at("omega1"), "1");
  fs::remove(p);
}

TEST(Cli, JsonTableCarriesMetadata) {
  const auto o = run({"oracle-compare", "--preset", "beam", "--format", "json"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j["system"], "beam");
  EXPECT_EQ(j["task"], "oracle-compare");
  ASSERT_EQ(j["rows"].size(), 1u);
  EXPECT_EQ(j["rows"][0]["j"], 2);
}

TEST(Cli, OutFileMatchesStandardOutput) {
  const auto p = temp_path("out.csv");
  const auto a = run({"obstruction", "--preset", "rigidbody-biased"});
  const auto b = run({"obstruction", "--preset", "rigidbody-biased", "--out", p.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(b.out.empty());
  EXPECT_EQ(slurp(p), a.out);
  fs::remove(p);
}

TEST(Cli, BinaryOutputIsByteIdenticalAcrossThreadCounts) {
  const auto a = temp_path("det_a.csv"), b = temp_path("det_b.csv");
  const std::string bin = MELNIKOV_LAB_BIN;
  const std::string args = " melnikov-scan --system duffing --tau 0:6.283185307179586:8 --out ";
  ASSERT_EQ(std::system(("MELNIKOV_LAB_THREADS=1 " + bin + args + a.string()).c_str()), 0);
  ASSERT_EQ(std::system(("MELNIKOV_LAB_THREADS=4 " + bin + args + b.string()).c_str()), 0);
  const auto sa = slurp(a);
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, slurp(b));
  fs::remove(a);
  fs::remove(b);
}

TEST(Cli, BinaryExitCodeOnError) {
  const std::string bin = MELNIKOV_LAB_BIN;
  const int rc = std::system((bin + " obstruction --system nowhere > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(rc));
  EXPECT_EQ(WEXITSTATUS(rc), 1);
}

TEST(Cli, HomoclinicObstructionMatchesScanValue) {
  const auto a = run({"obstruction", "--system", "duffing", "--tau", "0.5"});
  const auto b = run({"melnikov-scan", "--system", "duffing", "--tau", "0.5:1.5:2"});
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.err;
  auto value = [](const std::string& line) {
    const auto c = line.find(',');
    return std::stod(line.substr(c + 1, line.find(',', c + 1) - c - 1));
  };
  EXPECT_NEAR(value(lines(a.out)[1]), value(lines(b.out)[1]), 1e-9);
}
