#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "pinlab/io.hpp"

using namespace pinlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PINLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pinlab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3, 1e-300, 123456789.0, -2.5e-7}) EXPECT_EQ(std::stod(fmt(x)), x);
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(fmt(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(fmt(std::int64_t{42}), "42");
}

TEST(Parse, Numbers) {
  EXPECT_EQ(parse_int("N", "2^13"), 8192);
  EXPECT_EQ(parse_int("N", "1e4"), 10000);
  EXPECT_EQ(parse_int("N", " 77 "), 77);
  EXPECT_THROW(parse_int("N", "1.5"), UsageError);
  EXPECT_THROW(parse_double("beta", "abc"), UsageError);
  EXPECT_DOUBLE_EQ(parse_double("beta", "-0.05"), -0.05);
}

TEST(Parse, LawGrammar) {
  const auto h = parse_law("heavy(c=1.75, phi=logpow(2), p_inf=0.1, n_table=4096)");
  EXPECT_TRUE(h.is_heavy());
  EXPECT_DOUBLE_EQ(h.c(), 1.75);
  EXPECT_DOUBLE_EQ(h.p_inf(), 0.1);
  EXPECT_FALSE(h.phi().is_constant());
  EXPECT_EQ(h.n_table(), 4096u);
  const auto g = parse_law("geometric(0.3, p_inf=0.2)");
  EXPECT_DOUBLE_EQ(g.geometric_p(), 0.3);
  EXPECT_DOUBLE_EQ(g.p_inf(), 0.2);
  EXPECT_EQ(parse_law("deterministic(4)").deterministic_k(), 4);
  EXPECT_THROW(parse_law("pareto(1.5)"), UsageError);
  EXPECT_THROW(parse_law("heavy(c=1.5, gamma=2)"), UsageError);
  EXPECT_THROW(parse_law("heavy(c=2.5)"), std::exception);
  const auto back = parse_law(h.spec_string());
  EXPECT_EQ(back.spec_string(), h.spec_string());
}

TEST(Config, DeltaUConversion) {
  auto a = config_from_map({{"beta", "0.2"}, {"delta", "0.05"}});
  EXPECT_NEAR(a.u_value(), -0.05, 1e-15);
  auto b = config_from_map({{"beta", "0.2"}, {"u", "-0.05"}});
  EXPECT_NEAR(b.delta_value(), 0.05, 1e-15);
}

TEST(Config, Errors) {
  auto msg = [](const std::map<std::string, std::string>& kv) {
    try {
      config_from_map(kv);
    } catch (const UsageError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg({{"bogus", "1"}}).find("bogus"), std::string::npos);
  EXPECT_NE(msg({{"beta", "0.2"}, {"delta", "0.1"}, {"u", "0"}}).find("delta"), std::string::npos);
  EXPECT_NE(msg({{"replicas", "1"}}).find("replicas"), std::string::npos);
  EXPECT_NE(msg({{"beta", "-1"}}).find("beta"), std::string::npos);
  const auto c = config_from_map({});
  EXPECT_THROW(c.delta_value(), UsageError);
}

TEST(Config, RoundTripsThroughText) {
  const auto c = config_from_map({{"law", "heavy(c=1.25, phi=const(1), p_inf=0)"},
                                  {"beta", "0.2"},
                                  {"u", "-0.1"},
                                  {"N_grid", "2^11, 2^13"},
                                  {"delta_grid", "0.01,0.1"},
                                  {"seed", "7"},
                                  {"enforce_min_N", "false"}});
  const auto text = to_config_text(c);
  const auto d = config_from_map(parse_config_text(text));
  EXPECT_EQ(to_config_text(d), text);
  EXPECT_EQ(d.N_grid, (std::vector<std::int64_t>{2048, 8192}));
  EXPECT_FALSE(d.enforce_min_N);
  EXPECT_EQ(config_hash(c), config_hash(d));
  auto e = c;
  e.out_dir = "elsewhere";
  e.threads = 3;
  EXPECT_EQ(config_hash(e), config_hash(c));
  e.seed = 8;
  EXPECT_NE(config_hash(e), config_hash(c));
}

TEST(Config, HashIsGitBlobSha1) {
  const auto c = config_from_map({{"beta", "0.5"}, {"delta", "0.1"}});
  auto stripped = c;
  stripped.out_dir.clear();
  stripped.threads = 0;
  const auto dir = scratch("hash");
  fs::create_directories(dir);
  const auto file = dir / "cfg.txt";
  std::ofstream(file, std::ios::binary) << to_config_text(stripped);
  const std::string cmd = "git hash-object " + file.string() + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  char buf[64] = {0};
  const bool got = std::fgets(buf, sizeof buf, p) != nullptr;
  pclose(p);
  if (!got) GTEST_SKIP() << "git not available";
  EXPECT_EQ(std::string(buf, 40), config_hash(c));
}

TEST(Config, ReadFileWithComments) {
  const auto dir = scratch("cfgfile");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "# comment\nbeta = 0.3   # trailing\n\ndelta=0.02\n";
  const auto kv = read_config_file((dir / "run.cfg").string());
  EXPECT_EQ(kv.at("beta"), "0.3");
  EXPECT_EQ(kv.at("delta"), "0.02");
  std::ofstream(dir / "bad.cfg") << "beta 0.3\n";
  EXPECT_THROW(read_config_file((dir / "bad.cfg").string()), UsageError);
  EXPECT_THROW(read_config_file((dir / "missing.cfg").string()), UsageError);
}

TEST(Csv, Layout) {
  CsvWriter w({"a", "b", "c"});
  w.row({0.5, std::int64_t{3}, std::string("x")});
  w.row({std::numeric_limits<double>::quiet_NaN(), std::int64_t{-1}, std::string()});
  EXPECT_EQ(w.str(), "a,b,c\n0.5,3,x\nnan,-1,\n");
  EXPECT_THROW(w.row({1.0}), std::logic_error);
}

TEST(Json, SortedKeysAndNulls) {
  Json j;
  j["zeta"] = 1;
  j["alpha"] = jnum(std::numeric_limits<double>::infinity());
  EXPECT_EQ(j.dump(), "{\"alpha\":null,\"zeta\":1}");
  Manifest m{"abc", 7, {{"quenched", 1.5}}, {"w"}};
  const auto mj = m.to_json();
  EXPECT_EQ(mj["tool_version"], kToolVersion);
  EXPECT_EQ(mj["seed"], 7);
}

TEST(Cli, ExitCodesAndNoOutputOnUsageError) {
  const auto out = scratch("cli_usage");
  EXPECT_EQ(run_cli("quenched --beta 0.2 --delta 0.05 --u -0.05 --N 64 --out-dir " + out.string()), 2);
  EXPECT_EQ(run_cli("quenched --beta 0.2 --N 64 --frobnicate 1 --out-dir " + out.string()), 2);
  EXPECT_EQ(run_cli("quenched --beta 0.2 --out-dir " + out.string()), 2);
  EXPECT_EQ(run_cli("nosuchcommand"), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, QuenchedOutputsAndDeterminism) {
  const auto a = scratch("cli_a"), b = scratch("cli_b");
  const std::string args = "quenched --beta 0.2 --u -0.05 --N 512 --replicas 8 --seed 7 --out-dir ";
  ASSERT_EQ(run_cli(args + a.string() + " --threads 3"), 0);
  ASSERT_EQ(run_cli(args + b.string() + " --threads 1"), 0);
  EXPECT_EQ(slurp(a / "quenched.csv"), slurp(b / "quenched.csv"));
  EXPECT_EQ(slurp(a / "quenched.summary.json"), slurp(b / "quenched.summary.json"));
  const auto s = Json::parse(slurp(a / "quenched.summary.json"));
  for (const char* k : {"beta", "u", "delta", "N", "n_replicas", "f_mean", "f_se", "c_mean", "c_se"})
    EXPECT_TRUE(s.contains(k)) << k;
  EXPECT_NEAR(s["delta"].get<double>(), 0.05, 1e-15);
  EXPECT_TRUE(fs::exists(a / "manifest.json"));
  const auto csv = slurp(a / "quenched.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "replica,seed_child,N,log_Z,fN,mean_LN,contact");
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto out = scratch("cli_cfg");
  fs::create_directories(out);
  std::ofstream(out / "run.cfg") << "beta = 0.2\ndelta = 0.05\n";
  ASSERT_EQ(run_cli("--config " + (out / "run.cfg").string() + " annealed --beta 0.4 --out-dir " + out.string()), 0);
  const auto csv = slurp(out / "annealed.csv");
  EXPECT_NE(csv.find("\n0.4,0.05,"), std::string::npos);
  // a --u flag replaces the file's delta
  ASSERT_EQ(run_cli("--config " + (out / "run.cfg").string() + " annealed --u 0 --out-dir " + out.string()), 0);
  EXPECT_NE(slurp(out / "annealed.csv").find("\n0.2,0.1,"), std::string::npos);
}

TEST(Cli, Selfcheck) { EXPECT_EQ(run_cli("selfcheck"), 0); }
