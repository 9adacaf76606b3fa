// Apache License, Version 2.0, refer to LICENSE.txt
#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "lsm/lsm.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result run_shell(const std::string& cmd) {
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Result run(const std::string& args) { return run_shell(std::string(LSM_CLI_PATH) + " " + args + " 2>/dev/null"); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("lsm_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const std::string kZach = std::string(LSM_DATA_DIR) + "/zach.txt";
const std::string kFlor = std::string(LSM_DATA_DIR) + "/florentine.txt";
const std::string kShort = " --n-iter 400 --burn-in 100 --seed 3";

}  // namespace

TEST(Cli, DescribeZach) {
  const auto d = fresh_dir("describe");
  const auto r = run("describe " + kZach + " -o " + d.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("density,0.139\n"), std::string::npos);
  EXPECT_NE(r.out.find("transitivity,0.256\n"), std::string::npos);
  EXPECT_NE(r.out.find("assortativity,-0.476\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "stats.csv"));
  EXPECT_TRUE(fs::exists(d / "stats.json"));
}

TEST(Cli, DescribeEmptyGraph) {
  const auto d = fresh_dir("empty");
  std::ofstream(d / "empty.txt") << "# nodes: 4\n";
  const auto r = run("describe " + (d / "empty.txt").string() + " -o " + d.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("density,0.000\n"), std::string::npos);
}

TEST(Cli, UsageAndFileErrors) {
  EXPECT_EQ(run("describe /nonexistent/file.txt").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("fit " + kFlor + " --K 0" + kShort).code, 2);
  EXPECT_EQ(run("fit " + kFlor + " --model banana" + kShort).code, 2);
  EXPECT_EQ(run("cv " + kFlor + " --folds 1" + kShort).code, 2);
  EXPECT_EQ(run("gof " + kFlor + kShort).code, 2);
}

TEST(Cli, EnvOutputDir) {
  const auto d = fresh_dir("env");
  const auto r = run_shell("LSM_OUTPUT_DIR=" + d.string() + " " + LSM_CLI_PATH + " describe " + kZach);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(d / "stats.csv"));
}

TEST(Cli, FitDeterministicAndManifest) {
  const auto a = fresh_dir("fit_a"), b = fresh_dir("fit_b");
  ASSERT_EQ(run("fit " + kFlor + kShort + " --chains 2 -o " + a.string()).code, 0);
  ASSERT_EQ(run("fit " + kFlor + kShort + " --chains 2 -o " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "samples.csv"), slurp(b / "samples.csv"));
  for (const char* f : {"manifest.json", "rhat.csv", "probabilities.csv", "positions.csv"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  const auto m = lsm::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(m["samples_per_chain"], 300);
  EXPECT_EQ(m["n_iter"], 400);
  EXPECT_TRUE(m["warnings"].is_array());

  const auto c = fresh_dir("fit_c");
  ASSERT_EQ(run("fit --config " + (a / "manifest.json").string() + " -o " + c.string()).code, 0);
  EXPECT_EQ(slurp(a / "samples.csv"), slurp(c / "samples.csv"));
}

TEST(Cli, DefaultsMatchReferenceProtocol) {
  const auto d = fresh_dir("defaults");
  std::ofstream(d / "cfg.json") << R"({"n_iter": 600, "burn_in": 100, "model": "class", "K": 3})";
  ASSERT_EQ(run("fit " + kFlor + " --config " + (d / "cfg.json").string() + " --n-iter 500 -o " + d.string()).code,
            0);
  const auto m = lsm::json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["n_iter"], 500);
  EXPECT_EQ(m["model"], "class");
  EXPECT_EQ(m["samples_per_chain"], 400);
  EXPECT_TRUE(fs::exists(d / "partition.csv"));
  EXPECT_TRUE(fs::exists(d / "comembership.csv"));
  const lsm::McmcConfig def;
  EXPECT_EQ(def.n_iter, 60000);
  EXPECT_EQ(def.burn_in, 10000);
  EXPECT_EQ(def.thin, 1);
  EXPECT_EQ(def.stored_per_chain(), 50000);
}

TEST(Cli, CvPrintsThreeDecimalsAndIsDeterministic) {
  const auto a = fresh_dir("cv_a"), b = fresh_dir("cv_b");
  const auto ra = run("cv " + kFlor + kShort + " -o " + a.string());
  const auto rb = run("cv " + kFlor + kShort + " -o " + b.string());
  ASSERT_EQ(ra.code, 0);
  EXPECT_EQ(ra.out, rb.out);
  const auto pos = ra.out.find("mean_auc,");
  ASSERT_NE(pos, std::string::npos);
  const auto value = ra.out.substr(pos + 9, ra.out.find('\n', pos) - pos - 9);
  EXPECT_EQ(value.size(), 5u);
  EXPECT_EQ(value[1], '.');
  EXPECT_EQ(slurp(a / "folds.csv"), slurp(b / "folds.csv"));
}

TEST(Cli, GofFromSamplesAndTruncated) {
  const auto d = fresh_dir("gof");
  ASSERT_EQ(run("fit " + kZach + " --model eigen --K 2 --n-iter 600 --burn-in 100 -o " + d.string()).code, 0);
  const auto g = fresh_dir("gof_out");
  const auto r = run("gof " + kZach + " --samples " + d.string() + " -o " + g.string());
  ASSERT_EQ(r.code, 0);
  const auto j = lsm::json::parse(slurp(g / "gof.json"));
  EXPECT_TRUE(j["report"]["waic"].is_number());
  EXPECT_TRUE(std::isfinite(j["report"]["waic"].get<double>()));
  const auto ppc = slurp(g / "ppc.csv");
  EXPECT_EQ(std::count(ppc.begin(), ppc.end(), '\n'), 4);
  for (const char* s : {"\ndensity,", "\ntransitivity,", "\nassortativity,"}) EXPECT_NE(ppc.find(s), std::string::npos);

  std::ifstream in(d / "samples.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  in.close();
  std::ofstream(d / "samples.csv") << header << '\n' << first << '\n';
  const auto t = fresh_dir("gof_trunc");
  ASSERT_EQ(run("gof " + kZach + " --samples " + d.string() + " -o " + t.string()).code, 0);
  const auto jt = lsm::json::parse(slurp(t / "gof.json"));
  EXPECT_DOUBLE_EQ(jt["report"]["p_waic"].get<double>(), 0.0);
}

TEST(Cli, CompareSingleRowAndTable) {
  const auto d = fresh_dir("compare");
  const auto r = run("compare " + kFlor + " --models distance --Ks 2" + kShort + " -o " + d.string());
  ASSERT_EQ(r.code, 0);
  const auto j = lsm::json::parse(slurp(d / "compare.json"));
  ASSERT_EQ(j["table"].size(), 1u);
  EXPECT_TRUE(j["table"][0]["winner"].get<bool>());

  const auto e = fresh_dir("compare2");
  ASSERT_EQ(run("compare " + kFlor + " --models distance,class --Ks 1,2" + kShort + " -o " + e.string()).code, 0);
  const auto t = lsm::json::parse(slurp(e / "compare.json"))["table"];
  ASSERT_EQ(t.size(), 4u);
  int winners = 0, best = 0;
  for (const auto& row : t) winners += row["winner"].get<bool>(), best += row["best_K"].get<bool>();
  EXPECT_EQ(winners, 1);
  EXPECT_EQ(best, 2);
}
