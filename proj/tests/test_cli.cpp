#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli/commands.hpp"

namespace fs = std::filesystem;
using mink::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the mink binary through the shell; stderr is discarded.
Run mink_run(const std::string& args, const std::string& env = "") {
  const char* bin = std::getenv("MINK_BIN");
  if (!bin) throw std::runtime_error("MINK_BIN is not set");
  const std::string cmd = env + " '" + std::string(bin) + "' " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  Run r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mink_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Helpers, ParseRows) {
  EXPECT_EQ(mink::parse_rows("1-3,5"), (std::vector<unsigned>{1, 2, 3, 5}));
  EXPECT_TRUE(mink::parse_rows("").empty());
  EXPECT_THROW(mink::parse_rows("3-1"), mink::usage_error);
  EXPECT_THROW(mink::parse_rows("x"), mink::usage_error);
}

TEST(Helpers, Formatting) {
  EXPECT_EQ(mink::csv_field("plain"), "plain");
  EXPECT_EQ(mink::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(mink::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(mink::fmt(0.1), "0.10000000000000001");
  const auto e = mink::truncated_decimal("0.2909264764");
  EXPECT_TRUE(e.contains(0.2909264764));
  EXPECT_TRUE(e.contains(0.29092647649));
  EXPECT_FALSE(e.contains(0.2909264766));
}

TEST(Helpers, SettingsPrecedence) {
  ::setenv("MINK_TARGET_WIDTH", "1e-6", 1);
  ::setenv("MINK_THREADS", "3", 1);
  auto s = mink::resolve_settings(std::nullopt, std::nullopt, std::nullopt, false);
  EXPECT_EQ(s.target_width, 1e-6);
  EXPECT_EQ(s.threads, 3u);
  EXPECT_FALSE(s.cache_path.has_value());
  s = mink::resolve_settings(2u, 1e-7, std::string("c.json"), true);
  EXPECT_EQ(s.target_width, 1e-7);
  EXPECT_EQ(s.threads, 2u);
  EXPECT_EQ(*s.cache_path, "c.json");
  ::setenv("MINK_THREADS", "zero", 1);
  EXPECT_THROW(mink::resolve_settings(std::nullopt, std::nullopt, std::nullopt, false), mink::usage_error);
  ::unsetenv("MINK_TARGET_WIDTH");
  ::unsetenv("MINK_THREADS");
}

TEST(Commands, QmarkInProcess) {
  std::ostringstream out;
  EXPECT_EQ(mink::cmd_qmark("2/3", false, out), mink::kOk);
  EXPECT_EQ(out.str(), "3/4\n0.75\n");
  std::ostringstream f;
  EXPECT_EQ(mink::cmd_qmark("5/2", true, f), mink::kOk);
  EXPECT_EQ(lines(f.str()).front(), "13/16");
  EXPECT_THROW(mink::cmd_qmark("3/2", false, out), mink::usage_error);
  EXPECT_THROW(mink::cmd_qmark("2/", false, out), mink::usage_error);
}

TEST(Commands, EmptyTablePrintsHeaderOnly) {
  mink::Settings s;
  s.threads = 1;
  mink::TableOptions t;
  std::ostringstream out;
  EXPECT_EQ(mink::cmd_table(t, "csv", s, out), mink::kOk);
  EXPECT_EQ(lines(out.str()).size(), 1u);
  EXPECT_EQ(out.str().rfind("L,m_lo,m_hi,", 0), 0u);
}

TEST(Commands, SmallTableMatchesReferences) {
  mink::Settings s;
  s.threads = 2;
  mink::TableOptions t;
  t.rows = {1, 2, 3};
  t.absolute_width = 1e-9;
  const auto rows = mink::compute_table(t, s);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.has_reference);
    EXPECT_TRUE(r.matches_reference) << r.L;
    EXPECT_TRUE(r.mstar_matches_reference) << r.L;
    EXPECT_TRUE(r.converged);
  }
}

TEST(Commands, MomentRecordRoundTrip) {
  minkowski::MomentRecord r;
  r.kind = "M";
  r.L = 4;
  r.cutoff = 30;
  r.value = {1.5, 1.75};
  r.leaves = 99;
  const auto back = mink::record_from_json(mink::record_json(r));
  EXPECT_EQ(back.kind, "M");
  EXPECT_EQ(back.cutoff, 30);
  EXPECT_EQ(back.value, r.value);
  EXPECT_EQ(back.leaves, 99u);
  EXPECT_FALSE(mink::printable(mink::record_json(r), false).contains("wall_time"));
  EXPECT_TRUE(mink::printable(mink::record_json(r), true).contains("wall_time"));
}

TEST(Cache, ConcurrentAppendsKeepEveryRecord) {
  const auto path = scratch("concurrent.json");
  std::vector<std::thread> workers;
  for (int t = 0; t < 8; ++t)
    workers.emplace_back([&, t] {
      mink::Cache cache(path);
      for (int i = 0; i < 5; ++i) cache.append(json{{"kind", "probe"}, {"writer", t}, {"i", i}});
    });
  for (auto& w : workers) w.join();
  const mink::Cache cache(path);
  EXPECT_EQ(cache.records().size(), 40u);
  EXPECT_TRUE(cache.find(json{{"writer", 7}, {"i", 4}}).has_value());
  EXPECT_FALSE(cache.find(json{{"writer", 8}}).has_value());
}

TEST(Cache, RejectsCorruptOrForeignFiles) {
  const auto path = scratch("corrupt.json");
  std::ofstream(path) << "{not json";
  EXPECT_THROW(mink::Cache(path).records(), mink::cache_error);
  std::ofstream(path, std::ios::trunc) << R"({"schema_version": 99, "records": []})";
  EXPECT_THROW(mink::Cache(path).records(), mink::cache_error);
}

TEST(Binary, QmarkAndExitCodes) {
  auto r = mink_run("qmark 2/3");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "3/4\n0.75\n");
  EXPECT_EQ(mink_run("qmark 3/2").code, 2);
  EXPECT_EQ(mink_run("qmark abc").code, 2);
  EXPECT_EQ(mink_run("").code, 2);
  EXPECT_EQ(mink_run("frobnicate").code, 2);
  EXPECT_EQ(mink_run("moment 2 --target-width -1").code, 2);
  EXPECT_EQ(mink_run("moment 2", "MINK_TARGET_WIDTH=wide").code, 2);
  EXPECT_EQ(mink_run("--help").code, 0);
}

TEST(Binary, EmptyTable) {
  const auto r = mink_run("table --rows ''");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 1u);
}

TEST(Binary, MomentJson) {
  const auto r = mink_run("moment 2 --target-width 1e-7 --threads 1");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.at("L"), 2);
  EXPECT_EQ(j.at("kind"), "m");
  EXPECT_FALSE(j.contains("wall_time"));
  EXPECT_LE(j.at("value").at("lo").get<double>(), 0.29092647645);
  EXPECT_GE(j.at("value").at("hi").get<double>(), 0.29092647645);
  EXPECT_TRUE(json::parse(mink_run("moment 2 --target-width 1e-7 --timing").out).contains("wall_time"));
}

TEST(Binary, UnconvergedExitCode) {
  const auto r = mink_run("moment 3 --depth 6 --target-width 1e-12");
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(json::parse(r.out).at("converged").get<bool>());
}

TEST(Binary, TreeEstimate) {
  const auto r = mink_run("moment 2 --method tree --generation 16");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("estimate_tree_form").get<double>(), 0.2909264764, 1e-2);
  EXPECT_EQ(mink_run("moment 2 --method tree --kind M").code, 2);
}

TEST(Binary, CacheDoesNotChangeOutput) {
  const auto path = scratch("results.json");
  const std::string args = "moment 3 --target-width 1e-7 --threads 1";
  const auto plain = mink_run(args);
  const auto first = mink_run(args + " --cache '" + path.string() + "'");
  const auto second = mink_run(args, "MINK_CACHE='" + path.string() + "'");
  EXPECT_EQ(plain.code, 0);
  EXPECT_EQ(plain.out, first.out);
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(mink::Cache(path).records().size(), 1u);
  // A corrupt cache is an internal error, not silently ignored.
  std::ofstream(path, std::ios::trunc) << "garbage";
  EXPECT_EQ(mink_run(args + " --cache '" + path.string() + "'").code, 4);
}

TEST(Binary, VerifyDistr) {
  const auto r = mink_run("verify --suite distr --samples 2000");
  EXPECT_EQ(r.code, 0);
  const auto last = json::parse(lines(r.out).back());
  EXPECT_EQ(last.at("summary").at("failed"), 0);
}

TEST(Binary, PlotData) {
  const auto r = mink_run("plot-data --what qmark --samples 5");
  ASSERT_EQ(r.code, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].rfind("0/1,0,", 0), 0u);
  EXPECT_EQ(rows[5].rfind("1/1,1,", 0), 0u);
  EXPECT_EQ(mink_run("plot-data --what psi --samples 1").code, 2);
}
