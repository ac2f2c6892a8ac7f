// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace {

const std::string kData = STOPAUDIT_TEST_DATA;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(STOPAUDIT_CLI) + " " + args + " 2>&1";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), p) != nullptr) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stopaudit_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, UnknownCommandIsUsageError) {
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("audit --cond date").code, 2);
}

TEST(Cli, HelpSucceeds) {
  const CliResult r = run("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("outcome-sens"), std::string::npos);
}

TEST(Cli, AuditOnToyTable) {
  const fs::path out = scratch("audit");
  const CliResult r = run("--config " + kData + "/toy.config.json --out " + out.string() +
                    " audit --input " + kData + "/toy.csv --cond date --bin day");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("manifest:"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "dcmr.csv"));
  EXPECT_TRUE(fs::exists(out / "dcmr.svg"));
  fs::remove_all(out);
}

TEST(Cli, BadBinKindIsUsageError) {
  const fs::path out = scratch("badbin");
  EXPECT_EQ(run("--config " + kData + "/toy.config.json --out " + out.string() +
                " audit --input " + kData + "/toy.csv --cond date --bin month")
                .code,
            2);
  fs::remove_all(out);
}

TEST(Cli, MissingInputIsIoError) {
  const fs::path out = scratch("io");
  EXPECT_EQ(run("--config " + kData + "/toy.config.json --out " + out.string() +
                " audit --input " + kData + "/nope.csv --cond date")
                .code,
            3);
  fs::remove_all(out);
}

TEST(Cli, OutcomeOnBelmont) {
  const fs::path out = scratch("outcome");
  const CliResult r = run("--out " + out.string() + " outcome-sens --counts " + kData +
                    "/belmont_counts.csv");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("Belmont: (+)->(-) ignore-NA"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(out / "outcome_points.csv"));
  fs::remove_all(out);
}

TEST(Cli, ExclusionOnlyExitsOne) {
  const fs::path dir = scratch("excl");
  fs::create_directories(dir);
  std::ofstream(dir / "c.csv") << "group,black_hit,black_miss,white_hit,white_miss,na_hit,na_miss\n"
                                  "X,1,1,0,0,1,1\n";
  EXPECT_EQ(run("--out " + (dir / "o").string() + " outcome-sens --counts " +
                (dir / "c.csv").string())
                .code,
            1);
  fs::remove_all(dir);
}

TEST(Cli, SynthThenAteSens) {
  const fs::path dir = scratch("synth");
  CliResult r = run("--seed 4 synth --mechanism mnar --rates black=0.4,white=0.1 --n 2000 --out " +
              (dir / "s.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  r = run("--config " + (dir / "s.config.json").string() + " --seed 4 --out " +
          (dir / "ate").string() + " ate-sens --input " + (dir / "s.csv").string() +
          " --rhos 0.25,0.5 --draws 2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "ate" / "ate.svg"));
  fs::remove_all(dir);
}
