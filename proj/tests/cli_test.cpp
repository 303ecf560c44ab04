#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "framefinder/corpus.hpp"
#include "synthetic.hpp"

namespace ff = framefinder;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kGolden = fs::path(FRAMEFINDER_TEST_DATA) / "golden";

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "framefinder_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Runs the CLI through the shell; `args` is appended verbatim.
Run cli(const std::string& args, const std::string& env = {}) {
  const auto out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(FRAMEFINDER_CLI) + "' " + args +
                          " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string golden_args() {
  return "analyze --input '" + (kGolden / "corpus.txt").string() + "' --fixtures '" + kGolden.string() + "'";
}

// Fixtures whose ids match documents read from --text.
fs::path text_fixtures() {
  const auto dir = scratch() / "text_fixtures";
  if (!fs::exists(dir / ff::kParsesFile)) {
    ff::synth::write_fixture_dir(ff::synth::generate({.n_documents = 4, .seed = 3, .source_name = "text"}), dir);
  }
  return dir;
}

}  // namespace

TEST(Cli, AnalyzeWritesResultFile) {
  const auto out = scratch() / "r.json";
  fs::remove(out);
  const auto r = cli(golden_args() + " --node-threshold 5 --out '" + out.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  ASSERT_TRUE(fs::exists(out));
  EXPECT_EQ(slurp(out), slurp(kGolden / "expected_result.json"));
}

TEST(Cli, SameArgumentsGiveByteIdenticalOutput) {
  const auto a = scratch() / "a.json", b = scratch() / "b.json";
  ASSERT_EQ(cli(golden_args() + " -j 1 --out '" + a.string() + "'").code, 0);
  ASSERT_EQ(cli(golden_args() + " -j 4 --out '" + b.string() + "'").code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, ResultToStandardOutput) {
  const auto r = cli(golden_args());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["corpus"]["n_documents"], 12);
  EXPECT_EQ(j["structure"]["node_threshold"], 300);
  EXPECT_EQ(j["config"]["label_threshold"], 0.5);
  EXPECT_EQ(j["labels"]["chart"]["bars"].size(), 15u);
  EXPECT_EQ(j["axes"]["axes"].size(), 5u);
  EXPECT_FALSE(j.contains("timings_ms"));
}

TEST(Cli, ZoomedNodeThresholdEchoed) {
  const auto r = cli(golden_args() + " --node-threshold 1000");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["structure"]["node_threshold"], 1000);
}

TEST(Cli, Timings) {
  const auto r = cli(golden_args() + " --timings");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(json::parse(r.out).contains("timings_ms"));
}

TEST(Cli, DotAndMetagraphOutputs) {
  const auto dot = scratch() / "s.dot", meta = scratch() / "m.json";
  const auto r = cli(golden_args() + " --node-threshold 5 --dot '" + dot.string() + "' --metagraph-out '" +
                     meta.string() + "' --out '" + (scratch() / "x.json").string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dot).rfind("digraph", 0), 0u);
  const auto m = json::parse(slurp(meta));
  EXPECT_EQ(m["version"], 1);
  EXPECT_EQ(m["n_source_graphs"], 12);
  EXPECT_EQ(m["nodes"].size(), 42u);
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto fx = kGolden.string();
  const std::vector<std::string> cases = {
      golden_args() + " --endpoint http://127.0.0.1:1/v1",
      "analyze --fixtures '" + fx + "'",
      "analyze --text a --input b --fixtures '" + fx + "'",
      "analyze --text a",
      "analyze --text a --fixtures '" + fx + "' --bogus",
      "analyze --text a --fixtures '" + fx + "' --threshold abc",
      "analyze --text a --fixtures '" + fx + "' --filter-statistic median",
      "analyze --text a --fixtures '" + fx + "' --cache-dir /tmp",
      "frobnicate",
      "",
  };
  for (const auto& c : cases) {
    const auto r = cli(c);
    EXPECT_EQ(r.code, 2) << c << "\n" << r.err;
    EXPECT_FALSE(r.err.empty()) << c;
  }
}

TEST(Cli, HelpAndVersion) {
  const auto h = cli("--help");
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("analyze"), std::string::npos);
  EXPECT_NE(h.out.find("parse-amr"), std::string::npos);
  const auto ah = cli("analyze --help");
  EXPECT_EQ(ah.code, 0);
  EXPECT_NE(ah.out.find("--node-threshold"), std::string::npos);
  const auto v = cli("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(FRAMEFINDER_VERSION), std::string::npos);
}

TEST(Cli, RuntimeErrorsExitOne) {
  const auto missing = cli("analyze --input /nonexistent/file.txt --fixtures '" + kGolden.string() + "'");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("IoError"), std::string::npos);
  EXPECT_TRUE(missing.out.empty());

  const auto threshold = cli(golden_args() + " --threshold 1.0");
  EXPECT_EQ(threshold.code, 1);
  EXPECT_NE(threshold.err.find("ConfigError"), std::string::npos);

  const auto uncovered = cli("analyze --text 'nothing like this' --fixtures '" + kGolden.string() + "'");
  EXPECT_EQ(uncovered.code, 1);
  EXPECT_NE(uncovered.err.find("AllPerspectivesFailed"), std::string::npos);
  EXPECT_TRUE(uncovered.out.empty());
}

TEST(Cli, EndpointFromEnvironment) {
  const auto r = cli("analyze --text 'a headline'", "FRAMEFINDER_ENDPOINT=http://127.0.0.1:1/v1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("TransportError"), std::string::npos);
}

TEST(Cli, DryRun) {
  const auto out = scratch() / "dry.json";
  fs::remove(out);
  const auto ok = cli(golden_args() + " --dry-run --out '" + out.string() + "'");
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.err.find("12 documents"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));

  const auto bad = cli("analyze --text 'unknown' --dry-run --fixtures '" + kGolden.string() + "'");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("text:0"), std::string::npos);
}

TEST(Cli, InlineTextAndSplitting) {
  const auto fx = text_fixtures().string();
  const auto split = cli("analyze --text \"$(printf 'a\\nb\\nc')\" --fixtures '" + fx + "'");
  ASSERT_EQ(split.code, 0) << split.err;
  EXPECT_EQ(json::parse(split.out)["corpus"]["n_documents"], 3);
  const auto whole = cli("analyze --text \"$(printf 'a\\nb\\nc')\" --no-split-lines --fixtures '" + fx + "'");
  ASSERT_EQ(whole.code, 0) << whole.err;
  EXPECT_EQ(json::parse(whole.out)["corpus"]["n_documents"], 1);
  EXPECT_EQ(json::parse(whole.out)["corpus"]["split_mode"], "whole");
}

TEST(Cli, JsonlAndStdinInput) {
  const auto jsonl = scratch() / "docs.jsonl";
  {
    std::ofstream f(jsonl);
    const auto docs = ff::load_corpus_file(kGolden / "corpus.txt", true).documents;
    for (const auto& d : docs) f << json{{"id", d.id}, {"text", d.text}}.dump() << '\n';
  }
  const auto j = cli("analyze --input '" + jsonl.string() + "' --fixtures '" + kGolden.string() + "'");
  ASSERT_EQ(j.code, 0) << j.err;
  EXPECT_EQ(json::parse(j.out)["corpus"]["split_mode"], "preidentified");

  const auto stdin_fx = scratch() / "stdin_fixtures";
  if (!fs::exists(stdin_fx / ff::kParsesFile)) {
    ff::synth::write_fixture_dir(ff::synth::generate({.n_documents = 6, .seed = 8, .source_name = "stdin"}),
                                 stdin_fx);
  }
  const auto s = cli("analyze --input - --fixtures '" + stdin_fx.string() + "' < '" + (stdin_fx / "stdin").string() +
                     "'");
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(json::parse(s.out)["corpus"]["source_name"], "stdin");
  EXPECT_EQ(json::parse(s.out)["corpus"]["n_documents"], 6);
}

TEST(Cli, ParseAmr) {
  const auto ok = cli("parse-amr --canonical --text '(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))'");
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto j = json::parse(ok.out);
  EXPECT_EQ(j["nodes"].size(), 3u);
  EXPECT_EQ(j["edges"].size(), 3u);
  EXPECT_EQ(j["cyclic"], false);
  EXPECT_TRUE(j.contains("canonical"));

  const auto file = scratch() / "one.amr";
  std::ofstream(file) << "# ::id x1\n(d / dog\n   :ARG0-of (b / bark-01))\n";
  const auto f = cli("parse-amr '" + file.string() + "'");
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_EQ(json::parse(f.out)["id"], "x1");
  EXPECT_EQ(json::parse(f.out)["edges"][0]["role"], ":ARG0");

  const auto bad = cli("parse-amr --text '(a / alpha :ARG0 (b / beta)'");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("SyntaxError"), std::string::npos);
  EXPECT_NE(bad.err.find("27"), std::string::npos);
  EXPECT_TRUE(bad.out.empty());
}

TEST(Cli, ValidateFixtures) {
  const auto ok = cli("validate-fixtures '" + kGolden.string() + "' --input '" + (kGolden / "corpus.txt").string() +
                      "'");
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto j = json::parse(ok.out);
  EXPECT_EQ(j["parses"], 12);
  EXPECT_EQ(j["label_count"], 15);
  EXPECT_EQ(j["ok"], true);

  const auto broken = scratch() / "broken";
  fs::remove_all(broken);
  fs::create_directories(broken);
  std::ofstream(broken / ff::kParsesFile) << "# ::id a:0\n(x / xx :ARG0 (y / yy)\n";
  const auto b = cli("validate-fixtures '" + broken.string() + "'");
  EXPECT_EQ(b.code, 1);
  EXPECT_NE(b.err.find("a:0"), std::string::npos);

  std::ofstream(broken / ff::kEmbeddingsFile) << "{\"id\": \"a:0\", \"vector\": [1, 2]}\nnot json\n";
  const auto m = cli("validate-fixtures '" + broken.string() + "'");
  EXPECT_EQ(m.code, 1);
  EXPECT_NE(m.err.find("embeddings.jsonl:2"), std::string::npos);
}
