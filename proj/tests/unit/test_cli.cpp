// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <nlohmann/json.hpp>

#include "finrag/refine_direct.hpp"
#include "finrag/text.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr together
};

Run cli(const std::string& args) {
  const std::string cmd = std::string("'") + FINRAG_CLI_PATH + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  Run r;
  std::array<char, 4096> buf{};
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string golden_config() { return "--config '" + (synth::golden_dir() / "config.toml").string() + "'"; }

std::string out_to(const fs::path& dir) { return " --set 'paths.output_dir=" + dir.string() + "'"; }

}  // namespace

TEST_CASE("usage and missing files") {
  CHECK(cli("--help").code == 0);
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  const auto missing = cli("--config /no/such/run.toml ingest");
  CHECK(missing.code == 2);
  CHECK(missing.out.find("/no/such/run.toml") != std::string::npos);
  synth::TempDir dir("cli-missing");
  const auto bad_corpus = cli(golden_config() + " --set paths.corpus=/nope/corpus.jsonl ingest");
  CHECK(bad_corpus.code == 2);
  CHECK(bad_corpus.out.find("/nope/corpus.jsonl") != std::string::npos);
}

TEST_CASE("ingest") {
  synth::TempDir dir("cli-ingest");
  const auto r = cli(golden_config() + out_to(dir.path() / "out") + " --json ingest");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["documents"] == 7);
  const auto v = cli(golden_config() + out_to(dir.path() / "v") + " --validate-only ingest");
  CHECK(v.code == 0);
  CHECK_FALSE(fs::exists(dir.path() / "v"));
}

TEST_CASE("predict") {
  const auto a = cli(golden_config() + " --json predict --symbol AAA --date 2021-03-01");
  REQUIRE(a.code == 0);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["label"] == "positive");
  CHECK(cli(golden_config() + " --json predict --symbol AAA --date 2021-03-01").out == a.out);
  const auto unknown = cli(golden_config() + " --json predict --symbol NOPE --date 2021-03-01");
  REQUIRE(unknown.code == 0);
  CHECK(nlohmann::json::parse(unknown.out)["context"].empty());
  const auto text = cli(golden_config() + " predict --symbol AAA --date 2021-03-01");
  CHECK(text.code == 0);
  CHECK(text.out.find("Assistant:") != std::string::npos);
}

TEST_CASE("backtest golden run and overrides") {
  synth::TempDir dir("cli-backtest");
  const auto r = cli(golden_config() + out_to(dir.path()) + " backtest");
  REQUIRE(r.code == 0);
  CHECK(synth::slurp(dir.path() / "report.json") == synth::slurp(synth::golden_dir() / "expected_report.json"));
  CHECK(synth::slurp(dir.path() / "curve.csv") == synth::slurp(synth::golden_dir() / "expected_curve.csv"));

  const auto cheap = cli(golden_config() + out_to(dir.path() / "cheap") + " --json backtest --cost-bps 0");
  REQUIRE(cheap.code == 0);
  const auto report = nlohmann::json::parse(synth::slurp(dir.path() / "cheap" / "report.json"));
  CHECK(report["metadata"]["cost_bps"] == 0.0);
  const auto golden = nlohmann::json::parse(synth::slurp(synth::golden_dir() / "expected_report.json"));
  CHECK(report["Cumulative Return"].get<double>() > golden["Cumulative Return"].get<double>());

  const auto empty = cli(golden_config() + out_to(dir.path() / "empty") +
                         " --set backtest.start=2030-01-01 --set backtest.end=2030-02-01 backtest");
  CHECK(empty.code == 5);
  CHECK(empty.out.find("trading days") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path() / "empty"));

  const auto validate = cli(golden_config() + out_to(dir.path() / "validate") + " --validate-only backtest");
  CHECK(validate.code == 0);
  CHECK_FALSE(fs::exists(dir.path() / "validate"));
}

TEST_CASE("refine modes") {
  synth::TempDir dir("cli-refine");
  synth::write_refine_fixture(dir.path(), {});
  const std::string config = "--config '" + (dir.path() / "config.toml").string() + "'";
  const auto catalog = finrag::SourceCatalog::load(dir.path() / "sources.json");

  REQUIRE(cli(config + out_to(dir.path() / "none") + " refine --mode none").code == 0);
  CHECK(finrag::load_weights(dir.path() / "none" / "weights.json", catalog) == finrag::SourceWeights::uniform(3));

  REQUIRE(cli(config + out_to(dir.path() / "direct") + " refine --mode direct").code == 0);
  const auto w = finrag::load_weights(dir.path() / "direct" / "weights.json", catalog);
  CHECK(w[0] > w[1]);
  CHECK(w[1] > w[2]);
  CHECK(fs::exists(dir.path() / "direct" / "weight_history.json"));

  REQUIRE(cli(config + out_to(dir.path() / "rl0") + " --set ppo.iterations=0 refine --mode rl").code == 0);
  CHECK(finrag::load_weights(dir.path() / "rl0" / "weights.json", catalog) == finrag::SourceWeights::uniform(3));

  REQUIRE(cli(config + out_to(dir.path() / "rl") + " refine --mode rl").code == 0);
  const auto curve = synth::slurp(dir.path() / "rl" / "training_curve.csv");
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 4);

}

TEST_CASE("degenerate weights map to exit code 4") {
  synth::TempDir dir("cli-degenerate");
  synth::write_refine_fixture(dir.path(), {.reliabilities = {0.0, 0.0, 0.0}});
  const std::string config = "--config '" + (dir.path() / "config.toml").string() + "'";
  const auto degenerate = cli(config + out_to(dir.path() / "bad") + " refine --mode direct --alpha 5");
  CHECK(degenerate.code == 4);
  CHECK(degenerate.out.find("degenerate") != std::string::npos);
}

TEST_CASE("environment overrides") {
  synth::TempDir dir("cli-env");
  const std::string cmd = "FINRAG_BACKTEST_COST_BPS=0 '" + std::string(FINRAG_CLI_PATH) + "' " + golden_config() +
                          out_to(dir.path()) + " backtest > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  const auto report = nlohmann::json::parse(synth::slurp(dir.path() / "report.json"));
  CHECK(report["metadata"]["cost_bps"] == 0.0);
}

TEST_CASE("report command") {
  synth::TempDir dir("cli-report");
  REQUIRE(cli(golden_config() + out_to(dir.path()) + " backtest").code == 0);
  const auto r = cli(golden_config() + out_to(dir.path()) + " --json report --log '" +
                     (dir.path() / "backtest_retrieval_log.jsonl").string() + "'");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir.path() / "weight_distribution.json"));
  const auto empty_log = dir.path() / "empty.jsonl";
  finrag::write_file(empty_log, "");
  CHECK(cli(golden_config() + out_to(dir.path()) + " report --log '" + empty_log.string() + "'").code != 0);
}
