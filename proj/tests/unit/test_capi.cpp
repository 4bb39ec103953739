// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "finrag/finrag.h"

namespace fs = std::filesystem;

namespace {

const fs::path kGolden = fs::path(FINRAG_SOURCE_DIR) / "tests/fixtures/golden";

struct Session {
  finrag_session* s = nullptr;
  fs::path out;
  explicit Session(const fs::path& config) {
    REQUIRE(finrag_session_open(config.string().c_str(), &s) == FINRAG_OK);
    out = fs::temp_directory_path() / ("finrag-capi-" + std::to_string(reinterpret_cast<std::uintptr_t>(s)));
    fs::remove_all(out);
    REQUIRE(finrag_session_set_option(s, "paths.output_dir", out.string().c_str()) == FINRAG_OK);
  }
  ~Session() {
    finrag_session_close(s);
    fs::remove_all(out);
  }
};

nlohmann::json take(char* text) {
  REQUIRE(text);
  auto j = nlohmann::json::parse(text);
  finrag_string_free(text);
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("primitives") {
  const char* x[] = {"a", "b", "c"};
  const char* y[] = {"b", "c", "d", "e"};
  CHECK(finrag_woc(x, 3, y, 4, 0.5) == 0.5 * 2 / 3);
  CHECK(finrag_woc(x, 0, y, 4, 0.5) == 0.0);
  const double raw[] = {-0.5, 0.3, 0.7};
  double out[3];
  finrag_normalize_action(raw, 3, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] + out[2] == doctest::Approx(1.0));
  CHECK(finrag_ppo_objective(1.5, 1.0, 0.2) == 1.2);
  const double curve[] = {1.0, 1.2, 0.9, 1.1};
  finrag_metrics m;
  CHECK(finrag_compute_metrics(curve, 4, &m) == FINRAG_OK);
  CHECK(m.max_drawdown == 0.9 / 1.2 - 1);
  const double flat[] = {1.0, 1.0, 1.0};
  CHECK(finrag_compute_metrics(flat, 3, &m) == FINRAG_ERR_BACKTEST);
  CHECK(std::isnan(m.sharpe_ratio));
  CHECK(std::string(finrag_version()).size() > 0);
}

TEST_CASE("session errors") {
  finrag_session* s = nullptr;
  CHECK(finrag_session_open("/no/such/file.toml", &s) == FINRAG_ERR_INPUT);
  CHECK(s == nullptr);
  CHECK(std::string(finrag_last_error()).find("/no/such/file.toml") != std::string::npos);
  Session ok(kGolden / "config.toml");
  CHECK(finrag_session_set_option(ok.s, "no.such_key", "1") == FINRAG_ERR_USAGE);
  CHECK(finrag_session_set_option(ok.s, "backtest.start", "2030-01-01") == FINRAG_OK);
  CHECK(finrag_session_set_option(ok.s, "backtest.end", "2030-02-01") == FINRAG_OK);
  char* json = nullptr;
  CHECK(finrag_backtest(ok.s, nullptr, 0, &json) == FINRAG_ERR_BACKTEST);
  CHECK(json == nullptr);
  CHECK(std::string(finrag_last_error()).size() > 0);
}

TEST_CASE("ingest and validate-only") {
  Session s(kGolden / "config.toml");
  char* json = nullptr;
  REQUIRE(finrag_ingest(s.s, 1, &json) == FINRAG_OK);
  const auto j = take(json);
  CHECK(j["documents"] == 7);
  CHECK_FALSE(fs::exists(s.out));
  REQUIRE(finrag_ingest(s.s, 0, &json) == FINRAG_OK);
  take(json);
  CHECK(fs::exists(s.out / "ingest_summary.json"));
}

TEST_CASE("backtest matches the golden files") {
  Session s(kGolden / "config.toml");
  char* json = nullptr;
  REQUIRE(finrag_backtest(s.s, nullptr, 0, &json) == FINRAG_OK);
  const auto j = take(json);
  CHECK(j["outputs"].size() == 3);
  CHECK(slurp(s.out / "report.json") == slurp(kGolden / "expected_report.json"));
  CHECK(slurp(s.out / "curve.csv") == slurp(kGolden / "expected_curve.csv"));
}

TEST_CASE("predict trace") {
  Session s(kGolden / "config.toml");
  char* json = nullptr;
  REQUIRE(finrag_predict(s.s, "BBB", "2021-03-01", nullptr, nullptr, &json) == FINRAG_OK);
  const auto j = take(json);
  CHECK(j["symbol"] == "BBB");
  CHECK(j["label"] == "negative");
  CHECK(j["context"].size() >= 1);
  CHECK(j["instruction"]["id"].get<int>() >= 1);
  CHECK(j.contains("prompt"));
}

TEST_CASE("refine none and report") {
  Session s(kGolden / "config.toml");
  char* json = nullptr;
  REQUIRE(finrag_refine(s.s, 0, &json) == FINRAG_OK);
  const auto j = take(json);
  CHECK(j["mode"] == "none");
  CHECK(fs::exists(s.out / "weights.json"));
  REQUIRE(finrag_backtest(s.s, (s.out / "weights.json").string().c_str(), 0, &json) == FINRAG_OK);
  take(json);
  REQUIRE(finrag_report(s.s, (s.out / "backtest_retrieval_log.jsonl").string().c_str(), 0, &json) == FINRAG_OK);
  const auto r = take(json);
  double sum = 0;
  for (const auto& [name, share] : r["proportions"].items()) sum += share.get<double>();
  CHECK(sum == doctest::Approx(1.0));
}
