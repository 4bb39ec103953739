// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>

#include "finrag/config.hpp"
#include "finrag/error.hpp"
#include "synthetic.hpp"

using namespace finrag;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const EnvLookup kNoEnv = env_of({});

std::size_t error_line(std::string_view text) {
  try {
    ConfigTable::parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    return e.line();
  }
  FAIL("expected an error");
  return 0;
}

}  // namespace

TEST_CASE("table parsing") {
  const auto t = ConfigTable::parse(R"(# comment
seed = 9
name = "a \"quoted\" value"  # trailing
[ppo]
policy_lr = 5e-4
[backtest]
universe = ["AAA", "BBB"]
flag = true
)");
  CHECK(std::get<double>(t.find("seed")->value) == 9.0);
  CHECK(std::get<std::string>(t.find("name")->value) == "a \"quoted\" value");
  CHECK(std::get<double>(t.find("ppo.policy_lr")->value) == 5e-4);
  CHECK(std::get<bool>(t.find("backtest.flag")->value));
  const auto& arr = std::get<ConfigValue::Array>(t.find("backtest.universe")->value);
  REQUIRE(arr.size() == 2);
  CHECK(std::get<std::string>(arr[1]) == "BBB");
  CHECK_FALSE(t.find("missing"));
}

TEST_CASE("table errors carry the line") {
  CHECK(error_line("seed = 1\nseed = 2\n") == 2);
  CHECK(error_line("a = 1\n\nnot a pair\n") == 3);
  CHECK(error_line("[open\n") == 1);
  CHECK(error_line("s = \"unterminated\n") == 1);
}

TEST_CASE("defaults") {
  const auto c = resolve_config({}, ".", kNoEnv);
  CHECK(c.seed == 42);
  CHECK(c.retrieval.k_top == 4);
  CHECK(c.retrieval.timezone == "America/New_York");
  CHECK(c.feedback.window_days == 252);
  CHECK(c.feedback.min_observations == 20);
  CHECK(c.refine.mode == RefineMode::kNone);
  CHECK(c.refine.direct.alpha == 1e-4);
  CHECK(c.refine.direct.batch_size == 64);
  CHECK(c.ppo.policy_lr == 5e-4);
  CHECK(c.ppo.clip_epsilon == 0.2);
  CHECK(c.ppo.discount_gamma == 1.0);
  CHECK(c.ppo.update_epochs == 10);
  CHECK(c.ppo.rollout_length == 128);
  CHECK(c.ppo.trunk_width == 64);
  CHECK(c.ppo.trunk_depth == 2);
  CHECK(c.refine.windows.accuracy_window == 50);
  CHECK(c.refine.windows.return_window == 10);
  CHECK(c.backtest.cost.per_trade_bps == 10.0);
  CHECK(c.backtest.items_per_day == 10);
  CHECK(c.paths.sources == default_data_dir() / "sources.json");
  CHECK(c.paths.lexicon == default_data_dir() / "lexicon.csv");
  // the corpus and prices have no default
  try {
    c.validate();
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    CHECK(std::string(e.what()).find("paths.corpus") != std::string::npos);
  }
}

TEST_CASE("precedence: file, then environment, then overrides") {
  const auto file = ConfigTable::parse("seed = 1\n[backtest]\ncost_bps = 5\n[refine]\nalpha = 0.1\n");
  const auto env = env_of({{"FINRAG_BACKTEST_COST_BPS", "7"}, {"FINRAG_SEED", "2"}});
  ConfigTable overrides;
  overrides.set("seed", "3");
  const auto c = resolve_config(file, ".", env, overrides);
  CHECK(c.seed == 3);
  CHECK(c.backtest.cost.per_trade_bps == 7.0);
  CHECK(c.refine.direct.alpha == 0.1);
  CHECK(env_name("backtest.cost_bps") == "FINRAG_BACKTEST_COST_BPS");
  CHECK(env_name("seed") == "FINRAG_SEED");
}

TEST_CASE("every key has an environment variable") {
  for (const auto key : known_config_keys()) {
    const std::string name = env_name(key);
    CHECK(name.rfind("FINRAG_", 0) == 0);
  }
  CHECK(known_config_keys().size() > 40);
}

TEST_CASE("file paths resolve against the file's directory") {
  const auto file = ConfigTable::parse("[paths]\ncorpus = \"c.jsonl\"\n");
  const auto c = resolve_config(file, "/some/dir", kNoEnv);
  CHECK(c.paths.corpus == std::filesystem::path("/some/dir/c.jsonl"));
  CHECK(c.paths.output_dir == std::filesystem::path("/some/dir/out"));
}

TEST_CASE("bad values are rejected") {
  const auto bad = [](std::string text) {
    try {
      resolve_config(ConfigTable::parse(text), ".", kNoEnv).validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  CHECK(bad("unknown_key = 1\n") == ErrorCode::kConfig);
  CHECK(bad("[refine]\nmode = \"sideways\"\n") == ErrorCode::kConfig);
  CHECK(bad("[retrieval]\nk_top = 0\n") == ErrorCode::kConfig);
  CHECK(bad("[ppo]\nclip_epsilon = 1.5\n") == ErrorCode::kConfig);
  CHECK(bad("[backtest]\ncost_bps = -1\n") == ErrorCode::kConfig);
  CHECK(bad("seed = \"many\"\n") == ErrorCode::kConfig);
  CHECK(bad("[paths]\ncorpus = \"/definitely/missing.jsonl\"\n") == ErrorCode::kIo);
}

TEST_CASE("config file loading") {
  try {
    read_config_file("/no/such/config.toml");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("/no/such/config.toml") != std::string::npos);
  }
  const auto c = load_config(synth::golden_dir() / "config.toml", kNoEnv);
  CHECK(c.seed == 7);
  CHECK(c.backtest.universe == std::vector<std::string>{"AAA", "BBB"});
  CHECK(c.backtest.start == parse_date("2021-03-01"));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("universe accepts a comma list from the environment") {
  const auto c = resolve_config({}, ".", env_of({{"FINRAG_BACKTEST_UNIVERSE", "X, Y,Z"}}));
  CHECK(c.backtest.universe == std::vector<std::string>{"X", "Y", "Z"});
}
