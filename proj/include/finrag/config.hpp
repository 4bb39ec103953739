// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "finrag/backtest.hpp"
#include "finrag/ppo.hpp"
#include "finrag/refine_direct.hpp"
#include "finrag/rl_state.hpp"
#include "finrag/sentiment.hpp"

namespace finrag {

// Scalar or array value of the small TOML dialect the config uses.
struct ConfigValue {
  using Array = std::vector<std::variant<std::string, double, bool>>;
  std::variant<std::string, double, bool, Array> value;
  std::string raw;  // source text, kept for error messages
};

// Flat "section.key" table; top-level keys have no section prefix.
class ConfigTable {
 public:
  // Sections, `key = value`, strings, numbers, booleans, single-line arrays
  // and `#` comments. Throws Error(kConfig) with the offending line.
  static ConfigTable parse(std::string_view text);

  // Parses `text` as a value literal; bare words become strings.
  void set(const std::string& key, std::string_view text);
  const ConfigValue* find(std::string_view key) const;
  const std::map<std::string, ConfigValue, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, ConfigValue, std::less<>> entries_;
};

enum class RefineMode { kNone, kDirect, kRl };
enum class ProviderKind { kLexicon, kScripted, kRemote };

std::string_view to_string(RefineMode mode);

struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t workers = 1;

  struct Paths {
    std::filesystem::path sources;
    std::filesystem::path corpus;
    std::filesystem::path prices;
    std::filesystem::path stopwords;
    std::filesystem::path lexicon;
    std::filesystem::path instructions;
    std::filesystem::path queries;         // optional; corpus documents otherwise
    std::filesystem::path scripted;        // completions for the scripted provider
    std::filesystem::path feedback_log;    // optional input for direct refinement
    std::filesystem::path initial_weights; // optional; uniform otherwise
    std::filesystem::path output_dir;
  } paths;

  struct Retrieval {
    std::size_t k_top = 4;
    std::size_t lookback_days = 1;
    std::string cutoff = "09:30";
    std::string timezone = "America/New_York";
  } retrieval;

  struct Provider {
    ProviderKind kind = ProviderKind::kLexicon;
    RemoteEndpoint endpoint;
  } provider;

  struct Feedback {
    std::size_t window_days = 252;
    std::size_t min_observations = 20;
  } feedback;

  struct Refine {
    RefineMode mode = RefineMode::kNone;
    RefinementConfig direct;
    std::optional<Date> start;
    std::optional<Date> end;
    StateWindows windows;
  } refine;

  PPOConfig ppo;

  struct Backtest {
    std::vector<std::string> universe;  // empty: every priced symbol except the benchmark
    std::optional<Date> start;
    std::optional<Date> end;
    std::string benchmark;
    CostModel cost;
    std::size_t items_per_day = 10;
  } backtest;

  // Throws Error(kConfig) on bad values and Error(kIo) naming a missing path.
  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

// Environment name for a key: FINRAG_<SECTION>_<KEY>, upper-cased.
std::string env_name(std::string_view key);

// Every key the loader understands, as "section.key".
std::span<const std::string_view> known_config_keys();

// Builds a RunConfig from the defaults, then the file table, then FINRAG_*
// variables, then `overrides`. File paths resolve against `base_dir`; paths
// from the environment or overrides resolve against the working directory.
// Unknown keys are rejected with Error(kConfig).
RunConfig resolve_config(const ConfigTable& file, const std::filesystem::path& base_dir,
                         const EnvLookup& env = process_env, const ConfigTable& overrides = {});

// Reads a config file into a table; Error(kIo) names a missing file.
ConfigTable read_config_file(const std::filesystem::path& path);

// read_config_file + resolve_config; an empty path yields the defaults.
RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

std::filesystem::path default_data_dir();

}  // namespace finrag
