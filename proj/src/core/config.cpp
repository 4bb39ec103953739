// SPDX-License-Identifier: Apache-2.0
#include "finrag/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "finrag/dates.hpp"
#include "finrag/error.hpp"
#include "finrag/text.hpp"

#ifndef FINRAG_DEFAULT_DATA_DIR
#define FINRAG_DEFAULT_DATA_DIR "data"
#endif

namespace finrag {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& message, std::size_t line = 0) {
  throw Error(ErrorCode::kConfig, message, line);
}

// Drops a trailing `#` comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string && c == '\\') {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

// Parses a quoted string starting at text[0] == '"'; returns the decoded
// string and advances `consumed` past the closing quote.
std::optional<std::string> parse_quoted(std::string_view text, std::size_t& consumed) {
  std::string out;
  for (std::size_t i = 1; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '"') {
      consumed = i + 1;
      return out;
    }
    if (c == '\\') {
      if (++i >= text.size()) return std::nullopt;
      switch (text[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: return std::nullopt;
      }
    } else {
      out += c;
    }
  }
  return std::nullopt;
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

using Scalar = std::variant<std::string, double, bool>;

std::optional<Scalar> parse_scalar(std::string_view text, bool allow_bare) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '"') {
    std::size_t used = 0;
    auto s = parse_quoted(text, used);
    if (!s || !trim(text.substr(used)).empty()) return std::nullopt;
    return Scalar(std::move(*s));
  }
  if (text == "true") return Scalar(true);
  if (text == "false") return Scalar(false);
  if (auto n = parse_number(text)) return Scalar(*n);
  if (allow_bare) return Scalar(std::string(text));
  return std::nullopt;
}

std::optional<ConfigValue> parse_value(std::string_view text, bool allow_bare) {
  text = trim(text);
  ConfigValue out;
  out.raw = std::string(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') return std::nullopt;
    std::string_view body = trim(text.substr(1, text.size() - 2));
    ConfigValue::Array items;
    while (!body.empty()) {
      std::size_t end = 0;
      if (body.front() == '"') {
        std::size_t used = 0;
        auto s = parse_quoted(body, used);
        if (!s) return std::nullopt;
        items.emplace_back(std::move(*s));
        end = used;
      } else {
        end = std::min(body.find(','), body.size());
        auto scalar = parse_scalar(body.substr(0, end), false);
        if (!scalar) return std::nullopt;
        items.push_back(std::move(*scalar));
      }
      body = trim(body.substr(end));
      if (body.empty()) break;
      if (body.front() != ',') return std::nullopt;
      body = trim(body.substr(1));
    }
    out.value = std::move(items);
    return out;
  }
  auto scalar = parse_scalar(text, allow_bare);
  if (!scalar) return std::nullopt;
  std::visit([&](auto&& v) { out.value = v; }, *scalar);
  return out;
}

bool valid_key(std::string_view key) {
  return !key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

// ---- typed accessors ----

const std::string& as_string(const std::string& key, const ConfigValue& v) {
  if (const auto* s = std::get_if<std::string>(&v.value)) return *s;
  config_error(key + " must be a string, got " + v.raw);
}

double as_double(const std::string& key, const ConfigValue& v) {
  if (const auto* d = std::get_if<double>(&v.value)) return *d;
  config_error(key + " must be a number, got " + v.raw);
}

std::size_t as_size(const std::string& key, const ConfigValue& v) {
  const double d = as_double(key, v);
  if (d < 0 || d != std::floor(d) || d > 1e15) config_error(key + " must be a non-negative integer, got " + v.raw);
  return static_cast<std::size_t>(d);
}

bool as_bool(const std::string& key, const ConfigValue& v) {
  if (const auto* b = std::get_if<bool>(&v.value)) return *b;
  if (const auto* s = std::get_if<std::string>(&v.value)) {
    if (*s == "true" || *s == "1") return true;
    if (*s == "false" || *s == "0") return false;
  }
  config_error(key + " must be true or false, got " + v.raw);
}

Date as_date(const std::string& key, const ConfigValue& v) {
  try {
    return parse_date(as_string(key, v));
  } catch (const Error&) {
    config_error(key + " must be a YYYY-MM-DD date, got " + v.raw);
  }
}

std::vector<std::string> as_string_list(const std::string& key, const ConfigValue& v) {
  if (const auto* s = std::get_if<std::string>(&v.value)) {
    // Comma-separated form, used by environment variables and flags.
    std::vector<std::string> out;
    for (auto part : split(*s, ',')) {
      part = trim(part);
      if (!part.empty()) out.emplace_back(part);
    }
    return out;
  }
  const auto* arr = std::get_if<ConfigValue::Array>(&v.value);
  if (!arr) config_error(key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    const auto* s = std::get_if<std::string>(&item);
    if (!s) config_error(key + " must be an array of strings");
    out.push_back(*s);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const ConfigValue&, const fs::path&)>;

Setter path_field(fs::path RunConfig::Paths::*field) {
  return [field](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path& base) {
    const fs::path p(as_string(k, v));
    c.paths.*field = p.empty() || p.is_absolute() ? p : (base / p).lexically_normal();
  };
}

template <class Section, class T>
Setter size_field(Section RunConfig::*section, T Section::*field) {
  return [section, field](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
    (c.*section).*field = static_cast<T>(as_size(k, v));
  };
}

template <class Section>
Setter double_field(Section RunConfig::*section, double Section::*field) {
  return [section, field](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
    (c.*section).*field = as_double(k, v);
  };
}

Setter ppo_size(std::size_t PPOConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
    c.ppo.*field = as_size(k, v);
  };
}

Setter ppo_double(double PPOConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
    c.ppo.*field = as_double(k, v);
  };
}

Setter window_field(std::size_t StateWindows::*field) {
  return [field](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
    c.refine.windows.*field = as_size(k, v);
  };
}

const std::map<std::string_view, Setter>& schema() {
  using P = RunConfig::Paths;
  using R = RunConfig::Retrieval;
  using F = RunConfig::Feedback;
  using B = RunConfig::Backtest;
  static const std::map<std::string_view, Setter> table = {
      {"seed", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.seed = static_cast<std::uint64_t>(as_size(k, v));
       }},
      {"workers", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.workers = as_size(k, v);
       }},
      {"paths.sources", path_field(&P::sources)},
      {"paths.corpus", path_field(&P::corpus)},
      {"paths.prices", path_field(&P::prices)},
      {"paths.stopwords", path_field(&P::stopwords)},
      {"paths.lexicon", path_field(&P::lexicon)},
      {"paths.instructions", path_field(&P::instructions)},
      {"paths.queries", path_field(&P::queries)},
      {"paths.scripted", path_field(&P::scripted)},
      {"paths.feedback_log", path_field(&P::feedback_log)},
      {"paths.initial_weights", path_field(&P::initial_weights)},
      {"paths.output_dir", path_field(&P::output_dir)},
      {"retrieval.k_top", size_field(&RunConfig::retrieval, &R::k_top)},
      {"retrieval.lookback_days", size_field(&RunConfig::retrieval, &R::lookback_days)},
      {"retrieval.cutoff", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.retrieval.cutoff = as_string(k, v);
       }},
      {"retrieval.timezone", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.retrieval.timezone = as_string(k, v);
       }},
      {"provider.kind", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         const auto& s = as_string(k, v);
         if (s == "lexicon") c.provider.kind = ProviderKind::kLexicon;
         else if (s == "scripted") c.provider.kind = ProviderKind::kScripted;
         else if (s == "remote") c.provider.kind = ProviderKind::kRemote;
         else config_error(k + " must be lexicon, scripted or remote, got " + v.raw);
       }},
      {"provider.url", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.provider.endpoint.url = as_string(k, v);
       }},
      {"provider.timeout_seconds", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.provider.endpoint.timeout_seconds = as_double(k, v);
       }},
      {"provider.max_in_flight", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.provider.endpoint.max_in_flight = as_size(k, v);
       }},
      {"feedback.window_days", size_field(&RunConfig::feedback, &F::window_days)},
      {"feedback.min_observations", size_field(&RunConfig::feedback, &F::min_observations)},
      {"refine.mode", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         const auto& s = as_string(k, v);
         if (s == "none") c.refine.mode = RefineMode::kNone;
         else if (s == "direct") c.refine.mode = RefineMode::kDirect;
         else if (s == "rl") c.refine.mode = RefineMode::kRl;
         else config_error(k + " must be none, direct or rl, got " + v.raw);
       }},
      {"refine.alpha", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.refine.direct.alpha = as_double(k, v);
       }},
      {"refine.batch_size", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.refine.direct.batch_size = as_size(k, v);
       }},
      {"refine.reset_on_degenerate", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.refine.direct.reset_on_degenerate = as_bool(k, v);
       }},
      {"refine.start", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.refine.start = as_date(k, v);
       }},
      {"refine.end", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.refine.end = as_date(k, v);
       }},
      {"refine.accuracy_window", window_field(&StateWindows::accuracy_window)},
      {"refine.overlap_window", window_field(&StateWindows::overlap_window)},
      {"refine.return_window", window_field(&StateWindows::return_window)},
      {"ppo.policy_lr", ppo_double(&PPOConfig::policy_lr)},
      {"ppo.value_lr", ppo_double(&PPOConfig::value_lr)},
      {"ppo.clip_epsilon", ppo_double(&PPOConfig::clip_epsilon)},
      {"ppo.gamma", ppo_double(&PPOConfig::discount_gamma)},
      {"ppo.update_epochs", ppo_size(&PPOConfig::update_epochs)},
      {"ppo.rollout_length", ppo_size(&PPOConfig::rollout_length)},
      {"ppo.trunk_width", ppo_size(&PPOConfig::trunk_width)},
      {"ppo.trunk_depth", ppo_size(&PPOConfig::trunk_depth)},
      {"ppo.init_log_std", ppo_double(&PPOConfig::init_log_std)},
      {"ppo.iterations", ppo_size(&PPOConfig::iterations)},
      {"ppo.momentum", ppo_double(&PPOConfig::momentum)},
      {"ppo.plateau_patience", ppo_size(&PPOConfig::plateau_patience)},
      {"ppo.plateau_tolerance", ppo_double(&PPOConfig::plateau_tolerance)},
      {"ppo.optimizer", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         const auto& s = as_string(k, v);
         if (s == "sgd") c.ppo.optimizer = OptimizerKind::kSgd;
         else if (s == "momentum") c.ppo.optimizer = OptimizerKind::kMomentum;
         else if (s == "adam") c.ppo.optimizer = OptimizerKind::kAdam;
         else config_error(k + " must be sgd, momentum or adam, got " + v.raw);
       }},
      {"backtest.universe", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.backtest.universe = as_string_list(k, v);
       }},
      {"backtest.start", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.backtest.start = as_date(k, v);
       }},
      {"backtest.end", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.backtest.end = as_date(k, v);
       }},
      {"backtest.benchmark", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.backtest.benchmark = as_string(k, v);
       }},
      {"backtest.cost_bps", [](RunConfig& c, const std::string& k, const ConfigValue& v, const fs::path&) {
         c.backtest.cost.per_trade_bps = as_double(k, v);
       }},
      {"backtest.items_per_day", size_field(&RunConfig::backtest, &B::items_per_day)},
  };
  return table;
}

void apply(RunConfig& config, const std::string& key, const ConfigValue& value, const fs::path& base) {
  const auto it = schema().find(key);
  if (it == schema().end()) config_error("unknown config key '" + key + "'");
  it->second(config, key, value, base);
}

void require_file(const fs::path& p, std::string_view key) {
  if (p.empty()) config_error(std::string(key) + " is required");
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw Error(ErrorCode::kIo, "missing file for " + std::string(key) + ": " + p.string());
}

void optional_file(const fs::path& p, std::string_view key) {
  if (!p.empty()) require_file(p, key);
}

}  // namespace

ConfigTable ConfigTable::parse(std::string_view text) {
  ConfigTable table;
  std::string section;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error("malformed section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) config_error("bad section name '" + section + "'", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error("expected key = value", line_no);
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) config_error("bad key '" + key + "'", line_no);
    auto value = parse_value(line.substr(eq + 1), false);
    if (!value) config_error("cannot parse value for '" + key + "'", line_no);
    const std::string full = section.empty() ? key : section + "." + key;
    if (!table.entries_.emplace(full, std::move(*value)).second) {
      config_error("duplicate key '" + full + "'", line_no);
    }
  }
  return table;
}

void ConfigTable::set(const std::string& key, std::string_view text) {
  auto value = parse_value(text, true);
  if (!value) config_error("cannot parse value for '" + key + "': " + std::string(text));
  entries_.insert_or_assign(key, std::move(*value));
}

const ConfigValue* ConfigTable::find(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string_view to_string(RefineMode mode) {
  switch (mode) {
    case RefineMode::kNone: return "none";
    case RefineMode::kDirect: return "direct";
    case RefineMode::kRl: return "rl";
  }
  return "none";
}

void RunConfig::validate() const {
  if (workers == 0) config_error("workers must be positive");
  if (retrieval.k_top == 0) config_error("retrieval.k_top must be positive");
  try {
    (void)ExchangeClock::from_spec(retrieval.cutoff, retrieval.timezone);
  } catch (const Error& e) {
    config_error(std::string("retrieval clock: ") + e.what());
  }
  if (feedback.window_days < 2) config_error("feedback.window_days must be at least 2");
  if (feedback.min_observations < 2) config_error("feedback.min_observations must be at least 2");
  refine.direct.validate();
  ppo.validate();
  backtest.cost.validate();
  if (backtest.items_per_day == 0) config_error("backtest.items_per_day must be positive");
  if (backtest.start && backtest.end && !(*backtest.start < *backtest.end)) {
    config_error("backtest.start must precede backtest.end");
  }
  if (refine.start && refine.end && *refine.end < *refine.start) config_error("refine.start is after refine.end");
  if (provider.kind == ProviderKind::kRemote) {
    if (provider.endpoint.url.empty()) config_error("provider.url is required for the remote provider");
    if (!(provider.endpoint.timeout_seconds > 0)) config_error("provider.timeout_seconds must be positive");
    if (provider.endpoint.max_in_flight == 0 || provider.endpoint.max_in_flight > 1024) {
      config_error("provider.max_in_flight must lie in [1, 1024]");
    }
  }

  require_file(paths.sources, "paths.sources");
  require_file(paths.corpus, "paths.corpus");
  require_file(paths.prices, "paths.prices");
  require_file(paths.stopwords, "paths.stopwords");
  require_file(paths.lexicon, "paths.lexicon");
  require_file(paths.instructions, "paths.instructions");
  optional_file(paths.queries, "paths.queries");
  optional_file(paths.feedback_log, "paths.feedback_log");
  optional_file(paths.initial_weights, "paths.initial_weights");
  if (provider.kind == ProviderKind::kScripted) require_file(paths.scripted, "paths.scripted");
  if (paths.output_dir.empty()) config_error("paths.output_dir is required");
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::string env_name(std::string_view key) {
  std::string out = "FINRAG_";
  for (const char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::span<const std::string_view> known_config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const auto& [k, _] : schema()) out.push_back(k);
    return out;
  }();
  return keys;
}

fs::path default_data_dir() { return fs::path(FINRAG_DEFAULT_DATA_DIR); }

RunConfig resolve_config(const ConfigTable& file, const fs::path& base_dir, const EnvLookup& env,
                         const ConfigTable& overrides) {
  RunConfig config;
  const fs::path data = default_data_dir();
  config.paths.sources = data / "sources.json";
  config.paths.stopwords = data / "stopwords.txt";
  config.paths.lexicon = data / "lexicon.csv";
  config.paths.instructions = data / "instructions.txt";
  config.paths.output_dir = (base_dir / "out").lexically_normal();

  for (const auto& [key, value] : file.entries()) apply(config, key, value, base_dir);

  const fs::path cwd = fs::current_path();
  if (env) {
    ConfigTable from_env;
    for (const auto key : known_config_keys()) {
      if (auto v = env(env_name(key))) from_env.set(std::string(key), *v);
    }
    for (const auto& [key, value] : from_env.entries()) apply(config, key, value, cwd);
  }
  for (const auto& [key, value] : overrides.entries()) apply(config, key, value, cwd);
  return config;
}

ConfigTable read_config_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::kIo, "missing config file: " + path.string());
  return ConfigTable::parse(read_file(path));
}

RunConfig load_config(const fs::path& path, const EnvLookup& env) {
  if (path.empty()) return resolve_config({}, fs::current_path(), env);
  const ConfigTable table = read_config_file(path);
  return resolve_config(table, fs::absolute(path).parent_path(), env);
}

}  // namespace finrag
