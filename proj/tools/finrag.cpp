// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "finrag/finrag.h"

namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::optional<unsigned long long> seed;
  std::optional<unsigned> workers;
  bool json_out = false;
  bool validate_only = false;
  std::vector<std::string> set;

  std::string symbol;
  std::string date;
  std::optional<std::string> text;
  std::string weights;
  std::optional<std::string> mode;
  std::optional<double> alpha;
  std::optional<double> cost_bps;
  std::string log;
};

int fail(finrag_status status) {
  std::cerr << "finrag: error: " << finrag_last_error() << "\n";
  return static_cast<int>(status);
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string number_exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void print_weights(const json& weights) {
  for (const auto& [name, w] : weights.items()) std::cout << "  " << name << ": " << number(w.get<double>()) << "\n";
}

void print_text(const std::string& command, const json& j) {
  if (command == "ingest") {
    std::cout << "documents: " << j["documents"] << "\n";
    for (const auto& [name, n] : j["documents_per_source"].items()) std::cout << "  " << name << ": " << n << "\n";
    std::cout << "symbols: " << j["symbols"].size() << "\n";
    if (!j["first_timestamp"].is_null()) {
      std::cout << "documents span: " << j["first_timestamp"].get<std::string>() << " .. "
                << j["last_timestamp"].get<std::string>() << "\n";
    }
    std::cout << "queries: " << j["queries"] << "\n";
    std::cout << "price bars: " << j["price_bars"] << " (" << j["price_symbols"].size() << " symbols)\n";
    if (!j["first_price_date"].is_null()) {
      std::cout << "prices span: " << j["first_price_date"].get<std::string>() << " .. "
                << j["last_price_date"].get<std::string>() << "\n";
    }
  } else if (command == "predict") {
    std::cout << "Instruction #" << j["instruction"]["id"] << ": " << j["instruction"]["text"].get<std::string>()
              << "\nQuery: " << j["query"].get<std::string>() << "\nContext:\n";
    if (j["context"].empty()) std::cout << "  (none)\n";
    for (const auto& d : j["context"]) {
      std::cout << "  " << d["rank"] << ". [" << d["source"].get<std::string>() << "] woc=" << number(d["woc"].get<double>())
                << " " << d["text"].get<std::string>() << "\n";
    }
    std::cout << "Prompt:\n" << j["prompt"].get<std::string>() << "\nRaw output: " << j["raw_output"].get<std::string>()
              << "\nLabel: " << (j["label"].is_null() ? std::string("unparseable") : j["label"].get<std::string>()) << "\n";
  } else if (command == "refine") {
    std::cout << "mode: " << j["mode"].get<std::string>() << "\nweights:\n";
    print_weights(j["weights"]);
  } else if (command == "backtest") {
    if (j.contains("Cumulative Return")) {
      for (const char* key : {"Cumulative Return", "Annualized Return", "Annualized Volatility", "Sharpe Ratio", "Max Drawdown"}) {
        std::cout << key << ": " << (j[key].is_null() ? std::string("n/a") : number(j[key].get<double>())) << "\n";
      }
    } else {
      std::cout << "weights:\n";
      print_weights(j["weights"]);
    }
  } else if (command == "report") {
    std::cout << "retrieved documents by source:\n";
    print_weights(j["proportions"]);
  }
  if (j.contains("outputs")) {
    for (const auto& p : j["outputs"]) std::cout << "wrote " << p.get<std::string>() << "\n";
  }
}

int run(const std::string& command, const Options& o) {
  finrag_session* raw = nullptr;
  if (auto st = finrag_session_open(o.config.empty() ? nullptr : o.config.c_str(), &raw); st != FINRAG_OK) return fail(st);
  std::unique_ptr<finrag_session, void (*)(finrag_session*)> session(raw, finrag_session_close);

  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "finrag: error: --set expects key=value, got '" << kv << "'\n";
      return FINRAG_ERR_USAGE;
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) overrides.emplace_back("seed", std::to_string(*o.seed));
  if (o.workers) overrides.emplace_back("workers", std::to_string(*o.workers));
  if (o.mode) overrides.emplace_back("refine.mode", *o.mode);
  if (o.alpha) overrides.emplace_back("refine.alpha", number_exact(*o.alpha));
  if (o.cost_bps) overrides.emplace_back("backtest.cost_bps", number_exact(*o.cost_bps));
  for (const auto& [k, v] : overrides) {
    if (auto st = finrag_session_set_option(session.get(), k.c_str(), v.c_str()); st != FINRAG_OK) return fail(st);
  }

  char* out = nullptr;
  finrag_status st = FINRAG_ERR_USAGE;
  const int vo = o.validate_only ? 1 : 0;
  if (command == "ingest") {
    st = finrag_ingest(session.get(), vo, &out);
  } else if (command == "predict") {
    st = finrag_predict(session.get(), o.symbol.c_str(), o.date.c_str(), o.text ? o.text->c_str() : nullptr,
                        o.weights.c_str(), &out);
  } else if (command == "refine") {
    st = finrag_refine(session.get(), vo, &out);
  } else if (command == "backtest") {
    st = finrag_backtest(session.get(), o.weights.c_str(), vo, &out);
  } else if (command == "report") {
    st = finrag_report(session.get(), o.log.c_str(), vo, &out);
  }
  if (st != FINRAG_OK) return fail(st);
  const std::string text = out ? out : "";
  finrag_string_free(out);
  if (o.json_out) {
    std::cout << text;
  } else {
    print_text(command, json::parse(text));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multi-source retrieval, sentiment feedback and long-short backtesting"};
  app.set_version_flag("--version", std::string(finrag_version()));
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Run configuration file");
  app.add_option("--seed", o.seed, "Global random seed");
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--json", o.json_out, "Machine-readable output");
  app.add_flag("--validate-only", o.validate_only, "Load and check inputs without writing outputs");
  app.add_option("--set", o.set, "Override a config key (section.key=value)");

  auto* ingest = app.add_subcommand("ingest", "Load and validate the corpus and prices");
  auto* predict = app.add_subcommand("predict", "Retrieve context and classify one statement");
  predict->add_option("--symbol", o.symbol, "Ticker")->required();
  predict->add_option("--date", o.date, "Trading date YYYY-MM-DD")->required();
  predict->add_option("--text", o.text, "Statement to classify");
  predict->add_option("--weights", o.weights, "Source weights JSON");
  auto* refine = app.add_subcommand("refine", "Refine source weights from market feedback");
  refine->add_option("--mode", o.mode, "none, direct or rl")->check(CLI::IsMember({"none", "direct", "rl"}));
  refine->add_option("--alpha", o.alpha, "Direct-refinement step size");
  auto* backtest = app.add_subcommand("backtest", "Simulate the long-short portfolio");
  backtest->add_option("--weights", o.weights, "Source weights JSON");
  backtest->add_option("--cost-bps", o.cost_bps, "Cost per trade in basis points");
  auto* report = app.add_subcommand("report", "Per-source share of retrieved documents");
  report->add_option("--log", o.log, "Retrieval log JSONL");

  // Global flags are accepted after the subcommand as well.
  for (auto* sub : {ingest, predict, refine, backtest, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : FINRAG_ERR_USAGE;
  }
  for (auto* sub : app.get_subcommands()) return run(sub->get_name(), o);
  return FINRAG_ERR_USAGE;
}
