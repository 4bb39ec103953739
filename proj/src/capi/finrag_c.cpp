// SPDX-License-Identifier: Apache-2.0
#include "finrag/finrag.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "finrag/backtest.hpp"
#include "finrag/config.hpp"
#include "finrag/error.hpp"
#include "finrag/pipeline.hpp"
#include "finrag/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct finrag_session {
  finrag::ConfigTable file;
  fs::path base_dir;
  finrag::ConfigTable overrides;
};

namespace {

thread_local std::string g_last_error;

enum class Command { kSession, kIngest, kPredict, kRefine, kBacktest, kReport };

bool is_input_error(finrag::ErrorCode code) {
  using finrag::ErrorCode;
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kConfig:
    case ErrorCode::kMissingField:
    case ErrorCode::kUnknownSource:
    case ErrorCode::kBadTimestamp:
    case ErrorCode::kBadRecord:
    case ErrorCode::kDuplicateBar:
    case ErrorCode::kNonPositivePrice:
      return true;
    default:
      return false;
  }
}

finrag_status status_for(Command command, finrag::ErrorCode code) {
  using finrag::ErrorCode;
  if (is_input_error(code)) return FINRAG_ERR_INPUT;
  if (command == Command::kBacktest) return FINRAG_ERR_BACKTEST;
  if (code == ErrorCode::kTransport || code == ErrorCode::kUnparseable) return FINRAG_ERR_PROVIDER;
  if (command == Command::kRefine) return FINRAG_ERR_REFINEMENT;
  return FINRAG_ERR_INPUT;
}

template <class Fn>
finrag_status guarded(Command command, Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return FINRAG_OK;
  } catch (const finrag::Error& e) {
    g_last_error = e.what();
    return status_for(command, e.code());
  } catch (const fs::filesystem_error& e) {
    g_last_error = e.what();
    return FINRAG_ERR_INPUT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FINRAG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return FINRAG_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(const json& j, char** out_json) {
  if (out_json) *out_json = dup_string(j.dump(2) + "\n");
}

finrag_status usage(const char* message) {
  g_last_error = message;
  return FINRAG_ERR_USAGE;
}

finrag::RunConfig resolve(const finrag_session& s) {
  return finrag::resolve_config(s.file, s.base_dir, finrag::process_env, s.overrides);
}

json paths_json(const std::vector<fs::path>& paths) {
  json arr = json::array();
  for (const auto& p : paths) arr.push_back(p.string());
  return arr;
}

json weights_json(const finrag::SourceWeights& w, const finrag::SourceCatalog& catalog) {
  return json::parse(finrag::weights_to_json(w, catalog));
}

finrag::SourceWeights pick_weights(const finrag::Pipeline& p, const char* path) {
  if (path && *path) return finrag::load_weights(path, p.catalog());
  return p.initial_weights();
}

}  // namespace

extern "C" {

const char* finrag_version(void) { return "0.1.0"; }

const char* finrag_last_error(void) { return g_last_error.c_str(); }

finrag_status finrag_session_open(const char* config_path, finrag_session** out) {
  if (!out) return usage("output handle is NULL");
  *out = nullptr;
  return guarded(Command::kSession, [&] {
    auto session = std::make_unique<finrag_session>();
    if (config_path && *config_path) {
      session->file = finrag::read_config_file(config_path);
      session->base_dir = fs::absolute(config_path).parent_path();
    } else {
      session->base_dir = fs::current_path();
    }
    *out = session.release();
  });
}

void finrag_session_close(finrag_session* session) { delete session; }

finrag_status finrag_session_set_option(finrag_session* session, const char* key, const char* value) {
  if (!session || !key || !value) return usage("session, key and value are required");
  const auto keys = finrag::known_config_keys();
  if (std::find(keys.begin(), keys.end(), std::string_view(key)) == keys.end()) {
    return usage((std::string("unknown option '") + key + "'").c_str());
  }
  return guarded(Command::kSession, [&] { session->overrides.set(key, value); });
}

finrag_status finrag_ingest(finrag_session* session, int validate_only, char** out_json) {
  if (!session) return usage("session is NULL");
  return guarded(Command::kIngest, [&] {
    const finrag::Pipeline p(resolve(*session));
    const auto s = p.ingest_summary();
    json j;
    j["documents"] = s.documents;
    json per_source = json::object();
    for (std::size_t i = 0; i < s.documents_per_source.size(); ++i) {
      per_source[p.catalog().at(i).name] = s.documents_per_source[i];
    }
    j["documents_per_source"] = per_source;
    j["symbols"] = s.symbols;
    j["first_timestamp"] = s.coverage ? json(finrag::format_rfc3339(s.coverage->first)) : json(nullptr);
    j["last_timestamp"] = s.coverage ? json(finrag::format_rfc3339(s.coverage->second)) : json(nullptr);
    j["queries"] = s.queries;
    j["price_bars"] = s.price_bars;
    j["price_symbols"] = s.price_symbols;
    j["first_price_date"] = s.price_range ? json(finrag::format_date(s.price_range->first)) : json(nullptr);
    j["last_price_date"] = s.price_range ? json(finrag::format_date(s.price_range->second)) : json(nullptr);
    std::vector<fs::path> written;
    if (!validate_only) {
      const auto dir = p.config().paths.output_dir;
      fs::create_directories(dir);
      finrag::write_file(dir / "ingest_summary.json", j.dump(2) + "\n");
      written.push_back(dir / "ingest_summary.json");
    }
    j["outputs"] = paths_json(written);
    emit(j, out_json);
  });
}

finrag_status finrag_predict(finrag_session* session, const char* symbol, const char* date, const char* text,
                             const char* weights_path, char** out_json) {
  if (!session || !symbol || !*symbol || !date) return usage("session, symbol and date are required");
  return guarded(Command::kPredict, [&] {
    const finrag::Pipeline p(resolve(*session));
    const auto day = finrag::parse_date(date);
    const auto weights = pick_weights(p, weights_path);
    const auto pred = p.predict(symbol, day, text ? std::optional<std::string>(text) : std::nullopt, weights);
    json j;
    j["symbol"] = pred.symbol;
    j["date"] = finrag::format_date(pred.date);
    j["instruction"] = {{"id", pred.instruction->id}, {"text", pred.instruction->text}};
    j["query_id"] = pred.query_id;
    j["query"] = pred.query_text;
    j["keywords"] = pred.keywords.tokens();
    json ctx = json::array();
    std::size_t rank = 1;
    for (const auto& d : pred.context.documents) {
      ctx.push_back({{"rank", rank++},
                     {"doc_id", d.document->doc_id},
                     {"source", p.catalog().at(d.document->source_id).name},
                     {"timestamp", finrag::format_rfc3339(d.document->timestamp)},
                     {"woc", d.woc},
                     {"text", d.document->text}});
    }
    j["context"] = ctx;
    j["prompt"] = pred.prompt;
    j["raw_output"] = pred.response.raw_text;
    j["label"] = pred.response.label ? json(std::string(finrag::to_string(*pred.response.label))) : json(nullptr);
    emit(j, out_json);
  });
}

finrag_status finrag_refine(finrag_session* session, int validate_only, char** out_json) {
  if (!session) return usage("session is NULL");
  return guarded(Command::kRefine, [&] {
    const finrag::Pipeline p(resolve(*session));
    const auto initial = p.initial_weights();
    json j;
    j["mode"] = std::string(finrag::to_string(p.config().refine.mode));
    if (validate_only) {
      j["weights"] = weights_json(initial, p.catalog());
      j["outputs"] = json::array();
      emit(j, out_json);
      return;
    }
    const auto outcome = p.refine(initial);
    const auto written = finrag::write_refine_outputs(outcome, p.catalog(), p.config().paths.output_dir);
    j["weights"] = weights_json(outcome.weights, p.catalog());
    j["batches"] = outcome.history.size();
    j["feedback_records"] = outcome.feedback.size();
    j["iterations"] = outcome.curve.size();
    j["outputs"] = paths_json(written);
    emit(j, out_json);
  });
}

finrag_status finrag_backtest(finrag_session* session, const char* weights_path, int validate_only, char** out_json) {
  if (!session) return usage("session is NULL");
  return guarded(Command::kBacktest, [&] {
    const finrag::Pipeline p(resolve(*session));
    const auto weights = pick_weights(p, weights_path);
    if (validate_only) {
      json j;
      j["weights"] = weights_json(weights, p.catalog());
      j["outputs"] = json::array();
      emit(j, out_json);
      return;
    }
    std::vector<finrag::RetrievalLogEntry> log;
    const auto report = p.backtest(weights, &log);
    const auto written = finrag::write_backtest_outputs(report, log, p.config().paths.output_dir);
    json j = json::parse(finrag::report_json(report));
    j["outputs"] = paths_json(written);
    emit(j, out_json);
  });
}

finrag_status finrag_report(finrag_session* session, const char* retrieval_log_path, int validate_only,
                            char** out_json) {
  if (!session) return usage("session is NULL");
  return guarded(Command::kReport, [&] {
    const auto config = resolve(*session);
    config.validate();
    const auto catalog = finrag::SourceCatalog::load(config.paths.sources);
    const fs::path log_path = retrieval_log_path && *retrieval_log_path
                                  ? fs::path(retrieval_log_path)
                                  : config.paths.output_dir / "retrieval_log.jsonl";
    const auto log = finrag::load_retrieval_log(log_path);
    const auto proportions = finrag::weight_distribution_report(log, catalog.size());
    const auto text = finrag::weight_distribution_json(proportions, catalog);
    std::vector<fs::path> written;
    if (!validate_only) {
      fs::create_directories(config.paths.output_dir);
      finrag::write_file(config.paths.output_dir / "weight_distribution.json", text);
      written.push_back(config.paths.output_dir / "weight_distribution.json");
    }
    json j;
    j["retrieval_log"] = log_path.string();
    j["entries"] = log.size();
    j["proportions"] = json::parse(text);
    j["outputs"] = paths_json(written);
    emit(j, out_json);
  });
}

void finrag_string_free(char* text) { std::free(text); }

double finrag_woc(const char* const* x, size_t nx, const char* const* y, size_t ny, double weight) {
  std::vector<std::string> xs(x, x + (x ? nx : 0));
  std::vector<std::string> ys(y, y + (y ? ny : 0));
  return finrag::woc(finrag::TokenSet(std::move(xs)), finrag::TokenSet(std::move(ys)), weight);
}

void finrag_normalize_action(const double* raw, size_t k, double* out) {
  if (!raw || !out || k == 0) return;
  const auto v = finrag::normalize_action(std::span<const double>(raw, k));
  std::copy(v.begin(), v.end(), out);
}

double finrag_ppo_objective(double ratio, double advantage, double epsilon) {
  return finrag::ppo_objective(ratio, advantage, epsilon);
}

finrag_status finrag_compute_metrics(const double* curve, size_t n, finrag_metrics* out) {
  if (!curve || !out) return usage("curve and output are required");
  if (n < 2) return usage("curve needs at least two points");
  return guarded(Command::kBacktest, [&] {
    const auto m = finrag::summarize_curve(std::span<const double>(curve, n));
    *out = {m.cumulative_return, m.annualized_return, m.annualized_volatility,
            m.sharpe_ratio.value_or(std::numeric_limits<double>::quiet_NaN()), m.max_drawdown, m.trading_days};
    if (!m.sharpe_ratio) throw finrag::Error(finrag::ErrorCode::kZeroVolatility, "daily returns have zero volatility");
  });
}

}  // extern "C"
