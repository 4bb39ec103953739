// SPDX-License-Identifier: Apache-2.0
#include "finrag/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "finrag/error.hpp"
#include "finrag/text.hpp"
#include "log.hpp"

namespace finrag {

namespace fs = std::filesystem;

Date exchange_date(Timestamp ts, const ExchangeClock& clock) {
  Date d = add_days(Date{std::chrono::floor<std::chrono::days>(ts)}, -1);
  while (clock.cutoff_instant(d) <= ts) d = add_days(d, 1);
  return d;
}

std::uint64_t task_seed(std::uint64_t seed, std::string_view symbol, Date date, std::string_view item) {
  std::uint64_t h = seed * 0x9E3779B97F4A7C15ULL;
  h ^= stable_hash(symbol) + 0x7F4A7C15ULL + (h << 6) + (h >> 2);
  h ^= stable_hash(format_date(date)) + 0x9E3779B9ULL + (h << 6) + (h >> 2);
  h ^= stable_hash(item) + 0x85EBCA6BULL + (h << 6) + (h >> 2);
  return h;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, n);
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::unique_ptr<SentimentProvider> make_provider(const RunConfig& config) {
  switch (config.provider.kind) {
    case ProviderKind::kLexicon:
      return std::make_unique<LexiconProvider>(Lexicon::load(config.paths.lexicon));
    case ProviderKind::kScripted:
      return std::make_unique<ScriptedProvider>(ScriptedProvider::load(config.paths.scripted));
    case ProviderKind::kRemote:
      return std::make_unique<RemoteProvider>(config.provider.endpoint);
  }
  throw Error(ErrorCode::kConfig, "unknown provider");
}

bool in_window(Date d, const std::optional<Date>& start, const std::optional<Date>& end) {
  return (!start || !(d < *start)) && (!end || !(*end < d));
}

}  // namespace

Pipeline::Pipeline(RunConfig config)
    : config_(std::move(config)), instructions_(std::vector<std::string>{"Classify the sentiment."}) {
  config_.validate();
  catalog_ = SourceCatalog::load(config_.paths.sources);
  corpus_ = DocumentStore::load(config_.paths.corpus, catalog_);
  if (!config_.paths.queries.empty()) {
    queries_ = DocumentStore::load_queries(config_.paths.queries);
    separate_queries_ = true;
  }
  prices_ = PriceTable::load(config_.paths.prices);
  stopwords_ = StopwordList::load(config_.paths.stopwords);
  instructions_ = InstructionCatalog::load(config_.paths.instructions);
  clock_ = ExchangeClock::from_spec(config_.retrieval.cutoff, config_.retrieval.timezone);
  provider_ = make_provider(config_);
}

Pipeline::~Pipeline() = default;

SourceWeights Pipeline::initial_weights() const {
  if (!config_.paths.initial_weights.empty()) return load_weights(config_.paths.initial_weights, catalog_);
  return SourceWeights::uniform(catalog_.size());
}

IngestSummary Pipeline::ingest_summary() const {
  IngestSummary s;
  s.documents = corpus_.size();
  s.documents_per_source.assign(catalog_.size(), 0);
  for (const auto& d : corpus_.documents()) ++s.documents_per_source[d.source_id];
  s.symbols = corpus_.symbols();
  s.coverage = corpus_.coverage();
  s.queries = separate_queries_ ? queries_.size() : corpus_.size();
  s.price_bars = prices_.bar_count();
  s.price_symbols = prices_.symbols();
  for (const auto& sym : s.price_symbols) {
    const auto series = prices_.series(sym);
    if (series.empty()) continue;
    if (!s.price_range) s.price_range = {series.front().date, series.back().date};
    s.price_range->first = std::min(s.price_range->first, series.front().date);
    s.price_range->second = std::max(s.price_range->second, series.back().date);
  }
  return s;
}

Prediction Pipeline::predict(const Document& query, std::string_view symbol, Date date,
                             const SourceWeights& weights, std::mt19937_64& rng) const {
  Prediction p;
  p.instruction = &instructions_.select(rng);
  p.query_id = query.doc_id;
  p.symbol = std::string(symbol);
  p.date = date;
  p.query_text = query.text;
  p.keywords = extract_keywords(query.text, stopwords_);
  const auto pool = corpus_.candidate_pool(symbol, date, clock_, static_cast<int>(config_.retrieval.lookback_days));
  // A corpus document never serves as its own context.
  const std::string_view exclude = corpus_.find(query.doc_id) == &query ? std::string_view(query.doc_id) : std::string_view();
  p.context = retrieve_top_k(p.keywords, pool, weights, config_.retrieval.k_top, stopwords_, exclude);
  p.prompt = build_prompt(p.instruction->text, query.text, p.context);
  p.response = provider_->classify({query.text, &p.context, p.prompt});
  return p;
}

Prediction Pipeline::predict(std::string_view symbol, Date date, std::optional<std::string> text,
                             const SourceWeights& weights) const {
  std::mt19937_64 rng(task_seed(config_.seed, symbol, date, "predict"));
  if (!text) {
    const DocumentStore& source = separate_queries_ ? queries_ : corpus_;
    for (const Document* d : source.by_symbol(symbol)) {
      if (exchange_date(d->timestamp, clock_) == date) return predict(*d, symbol, date, weights, rng);
    }
  }
  Document adhoc;
  adhoc.doc_id = "adhoc";
  adhoc.timestamp = clock_.cutoff_instant(date) - std::chrono::milliseconds(1);
  adhoc.symbols = {std::string(symbol)};
  adhoc.text = text ? *text : std::string(symbol);
  return predict(adhoc, symbol, date, weights, rng);
}

std::vector<QueryTask> Pipeline::query_tasks(std::optional<Date> start, std::optional<Date> end) const {
  const DocumentStore& source = separate_queries_ ? queries_ : corpus_;
  std::vector<QueryTask> tasks;
  for (const auto& doc : source.documents()) {
    const Date d = exchange_date(doc.timestamp, clock_);
    if (!in_window(d, start, end)) continue;
    for (const auto& sym : doc.symbols) tasks.push_back({&doc, sym, d});
  }
  std::sort(tasks.begin(), tasks.end(), [](const QueryTask& a, const QueryTask& b) {
    if (a.date != b.date) return a.date < b.date;
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    return a.query->doc_id < b.query->doc_id;
  });
  return tasks;
}

namespace {

struct Judgement {
  NeutralBand band;
  double next_return = 0.0;
};

std::optional<Judgement> market_verdict_inputs(const PriceTable& prices, const RunConfig& config,
                                               std::string_view symbol, Date date) {
  const auto open = prices.open(symbol, date);
  const auto next = prices.next_date(symbol, date);
  if (!open || !next) return std::nullopt;
  const auto history = prices.returns_up_to(symbol, date);
  try {
    Judgement j;
    j.band = estimate_neutral_band(history, config.feedback.window_days, config.feedback.min_observations);
    j.next_return = *prices.open(symbol, *next) / *open - 1.0;
    return j;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInsufficientHistory) return std::nullopt;
    throw;
  }
}

}  // namespace

std::optional<FeedbackRecord> Pipeline::judge(const Prediction& prediction) const {
  if (!prediction.response.label) {
    detail::log().warn("unparseable reply for {} on {}", prediction.query_id, format_date(prediction.date));
    return std::nullopt;
  }
  const auto inputs = market_verdict_inputs(prices_, config_, prediction.symbol, prediction.date);
  if (!inputs) return std::nullopt;
  const auto used = prediction.context.source_usage();
  return make_feedback(prediction.query_id, prediction.symbol, prediction.date, *prediction.response.label,
                       inputs->next_return, inputs->band, std::vector<SourceId>(used.begin(), used.end()));
}

RefineOutcome Pipeline::refine(const SourceWeights& initial) const {
  if (initial.size() != catalog_.size()) throw Error(ErrorCode::kInvalidArgument, "weights do not match the catalog");
  RefineOutcome out{config_.refine.mode, initial, {}, {}, {}, {}, std::nullopt};
  switch (config_.refine.mode) {
    case RefineMode::kNone:
      return out;

    case RefineMode::kDirect: {
      const auto& rc = config_.refine.direct;
      rc.validate();
      if (!config_.paths.feedback_log.empty()) {
        out.feedback = load_feedback_log(config_.paths.feedback_log);
        auto result = run_direct_refinement(initial, out.feedback, rc);
        out.weights = std::move(result.weights);
        out.history = std::move(result.history);
        return out;
      }
      // Online: each chunk of queries is answered under the current weights,
      // and full batches of feedback update them before the next chunk.
      const auto tasks = query_tasks(config_.refine.start, config_.refine.end);
      std::vector<FeedbackRecord> pending;
      const auto apply_batch = [&](std::size_t count) {
        const std::span<const FeedbackRecord> batch(pending.data(), count);
        const auto delta = accumulate_batch(batch, catalog_.size(), rc.alpha);
        out.weights = apply_delta(out.weights, delta, rc.reset_on_degenerate);
        out.history.push_back({out.history.size(), out.weights.values()});
        pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(count));
      };
      for (std::size_t begin = 0; begin < tasks.size(); begin += rc.batch_size) {
        const std::size_t end = std::min(tasks.size(), begin + rc.batch_size);
        std::vector<std::optional<Prediction>> preds(end - begin);
        const SourceWeights current = out.weights;
        parallel_for(preds.size(), config_.workers, [&](std::size_t i) {
          const auto& t = tasks[begin + i];
          std::mt19937_64 rng(task_seed(config_.seed, t.symbol, t.date, t.query->doc_id));
          preds[i] = predict(*t.query, t.symbol, t.date, current, rng);
        });
        for (const auto& p : preds) {
          out.retrieval_log.push_back(make_log_entry(p->query_id, p->date, p->context));
          if (auto rec = judge(*p)) {
            pending.push_back(*rec);
            out.feedback.push_back(std::move(*rec));
          }
        }
        while (pending.size() >= rc.batch_size) apply_batch(rc.batch_size);
      }
      if (!pending.empty()) apply_batch(pending.size());
      return out;
    }

    case RefineMode::kRl: {
      if (config_.ppo.iterations == 0) return out;
      PipelineEnvironment env(*this, query_tasks(config_.refine.start, config_.refine.end), initial);
      auto result = run_rl_refinement(env, initial, config_.ppo, config_.seed);
      out.weights = std::move(result.weights);
      out.curve = std::move(result.curve);
      out.network = std::move(result.network);
      out.feedback = env.feedback();
      out.retrieval_log = env.retrieval_log();
      return out;
    }
  }
  return out;
}

double Pipeline::daily_score(std::string_view symbol, Date date, const SourceWeights& weights,
                             std::vector<RetrievalLogEntry>* log) const {
  const auto items = corpus_.candidate_pool(symbol, date, clock_, static_cast<int>(config_.retrieval.lookback_days));
  std::mt19937_64 rng(task_seed(config_.seed, symbol, date, "daily"));
  return daily_sentiment_score(items, config_.backtest.items_per_day, rng, [&](const Document& doc) {
    auto p = predict(doc, symbol, date, weights, rng);
    if (log) log->push_back(make_log_entry(p.query_id, p.date, p.context));
    return p.response.label;
  });
}

BacktestReport Pipeline::backtest(const SourceWeights& weights, std::vector<RetrievalLogEntry>* log) const {
  if (weights.size() != catalog_.size()) throw Error(ErrorCode::kInvalidArgument, "weights do not match the catalog");
  const auto& bt = config_.backtest;
  BacktestWindow window;
  window.benchmark = bt.benchmark;
  window.universe = bt.universe;
  if (window.universe.empty()) {
    for (auto& s : prices_.symbols()) {
      if (s != bt.benchmark) window.universe.push_back(std::move(s));
    }
  }
  for (const auto& s : window.universe) {
    if (!prices_.has_symbol(s)) throw Error(ErrorCode::kMissingBar, "no prices for universe symbol " + s);
  }
  const auto summary = ingest_summary();
  if (!summary.price_range) throw Error(ErrorCode::kNoTradingDays, "price table is empty");
  window.start = bt.start.value_or(summary.price_range->first);
  window.end = bt.end.value_or(summary.price_range->second);

  const auto dates = window.start < window.end
                         ? prices_.trading_dates(window.universe, window.start, window.end)
                         : std::vector<Date>{};
  struct Cell {
    std::string symbol;
    Date date;
    double score = 0.0;
    std::vector<RetrievalLogEntry> log;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i + 1 < dates.size(); ++i) {
    for (const auto& s : window.universe) cells.push_back({s, dates[i], 0.0, {}});
  }
  parallel_for(cells.size(), config_.workers, [&](std::size_t i) {
    auto& c = cells[i];
    c.score = daily_score(c.symbol, c.date, weights, log ? &c.log : nullptr);
  });
  std::map<std::pair<std::string, Date>, double> table;
  for (auto& c : cells) {
    table.emplace(std::pair{c.symbol, c.date}, c.score);
    if (log) std::move(c.log.begin(), c.log.end(), std::back_inserter(*log));
  }
  const ScoreFunction lookup = [&table](const std::string& symbol, Date date) {
    const auto it = table.find({symbol, date});
    return it == table.end() ? 0.0 : it->second;
  };
  return run_backtest(prices_, lookup, window, bt.cost, config_.seed);
}

PipelineEnvironment::PipelineEnvironment(const Pipeline& pipeline, std::vector<QueryTask> tasks,
                                         SourceWeights initial)
    : pipeline_(pipeline), weights_(std::move(initial)), registry_(default_indicators()) {
  // Keep only tasks the market can judge.
  for (auto& t : tasks) {
    if (market_verdict_inputs(pipeline_.prices(), pipeline_.config(), t.symbol, t.date)) tasks_.push_back(std::move(t));
  }
  if (tasks_.empty()) {
    throw Error(ErrorCode::kInsufficientHistory, "no query task in the refinement window has enough price history");
  }
}

std::size_t PipelineEnvironment::state_dim() const {
  return state_dimension(weights_.size(), pipeline_.config().refine.windows.return_window, registry_.size());
}

Eigen::VectorXd PipelineEnvironment::observe() {
  const auto& task = tasks_[cursor_];
  StateInputs inputs{feedback_, log_, &pipeline_.prices(), task.symbol, task.date};
  const auto state = build_state(weights_, inputs, pipeline_.config().refine.windows, registry_);
  const auto opens = pipeline_.prices().opens_up_to(task.symbol, task.date);
  return state.features(registry_, opens);
}

StepResult PipelineEnvironment::step(const SourceWeights& action, std::mt19937_64& rng) {
  for (std::size_t attempt = 0; attempt < tasks_.size(); ++attempt) {
    const auto& task = tasks_[cursor_];
    cursor_ = (cursor_ + 1) % tasks_.size();
    const auto prediction = pipeline_.predict(*task.query, task.symbol, task.date, action, rng);
    log_.push_back(make_log_entry(prediction.query_id, prediction.date, prediction.context));
    if (auto record = pipeline_.judge(prediction)) {
      weights_ = action;
      const double r = record->reward;
      feedback_.push_back(std::move(*record));
      return {r, true};
    }
  }
  throw Error(ErrorCode::kUnparseable, "no query task produced a parseable prediction");
}

std::vector<fs::path> write_refine_outputs(const RefineOutcome& outcome, const SourceCatalog& catalog,
                                           const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const auto put = [&](const char* name, std::string_view contents) {
    write_file(dir / name, contents);
    written.push_back(dir / name);
  };
  put("weights.json", weights_to_json(outcome.weights, catalog));
  put("weight_history.json", history_to_json(outcome.history));
  if (outcome.mode != RefineMode::kNone) {
    put("feedback.jsonl", to_jsonl(outcome.feedback));
    put("retrieval_log.jsonl", to_jsonl(outcome.retrieval_log));
  }
  if (outcome.mode == RefineMode::kRl) {
    put("training_curve.csv", training_curve_csv(outcome.curve));
    if (outcome.network) put("checkpoint.json", outcome.network->to_json());
  }
  return written;
}

std::vector<fs::path> write_backtest_outputs(const BacktestReport& report, std::span<const RetrievalLogEntry> log,
                                             const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "report.json", report_json(report));
  write_file(dir / "curve.csv", curve_csv(report));
  write_file(dir / "backtest_retrieval_log.jsonl", to_jsonl(log));
  return {dir / "report.json", dir / "curve.csv", dir / "backtest_retrieval_log.jsonl"};
}

}  // namespace finrag
