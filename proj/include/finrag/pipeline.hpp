// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "finrag/backtest.hpp"
#include "finrag/config.hpp"
#include "finrag/corpus.hpp"
#include "finrag/dates.hpp"
#include "finrag/feedback.hpp"
#include "finrag/ppo.hpp"
#include "finrag/refine_direct.hpp"
#include "finrag/retrieval.hpp"
#include "finrag/rl_state.hpp"
#include "finrag/sentiment.hpp"

namespace finrag {

// Trading date whose retrieval window holds `ts`: the first D with ts < cutoff(D).
Date exchange_date(Timestamp ts, const ExchangeClock& clock);

// Seed for one (symbol, date, item) task, independent of scheduling order.
std::uint64_t task_seed(std::uint64_t seed, std::string_view symbol, Date date, std::string_view item = {});

// Runs fn(0..n-1) on up to `workers` threads. The first failure by index is
// rethrown after every task has finished.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// One query statement to classify for one symbol on one trading date.
struct QueryTask {
  const Document* query = nullptr;
  std::string symbol;
  Date date{};
};

struct Prediction {
  const InstructionTemplate* instruction = nullptr;
  std::string query_id;
  std::string symbol;
  Date date{};
  std::string query_text;
  TokenSet keywords;
  Context context;
  std::string prompt;
  ProviderResponse response;
};

struct IngestSummary {
  std::size_t documents = 0;
  std::vector<std::size_t> documents_per_source;
  std::vector<std::string> symbols;
  std::optional<std::pair<Timestamp, Timestamp>> coverage;
  std::size_t queries = 0;
  std::size_t price_bars = 0;
  std::vector<std::string> price_symbols;
  std::optional<std::pair<Date, Date>> price_range;
};

struct RefineOutcome {
  RefineMode mode = RefineMode::kNone;
  SourceWeights weights;
  std::vector<WeightSnapshot> history;
  std::vector<FeedbackRecord> feedback;
  std::vector<RetrievalLogEntry> retrieval_log;
  std::vector<TrainingPoint> curve;
  std::optional<ActorCritic> network;
};

class Pipeline {
 public:
  // Loads every input named by the config; nothing is written.
  explicit Pipeline(RunConfig config);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const RunConfig& config() const { return config_; }
  const SourceCatalog& catalog() const { return catalog_; }
  const DocumentStore& corpus() const { return corpus_; }
  const PriceTable& prices() const { return prices_; }
  const ExchangeClock& clock() const { return clock_; }

  SourceWeights initial_weights() const;

  IngestSummary ingest_summary() const;

  // Retrieval plus classification of one statement about `symbol` on `date`.
  Prediction predict(const Document& query, std::string_view symbol, Date date,
                     const SourceWeights& weights, std::mt19937_64& rng) const;
  // Uses `text` when given, else the first query filed for the symbol-day,
  // else the ticker itself.
  Prediction predict(std::string_view symbol, Date date, std::optional<std::string> text,
                     const SourceWeights& weights) const;

  // Query tasks inside [start, end], ordered by (date, symbol, query id).
  std::vector<QueryTask> query_tasks(std::optional<Date> start, std::optional<Date> end) const;

  // Feedback for a prediction, or nullopt when it cannot be judged
  // (unparseable reply, short price history, no next-day bar).
  std::optional<FeedbackRecord> judge(const Prediction& prediction) const;

  RefineOutcome refine(const SourceWeights& initial) const;

  // Daily aggregate score for one symbol-day under `weights`.
  double daily_score(std::string_view symbol, Date date, const SourceWeights& weights,
                     std::vector<RetrievalLogEntry>* log = nullptr) const;
  BacktestReport backtest(const SourceWeights& weights,
                          std::vector<RetrievalLogEntry>* log = nullptr) const;

 private:
  RunConfig config_;
  SourceCatalog catalog_;
  DocumentStore corpus_;
  DocumentStore queries_;
  bool separate_queries_ = false;
  PriceTable prices_;
  StopwordList stopwords_;
  InstructionCatalog instructions_;
  ExchangeClock clock_;
  std::unique_ptr<SentimentProvider> provider_;
};

// Environment over real symbol-day predictions: each step classifies the next
// query task with the action weights and rewards the market verdict.
class PipelineEnvironment final : public Environment {
 public:
  PipelineEnvironment(const Pipeline& pipeline, std::vector<QueryTask> tasks, SourceWeights initial);

  std::size_t source_count() const override { return weights_.size(); }
  std::size_t state_dim() const override;
  Eigen::VectorXd observe() override;
  StepResult step(const SourceWeights& action, std::mt19937_64& rng) override;

  const std::vector<FeedbackRecord>& feedback() const { return feedback_; }
  const std::vector<RetrievalLogEntry>& retrieval_log() const { return log_; }

 private:
  const Pipeline& pipeline_;
  std::vector<QueryTask> tasks_;
  std::size_t cursor_ = 0;
  SourceWeights weights_;
  std::vector<IndicatorFeature> registry_;
  std::vector<FeedbackRecord> feedback_;
  std::vector<RetrievalLogEntry> log_;
};

// Artifact writers; each returns the paths it wrote.
std::vector<std::filesystem::path> write_refine_outputs(const RefineOutcome& outcome, const SourceCatalog& catalog,
                                                        const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_backtest_outputs(const BacktestReport& report,
                                                          std::span<const RetrievalLogEntry> log,
                                                          const std::filesystem::path& dir);

}  // namespace finrag
