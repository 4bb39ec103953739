// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "finrag/retrieval.hpp"

namespace finrag {

enum class SentimentLabel { kNegative = -1, kNeutral = 0, kPositive = 1 };

// positive -> +1, neutral -> 0, negative -> -1.
int score(SentimentLabel label);
std::string_view to_string(SentimentLabel label);
std::optional<SentimentLabel> label_from_string(std::string_view text);

struct InstructionTemplate {
  int id = 0;  // 1-based
  std::string text;
};

class InstructionCatalog {
 public:
  explicit InstructionCatalog(std::vector<std::string> templates);

  // One template per line; blank lines ignored.
  static InstructionCatalog load(const std::filesystem::path& path);

  std::size_t size() const { return templates_.size(); }
  const InstructionTemplate& at(std::size_t index) const { return templates_.at(index); }

  // Uniform draw over the catalog.
  const InstructionTemplate& select(std::mt19937_64& rng) const;

 private:
  std::vector<InstructionTemplate> templates_;
};

// Counts whole-word, case-insensitive occurrences of the three label words and
// returns the strictly most frequent one. nullopt on zero hits or a tie.
std::optional<SentimentLabel> try_parse_sentiment(std::string_view raw);
// As above; throws Error(kUnparseable).
SentimentLabel parse_sentiment(std::string_view raw);

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_map<std::string, int> polarity);

  // `word,polarity` CSV, polarity in {-1, +1}; optional header line.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::string_view csv);

  // Sum of polarities over the tokens of `text` (duplicates count).
  int polarity(std::string_view text) const;
  std::size_t size() const { return polarity_.size(); }

 private:
  std::unordered_map<std::string, int> polarity_;
};

SentimentLabel lexicon_classify(std::string_view text, const Lexicon& lexicon);

struct ProviderResponse {
  std::string raw_text;
  std::optional<SentimentLabel> label;  // present iff parsing succeeded
};

struct ClassificationRequest {
  std::string_view query_text;
  const Context* context = nullptr;
  std::string_view prompt;
};

class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  virtual ProviderResponse classify(const ClassificationRequest& request) = 0;
  virtual std::string_view name() const = 0;
};

// Deterministic stand-in for the language model: lexicon polarity of the query
// text plus every context document.
class LexiconProvider final : public SentimentProvider {
 public:
  explicit LexiconProvider(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}
  ProviderResponse classify(const ClassificationRequest& request) override;
  std::string_view name() const override { return "lexicon"; }

 private:
  Lexicon lexicon_;
};

// Replays recorded completions keyed by query text, so results do not depend
// on call order.
class ScriptedProvider final : public SentimentProvider {
 public:
  ScriptedProvider(std::unordered_map<std::string, std::string> completions,
                   std::optional<std::string> fallback = std::nullopt);

  // Lines of `query text<TAB>completion`; a line `*<TAB>completion` sets the fallback.
  static ScriptedProvider load(const std::filesystem::path& path);

  ProviderResponse classify(const ClassificationRequest& request) override;
  std::string_view name() const override { return "scripted"; }

 private:
  std::unordered_map<std::string, std::string> completions_;
  std::optional<std::string> fallback_;
};

struct RemoteEndpoint {
  std::string url;  // http://host:port/path
  double timeout_seconds = 30.0;
  std::size_t max_in_flight = 4;
};

// POSTs {"prompt": ...} and expects {"completion": ...}. Throws Error(kTransport)
// on network failure, timeout, non-2xx status or a malformed body.
ProviderResponse remote_classify(const RemoteEndpoint& endpoint, std::string_view prompt);

class RemoteProvider final : public SentimentProvider {
 public:
  explicit RemoteProvider(RemoteEndpoint endpoint);
  ProviderResponse classify(const ClassificationRequest& request) override;
  std::string_view name() const override { return "remote"; }

 private:
  RemoteEndpoint endpoint_;
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace finrag
