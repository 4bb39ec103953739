// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "finrag/corpus.hpp"

namespace finrag {

// Sorted, duplicate-free set of lowercase tokens.
class TokenSet {
 public:
  TokenSet() = default;
  TokenSet(std::initializer_list<std::string> tokens);
  explicit TokenSet(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  bool contains(std::string_view token) const;
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::size_t intersection_size(const TokenSet& other) const;

  friend bool operator==(const TokenSet&, const TokenSet&) = default;

 private:
  std::vector<std::string> tokens_;
};

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::vector<std::string> words);

  // One token per line; blank lines and lines starting with '#' ignored.
  static StopwordList load(const std::filesystem::path& path);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

TokenSet extract_keywords(std::string_view text, const StopwordList& stopwords);

// Weighted overlap coefficient: w * |x ∩ y| / min(|x|, |y|); 0 if either set
// is empty.
double woc(const TokenSet& x, const TokenSet& y, double w);

// Non-negative weights over the K knowledge sources, summing to 1.
class SourceWeights {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Validates; throws Error(kInvalidArgument) when the invariants fail.
  explicit SourceWeights(std::vector<double> weights);
  static SourceWeights uniform(std::size_t k);

  std::size_t size() const { return weights_.size(); }
  double operator[](SourceId i) const { return weights_[i]; }
  const std::vector<double>& values() const { return weights_; }

  friend bool operator==(const SourceWeights&, const SourceWeights&) = default;

 private:
  std::vector<double> weights_;
};

struct ScoredDocument {
  const Document* document = nullptr;
  double woc = 0.0;
};

struct Context {
  std::vector<ScoredDocument> documents;  // descending woc

  bool empty() const { return documents.empty(); }
  std::set<SourceId> source_usage() const;
};

// Ranking order: woc desc, then timestamp asc, then doc_id asc.
bool ranks_before(const ScoredDocument& a, const ScoredDocument& b);

// Scores the pool with each document's source weight and keeps the best
// min(k_top, |pool|) documents with a positive score. `exclude_id`, when
// nonempty, drops a document from the pool (the query itself).
Context retrieve_top_k(const TokenSet& query, std::span<const Document* const> pool,
                       const SourceWeights& weights, std::size_t k_top,
                       const StopwordList& stopwords, std::string_view exclude_id = {});

// "Human: <instruction>\n\n<query>\n\nContext:\n- <doc>...\n\nAssistant:"
// The Context section is omitted when the context is empty.
std::string build_prompt(std::string_view instruction, std::string_view query_text,
                         const Context& context);

struct RetrievalLogEntry {
  std::string query_id;
  std::string date;
  std::vector<SourceId> sources_used;  // one entry per retrieved document, rank order
  std::vector<double> woc_scores;      // parallel to sources_used
  std::size_t k_returned = 0;
};

RetrievalLogEntry make_log_entry(std::string query_id, Date date, const Context& context);
std::string to_jsonl(std::span<const RetrievalLogEntry> entries);
std::vector<RetrievalLogEntry> parse_retrieval_log(std::string_view jsonl);
std::vector<RetrievalLogEntry> load_retrieval_log(const std::filesystem::path& path);

}  // namespace finrag
