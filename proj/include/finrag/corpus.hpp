// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "finrag/dates.hpp"

namespace finrag {

using SourceId = std::size_t;
inline constexpr SourceId kNoSource = std::numeric_limits<SourceId>::max();

enum class SourceKind { kNews, kSocial, kResearch };
enum class Accessibility { kFree, kFreemium, kSubscription };

std::string_view to_string(SourceKind kind);
std::string_view to_string(Accessibility access);

struct KnowledgeSource {
  SourceId id = 0;
  std::string name;
  SourceKind kind = SourceKind::kNews;
  Accessibility accessibility = Accessibility::kFree;
};

// Ordered set of knowledge sources; declaration order defines the ids.
class SourceCatalog {
 public:
  SourceCatalog() = default;
  explicit SourceCatalog(std::vector<KnowledgeSource> sources);

  // JSON array of {"name", "kind", "accessibility"} objects.
  static SourceCatalog load(const std::filesystem::path& path);
  static SourceCatalog parse(std::string_view json_text);
  // Anonymous catalog "source0".."source{k-1}" for synthetic runs.
  static SourceCatalog synthetic(std::size_t k);

  std::size_t size() const { return sources_.size(); }
  const KnowledgeSource& at(SourceId id) const;
  std::optional<SourceId> find(std::string_view name) const;
  std::span<const KnowledgeSource> sources() const { return sources_; }

 private:
  std::vector<KnowledgeSource> sources_;
  std::unordered_map<std::string, SourceId> by_name_;
};

struct Document {
  std::string doc_id;
  SourceId source_id = kNoSource;  // kNoSource for query statements
  Timestamp timestamp{};
  std::vector<std::string> symbols;  // sorted, unique
  std::string text;

  bool mentions(std::string_view symbol) const;
};

// Immutable after construction; lookups return pointers into the store.
class DocumentStore {
 public:
  DocumentStore() = default;
  explicit DocumentStore(std::vector<Document> documents);

  // Corpus JSONL: {"doc_id", "source", "timestamp", "symbols", "text"}.
  static DocumentStore load(const std::filesystem::path& path, const SourceCatalog& catalog);
  static DocumentStore parse(std::string_view jsonl, const SourceCatalog& catalog);
  // Query JSONL: {"query_id", "timestamp", "symbols", "text"}; no source.
  static DocumentStore load_queries(const std::filesystem::path& path);
  static DocumentStore parse_queries(std::string_view jsonl);

  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  std::span<const Document> documents() const { return documents_; }
  const Document* find(std::string_view doc_id) const;

  // Ordered by (timestamp, doc_id).
  std::vector<const Document*> by_symbol(std::string_view symbol) const;
  std::vector<const Document*> by_source(SourceId source) const;

  // Documents mentioning `symbol` timestamped in
  // [cutoff(date - lookback_days), cutoff(date)), ordered by (timestamp, doc_id).
  std::vector<const Document*> candidate_pool(std::string_view symbol, Date date,
                                              const ExchangeClock& clock,
                                              int lookback_days = 1) const;

  std::vector<std::string> symbols() const;
  std::optional<std::pair<Timestamp, Timestamp>> coverage() const;

  std::string to_jsonl(const SourceCatalog& catalog) const;

 private:
  void build_indices();

  std::vector<Document> documents_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_symbol_;
  std::map<SourceId, std::vector<std::size_t>> by_source_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct DailyBar {
  Date date;
  std::string symbol;
  double open = 0.0;
};

struct ReturnSeries {
  std::string symbol;
  std::vector<std::pair<Date, double>> entries;  // strictly increasing dates
};

class PriceTable {
 public:
  struct Bar {
    Date date;
    double open;
  };

  PriceTable() = default;
  explicit PriceTable(const std::vector<DailyBar>& bars);

  // CSV with header `date,symbol,open`.
  static PriceTable load(const std::filesystem::path& path);
  static PriceTable parse(std::string_view csv);

  std::size_t bar_count() const;
  std::vector<std::string> symbols() const;
  bool has_symbol(std::string_view symbol) const;
  std::span<const Bar> series(std::string_view symbol) const;

  std::optional<double> open(std::string_view symbol, Date date) const;
  std::optional<Date> previous_date(std::string_view symbol, Date date) const;
  std::optional<Date> next_date(std::string_view symbol, Date date) const;

  // Union of bar dates for `symbols` within [start, end], ascending.
  std::vector<Date> trading_dates(std::span<const std::string> symbols, Date start, Date end) const;

  ReturnSeries return_series(std::string_view symbol) const;
  // Daily returns dated on or before `date`, oldest first.
  std::vector<double> returns_up_to(std::string_view symbol, Date date) const;
  std::vector<double> opens_up_to(std::string_view symbol, Date date) const;

 private:
  std::map<std::string, std::vector<Bar>, std::less<>> bars_;
};

// open(T) / open(T-1) - 1 where T-1 is the latest bar strictly before T.
double daily_return(const PriceTable& prices, std::string_view symbol, Date date);

}  // namespace finrag
