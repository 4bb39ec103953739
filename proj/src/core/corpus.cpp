// SPDX-License-Identifier: Apache-2.0
#include "finrag/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "finrag/error.hpp"
#include "finrag/text.hpp"

namespace finrag {

using nlohmann::json;

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kNews: return "news";
    case SourceKind::kSocial: return "social";
    case SourceKind::kResearch: return "research";
  }
  return "news";
}

std::string_view to_string(Accessibility access) {
  switch (access) {
    case Accessibility::kFree: return "free";
    case Accessibility::kFreemium: return "freemium";
    case Accessibility::kSubscription: return "subscription";
  }
  return "free";
}

// ---------------------------------------------------------------------------
// SourceCatalog

SourceCatalog::SourceCatalog(std::vector<KnowledgeSource> sources) : sources_(std::move(sources)) {
  if (sources_.empty()) throw Error(ErrorCode::kConfig, "source catalog must not be empty");
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    auto& s = sources_[i];
    s.id = i;
    if (s.name.empty()) throw Error(ErrorCode::kConfig, "source name must not be empty");
    if (!by_name_.emplace(s.name, i).second) {
      throw Error(ErrorCode::kConfig, "duplicate source name '" + s.name + "'");
    }
  }
}

SourceCatalog SourceCatalog::parse(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("source catalog: ") + e.what());
  }
  if (!root.is_array()) throw Error(ErrorCode::kConfig, "source catalog must be a JSON array");
  std::vector<KnowledgeSource> sources;
  for (const auto& entry : root) {
    KnowledgeSource s;
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string()) {
      throw Error(ErrorCode::kConfig, "source catalog entry needs a string 'name'");
    }
    s.name = entry["name"].get<std::string>();
    const auto kind = entry.value("kind", std::string("news"));
    if (kind == "news") s.kind = SourceKind::kNews;
    else if (kind == "social") s.kind = SourceKind::kSocial;
    else if (kind == "research") s.kind = SourceKind::kResearch;
    else throw Error(ErrorCode::kConfig, "unknown source kind '" + kind + "'");
    const auto access = entry.value("accessibility", std::string("free"));
    if (access == "free") s.accessibility = Accessibility::kFree;
    else if (access == "freemium") s.accessibility = Accessibility::kFreemium;
    else if (access == "subscription") s.accessibility = Accessibility::kSubscription;
    else throw Error(ErrorCode::kConfig, "unknown accessibility '" + access + "'");
    sources.push_back(std::move(s));
  }
  return SourceCatalog(std::move(sources));
}

SourceCatalog SourceCatalog::load(const std::filesystem::path& path) { return parse(read_file(path)); }

SourceCatalog SourceCatalog::synthetic(std::size_t k) {
  std::vector<KnowledgeSource> sources(k);
  for (std::size_t i = 0; i < k; ++i) sources[i].name = "source" + std::to_string(i);
  return SourceCatalog(std::move(sources));
}

const KnowledgeSource& SourceCatalog::at(SourceId id) const {
  if (id >= sources_.size()) {
    throw Error(ErrorCode::kSourceIndexOutOfRange, "source id " + std::to_string(id));
  }
  return sources_[id];
}

std::optional<SourceId> SourceCatalog::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Documents

bool Document::mentions(std::string_view symbol) const {
  return std::binary_search(symbols.begin(), symbols.end(), symbol);
}

namespace {

bool doc_less(const Document& a, const Document& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.doc_id < b.doc_id;
}

const json& require(const json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end() || it->is_null()) {
    throw Error(ErrorCode::kMissingField, std::string("missing \"") + field + "\"", line);
  }
  return *it;
}

std::string require_string(const json& record, const char* field, std::size_t line) {
  const auto& v = require(record, field, line);
  if (!v.is_string()) {
    throw Error(ErrorCode::kBadRecord, std::string("\"") + field + "\" must be a string", line);
  }
  return v.get<std::string>();
}

// Shared by corpus and query records; `id_field` differs, queries have no source.
template <typename SourceLookup>
DocumentStore parse_records(std::string_view jsonl, const char* id_field, SourceLookup&& lookup) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  for (const auto raw_line : split(jsonl, '\n')) {
    ++line_no;
    const auto line = trim(raw_line);
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kBadRecord, std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw Error(ErrorCode::kBadRecord, "record must be an object", line_no);

    Document doc;
    doc.doc_id = require_string(record, id_field, line_no);
    if (doc.doc_id.empty()) throw Error(ErrorCode::kBadRecord, "empty id", line_no);
    doc.source_id = lookup(record, line_no);
    const auto ts = require_string(record, "timestamp", line_no);
    try {
      doc.timestamp = parse_rfc3339(ts);
    } catch (const Error& e) {
      throw Error(ErrorCode::kBadTimestamp, "unparseable timestamp '" + ts + "'", line_no);
    }
    const auto& symbols = require(record, "symbols", line_no);
    if (!symbols.is_array()) throw Error(ErrorCode::kBadRecord, "\"symbols\" must be an array", line_no);
    for (const auto& s : symbols) {
      if (!s.is_string() || s.get<std::string>().empty()) {
        throw Error(ErrorCode::kBadRecord, "symbols must be nonempty strings", line_no);
      }
      doc.symbols.push_back(s.get<std::string>());
    }
    doc.text = require_string(record, "text", line_no);
    if (doc.text.empty()) throw Error(ErrorCode::kMissingField, "\"text\" is empty", line_no);
    docs.push_back(std::move(doc));
  }
  // duplicate ids are reported against the second occurrence
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!seen.emplace(docs[i].doc_id, i).second) {
      throw Error(ErrorCode::kBadRecord, "duplicate id '" + docs[i].doc_id + "'");
    }
  }
  return DocumentStore(std::move(docs));
}

}  // namespace

DocumentStore::DocumentStore(std::vector<Document> documents) : documents_(std::move(documents)) {
  for (auto& d : documents_) {
    std::sort(d.symbols.begin(), d.symbols.end());
    d.symbols.erase(std::unique(d.symbols.begin(), d.symbols.end()), d.symbols.end());
  }
  build_indices();
}

void DocumentStore::build_indices() {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& d = documents_[i];
    if (!by_id_.emplace(d.doc_id, i).second) {
      throw Error(ErrorCode::kBadRecord, "duplicate id '" + d.doc_id + "'");
    }
    for (const auto& s : d.symbols) by_symbol_[s].push_back(i);
    if (d.source_id != kNoSource) by_source_[d.source_id].push_back(i);
  }
  const auto order = [this](std::size_t a, std::size_t b) {
    return doc_less(documents_[a], documents_[b]);
  };
  for (auto& [_, idx] : by_symbol_) std::sort(idx.begin(), idx.end(), order);
  for (auto& [_, idx] : by_source_) std::sort(idx.begin(), idx.end(), order);
}

DocumentStore DocumentStore::parse(std::string_view jsonl, const SourceCatalog& catalog) {
  return parse_records(jsonl, "doc_id", [&](const json& record, std::size_t line) {
    const auto name = require_string(record, "source", line);
    const auto id = catalog.find(name);
    if (!id) throw Error(ErrorCode::kUnknownSource, "unknown source '" + name + "'", line);
    return *id;
  });
}

DocumentStore DocumentStore::load(const std::filesystem::path& path, const SourceCatalog& catalog) {
  return parse(read_file(path), catalog);
}

DocumentStore DocumentStore::parse_queries(std::string_view jsonl) {
  return parse_records(jsonl, "query_id", [](const json&, std::size_t) { return kNoSource; });
}

DocumentStore DocumentStore::load_queries(const std::filesystem::path& path) {
  return parse_queries(read_file(path));
}

const Document* DocumentStore::find(std::string_view doc_id) const {
  const auto it = by_id_.find(std::string(doc_id));
  return it == by_id_.end() ? nullptr : &documents_[it->second];
}

std::vector<const Document*> DocumentStore::by_symbol(std::string_view symbol) const {
  std::vector<const Document*> out;
  if (const auto it = by_symbol_.find(symbol); it != by_symbol_.end()) {
    for (const auto i : it->second) out.push_back(&documents_[i]);
  }
  return out;
}

std::vector<const Document*> DocumentStore::by_source(SourceId source) const {
  std::vector<const Document*> out;
  if (const auto it = by_source_.find(source); it != by_source_.end()) {
    for (const auto i : it->second) out.push_back(&documents_[i]);
  }
  return out;
}

std::vector<const Document*> DocumentStore::candidate_pool(std::string_view symbol, Date date,
                                                           const ExchangeClock& clock,
                                                           int lookback_days) const {
  if (lookback_days < 0) throw Error(ErrorCode::kInvalidArgument, "lookback_days must be >= 0");
  std::vector<const Document*> out;
  const auto it = by_symbol_.find(symbol);
  if (it == by_symbol_.end()) return out;
  const auto begin = clock.cutoff_instant(add_days(date, -lookback_days));
  const auto end = clock.cutoff_instant(date);
  const auto& idx = it->second;
  auto first = std::lower_bound(idx.begin(), idx.end(), begin, [this](std::size_t i, Timestamp t) {
    return documents_[i].timestamp < t;
  });
  for (; first != idx.end() && documents_[*first].timestamp < end; ++first) {
    out.push_back(&documents_[*first]);
  }
  return out;
}

std::vector<std::string> DocumentStore::symbols() const {
  std::vector<std::string> out;
  for (const auto& [s, _] : by_symbol_) out.push_back(s);
  return out;
}

std::optional<std::pair<Timestamp, Timestamp>> DocumentStore::coverage() const {
  if (documents_.empty()) return std::nullopt;
  auto [lo, hi] = std::minmax_element(documents_.begin(), documents_.end(),
                                      [](const Document& a, const Document& b) {
                                        return a.timestamp < b.timestamp;
                                      });
  return std::make_pair(lo->timestamp, hi->timestamp);
}

std::string DocumentStore::to_jsonl(const SourceCatalog& catalog) const {
  std::string out;
  for (const auto& d : documents_) {
    json record;
    if (d.source_id == kNoSource) {
      record["query_id"] = d.doc_id;
    } else {
      record["doc_id"] = d.doc_id;
      record["source"] = catalog.at(d.source_id).name;
    }
    record["timestamp"] = format_rfc3339(d.timestamp);
    record["symbols"] = d.symbols;
    record["text"] = d.text;
    out += record.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prices

PriceTable::PriceTable(const std::vector<DailyBar>& bars) {
  for (const auto& b : bars) {
    if (!(b.open > 0.0)) {
      throw Error(ErrorCode::kNonPositivePrice,
                  b.symbol + " " + format_date(b.date) + " open must be > 0");
    }
    bars_[b.symbol].push_back({b.date, b.open});
  }
  for (auto& [symbol, series] : bars_) {
    std::sort(series.begin(), series.end(),
              [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].date == series[i - 1].date) {
        throw Error(ErrorCode::kDuplicateBar, symbol + " " + format_date(series[i].date));
      }
    }
  }
}

PriceTable PriceTable::parse(std::string_view csv) {
  std::vector<DailyBar> bars;
  std::set<std::pair<std::string, int>> seen;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (const auto raw_line : split(csv, '\n')) {
    ++line_no;
    const auto line = trim(raw_line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() != 3 || trim(fields[0]) != "date" || trim(fields[1]) != "symbol" ||
          trim(fields[2]) != "open") {
        throw Error(ErrorCode::kBadRecord, "expected header 'date,symbol,open'", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw Error(ErrorCode::kBadRecord, "expected 3 fields", line_no);
    DailyBar bar;
    try {
      bar.date = parse_date(trim(fields[0]));
    } catch (const Error& e) {
      throw Error(ErrorCode::kBadTimestamp, "bad date '" + std::string(fields[0]) + "'", line_no);
    }
    bar.symbol = std::string(trim(fields[1]));
    if (bar.symbol.empty()) throw Error(ErrorCode::kBadRecord, "empty symbol", line_no);
    try {
      bar.open = parse_double(fields[2], "open");
    } catch (const Error& e) {
      throw Error(ErrorCode::kBadRecord, e.what(), line_no);
    }
    if (!(bar.open > 0.0)) {
      throw Error(ErrorCode::kNonPositivePrice, "open must be > 0", line_no);
    }
    const int day_index = static_cast<int>(std::chrono::sys_days{bar.date}.time_since_epoch().count());
    if (!seen.emplace(bar.symbol, day_index).second) {
      throw Error(ErrorCode::kDuplicateBar, bar.symbol + " " + format_date(bar.date), line_no);
    }
    bars.push_back(std::move(bar));
  }
  return PriceTable(bars);
}

PriceTable PriceTable::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::size_t PriceTable::bar_count() const {
  std::size_t n = 0;
  for (const auto& [_, s] : bars_) n += s.size();
  return n;
}

std::vector<std::string> PriceTable::symbols() const {
  std::vector<std::string> out;
  for (const auto& [s, _] : bars_) out.push_back(s);
  return out;
}

bool PriceTable::has_symbol(std::string_view symbol) const { return bars_.find(symbol) != bars_.end(); }

std::span<const PriceTable::Bar> PriceTable::series(std::string_view symbol) const {
  const auto it = bars_.find(symbol);
  if (it == bars_.end()) return {};
  return it->second;
}

namespace {

const PriceTable::Bar* find_bar(std::span<const PriceTable::Bar> s, Date date) {
  const auto it = std::lower_bound(s.begin(), s.end(), date,
                                   [](const PriceTable::Bar& b, Date d) { return b.date < d; });
  return (it != s.end() && it->date == date) ? &*it : nullptr;
}

}  // namespace

std::optional<double> PriceTable::open(std::string_view symbol, Date date) const {
  const auto* bar = find_bar(series(symbol), date);
  if (!bar) return std::nullopt;
  return bar->open;
}

std::optional<Date> PriceTable::previous_date(std::string_view symbol, Date date) const {
  const auto s = series(symbol);
  const auto it = std::lower_bound(s.begin(), s.end(), date,
                                   [](const Bar& b, Date d) { return b.date < d; });
  if (it == s.begin()) return std::nullopt;
  return std::prev(it)->date;
}

std::optional<Date> PriceTable::next_date(std::string_view symbol, Date date) const {
  const auto s = series(symbol);
  const auto it = std::upper_bound(s.begin(), s.end(), date,
                                   [](Date d, const Bar& b) { return d < b.date; });
  if (it == s.end()) return std::nullopt;
  return it->date;
}

std::vector<Date> PriceTable::trading_dates(std::span<const std::string> symbols, Date start,
                                            Date end) const {
  std::set<Date> dates;
  for (const auto& sym : symbols) {
    for (const auto& bar : series(sym)) {
      if (bar.date >= start && bar.date <= end) dates.insert(bar.date);
    }
  }
  return {dates.begin(), dates.end()};
}

ReturnSeries PriceTable::return_series(std::string_view symbol) const {
  ReturnSeries out{std::string(symbol), {}};
  const auto s = series(symbol);
  for (std::size_t i = 1; i < s.size(); ++i) {
    out.entries.emplace_back(s[i].date, s[i].open / s[i - 1].open - 1.0);
  }
  return out;
}

std::vector<double> PriceTable::returns_up_to(std::string_view symbol, Date date) const {
  std::vector<double> out;
  const auto s = series(symbol);
  for (std::size_t i = 1; i < s.size() && s[i].date <= date; ++i) {
    out.push_back(s[i].open / s[i - 1].open - 1.0);
  }
  return out;
}

std::vector<double> PriceTable::opens_up_to(std::string_view symbol, Date date) const {
  std::vector<double> out;
  for (const auto& bar : series(symbol)) {
    if (bar.date > date) break;
    out.push_back(bar.open);
  }
  return out;
}

double daily_return(const PriceTable& prices, std::string_view symbol, Date date) {
  const auto today = prices.open(symbol, date);
  if (!today) {
    throw Error(ErrorCode::kMissingBar, std::string(symbol) + " has no bar on " + format_date(date));
  }
  const auto prev = prices.previous_date(symbol, date);
  if (!prev) {
    throw Error(ErrorCode::kMissingBar,
                std::string(symbol) + " has no bar before " + format_date(date));
  }
  return *today / *prices.open(symbol, *prev) - 1.0;
}

}  // namespace finrag
