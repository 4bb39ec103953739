// SPDX-License-Identifier: Apache-2.0
#include "finrag/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "finrag/error.hpp"
#include "finrag/text.hpp"

namespace finrag {

using nlohmann::json;

TokenSet::TokenSet(std::initializer_list<std::string> tokens)
    : TokenSet(std::vector<std::string>(tokens)) {}

TokenSet::TokenSet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::erase(tokens_, std::string{});
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
}

bool TokenSet::contains(std::string_view token) const {
  return std::binary_search(tokens_.begin(), tokens_.end(), token);
}

std::size_t TokenSet::intersection_size(const TokenSet& other) const {
  std::size_t n = 0;
  auto a = tokens_.begin();
  auto b = other.tokens_.begin();
  while (a != tokens_.end() && b != other.tokens_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++n;
      ++a;
      ++b;
    }
  }
  return n;
}

StopwordList::StopwordList(std::vector<std::string> words) {
  for (auto& w : words) {
    for (auto& token : tokenize_words(w)) words_.insert(std::move(token));
  }
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::vector<std::string> words;
  for (const auto& line : read_lines(path)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.emplace_back(t);
  }
  return StopwordList(std::move(words));
}

bool StopwordList::contains(std::string_view word) const {
  return words_.find(std::string(word)) != words_.end();
}

TokenSet extract_keywords(std::string_view text, const StopwordList& stopwords) {
  auto tokens = tokenize_words(text);
  std::erase_if(tokens, [&](const std::string& t) { return stopwords.contains(t); });
  return TokenSet(std::move(tokens));
}

double woc(const TokenSet& x, const TokenSet& y, double w) {
  if (x.empty() || y.empty()) return 0.0;
  const auto shared = static_cast<double>(x.intersection_size(y));
  // ratio first: it never exceeds 1, so the score never exceeds w
  return w * (shared / static_cast<double>(std::min(x.size(), y.size())));
}

SourceWeights::SourceWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorCode::kInvalidArgument, "weights must not be empty");
  double sum = 0.0;
  for (const double w : weights_) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "each weight must lie in [0, 1]");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "weights must sum to 1");
  }
}

SourceWeights SourceWeights::uniform(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "weights must not be empty");
  return SourceWeights(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

std::set<SourceId> Context::source_usage() const {
  std::set<SourceId> out;
  for (const auto& d : documents) out.insert(d.document->source_id);
  return out;
}

bool ranks_before(const ScoredDocument& a, const ScoredDocument& b) {
  if (a.woc != b.woc) return a.woc > b.woc;
  if (a.document->timestamp != b.document->timestamp) {
    return a.document->timestamp < b.document->timestamp;
  }
  return a.document->doc_id < b.document->doc_id;
}

Context retrieve_top_k(const TokenSet& query, std::span<const Document* const> pool,
                       const SourceWeights& weights, std::size_t k_top,
                       const StopwordList& stopwords, std::string_view exclude_id) {
  if (k_top == 0) throw Error(ErrorCode::kInvalidArgument, "k_top must be >= 1");
  std::vector<ScoredDocument> scored;
  scored.reserve(pool.size());
  for (const Document* doc : pool) {
    if (!exclude_id.empty() && doc->doc_id == exclude_id) continue;
    if (doc->source_id >= weights.size()) {
      throw Error(ErrorCode::kSourceIndexOutOfRange,
                  "document '" + doc->doc_id + "' has source " + std::to_string(doc->source_id));
    }
    const double score = woc(query, extract_keywords(doc->text, stopwords), weights[doc->source_id]);
    if (score > 0.0) scored.push_back({doc, score});
  }
  const auto keep = std::min(k_top, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    ranks_before);
  scored.resize(keep);
  return Context{std::move(scored)};
}

std::string build_prompt(std::string_view instruction, std::string_view query_text,
                         const Context& context) {
  std::string prompt = "Human: ";
  prompt += instruction;
  prompt += "\n\n";
  prompt += query_text;
  prompt += "\n\n";
  if (!context.empty()) {
    prompt += "Context:\n";
    for (const auto& d : context.documents) {
      prompt += "- ";
      prompt += d.document->text;
      prompt += '\n';
    }
    prompt += '\n';
  }
  prompt += "Assistant:";
  return prompt;
}

RetrievalLogEntry make_log_entry(std::string query_id, Date date, const Context& context) {
  RetrievalLogEntry entry;
  entry.query_id = std::move(query_id);
  entry.date = format_date(date);
  for (const auto& d : context.documents) {
    entry.sources_used.push_back(d.document->source_id);
    entry.woc_scores.push_back(d.woc);
  }
  entry.k_returned = context.documents.size();
  return entry;
}

std::string to_jsonl(std::span<const RetrievalLogEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    json record;
    record["query_id"] = e.query_id;
    record["date"] = e.date;
    record["sources_used"] = e.sources_used;
    record["k_returned"] = e.k_returned;
    record["woc_scores"] = e.woc_scores;
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<RetrievalLogEntry> parse_retrieval_log(std::string_view jsonl) {
  std::vector<RetrievalLogEntry> entries;
  std::size_t line_no = 0;
  for (const auto raw : split(jsonl, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    try {
      const auto record = json::parse(line);
      RetrievalLogEntry e;
      e.query_id = record.at("query_id").get<std::string>();
      e.date = record.at("date").get<std::string>();
      e.sources_used = record.at("sources_used").get<std::vector<SourceId>>();
      e.k_returned = record.at("k_returned").get<std::size_t>();
      if (record.contains("woc_scores")) e.woc_scores = record["woc_scores"].get<std::vector<double>>();
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kBadRecord, std::string("retrieval log: ") + ex.what(), line_no);
    }
  }
  return entries;
}

std::vector<RetrievalLogEntry> load_retrieval_log(const std::filesystem::path& path) {
  return parse_retrieval_log(read_file(path));
}

}  // namespace finrag
