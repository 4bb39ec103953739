// SPDX-License-Identifier: Apache-2.0
#include "finrag/sentiment.hpp"

#include <array>
#include <cctype>

#include "finrag/error.hpp"
#include "finrag/text.hpp"

namespace finrag {

int score(SentimentLabel label) { return static_cast<int>(label); }

std::string_view to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::kPositive: return "positive";
    case SentimentLabel::kNeutral: return "neutral";
    case SentimentLabel::kNegative: return "negative";
  }
  return "neutral";
}

std::optional<SentimentLabel> label_from_string(std::string_view text) {
  if (text == "positive") return SentimentLabel::kPositive;
  if (text == "neutral") return SentimentLabel::kNeutral;
  if (text == "negative") return SentimentLabel::kNegative;
  return std::nullopt;
}

InstructionCatalog::InstructionCatalog(std::vector<std::string> templates) {
  if (templates.empty()) throw Error(ErrorCode::kConfig, "instruction catalog is empty");
  int id = 1;
  for (auto& t : templates) templates_.push_back({id++, std::move(t)});
}

InstructionCatalog InstructionCatalog::load(const std::filesystem::path& path) {
  std::vector<std::string> templates;
  for (const auto& line : read_lines(path)) {
    const auto t = trim(line);
    if (!t.empty()) templates.emplace_back(t);
  }
  return InstructionCatalog(std::move(templates));
}

const InstructionTemplate& InstructionCatalog::select(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, templates_.size() - 1);
  return templates_[pick(rng)];
}

std::optional<SentimentLabel> try_parse_sentiment(std::string_view raw) {
  auto exact = trim(raw);
  while (!exact.empty() && (exact.back() == '.' || exact.back() == '!')) exact.remove_suffix(1);
  if (exact.size() <= 8) {
    std::string lowered(exact);
    for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (auto label = label_from_string(lowered)) return label;
  }

  std::array<int, 3> counts{};  // negative, neutral, positive
  for (const auto& token : tokenize_words(raw)) {
    if (const auto label = label_from_string(token)) ++counts[score(*label) + 1];
  }
  int best = -1;
  int best_count = 0;
  bool tie = false;
  for (int i = 0; i < 3; ++i) {
    if (counts[i] > best_count) {
      best = i;
      best_count = counts[i];
      tie = false;
    } else if (counts[i] == best_count && best_count > 0) {
      tie = true;
    }
  }
  if (best < 0 || tie) return std::nullopt;
  return static_cast<SentimentLabel>(best - 1);
}

SentimentLabel parse_sentiment(std::string_view raw) {
  if (auto label = try_parse_sentiment(raw)) return *label;
  std::string excerpt(raw.substr(0, 80));
  throw Error(ErrorCode::kUnparseable, "no predominant sentiment keyword in '" + excerpt + "'");
}

Lexicon::Lexicon(std::unordered_map<std::string, int> polarity) : polarity_(std::move(polarity)) {}

Lexicon Lexicon::parse(std::string_view csv) {
  std::unordered_map<std::string, int> polarity;
  std::size_t line_no = 0;
  for (const auto raw : split(csv, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw Error(ErrorCode::kBadRecord, "expected word,polarity", line_no);
    const auto word = trim(fields[0]);
    const auto pol = trim(fields[1]);
    if (line_no == 1 && word == "word") continue;
    int value = 0;
    if (pol == "1" || pol == "+1") value = 1;
    else if (pol == "-1") value = -1;
    else throw Error(ErrorCode::kBadRecord, "polarity must be -1 or +1", line_no);
    const auto tokens = tokenize_words(word);
    if (tokens.size() != 1) throw Error(ErrorCode::kBadRecord, "lexicon entry must be one word", line_no);
    polarity[tokens.front()] = value;
  }
  return Lexicon(std::move(polarity));
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return parse(read_file(path)); }

int Lexicon::polarity(std::string_view text) const {
  int sum = 0;
  for (const auto& token : tokenize_words(text)) {
    if (const auto it = polarity_.find(token); it != polarity_.end()) sum += it->second;
  }
  return sum;
}

SentimentLabel lexicon_classify(std::string_view text, const Lexicon& lexicon) {
  const int sum = lexicon.polarity(text);
  if (sum > 0) return SentimentLabel::kPositive;
  if (sum < 0) return SentimentLabel::kNegative;
  return SentimentLabel::kNeutral;
}

ProviderResponse LexiconProvider::classify(const ClassificationRequest& request) {
  int sum = lexicon_.polarity(request.query_text);
  if (request.context) {
    for (const auto& d : request.context->documents) sum += lexicon_.polarity(d.document->text);
  }
  const auto label = sum > 0 ? SentimentLabel::kPositive
                     : sum < 0 ? SentimentLabel::kNegative
                               : SentimentLabel::kNeutral;
  return {std::string(to_string(label)), label};
}

ScriptedProvider::ScriptedProvider(std::unordered_map<std::string, std::string> completions,
                                   std::optional<std::string> fallback)
    : completions_(std::move(completions)), fallback_(std::move(fallback)) {}

ScriptedProvider ScriptedProvider::load(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> completions;
  std::optional<std::string> fallback;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::kBadRecord, "expected query<TAB>completion", line_no);
    auto key = line.substr(0, tab);
    auto value = line.substr(tab + 1);
    if (key == "*") fallback = std::move(value);
    else completions[std::move(key)] = std::move(value);
  }
  return ScriptedProvider(std::move(completions), std::move(fallback));
}

ProviderResponse ScriptedProvider::classify(const ClassificationRequest& request) {
  std::string raw;
  if (const auto it = completions_.find(std::string(request.query_text)); it != completions_.end()) {
    raw = it->second;
  } else if (fallback_) {
    raw = *fallback_;
  } else {
    throw Error(ErrorCode::kTransport, "no scripted completion for '" + std::string(request.query_text) + "'");
  }
  auto label = try_parse_sentiment(raw);
  return {std::move(raw), label};
}

}  // namespace finrag
