// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "finrag/error.hpp"
#include "finrag/sentiment.hpp"
#include "synthetic.hpp"

using namespace finrag;

TEST_CASE("label score mapping") {
  CHECK(score(SentimentLabel::kPositive) == 1);
  CHECK(score(SentimentLabel::kNeutral) == 0);
  CHECK(score(SentimentLabel::kNegative) == -1);
  for (auto l : {SentimentLabel::kPositive, SentimentLabel::kNeutral, SentimentLabel::kNegative}) {
    CHECK(label_from_string(to_string(l)) == l);
  }
}

TEST_CASE("shipped instruction catalog") {
  const auto catalog = InstructionCatalog::load(synth::data_dir() / "instructions.txt");
  REQUIRE(catalog.size() == 10);
  CHECK(catalog.at(0).id == 1);
  CHECK(catalog.at(9).id == 10);
  bool found = false;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    found = found || catalog.at(i).text.find("Identify the sentiment (positive, negative, neutral)") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("instruction selection is seeded and uniform") {
  const auto catalog = InstructionCatalog::load(synth::data_dir() / "instructions.txt");
  std::mt19937_64 a(99), b(99);
  CHECK(catalog.select(a).id == catalog.select(b).id);
  CHECK(catalog.select(a).id == catalog.select(b).id);

  std::mt19937_64 rng(1);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 10000; ++i) ++counts[catalog.select(rng).id - 1];
  const double sigma = std::sqrt(10000 * 0.1 * 0.9);
  for (int c : counts) CHECK(std::abs(c - 1000) <= 3 * sigma);

  const InstructionCatalog single({"only"});
  for (int i = 0; i < 20; ++i) CHECK(single.select(rng).text == "only");
}

TEST_CASE("keyword parser") {
  CHECK(parse_sentiment("negative") == SentimentLabel::kNegative);
  CHECK(parse_sentiment("The sentiment is positive because positive earnings...") == SentimentLabel::kPositive);
  CHECK_THROWS_AS(parse_sentiment("positive or negative"), Error);
  CHECK_FALSE(try_parse_sentiment("no verdict here"));
  CHECK(try_parse_sentiment("NEUTRAL.") == SentimentLabel::kNeutral);
  // whole words only
  CHECK_FALSE(try_parse_sentiment("positively nonnegative"));
  try {
    parse_sentiment("");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnparseable);
  }
}

TEST_CASE("keyword parser is total on random bytes") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 64);
  const std::vector<std::string> words{"positive", "negative", "neutral", " ", "x"};
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const int n = len(rng);
    for (int j = 0; j < n; ++j) {
      if (rng() % 4 == 0) s += words[rng() % words.size()];
      else s += static_cast<char>(byte(rng));
    }
    CHECK_NOTHROW(try_parse_sentiment(s));
  }
}

TEST_CASE("lexicon classification") {
  const Lexicon lex({{"beats", 1}, {"soars", 1}, {"misses", -1}});
  CHECK(lexicon_classify("beats soars", lex) == SentimentLabel::kPositive);
  CHECK(lexicon_classify("nothing here", lex) == SentimentLabel::kNeutral);
  CHECK(lexicon_classify("beats misses", lex) == SentimentLabel::kNeutral);
  CHECK(lexicon_classify("Misses, misses and beats", lex) == SentimentLabel::kNegative);
  CHECK_THROWS_AS(Lexicon::parse("word,polarity\nup,2\n"), Error);
}

TEST_CASE("lexicon classification ignores word order") {
  const auto lex = Lexicon::load(synth::data_dir() / "lexicon.csv");
  CHECK(lex.size() > 100);
  std::mt19937_64 rng(8);
  std::vector<std::string> words{"beat", "rally", "strong", "decline", "worries", "lawsuit", "plunge", "surge",
                                 "company", "quarter", "misses", "the"};
  for (int i = 0; i < 500; ++i) {
    std::vector<std::string> pick;
    for (int j = 0; j < 6; ++j) pick.push_back(words[rng() % words.size()]);
    std::string a, b;
    for (const auto& w : pick) a += w + " ";
    std::shuffle(pick.begin(), pick.end(), rng);
    for (const auto& w : pick) b += w + " ";
    CHECK(lexicon_classify(a, lex) == lexicon_classify(b, lex));
  }
}

TEST_CASE("lexicon provider reads query and context") {
  const Lexicon lex({{"surge", 1}, {"plunge", -1}});
  LexiconProvider provider(lex);
  Document d;
  d.text = "plunge plunge";
  Context ctx;
  ctx.documents = {{&d, 1.0}};
  const auto r = provider.classify({"shares surge", &ctx, "prompt"});
  CHECK(r.label == SentimentLabel::kNegative);
  CHECK(r.raw_text == "negative");
  CHECK(provider.classify({"shares surge", nullptr, "prompt"}).label == SentimentLabel::kPositive);
}

TEST_CASE("scripted provider replays by query text") {
  ScriptedProvider provider({{"q1", "I think positive"}, {"q2", "hmm"}}, std::string("neutral"));
  CHECK(provider.classify({"q1", nullptr, ""}).label == SentimentLabel::kPositive);
  const auto r = provider.classify({"q2", nullptr, ""});
  CHECK(r.raw_text == "hmm");
  CHECK_FALSE(r.label);
  CHECK(provider.classify({"other", nullptr, ""}).label == SentimentLabel::kNeutral);
  ScriptedProvider strict(std::unordered_map<std::string, std::string>{{"q1", "positive"}});
  CHECK_THROWS_AS(strict.classify({"missing", nullptr, ""}), Error);
}
