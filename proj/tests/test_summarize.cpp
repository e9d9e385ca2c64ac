#include <doctest.h>

#include <cmath>
#include <sstream>

#include "depsum/embed.hpp"
#include "depsum/rng.hpp"
#include "depsum/summarize.hpp"
#include "depsum/tokenize.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace depsum;
using namespace depsum::summarize;
using embed::EmbeddingVector;

namespace {

std::string words(std::size_t count, const std::string& prefix = "w") {
  std::string s;
  for (std::size_t i = 0; i < count; ++i) s += (i ? " " : "") + prefix + std::to_string(i);
  return s;
}

text::TokenList flatten(const std::vector<text::TokenList>& chunks) {
  text::TokenList out;
  for (const auto& c : chunks) out.insert(out.end(), c.begin(), c.end());
  return out;
}

CandidatePhrase cand(std::string text, std::vector<double> v, std::size_t pos) {
  CandidatePhrase c;
  c.text = std::move(text);
  c.embedding = EmbeddingVector(std::move(v));
  c.position = pos;
  return c;
}

std::vector<std::string> texts(const std::vector<CandidatePhrase>& v) {
  std::vector<std::string> out;
  for (const auto& c : v) out.push_back(c.text);
  return out;
}

}  // namespace

TEST_SUITE("summarize") {

TEST_CASE("chunk_document examples") {
  CHECK(chunk_document(words(100), 512) == std::vector<std::string>{words(100)});

  const std::vector<std::string> one{words(1000)};
  const auto chunks = chunk_tokens(one, 480);
  CHECK(chunks.size() >= 3);
  for (const auto& c : chunks) CHECK(c.size() <= 480);
  CHECK(flatten(chunks) == text::tweet_tokenize(one[0]));

  const std::vector<std::string> two{words(300, "a"), words(300, "b")};
  const auto parts = chunk_document(two, 480);
  CHECK(parts == two);
}

TEST_CASE("chunking packs whole sentences greedily") {
  const std::vector<std::string> s{words(200, "a"), words(200, "b"), words(200, "c"), words(50, "d")};
  const auto parts = chunk_tokens(s, 480);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].size() == 400);
  CHECK(parts[1].size() == 250);
  CHECK(chunk_tokens(std::vector<std::string>{}, 10).empty());
  CHECK(chunk_tokens(std::vector<std::string>{"", "  ..."}, 10).empty());
  CHECK_ERROR_CODE(chunk_tokens(s, 0), ErrorCode::ArgumentError);
}

TEST_CASE("chunking partitions tokens for random documents") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> sentences;
    for (int i = rng.range(0, 12); i > 0; --i)
      sentences.push_back(words(static_cast<std::size_t>(rng.range(0, 300)), "t" + std::to_string(i) + "_"));
    const std::size_t max_tokens = static_cast<std::size_t>(rng.range(1, 200));
    const auto chunks = chunk_tokens(sentences, max_tokens);
    text::TokenList all;
    for (const auto& s : sentences)
      for (auto& t : text::tweet_tokenize(s)) all.push_back(t);
    CHECK(flatten(chunks) == all);
    for (const auto& c : chunks) {
      CHECK(!c.empty());
      CHECK(c.size() <= max_tokens);
    }
  }
}

TEST_CASE("rank_candidates") {
  embed::HashedBackend backend(64, 3);
  CHECK(rank_candidates("too short", 3, backend).empty());

  const auto same = rank_candidates("x x x x x x", 2, backend);
  REQUIRE(same.size() == 1);
  CHECK(same[0].text == "x x");
  CHECK(std::abs(same[0].relevance - 1.0) < 1e-12);

  const auto ranked = rank_candidates("the cat sat on the mat and the dog sat on the log", 3, backend);
  REQUIRE(ranked.size() > 3);
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    CHECK(ranked[i - 1].relevance >= ranked[i].relevance);
    if (ranked[i - 1].relevance == ranked[i].relevance) CHECK(ranked[i - 1].position < ranked[i].position);
  }
  const auto chunk_vec = backend.embed("the cat sat on the mat and the dog sat on the log");
  for (const auto& c : ranked) {
    CHECK(c.n == 3);
    CHECK(c.relevance == doctest::Approx(embed::cosine_sim(c.embedding, chunk_vec)).epsilon(1e-12));
  }
  CHECK_ERROR_CODE(rank_candidates("a b", 0, backend), ErrorCode::InvalidN);
}

TEST_CASE("min_max_normalize") {
  CHECK(min_max_normalize(std::vector<double>{}).empty());
  CHECK(min_max_normalize(std::vector<double>{2, 2, 2}) == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(min_max_normalize(std::vector<double>{1, 3, 2}) == std::vector<double>{0, 1, 0.5});
  // positive affine maps leave the result unchanged
  const std::vector<double> v{0.1, -0.4, 0.9, 0.3};
  std::vector<double> w;
  for (double x : v) w.push_back(3.0 * x + 1.0);
  const auto a = min_max_normalize(v), b = min_max_normalize(w);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("mmr_select worked example penalizes the near duplicate") {
  const double n2 = std::sqrt(0.99 * 0.99 + 0.14 * 0.14);
  const std::vector<CandidatePhrase> c{cand("c1", {1, 0}, 0), cand("c2", {0.99 / n2, 0.14 / n2}, 1),
                                       cand("c3", {0.5, 0.866}, 2)};
  const EmbeddingVector doc({1, 0});
  CHECK(texts(mmr_select(c, doc, {0.3, 2})) == std::vector<std::string>{"c1", "c3"});

  std::vector<std::vector<double>> raw;
  for (const auto& x : c) raw.emplace_back(x.embedding.values().begin(), x.embedding.values().end());
  CHECK(oracle::mmr_exhaustive(raw, {1, 0}, 0.3, 2) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("mmr_select edge cases") {
  const EmbeddingVector doc({1, 0});
  CHECK_ERROR_CODE(mmr_select(std::vector<CandidatePhrase>{}, doc, {0.7, 3}), ErrorCode::EmptyCandidateSet);
  const std::vector<CandidatePhrase> single{cand("only", {0.2, 0.9}, 0)};
  CHECK(texts(mmr_select(single, doc, {0.7, 5})) == std::vector<std::string>{"only"});
  CHECK_ERROR_CODE(mmr_select(single, doc, {1.5, 1}), ErrorCode::ArgumentError);
  CHECK_ERROR_CODE(mmr_select(single, doc, {0.5, 0}), ErrorCode::ArgumentError);
  const std::vector<CandidatePhrase> bad{cand("x", {1, 0, 0}, 0)};
  CHECK_ERROR_CODE(mmr_select(bad, doc, {0.5, 1}), ErrorCode::DimMismatch);
}

TEST_CASE("mmr_select with lambda 1 is the relevance ranking") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CandidatePhrase> c;
    const std::size_t count = static_cast<std::size_t>(rng.range(1, 10));
    for (std::size_t i = 0; i < count; ++i)
      c.push_back(cand("p" + std::to_string(i), {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 1)}, i));
    const EmbeddingVector doc({rng.uniform(-1, 1), rng.uniform(-1, 1), 1.0});
    const auto picked = mmr_select(c, doc, {1.0, count});
    for (std::size_t i = 1; i < picked.size(); ++i)
      CHECK(embed::cosine_sim(picked[i - 1].embedding, doc) >= embed::cosine_sim(picked[i].embedding, doc));
  }
}

TEST_CASE("mmr_select matches the exhaustive oracle and has set semantics") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t count = static_cast<std::size_t>(rng.range(1, 12));
    const std::size_t dim = static_cast<std::size_t>(rng.range(2, 8));
    std::vector<CandidatePhrase> c;
    std::vector<std::vector<double>> raw;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.uniform(-1, 1);
      raw.push_back(v);
      c.push_back(cand("p" + std::to_string(i), v, i));
    }
    std::vector<double> d(dim);
    for (auto& x : d) x = rng.uniform(-1, 1);
    const double lambda = std::vector<double>{0.0, 0.3, 0.7, 1.0}[rng.below(4)];
    const std::size_t k = static_cast<std::size_t>(rng.range(1, 12));
    const auto picked = mmr_select(c, EmbeddingVector(d), {lambda, k});
    const auto expect = oracle::mmr_exhaustive(raw, d, lambda, k);
    REQUIRE(picked.size() == std::min(k, count));
    std::set<std::string> uniq;
    for (std::size_t i = 0; i < picked.size(); ++i) {
      CHECK(picked[i].position == expect[i]);
      uniq.insert(picked[i].text);
    }
    CHECK(uniq.size() == picked.size());
  }
}

TEST_CASE("per_chunk_top_k") {
  CHECK(per_chunk_top_k(512, 7, 1) == 74 + 2);
  CHECK(per_chunk_top_k(512, 7, 3) == 25 + 2);
  CHECK(per_chunk_top_k(512, 8, 4) == 16 + 2);
  CHECK(per_chunk_top_k(512, 7, 0) == 76);
}

TEST_CASE("summarize_document") {
  embed::HashedBackend backend(64, 1);
  SummarizeConfig cfg;

  corpus::Document tiny{1, {"only five tokens in here"}};
  const auto empty = summarize_document(tiny, cfg, backend);
  CHECK(empty.phrases.empty());
  CHECK(empty.token_count == 0);
  CHECK(empty.source_session == 1);
  CHECK(summarize_document(corpus::Document{2, {}}, cfg, backend).token_count == 0);

  // One chunk with an explicit small top_k: the summary is the MMR selection.
  corpus::Document small{3, {"the quick brown fox jumps over the lazy dog while the cat sleeps soundly"}};
  cfg.top_k = 3;
  const auto s = summarize_document(small, cfg, backend);
  const auto chunk = chunk_document(small.sentences, cfg.chunk_tokens);
  REQUIRE(chunk.size() == 1);
  const auto sel = mmr_select(rank_candidates(chunk[0], 7, backend), backend.embed(chunk[0]), {0.7, 3});
  CHECK(s.phrases == texts(sel));
  CHECK(s.token_count == 21);

  cfg.top_k.reset();
  cfg.n = 5;
  CHECK_ERROR_CODE(summarize_document(small, SummarizeConfig{0}, backend), ErrorCode::InvalidN);
  SummarizeConfig tight;
  tight.budget = 6;
  CHECK_ERROR_CODE(summarize_document(small, tight, backend), ErrorCode::ArgumentError);
}

TEST_CASE("summaries of long documents fill the budget") {
  embed::HashedBackend backend(64, 2);
  Rng rng(12);
  std::vector<std::string> sentences;
  std::size_t total = 0;
  while (total < 1200) {
    std::string s;
    const int len = rng.range(5, 30);
    for (int i = 0; i < len; ++i) s += (i ? " " : "") + std::string("v") + std::to_string(rng.below(400));
    total += static_cast<std::size_t>(len);
    sentences.push_back(s);
  }
  SummarizeConfig cfg;
  const auto s = summarize_document({9, sentences}, cfg, backend);
  CHECK(s.token_count <= 512);
  CHECK(s.token_count >= 512 - 7 + 1);
  CHECK(s.token_count == text::count_tokens(s.text()));
  CHECK(std::set<std::string>(s.phrases.begin(), s.phrases.end()).size() == s.phrases.size());
}

TEST_CASE("summaries JSONL round trip") {
  std::vector<Summary> in{{5, {"a b c", "d e f"}, 6}, {6, {}, 0}};
  std::stringstream io;
  write_summaries_jsonl(io, in);
  const auto out = read_summaries_jsonl(io);
  REQUIRE(out.size() == 2);
  CHECK(out[0].phrases == in[0].phrases);
  CHECK(out[0].token_count == 6);
  CHECK(out[1].source_session == 6);
  std::istringstream bad("{\"id\": 1}\n");
  CHECK_ERROR_CODE(read_summaries_jsonl(bad), ErrorCode::MalformedLine);
}

}
