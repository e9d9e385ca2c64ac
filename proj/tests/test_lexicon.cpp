#include <doctest.h>

#include <cmath>
#include <sstream>

#include "depsum/embed.hpp"
#include "depsum/lexicon.hpp"
#include "depsum/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace depsum;
using namespace depsum::lexicon;

namespace {

CorpusStats stats_of(const std::vector<oracle::Doc>& docs) {
  std::vector<DocumentCounts> counts;
  for (const auto& d : docs) {
    DocumentCounts c;
    c.phq8 = d.phq;
    for (const auto& [w, n] : d.tf)
      if (n > 0) c.tf[w] = n;
    counts.push_back(std::move(c));
  }
  return CorpusStats::from_counts(std::move(counts));
}

std::vector<oracle::Doc> random_docs(Rng& rng, std::size_t vocab, std::size_t docs) {
  std::vector<oracle::Doc> out(docs);
  for (std::size_t d = 0; d < docs; ++d) {
    out[d].phq = d == 0 ? 3 : d == 1 ? 17 : rng.range(0, 24);
    for (std::size_t w = 0; w < vocab; ++w)
      if (rng.bernoulli(0.4)) out[d].tf["w" + std::to_string(w)] = rng.range(1, 6);
  }
  return out;
}

embed::EmbeddingVector vec(std::vector<double> v) { return embed::EmbeddingVector(std::move(v)); }

AlertingLexicon small_alerting() {
  std::istringstream in("category,word\nsymptoms,pain\nsymptoms,fatigue\ntreatment,pills\n"
                        "negative_words,hate\npronouns,i\nreligious_involvement,god\n");
  return AlertingLexicon::parse(in);
}

}  // namespace

TEST_SUITE("lexicon") {

TEST_CASE("rphq values for every score") {
  CHECK(rphq(10) == -1);
  CHECK(rphq(0) == 10);
  CHECK(rphq(9) == 1);
  CHECK(rphq(23) == -14);
  CHECK(rphq(24) == -15);
  for (int p = 0; p <= 24; ++p) {
    CHECK(rphq(p) == oracle::rphq_table(p));
    CHECK((rphq(p) < 0) == (p >= 10));
    CHECK(rphq(p) <= 10);
    CHECK(rphq(p) >= -15);
    if (p > 0 && p != 10) CHECK(rphq(p) < rphq(p - 1));
  }
  CHECK_ERROR_CODE(rphq(-1), ErrorCode::OutOfRange);
  CHECK_ERROR_CODE(rphq(25), ErrorCode::OutOfRange);
}

TEST_CASE("CorpusStats bookkeeping") {
  const auto s = stats_of({{{{"a", 2}, {"b", 1}}, 0}, {{{"a", 1}}, 20}, {{{"c", 4}}, 12}});
  CHECK(s.num_documents() == 3);
  CHECK(s.vocabulary() == std::vector<std::string>{"a", "b", "c"});
  CHECK(s.df("a") == 2);
  CHECK(s.df("zzz") == 0);
  CHECK(s.tf("a", 0) == 2);
  CHECK(s.tf("c", 0) == 0);
  CHECK(s.positive_total() == 10.0);
  CHECK(s.negative_total() == 11.0 + 3.0);
  CHECK(!s.contains("zzz"));
  std::vector<DocumentCounts> bad(1);
  bad[0].tf["x"] = -1;
  CHECK_ERROR_CODE(CorpusStats::from_counts(bad), ErrorCode::OutOfRange);
}

TEST_CASE("CorpusStats::build applies the stopword policy and skips unscored sessions") {
  std::vector<corpus::Session> sessions(3);
  sessions[0].document = {1, {"I am so tired and I feel the pain"}};
  sessions[0].meta.phq8_score = 15;
  sessions[1].document = {2, {"the beach was great"}};
  sessions[1].meta.phq8_score = 2;
  sessions[2].document = {3, {"no label here"}};
  const auto s = CorpusStats::build(sessions, text::StopwordPolicy::standard());
  CHECK(s.num_documents() == 2);
  CHECK(s.tf("i", 0) == 2);
  CHECK(!s.contains("the"));
  CHECK(!s.contains("and"));
  CHECK(s.contains("tired"));
  CHECK(!s.contains("label"));
}

TEST_CASE("tf_idf") {
  const auto s = stats_of({{{{"x", 3}, {"all", 1}}, 0}, {{{"x", 1}, {"all", 5}}, 20}, {{{"all", 2}}, 3},
                           {{{"all", 1}}, 15}});
  CHECK(tf_idf("x", 0, s) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(tf_idf("x", 0, s) == doctest::Approx(2.0794).epsilon(1e-4));
  CHECK(tf_idf("all", 1, s) == 0.0);
  CHECK(tf_idf("x", 2, s) == 0.0);
  CHECK(tf_idf("missing", 0, s) == 0.0);
  CHECK_ERROR_CODE(tf_idf("x", 9, s), ErrorCode::OutOfRange);

  const auto single = stats_of({{{{"a", 4}, {"b", 1}}, 5}});
  CHECK(tf_idf("a", 0, single) == 0.0);
  CHECK(tf_idf("b", 0, single) == 0.0);
}

TEST_CASE("word_score hand example") {
  const auto s = stats_of({{{{"happy", 3}}, 0}, {{{"sad", 2}}, 20}});
  CHECK(word_score("happy", s) == doctest::Approx(3.0));
  CHECK(word_score("sad", s) == doctest::Approx(-2.0));
  CHECK(word_score("absent", s) == 0.0);
}

TEST_CASE("word_score cancellation and degenerate corpora") {
  // non-depressed: rphq 10 (phq 0); depressed: rphq -10 (phq 19)
  const auto s = stats_of({{{{"even", 2}}, 0}, {{{"even", 2}}, 19}});
  CHECK(std::abs(word_score("even", s)) < 1e-15);
  CHECK_ERROR_CODE(word_score("a", stats_of({{{{"a", 1}}, 2}, {{{"a", 1}}, 5}})),
                   ErrorCode::DegenerateCorpus);
  CHECK_ERROR_CODE(word_score("a", stats_of({{{{"a", 1}}, 12}})), ErrorCode::DegenerateCorpus);
}

TEST_CASE("word_score agrees with a brute-force evaluation") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto docs = random_docs(rng, 25, static_cast<std::size_t>(rng.range(2, 15)));
    const auto s = stats_of(docs);
    for (const auto& w : s.vocabulary())
      CHECK(word_score(w, s) == doctest::Approx(oracle::word_score(w, docs)).epsilon(1e-12));
    const auto all = word_scores(s);
    for (std::size_t i = 1; i < all.size(); ++i) {
      CHECK(all[i - 1].ws <= all[i].ws);
      if (all[i - 1].ws == all[i].ws) CHECK(all[i - 1].word < all[i].word);
    }
  }
}

TEST_CASE("word_score is linear in tf and signed by class") {
  Rng rng(6);
  auto docs = random_docs(rng, 10, 8);
  const auto base = stats_of(docs);
  for (auto& d : docs)
    for (auto& [w, n] : d.tf) n *= 2;
  const auto doubled = stats_of(docs);
  for (const auto& w : base.vocabulary())
    CHECK(word_score(w, doubled) == doctest::Approx(2.0 * word_score(w, base)).epsilon(1e-12));

  const auto s = stats_of({{{{"calm", 1}}, 1}, {{{"gloom", 1}}, 14}, {{{"gloom", 3}}, 22}, {{}, 4}});
  CHECK(word_score("gloom", s) < 0.0);
  CHECK(word_score("calm", s) > 0.0);
}

TEST_CASE("candidate_words and top_words_report") {
  const auto s = stats_of({{{{"a", 1}, {"b", 5}, {"c", 2}}, 0}, {{{"d", 3}, {"e", 1}, {"c", 2}}, 20}});
  const auto all = candidate_words(s);
  CHECK(all.size() == 5);
  CHECK(all.front().word == "d");
  CHECK(candidate_words(s, 1).size() == 1);
  CHECK(candidate_words(s, 1)[0].word == "d");
  CHECK_ERROR_CODE(candidate_words(s, 0), ErrorCode::ArgumentError);
  CHECK(candidate_words(s, 3).size() == 3);

  CHECK(top_words_report(s, 0).lowest.empty());
  CHECK(top_words_report(s, 0).highest.empty());
  const auto whole = top_words_report(s, 100);
  CHECK(whole.lowest.size() == 5);
  CHECK(whole.highest.front().word == "b");
  CHECK(whole.highest.back().word == "d");
}

TEST_CASE("AlertingLexicon parsing and the bundled table") {
  const auto lex = small_alerting();
  CHECK(lex[Category::Symptoms] == std::vector<std::string>{"pain", "fatigue"});
  CHECK(lex[Category::Pronouns] == std::vector<std::string>{"i"});
  std::istringstream missing("category,word\nsymptoms,pain\ntreatment,pills\n");
  CHECK_ERROR_CODE(AlertingLexicon::parse(missing), ErrorCode::MalformedFile);
  std::istringstream badcat("category,word\nmood,sad\n");
  CHECK_ERROR_CODE(AlertingLexicon::parse(badcat), ErrorCode::MalformedRow);

  const auto& b = AlertingLexicon::bundled();
  for (auto c : kLexiconCategories) CHECK(!b[c].empty());
  const auto& pron = b[Category::Pronouns];
  for (const char* w : {"i", "me", "my", "myself"})
    CHECK(std::find(pron.begin(), pron.end(), w) != pron.end());
  const auto& sym = b[Category::Symptoms];
  CHECK(std::find(sym.begin(), sym.end(), "depression") != sym.end());
  CHECK(parse_category(to_string(Category::NegativeWords)) == Category::NegativeWords);
}

TEST_CASE("assign_category dominance and tie-break") {
  // Lookup vectors: each alerting word orthogonal to the others.
  embed::LookupBackend backend(embed::VectorMap{{"pain", vec({1, 0, 0, 0})},
                                {"fatigue", vec({0, 1, 0, 0})},
                                {"pills", vec({0, 0, 1, 0})},
                                {"hate", vec({0, 0, 0, 1})},
                                {"even", vec({0, 0, 1, 1})},
                                {"flat", vec({1, 0, 1, 1})}});
  const auto lex = small_alerting();
  CHECK(assign_category("pills", lex, backend).category == Category::Treatment);
  CHECK(assign_category("hate", lex, backend).category == Category::NegativeWords);
  const auto tie = assign_category("even", lex, backend);
  CHECK(tie.category == Category::Treatment);
  const auto sym_tie = assign_category("flat", lex, backend);
  // symptoms mean = (1/sqrt3)/2, treatment = negative = 1/sqrt3
  CHECK(sym_tie.category == Category::Treatment);
  CHECK(sym_tie.similarity == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(assign_category("flat", lex, backend, Aggregate::Sum).category == Category::Symptoms);

  embed::LookupBackend zeroes(embed::VectorMap{{"pain", vec({1, 0})}, {"fatigue", vec({1, 0})}, {"pills", vec({1, 0})},
                               {"hate", vec({1, 0})}, {"w", vec({0, 1})}});
  CHECK(assign_category("w", lex, zeroes).category == Category::Symptoms);
  CHECK_ERROR_CODE(assign_category("", lex, backend), ErrorCode::ArgumentError);
  CHECK_ERROR_CODE(assign_category("unknown", lex, backend), ErrorCode::MissingVector);
}

TEST_CASE("assign_category matches a brute-force scorer") {
  std::ostringstream csv;
  csv << "category,word\n";
  const char* names[3] = {"symptoms", "treatment", "negative_words"};
  for (int i = 0; i < 20; ++i) csv << names[i % 3] << ",anchor" << i << '\n';
  std::istringstream in(csv.str());
  const auto lex = AlertingLexicon::parse(in);
  embed::HashedBackend backend(128, 4);

  for (int q = 0; q < 60; ++q) {
    const std::string word = q < 20 ? "anchor" + std::to_string(q) : "probe" + std::to_string(q);
    const auto v = backend.embed(word);
    const std::vector<double> qv(v.values().begin(), v.values().end());
    double best = -1e300;
    int best_c = -1;
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      int count = 0;
      for (int i = c; i < 20; i += 3) {
        const auto a = backend.embed("anchor" + std::to_string(i));
        sum += oracle::cosine(qv, std::vector<double>(a.values().begin(), a.values().end()));
        ++count;
      }
      const double mean = sum / count;
      if (mean > best + 1e-12) {
        best = mean;
        best_c = c;
      }
    }
    const auto got = assign_category(word, lex, backend);
    CHECK(static_cast<int>(got.category) == best_c);
    CHECK(got.similarity == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("assign_category is invariant to rescaling embeddings") {
  Rng rng(8);
  embed::VectorMap a, b;
  for (const char* w : {"pain", "fatigue", "pills", "hate", "q1", "q2", "q3"}) {
    std::vector<double> v(6);
    for (auto& x : v) x = rng.uniform(-1, 1);
    std::vector<double> scaled;
    for (double x : v) scaled.push_back(x * 7.5);
    a.emplace(w, embed::EmbeddingVector(v));
    b.emplace(w, embed::EmbeddingVector(scaled));
  }
  embed::LookupBackend ba(a), bb(b);
  const auto lex = small_alerting();
  for (const char* w : {"q1", "q2", "q3"}) {
    const auto x = assign_category(w, lex, ba), y = assign_category(w, lex, bb);
    CHECK(x.category == y.category);
    CHECK(x.similarity == doctest::Approx(y.similarity).epsilon(1e-12));
  }
}

TEST_CASE("build_lexicon") {
  embed::HashedBackend backend(64, 2);
  const auto lex = small_alerting();
  const auto empty = stats_of({{{}, 0}, {{}, 20}});
  CHECK(build_lexicon(empty, lex, backend).empty());

  Rng rng(3);
  const auto docs = random_docs(rng, 40, 10);
  const auto s = stats_of(docs);
  CHECK(build_lexicon(s, lex, backend, 1).size() == 1);
  const auto rows = build_lexicon(s, lex, backend, 15);
  REQUIRE(rows.size() == 15);
  const auto cands = candidate_words(s, 15);
  std::set<std::string> expect;
  for (const auto& c : cands) expect.insert(c.word);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(expect.count(rows[i].word) == 1);
    CHECK(rows[i].category == assign_category(rows[i].word, lex, backend).category);
    CHECK(static_cast<int>(rows[i].category) <= 2);
    if (i > 0) {
      CHECK(rows[i - 1].category <= rows[i].category);
      if (rows[i - 1].category == rows[i].category) CHECK(std::abs(rows[i - 1].ws) >= std::abs(rows[i].ws));
    }
  }
}

TEST_CASE("coverage") {
  CHECK(coverage({}, {}) == 1.0);
  std::vector<LexiconRow> rows{{"tired", -1, Category::Symptoms, 0}, {"pills", -1, Category::Treatment, 0}};
  std::vector<summarize::Summary> sums{{1, {"so Tired today", "took pills"}, 5}};
  CHECK(coverage(rows, sums) == 1.0);
  rows.push_back({"sad", -1, Category::NegativeWords, 0});
  rows.push_back({"ired", -1, Category::NegativeWords, 0});
  CHECK(coverage(rows, sums) == 0.5);
}

TEST_CASE("comparison_words") {
  const auto s = stats_of({{{{"i", 3}}, 0}, {{{"i", 9}}, 20}});
  const auto rows = comparison_words(s, small_alerting());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].word == "god");
  CHECK(!rows[0].ws);
  CHECK(rows[1].word == "i");
  CHECK(rows[1].ws.value() == doctest::Approx(3.0 - 9.0));
}

TEST_CASE("CSV writers") {
  std::ostringstream a, b, c;
  const std::vector<LexiconRow> rows{{"pain", -2.5, Category::Symptoms, 0.25}};
  write_lexicon_csv(a, rows);
  CHECK(a.str() == "word,ws,category,similarity\npain,-2.5,symptoms,0.25\n");
  const std::vector<WordScoreEntry> ws{{"x", -1}, {"y", 0.5}};
  write_word_scores_csv(b, ws);
  CHECK(b.str() == "word,ws,rank\nx,-1,1\ny,0.5,2\n");
  const std::vector<ComparisonRow> cmp{{"god", Category::ReligiousInvolvement, std::nullopt},
                                       {"i", Category::Pronouns, -3.0}};
  write_comparison_csv(c, cmp);
  CHECK(c.str() == "word,category,ws\ngod,religious_involvement,absent\ni,pronouns,-3\n");
}

}
