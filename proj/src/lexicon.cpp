#include "depsum/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "depsum/error.hpp"
#include "embedded_data.hpp"
#include "format_util.hpp"
#include "parallel_util.hpp"
#include "text_util.hpp"

namespace depsum::lexicon {

int rphq(int phq8) {
  if (phq8 < 0 || phq8 > corpus::kMaxPhq8)
    throw Error(ErrorCode::OutOfRange, "PHQ-8 score " + std::to_string(phq8) + " outside 0..24");
  return phq8 < corpus::kDepressedThreshold ? 10 - phq8 : 9 - phq8;
}

CorpusStats CorpusStats::from_counts(std::vector<DocumentCounts> docs) {
  CorpusStats stats;
  std::set<std::string, std::less<>> vocab;
  for (const auto& d : docs)
    for (const auto& [term, count] : d.tf)
      if (count > 0) vocab.insert(term);
  stats.vocabulary_.assign(vocab.begin(), vocab.end());
  stats.index_.reserve(stats.vocabulary_.size());
  for (std::size_t i = 0; i < stats.vocabulary_.size(); ++i)
    stats.index_.emplace(stats.vocabulary_[i], i);
  stats.postings_.resize(stats.vocabulary_.size());

  stats.rphq_.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const int r = rphq(docs[d].phq8);
    stats.rphq_.push_back(r);
    if (r > 0) stats.positive_total_ += r;
    else stats.negative_total_ -= r;
    for (const auto& [term, count] : docs[d].tf) {
      if (count < 0) throw Error(ErrorCode::OutOfRange, "negative term frequency");
      if (count == 0) continue;
      stats.postings_[stats.index_.at(term)].push_back({d, count});
    }
  }
  return stats;
}

CorpusStats CorpusStats::build(std::span<const corpus::Session> sessions,
                               const text::StopwordPolicy& policy) {
  std::vector<const corpus::Session*> scored;
  for (const auto& s : sessions)
    if (s.meta.phq8_score) scored.push_back(&s);
  std::vector<DocumentCounts> docs(scored.size());
  detail::parallel_for(scored.size(), [&](std::size_t i) {
    docs[i].phq8 = *scored[i]->meta.phq8_score;
    for (const auto& sentence : scored[i]->document.sentences) {
      const auto tokens = text::tweet_tokenize(sentence);
      for (const auto& t : tokens)
        if (!policy.is_stopword(t)) ++docs[i].tf[t];
    }
  });
  return from_counts(std::move(docs));
}

bool CorpusStats::contains(std::string_view term) const {
  return index_.find(std::string(term)) != index_.end();
}

std::span<const CorpusStats::Posting> CorpusStats::postings(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return {};
  return postings_[it->second];
}

int CorpusStats::tf(std::string_view term, std::size_t doc) const {
  for (const auto& p : postings(term))
    if (p.doc == doc) return p.tf;
  return 0;
}

int CorpusStats::df(std::string_view term) const {
  return static_cast<int>(postings(term).size());
}

double tf_idf(std::string_view term, std::size_t doc, const CorpusStats& stats) {
  if (stats.num_documents() == 0) throw Error(ErrorCode::OutOfRange, "tf_idf on an empty corpus");
  if (doc >= stats.num_documents())
    throw Error(ErrorCode::OutOfRange, "document index " + std::to_string(doc));
  const int tf = stats.tf(term, doc);
  if (tf == 0) return 0.0;
  const int df = stats.df(term);
  if (df == 0) throw Error(ErrorCode::TermAbsent, "term '" + std::string(term) + "' has df 0");
  return tf * std::log(static_cast<double>(stats.num_documents()) / df);
}

namespace {

void require_both_classes(const CorpusStats& stats) {
  if (stats.positive_total() <= 0.0 || stats.negative_total() <= 0.0)
    throw Error(ErrorCode::DegenerateCorpus,
                "Word Score needs both depressed and non-depressed documents");
}

double word_score_unchecked(std::span<const CorpusStats::Posting> postings,
                            const CorpusStats& stats) {
  double pos = 0.0, neg = 0.0;
  for (const auto& p : postings) {
    const int r = stats.rphq_of(p.doc);
    if (r > 0) pos += static_cast<double>(r) * p.tf;
    else neg += static_cast<double>(r) * p.tf;
  }
  return pos / stats.positive_total() + neg / stats.negative_total();
}

}  // namespace

double word_score(std::string_view term, const CorpusStats& stats) {
  require_both_classes(stats);
  return word_score_unchecked(stats.postings(term), stats);
}

std::vector<WordScoreEntry> word_scores(const CorpusStats& stats) {
  require_both_classes(stats);
  std::vector<WordScoreEntry> out;
  out.reserve(stats.vocabulary().size());
  for (const auto& w : stats.vocabulary())
    out.push_back({w, word_score_unchecked(stats.postings(w), stats)});
  std::sort(out.begin(), out.end(), [](const WordScoreEntry& a, const WordScoreEntry& b) {
    return a.ws != b.ws ? a.ws < b.ws : a.word < b.word;
  });
  return out;
}

std::vector<WordScoreEntry> candidate_words(const CorpusStats& stats, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::ArgumentError, "candidate pool size must be >= 1");
  auto all = word_scores(stats);
  if (all.size() > k) all.resize(k);
  return all;
}

TopWords top_words_report(const CorpusStats& stats, std::size_t m) {
  TopWords out;
  if (m == 0) return out;
  const auto all = word_scores(stats);
  const std::size_t take = std::min(m, all.size());
  out.lowest.assign(all.begin(), all.begin() + static_cast<long>(take));
  out.highest.assign(all.rbegin(), all.rbegin() + static_cast<long>(take));
  return out;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Symptoms: return "symptoms";
    case Category::Treatment: return "treatment";
    case Category::NegativeWords: return "negative_words";
    case Category::ReligiousInvolvement: return "religious_involvement";
    case Category::Pronouns: return "pronouns";
  }
  return "symptoms";
}

Category parse_category(std::string_view name) {
  for (auto c : {Category::Symptoms, Category::Treatment, Category::NegativeWords,
                 Category::ReligiousInvolvement, Category::Pronouns})
    if (to_string(c) == name) return c;
  throw Error(ErrorCode::MalformedRow, "unknown alerting category '" + std::string(name) + "'");
}

AlertingLexicon AlertingLexicon::parse(std::istream& in) {
  AlertingLexicon lex;
  std::string line;
  bool seen_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = detail::split(t, ',');
    if (cols.size() != 2)
      throw Error(ErrorCode::MalformedRow, "alerting words line " + std::to_string(line_no));
    if (!seen_header) {
      seen_header = true;
      if (detail::trim(cols[0]) == "category") continue;
    }
    const auto cat = parse_category(detail::trim(cols[0]));
    std::string word(detail::trim(cols[1]));
    for (auto& ch : word)
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    lex.words[static_cast<std::size_t>(cat)].push_back(std::move(word));
  }
  for (auto c : kLexiconCategories)
    if (lex[c].empty())
      throw Error(ErrorCode::MalformedFile,
                  "alerting category '" + std::string(to_string(c)) + "' is empty");
  return lex;
}

const AlertingLexicon& AlertingLexicon::bundled() {
  static const AlertingLexicon lex = [] {
    std::istringstream in{std::string(data::kAlertingWords)};
    return parse(in);
  }();
  return lex;
}

CategoryScorer::CategoryScorer(const AlertingLexicon& alerting,
                               const embed::EmbeddingBackend& backend, Aggregate aggregate)
    : backend_(backend), aggregate_(aggregate) {
  for (std::size_t c = 0; c < kLexiconCategories.size(); ++c)
    for (const auto& w : alerting[kLexiconCategories[c]]) anchors_[c].push_back(backend.embed(w));
}

std::array<double, 3> CategoryScorer::scores(std::string_view word) const {
  const auto v = backend_.embed(word);
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < anchors_.size(); ++c) {
    double s = 0.0;
    for (const auto& a : anchors_[c]) s += embed::cosine_sim(v, a);
    out[c] = aggregate_ == Aggregate::Mean ? s / static_cast<double>(anchors_[c].size()) : s;
  }
  return out;
}

CategoryMatch CategoryScorer::assign(std::string_view word) const {
  const auto s = scores(word);
  std::size_t best = 0;
  for (std::size_t c = 1; c < s.size(); ++c)
    if (s[c] > s[best]) best = c;
  return {kLexiconCategories[best], s[best]};
}

CategoryMatch assign_category(std::string_view word, const AlertingLexicon& alerting,
                              const embed::EmbeddingBackend& backend, Aggregate aggregate) {
  if (word.empty()) throw Error(ErrorCode::ArgumentError, "assign_category of an empty word");
  return CategoryScorer(alerting, backend, aggregate).assign(word);
}

std::vector<LexiconRow> build_lexicon(const CorpusStats& stats, const AlertingLexicon& alerting,
                                      const embed::EmbeddingBackend& backend, std::size_t k,
                                      Aggregate aggregate) {
  const auto candidates = candidate_words(stats, k);
  const CategoryScorer scorer(alerting, backend, aggregate);
  std::vector<LexiconRow> rows(candidates.size());
  detail::parallel_for(candidates.size(), [&](std::size_t i) {
    const auto match = scorer.assign(candidates[i].word);
    rows[i] = {candidates[i].word, candidates[i].ws, match.category, match.similarity};
  });
  std::sort(rows.begin(), rows.end(), [](const LexiconRow& a, const LexiconRow& b) {
    if (a.category != b.category) return a.category < b.category;
    if (std::abs(a.ws) != std::abs(b.ws)) return std::abs(a.ws) > std::abs(b.ws);
    return a.word < b.word;
  });
  return rows;
}

double coverage(std::span<const LexiconRow> lexicon, std::span<const summarize::Summary> summaries) {
  if (lexicon.empty()) return 1.0;
  std::set<std::string, std::less<>> seen;
  for (const auto& s : summaries)
    for (const auto& p : s.phrases)
      for (auto& t : text::tweet_tokenize(p)) seen.insert(std::move(t));
  std::size_t hits = 0;
  for (const auto& row : lexicon)
    if (seen.count(row.word)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(lexicon.size());
}

std::vector<ComparisonRow> comparison_words(const CorpusStats& stats,
                                            const AlertingLexicon& alerting) {
  std::vector<ComparisonRow> out;
  for (auto c : kComparisonCategories)
    for (const auto& w : alerting[c]) {
      std::optional<double> ws;
      if (stats.contains(w)) ws = word_score(w, stats);
      out.push_back({w, c, ws});
    }
  return out;
}

void write_lexicon_csv(std::ostream& out, std::span<const LexiconRow> rows) {
  out << "word,ws,category,similarity\n";
  for (const auto& r : rows)
    out << detail::csv_field(r.word) << ',' << detail::fmt_g(r.ws) << ',' << to_string(r.category)
        << ',' << detail::fmt_g(r.similarity) << '\n';
}

void write_word_scores_csv(std::ostream& out, std::span<const WordScoreEntry> ranked) {
  out << "word,ws,rank\n";
  for (std::size_t i = 0; i < ranked.size(); ++i)
    out << detail::csv_field(ranked[i].word) << ',' << detail::fmt_g(ranked[i].ws) << ',' << i + 1
        << '\n';
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "word,category,ws\n";
  for (const auto& r : rows)
    out << detail::csv_field(r.word) << ',' << to_string(r.category) << ','
        << (r.ws ? detail::fmt_g(*r.ws) : std::string("absent")) << '\n';
}

}  // namespace depsum::lexicon
