#pragma once

// Depression-lexicon induction: RPHQ remapping, term statistics, Word Score,
// candidate selection and category assignment against the alerting words.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depsum/corpus.hpp"
#include "depsum/embed.hpp"
#include "depsum/summarize.hpp"
#include "depsum/tokenize.hpp"

namespace depsum::lexicon {

// Remapped PHQ-8 score: 10 - phq for phq <= 9, 9 - phq for phq >= 10.
// Positive for non-depressed, negative for depressed. Throws OutOfRange
// outside 0..24.
int rphq(int phq8);

struct DocumentCounts {
  std::map<std::string, int, std::less<>> tf;
  int phq8 = 0;
};

// Term-frequency statistics over a labelled corpus.
class CorpusStats {
 public:
  struct Posting {
    std::size_t doc;
    int tf;
  };

  static CorpusStats from_counts(std::vector<DocumentCounts> docs);

  // Tokenizes every sentence, drops stopwords under `policy`, counts terms.
  // Sessions without a PHQ-8 score carry no RPHQ weight and are skipped.
  static CorpusStats build(std::span<const corpus::Session> sessions,
                           const text::StopwordPolicy& policy);

  std::size_t num_documents() const { return rphq_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }  // sorted
  bool contains(std::string_view term) const;
  int tf(std::string_view term, std::size_t doc) const;
  int df(std::string_view term) const;
  int rphq_of(std::size_t doc) const { return rphq_.at(doc); }
  std::span<const Posting> postings(std::string_view term) const;

  // Sum of RPHQ over non-depressed documents.
  double positive_total() const { return positive_total_; }
  // Minus the sum of RPHQ over depressed documents (so also positive).
  double negative_total() const { return negative_total_; }

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Posting>> postings_;  // per term, ascending doc
  std::vector<int> rphq_;
  double positive_total_ = 0.0;
  double negative_total_ = 0.0;
};

// tf * ln(N / df). Throws TermAbsent if tf > 0 but df = 0, OutOfRange for
// a bad document index.
double tf_idf(std::string_view term, std::size_t doc, const CorpusStats& stats);

// RPHQ-weighted term frequency, each class normalized by its corpus-wide
// RPHQ total:  sum_{nondep} rphq*tf / D+  +  sum_{dep} rphq*tf / D-.
// Negative values mark depression-associated words. Throws DegenerateCorpus
// when either class is missing.
double word_score(std::string_view term, const CorpusStats& stats);

struct WordScoreEntry {
  std::string word;
  double ws = 0.0;
};

// Whole vocabulary, ascending by ws, ties by word.
std::vector<WordScoreEntry> word_scores(const CorpusStats& stats);

inline constexpr std::size_t kDefaultCandidates = 2000;

std::vector<WordScoreEntry> candidate_words(const CorpusStats& stats,
                                            std::size_t k = kDefaultCandidates);

struct TopWords {
  std::vector<WordScoreEntry> lowest;   // ascending
  std::vector<WordScoreEntry> highest;  // descending
};
TopWords top_words_report(const CorpusStats& stats, std::size_t m);

enum class Category { Symptoms = 0, Treatment, NegativeWords, ReligiousInvolvement, Pronouns };
inline constexpr std::array<Category, 3> kLexiconCategories{
    Category::Symptoms, Category::Treatment, Category::NegativeWords};
inline constexpr std::array<Category, 2> kComparisonCategories{Category::ReligiousInvolvement,
                                                               Category::Pronouns};

std::string_view to_string(Category c);
Category parse_category(std::string_view name);

struct AlertingLexicon {
  std::array<std::vector<std::string>, 5> words;

  const std::vector<std::string>& operator[](Category c) const {
    return words[static_cast<std::size_t>(c)];
  }

  // `category,word` CSV with header; '#' comment lines allowed. The three
  // lexicon categories must be non-empty.
  static AlertingLexicon parse(std::istream& in);
  static const AlertingLexicon& bundled();
};

enum class Aggregate { Mean, Sum };

struct CategoryMatch {
  Category category = Category::Symptoms;
  double similarity = 0.0;
};

// Scores words against the three lexicon categories by aggregated cosine
// similarity. Alerting-word embeddings are computed once.
class CategoryScorer {
 public:
  CategoryScorer(const AlertingLexicon& alerting, const embed::EmbeddingBackend& backend,
                 Aggregate aggregate = Aggregate::Mean);

  std::array<double, 3> scores(std::string_view word) const;
  // Highest score wins; ties resolve Symptoms > Treatment > NegativeWords.
  CategoryMatch assign(std::string_view word) const;

 private:
  const embed::EmbeddingBackend& backend_;
  Aggregate aggregate_;
  std::array<std::vector<embed::EmbeddingVector>, 3> anchors_;
};

CategoryMatch assign_category(std::string_view word, const AlertingLexicon& alerting,
                              const embed::EmbeddingBackend& backend,
                              Aggregate aggregate = Aggregate::Mean);

struct LexiconRow {
  std::string word;
  double ws = 0.0;
  Category category = Category::Symptoms;
  double similarity = 0.0;
};

// candidate_words + assign_category; grouped by category in fixed order,
// |ws| descending within a group.
std::vector<LexiconRow> build_lexicon(const CorpusStats& stats, const AlertingLexicon& alerting,
                                      const embed::EmbeddingBackend& backend,
                                      std::size_t k = kDefaultCandidates,
                                      Aggregate aggregate = Aggregate::Mean);

// Fraction of lexicon words that occur as tokens in any summary phrase.
// An empty lexicon has coverage 1.
double coverage(std::span<const LexiconRow> lexicon, std::span<const summarize::Summary> summaries);

// Word Scores of the comparison-only categories (nullopt when the word never
// occurs in the corpus).
struct ComparisonRow {
  std::string word;
  Category category;
  std::optional<double> ws;
};
std::vector<ComparisonRow> comparison_words(const CorpusStats& stats,
                                            const AlertingLexicon& alerting);

void write_lexicon_csv(std::ostream& out, std::span<const LexiconRow> rows);
// `word,ws,rank`, rank 1 = lowest ws.
void write_word_scores_csv(std::ostream& out, std::span<const WordScoreEntry> ranked);
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);

}  // namespace depsum::lexicon
