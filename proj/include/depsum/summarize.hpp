#pragma once

// Embedding-ranked keyphrase extraction with maximal-marginal-relevance
// diversification, recombined under a token budget.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depsum/corpus.hpp"
#include "depsum/embed.hpp"
#include "depsum/tokenize.hpp"

namespace depsum::summarize {

struct CandidatePhrase {
  std::string text;
  int n = 0;
  embed::EmbeddingVector embedding;
  double relevance = 0.0;    // cosine to the chunk embedding
  std::size_t position = 0;  // first-occurrence index among the chunk's n-grams
};

struct MmrParams {
  double lambda = 0.7;
  std::size_t top_k = 5;

  void validate() const;  // ArgumentError unless lambda in [0,1] and top_k >= 1
};

struct Summary {
  int source_session = 0;
  std::vector<std::string> phrases;
  std::size_t token_count = 0;

  std::string text() const { return text::join(phrases); }
};

inline constexpr std::size_t kDefaultBudget = 512;
inline constexpr std::size_t kDefaultChunkTokens = 480;

// Splits the document's token stream into chunks of at most max_tokens.
// Sentences are kept whole when they fit; a sentence longer than max_tokens
// is cut at token boundaries. Concatenating the chunks gives back the token
// sequence exactly.
std::vector<text::TokenList> chunk_tokens(std::span<const std::string> sentences,
                                          std::size_t max_tokens);
std::vector<std::string> chunk_document(std::span<const std::string> sentences,
                                        std::size_t max_tokens);
std::vector<std::string> chunk_document(std::string_view doc_text, std::size_t max_tokens);

// Deduplicated n-grams of the chunk, most relevant first; ties keep
// first-occurrence order.
std::vector<CandidatePhrase> rank_candidates(std::string_view chunk_text, int n,
                                             const embed::EmbeddingBackend& backend);
std::vector<CandidatePhrase> rank_candidates(std::string_view chunk_text,
                                             const embed::EmbeddingVector& chunk_vec, int n,
                                             const embed::EmbeddingBackend& backend);

// Min-max scaling to [0,1]; a constant input maps to 0.5 everywhere.
std::vector<double> min_max_normalize(std::span<const double> values);

// Greedy MMR. Each step picks the unselected candidate maximizing
//   lambda * rel^(c, doc) - (1 - lambda) * max_{s in selected} sim^(c, s)
// where rel^ and sim^ are min-max normalized over the candidate set (sim^
// over off-diagonal pairs) and the max over an empty selection is 0. Ties go
// to the higher raw relevance, then the earlier position.
// Throws EmptyCandidateSet, ArgumentError.
std::vector<CandidatePhrase> mmr_select(std::span<const CandidatePhrase> candidates,
                                        const embed::EmbeddingVector& doc_vec,
                                        const MmrParams& params);

struct SummarizeConfig {
  int n = 7;
  double lambda = 0.7;
  std::size_t budget = kDefaultBudget;
  std::size_t chunk_tokens = kDefaultChunkTokens;
  std::optional<std::size_t> top_k;  // per chunk; unset means per_chunk_top_k()

  void validate() const;
};

// ceil(budget / (n * chunks)) + 2
std::size_t per_chunk_top_k(std::size_t budget, int n, std::size_t num_chunks);

// Per-chunk ranking and MMR, then round-robin across chunks in chunk order,
// appending distinct phrases while they fit in the budget.
Summary summarize_document(const corpus::Document& doc, const SummarizeConfig& config,
                           const embed::EmbeddingBackend& backend);

void write_summaries_jsonl(std::ostream& out, std::span<const Summary> summaries);
std::vector<Summary> read_summaries_jsonl(std::istream& in);

}  // namespace depsum::summarize
