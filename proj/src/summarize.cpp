#include "depsum/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "depsum/error.hpp"
#include "depsum/kernels.hpp"
#include "json_util.hpp"
#include "parallel_util.hpp"
#include "text_util.hpp"

namespace depsum::summarize {

using embed::EmbeddingBackend;
using embed::EmbeddingVector;
using nlohmann::json;

void MmrParams::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorCode::ArgumentError, "lambda must lie in [0, 1]");
  if (top_k < 1) throw Error(ErrorCode::ArgumentError, "top_k must be >= 1");
}

void SummarizeConfig::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidN, "n-gram size must be >= 1");
  if (budget < static_cast<std::size_t>(n))
    throw Error(ErrorCode::ArgumentError, "budget must be >= n");
  if (chunk_tokens < 1) throw Error(ErrorCode::ArgumentError, "chunk size must be >= 1");
  MmrParams{lambda, top_k.value_or(1)}.validate();
}

std::vector<text::TokenList> chunk_tokens(std::span<const std::string> sentences,
                                          std::size_t max_tokens) {
  if (max_tokens < 1) throw Error(ErrorCode::ArgumentError, "chunk size must be >= 1");
  std::vector<text::TokenList> chunks;
  text::TokenList current;
  auto flush = [&] {
    if (!current.empty()) chunks.push_back(std::move(current));
    current.clear();
  };
  for (const auto& sentence : sentences) {
    auto tokens = text::tweet_tokenize(sentence);
    if (tokens.empty()) continue;
    if (tokens.size() <= max_tokens) {
      if (current.size() + tokens.size() > max_tokens) flush();
      current.insert(current.end(), std::make_move_iterator(tokens.begin()),
                     std::make_move_iterator(tokens.end()));
      continue;
    }
    flush();
    std::size_t at = 0;
    while (tokens.size() - at > max_tokens) {
      chunks.emplace_back(tokens.begin() + static_cast<long>(at),
                          tokens.begin() + static_cast<long>(at + max_tokens));
      at += max_tokens;
    }
    current.assign(tokens.begin() + static_cast<long>(at), tokens.end());
  }
  flush();
  return chunks;
}

std::vector<std::string> chunk_document(std::span<const std::string> sentences,
                                        std::size_t max_tokens) {
  std::vector<std::string> out;
  for (const auto& c : chunk_tokens(sentences, max_tokens)) out.push_back(text::join(c));
  return out;
}

std::vector<std::string> chunk_document(std::string_view doc_text, std::size_t max_tokens) {
  const std::string one(doc_text);
  return chunk_document(std::span<const std::string>(&one, 1), max_tokens);
}

std::vector<CandidatePhrase> rank_candidates(std::string_view chunk_text, int n,
                                             const EmbeddingBackend& backend) {
  if (n < 1) throw Error(ErrorCode::InvalidN, "n-gram size must be >= 1");
  if (text::count_tokens(chunk_text) < static_cast<std::size_t>(n)) return {};
  return rank_candidates(chunk_text, backend.embed(chunk_text), n, backend);
}

std::vector<CandidatePhrase> rank_candidates(std::string_view chunk_text,
                                             const EmbeddingVector& chunk_vec, int n,
                                             const EmbeddingBackend& backend) {
  const auto tokens = text::tweet_tokenize(chunk_text);
  auto phrases = text::ngrams(tokens, n);
  std::vector<CandidatePhrase> out(phrases.size());
  detail::parallel_for(phrases.size(), [&](std::size_t i) {
    auto& c = out[i];
    c.text = std::move(phrases[i]);
    c.n = n;
    c.position = i;
    c.embedding = backend.embed(c.text);
    c.relevance = embed::cosine_sim(c.embedding, chunk_vec);
  });
  std::stable_sort(out.begin(), out.end(), [](const CandidatePhrase& a, const CandidatePhrase& b) {
    return a.relevance > b.relevance;
  });
  return out;
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.5);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range > 0.0)
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

std::vector<CandidatePhrase> mmr_select(std::span<const CandidatePhrase> candidates,
                                        const EmbeddingVector& doc_vec, const MmrParams& params) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidateSet, "mmr_select: no candidates");
  params.validate();
  const std::size_t count = candidates.size();
  const std::size_t dim = doc_vec.dim();

  std::vector<double> raw_relevance(count);
  Matrix embeddings(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = candidates[i].embedding;
    if (e.dim() != dim) throw Error(ErrorCode::DimMismatch, "mmr_select: candidate dim");
    std::copy(e.values().begin(), e.values().end(), embeddings.row(i).begin());
    raw_relevance[i] = embed::cosine_sim(e, doc_vec);
  }
  const auto relevance = min_max_normalize(raw_relevance);

  Matrix sim = kernels::cosine_matrix(embeddings);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      if (i != j) {
        lo = std::min(lo, sim(i, j));
        hi = std::max(hi, sim(i, j));
      }
  const double range = hi - lo;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      sim(i, j) = (range > 0.0) ? (sim(i, j) - lo) / range : 0.5;

  const std::size_t picks = std::min(params.top_k, count);
  std::vector<bool> taken(count, false);
  std::vector<double> redundancy(count, 0.0);  // max sim^ to the selection so far
  std::vector<CandidatePhrase> selected;
  selected.reserve(picks);
  for (std::size_t step = 0; step < picks; ++step) {
    std::size_t best = count;
    double best_score = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (taken[i]) continue;
      const double score =
          params.lambda * relevance[i] - (1.0 - params.lambda) * redundancy[i];
      if (best == count || score > best_score ||
          (score == best_score &&
           (raw_relevance[i] > raw_relevance[best] ||
            (raw_relevance[i] == raw_relevance[best] &&
             candidates[i].position < candidates[best].position)))) {
        best = i;
        best_score = score;
      }
    }
    taken[best] = true;
    selected.push_back(candidates[best]);
    for (std::size_t i = 0; i < count; ++i)
      redundancy[i] = (step == 0) ? sim(i, best) : std::max(redundancy[i], sim(i, best));
  }
  return selected;
}

std::size_t per_chunk_top_k(std::size_t budget, int n, std::size_t num_chunks) {
  const std::size_t denom = static_cast<std::size_t>(n) * std::max<std::size_t>(num_chunks, 1);
  return (budget + denom - 1) / denom + 2;
}

Summary summarize_document(const corpus::Document& doc, const SummarizeConfig& config,
                           const EmbeddingBackend& backend) {
  config.validate();
  Summary summary;
  summary.source_session = doc.session_id;

  const auto chunks = chunk_document(doc.sentences, config.chunk_tokens);
  const std::size_t top_k =
      config.top_k.value_or(per_chunk_top_k(config.budget, config.n, chunks.size()));
  std::vector<std::vector<CandidatePhrase>> selections;
  for (const auto& chunk : chunks) {
    auto candidates = rank_candidates(chunk, config.n, backend);
    if (candidates.empty()) continue;
    selections.push_back(mmr_select(candidates, backend.embed(chunk), {config.lambda, top_k}));
  }

  std::unordered_set<std::string> used;
  std::size_t longest = 0;
  for (const auto& s : selections) longest = std::max(longest, s.size());
  for (std::size_t round = 0; round < longest; ++round) {
    for (const auto& s : selections) {
      if (round >= s.size()) continue;
      const auto& phrase = s[round].text;
      const std::size_t len = text::count_tokens(phrase);
      if (summary.token_count + len > config.budget || used.count(phrase)) continue;
      used.insert(phrase);
      summary.phrases.push_back(phrase);
      summary.token_count += len;
    }
  }
  return summary;
}

void write_summaries_jsonl(std::ostream& out, std::span<const Summary> summaries) {
  for (const auto& s : summaries) {
    json j;
    j["id"] = s.source_session;
    j["phrases"] = s.phrases;
    j["token_count"] = s.token_count;
    out << detail::dump_line(j) << '\n';
  }
}

std::vector<Summary> read_summaries_jsonl(std::istream& in) {
  std::vector<Summary> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      Summary s;
      s.source_session = j.at("id").get<int>();
      s.phrases = j.at("phrases").get<std::vector<std::string>>();
      s.token_count = j.at("token_count").get<std::size_t>();
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace depsum::summarize
