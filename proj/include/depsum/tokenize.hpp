#pragma once

// Tweet-style tokenization, stopword filtering and n-gram candidates.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depsum::text {

using TokenList = std::vector<std::string>;
using WordSet = std::set<std::string, std::less<>>;

// Lowercased tokens. Contractions and hyphenated words stay whole, '#tag' and
// '@name' keep their prefix, dotted abbreviations ("u.s.") keep their dots,
// and standalone punctuation is dropped. Bytes >= 0x80 count as letters, so
// UTF-8 text passes through intact.
TokenList tweet_tokenize(std::string_view text);

std::size_t count_tokens(std::string_view text);

std::string join(std::span<const std::string> tokens, std::string_view sep = " ");

struct StopwordPolicy {
  WordSet base_stopwords;
  WordSet retained_pronouns;

  bool is_stopword(std::string_view token) const;

  // Bundled English list with the first-person singular pronouns retained.
  static const StopwordPolicy& standard();
};

inline const WordSet kRetainedPronouns{"i", "me", "myself", "my", "mine"};

// One token per line; '#' starts a comment line; blank lines ignored.
WordSet parse_stopword_file(std::istream& in);
const WordSet& bundled_stopwords();

TokenList filter_stopwords(std::span<const std::string> tokens, const StopwordPolicy& policy);

// Contiguous n-token windows joined by single spaces, first occurrence order,
// duplicates removed. Throws InvalidN for n < 1.
std::vector<std::string> ngrams(std::span<const std::string> tokens, int n);

}  // namespace depsum::text
