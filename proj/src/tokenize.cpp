#include "depsum/tokenize.hpp"

#include <istream>
#include <sstream>
#include <unordered_set>

#include "depsum/error.hpp"
#include "embedded_data.hpp"
#include "text_util.hpp"

namespace depsum::text {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;
}

bool is_connector(char c) { return c == '\'' || c == '-' || c == '.'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// "u.s", "e.g": single letters separated by dots.
bool is_dotted_abbreviation(std::string_view body) {
  if (body.size() < 3 || body.size() % 2 == 0) return false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const bool want_dot = (i % 2) == 1;
    if (want_dot != (body[i] == '.')) return false;
    const char c = body[i];
    if (!want_dot && !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return false;
  }
  return true;
}

}  // namespace

TokenList tweet_tokenize(std::string_view text) {
  TokenList tokens;
  const std::size_t n = text.size();
  auto word_at = [&](std::size_t i) {
    return i < n && is_word_byte(static_cast<unsigned char>(text[i]));
  };
  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    std::size_t start = i;
    std::size_t body_start = i;
    if ((c == '#' || c == '@') && word_at(i + 1)) {
      ++i;
      body_start = i;
    } else if (!word_at(i)) {
      ++i;  // whitespace or punctuation
      continue;
    }
    while (word_at(i)) ++i;
    while (i + 1 < n && is_connector(text[i]) && word_at(i + 1)) {
      ++i;
      while (word_at(i)) ++i;
    }
    if (i < n && text[i] == '.' && is_dotted_abbreviation(text.substr(body_start, i - body_start)))
      ++i;
    std::string tok(text.substr(start, i - start));
    for (auto& ch : tok) ch = lower(ch);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::size_t count_tokens(std::string_view text) { return tweet_tokenize(text).size(); }

std::string join(std::span<const std::string> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

bool StopwordPolicy::is_stopword(std::string_view token) const {
  return base_stopwords.find(token) != base_stopwords.end() &&
         retained_pronouns.find(token) == retained_pronouns.end();
}

const StopwordPolicy& StopwordPolicy::standard() {
  static const StopwordPolicy policy{bundled_stopwords(), kRetainedPronouns};
  return policy;
}

WordSet parse_stopword_file(std::istream& in) {
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::string w(t);
    for (auto& ch : w) ch = lower(ch);
    words.insert(std::move(w));
  }
  return words;
}

const WordSet& bundled_stopwords() {
  static const WordSet words = [] {
    std::istringstream in{std::string(data::kStopwordsEn)};
    return parse_stopword_file(in);
  }();
  return words;
}

TokenList filter_stopwords(std::span<const std::string> tokens, const StopwordPolicy& policy) {
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!policy.is_stopword(t)) out.push_back(t);
  return out;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidN, "n-gram size must be >= 1, got " + std::to_string(n));
  std::vector<std::string> out;
  const auto width = static_cast<std::size_t>(n);
  if (tokens.size() < width) return out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    auto phrase = join(tokens.subspan(i, width));
    if (seen.insert(phrase).second) out.push_back(std::move(phrase));
  }
  return out;
}

}  // namespace depsum::text
