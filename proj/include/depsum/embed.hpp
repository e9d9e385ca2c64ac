#pragma once

// Embedding contract, the hashed reference backend, file exchange for
// externally computed vectors, pooling and similarity.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depsum::embed {

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  // Throws DimMismatch when empty, OutOfRange when any entry is non-finite.
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// Sequence-length rows of equal dimension.
using EmbeddingMatrix = std::vector<EmbeddingVector>;

// Component-wise mean of the rows. Throws EmptyMatrix, DimMismatch.
EmbeddingVector mean_pool(std::span<const EmbeddingVector> rows);

// a.b / (|a||b|), clamped to [-1, 1]. Throws DimMismatch, ZeroNorm.
double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b);

// Signed feature hashing of tweet_tokenize(text) into `dim` buckets, then
// L2-normalized. Depends only on the token multiset. An empty token list maps
// to e_0. Throws ArgumentError for dim < 8.
EmbeddingVector hashed_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

inline constexpr std::size_t kDefaultDim = 768;

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  // Deterministic: the same text always yields the same vector.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

class HashedBackend final : public EmbeddingBackend {
 public:
  HashedBackend(std::size_t dim, std::uint64_t seed);

  std::string name() const override { return "hashed"; }
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

using VectorMap = std::map<std::string, EmbeddingVector, std::less<>>;

// Serves vectors loaded from an exchange file; the key is the text itself.
// embed() throws MissingVector for a text that was not exported.
class LookupBackend final : public EmbeddingBackend {
 public:
  explicit LookupBackend(VectorMap vectors);

  std::string name() const override { return "file"; }
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;
  const VectorMap& vectors() const { return vectors_; }

 private:
  VectorMap vectors_;
  std::size_t dim_ = 0;
};

// JSON Lines, one `{"key": string, "vector": [reals]}` per line. A line may
// carry `"matrix": [[reals], ...]` instead; its rows are mean-pooled.
// Throws MalformedLine, DimMismatch, DuplicateKey.
VectorMap load_vectors(std::istream& in);
// Keys in sorted order; doubles written in shortest round-trip form.
void save_vectors(std::ostream& out, const VectorMap& vectors);

struct TextItem {
  std::string key;
  std::string text;
};

// `{"key": ..., "text": ...}` per line, for an external encoder to fill.
void write_texts(std::ostream& out, std::span<const TextItem> items);

}  // namespace depsum::embed
