#include "depsum/embed.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "depsum/error.hpp"
#include "depsum/rng.hpp"
#include "depsum/tokenize.hpp"
#include "json_util.hpp"
#include "text_util.hpp"

namespace depsum::embed {

using nlohmann::json;

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::DimMismatch, "embedding must have dim >= 1");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorCode::OutOfRange, "non-finite embedding entry");
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

EmbeddingVector mean_pool(std::span<const EmbeddingVector> rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyMatrix, "mean_pool of an empty matrix");
  const std::size_t dim = rows.front().dim();
  std::vector<double> acc(dim, 0.0);
  for (const auto& r : rows) {
    if (r.dim() != dim) throw Error(ErrorCode::DimMismatch, "mean_pool: ragged rows");
    for (std::size_t d = 0; d < dim; ++d) acc[d] += r[d];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& v : acc) v *= inv;
  return EmbeddingVector(std::move(acc));
}

double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimMismatch, "cosine_sim: " + std::to_string(a.dim()) + " vs " +
                                            std::to_string(b.dim()));
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::ZeroNorm, "cosine_sim of a zero vector");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

EmbeddingVector hashed_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw Error(ErrorCode::ArgumentError, "hashed_embed needs dim >= 8");
  std::vector<double> v(dim, 0.0);
  const auto tokens = text::tweet_tokenize(text);
  if (tokens.empty()) {
    v[0] = 1.0;
    return EmbeddingVector(std::move(v));
  }
  const std::uint64_t salt = splitmix64(seed);
  for (const auto& t : tokens) {
    const std::uint64_t h = splitmix64(fnv1a64(t) ^ salt);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[h % dim] += sign;
  }
  double s = 0.0;
  for (double x : v) s += x * x;
  if (s == 0.0) {
    // Every bucket cancelled out; fall back to the empty-text vector.
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return EmbeddingVector(std::move(v));
  }
  const double inv = 1.0 / std::sqrt(s);
  for (auto& x : v) x *= inv;
  return EmbeddingVector(std::move(v));
}

HashedBackend::HashedBackend(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ < 8) throw Error(ErrorCode::ArgumentError, "hashed backend needs dim >= 8");
}

EmbeddingVector HashedBackend::embed(std::string_view text) const {
  return hashed_embed(text, dim_, seed_);
}

LookupBackend::LookupBackend(VectorMap vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw Error(ErrorCode::MissingVector, "vector file is empty");
  dim_ = vectors_.begin()->second.dim();
}

EmbeddingVector LookupBackend::embed(std::string_view text) const {
  const auto it = vectors_.find(text);
  if (it == vectors_.end())
    throw Error(ErrorCode::MissingVector, "no vector for text '" + std::string(text.substr(0, 60)) + "'");
  return it->second;
}

VectorMap load_vectors(std::istream& in) {
  VectorMap out;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    std::string key;
    EmbeddingVector vec;
    try {
      const auto j = json::parse(line);
      key = j.at("key").get<std::string>();
      if (j.contains("vector")) {
        vec = EmbeddingVector(j.at("vector").get<std::vector<double>>());
      } else {
        EmbeddingMatrix rows;
        for (const auto& r : j.at("matrix")) rows.emplace_back(r.get<std::vector<double>>());
        vec = mean_pool(rows);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedLine, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DimMismatch) throw;
      throw Error(ErrorCode::MalformedLine, where + ": " + e.what());
    }
    if (dim == 0) dim = vec.dim();
    if (vec.dim() != dim)
      throw Error(ErrorCode::DimMismatch, where + ": dim " + std::to_string(vec.dim()) +
                                              ", expected " + std::to_string(dim));
    if (!out.emplace(key, std::move(vec)).second)
      throw Error(ErrorCode::DuplicateKey, where + ": key '" + key + "'");
  }
  return out;
}

void save_vectors(std::ostream& out, const VectorMap& vectors) {
  for (const auto& [key, vec] : vectors) {
    json j;
    j["key"] = key;
    j["vector"] = std::vector<double>(vec.values().begin(), vec.values().end());
    out << detail::dump_line(j) << '\n';
  }
}

void write_texts(std::ostream& out, std::span<const TextItem> items) {
  for (const auto& item : items) {
    json j;
    j["key"] = item.key;
    j["text"] = item.text;
    out << detail::dump_line(j) << '\n';
  }
}

}  // namespace depsum::embed
