#include <doctest.h>

#include <cmath>
#include <sstream>

#include "depsum/embed.hpp"
#include "depsum/rng.hpp"
#include "depsum/tokenize.hpp"
#include "test_util.hpp"

using namespace depsum;
using namespace depsum::embed;

namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

std::string random_word(Rng& rng) {
  std::string w;
  for (int i = rng.range(3, 8); i > 0; --i) w += static_cast<char>('a' + rng.below(26));
  return w;
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("EmbeddingVector validation") {
  CHECK_ERROR_CODE(vec({}), ErrorCode::DimMismatch);
  CHECK_ERROR_CODE(vec({1.0, NAN}), ErrorCode::OutOfRange);
  CHECK_ERROR_CODE(vec({INFINITY}), ErrorCode::OutOfRange);
  CHECK(vec({3.0, 4.0}).norm() == doctest::Approx(5.0));
}

TEST_CASE("mean_pool") {
  const auto v = vec({0.25, -1.0, 3.0});
  CHECK(mean_pool(std::vector{v}) == v);
  CHECK(mean_pool(std::vector{vec({1, 0}), vec({0, 1})}) == vec({0.5, 0.5}));
  CHECK(mean_pool(std::vector{v, v, v}) == v);
  CHECK_ERROR_CODE(mean_pool(std::vector<EmbeddingVector>{}), ErrorCode::EmptyMatrix);
  CHECK_ERROR_CODE(mean_pool(std::vector{vec({1}), vec({1, 2})}), ErrorCode::DimMismatch);
}

TEST_CASE("mean_pool commutes with row permutation") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EmbeddingVector> rows;
    for (int r = rng.range(1, 6); r > 0; --r) {
      std::vector<double> v(4);
      for (auto& x : v) x = static_cast<double>(rng.range(-8, 8)) / 4.0;  // exact in binary
      rows.push_back(vec(v));
    }
    auto shuffled = rows;
    rng.shuffle(shuffled);
    CHECK(mean_pool(rows) == mean_pool(shuffled));
  }
}

TEST_CASE("cosine_sim") {
  CHECK(cosine_sim(vec({1, 0}), vec({1, 0})) == 1.0);
  CHECK(cosine_sim(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(cosine_sim(vec({1, 0}), vec({3, 0})) == 1.0);
  CHECK(cosine_sim(vec({1, 0}), vec({-2, 0})) == -1.0);
  CHECK_ERROR_CODE(cosine_sim(vec({0, 0}), vec({1, 0})), ErrorCode::ZeroNorm);
  CHECK_ERROR_CODE(cosine_sim(vec({1, 0}), vec({1, 0, 0})), ErrorCode::DimMismatch);
}

TEST_CASE("cosine_sim is symmetric and scale invariant") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(6), b(6);
    for (auto& x : a) x = rng.uniform(-1, 1);
    for (auto& x : b) x = rng.uniform(-1, 1);
    const double s = rng.uniform(0.1, 10.0);
    std::vector<double> as(a);
    for (auto& x : as) x *= s;
    const double c = cosine_sim(vec(a), vec(b));
    CHECK(c == cosine_sim(vec(b), vec(a)));
    CHECK(std::abs(c - cosine_sim(vec(as), vec(b))) < 1e-12);
    CHECK(c <= 1.0);
    CHECK(c >= -1.0);
  }
}

TEST_CASE("hashed_embed determinism, unit norm, empty text") {
  const auto a = hashed_embed("i feel tired today", 64, 7);
  CHECK(a == hashed_embed("i feel tired today", 64, 7));
  CHECK(a.dim() == 64);
  CHECK(std::abs(a.norm() - 1.0) < 1e-9);
  CHECK(!(a == hashed_embed("i feel tired today", 64, 8)));
  const auto e = hashed_embed("", 16, 1);
  CHECK(e[0] == 1.0);
  CHECK(e.norm() == 1.0);
  CHECK(hashed_embed("... !!", 16, 1) == e);
  CHECK_ERROR_CODE(hashed_embed("x", 7, 1), ErrorCode::ArgumentError);
}

TEST_CASE("hashed_embed depends only on the token multiset") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> words;
    for (int i = rng.range(1, 12); i > 0; --i) words.push_back(random_word(rng));
    auto perm = words;
    rng.shuffle(perm);
    const auto a = hashed_embed(text::join(words), 128, 99);
    const auto b = hashed_embed(text::join(perm, "  "), 128, 99);
    for (std::size_t d = 0; d < 128; ++d) CHECK(std::abs(a[d] - b[d]) < 1e-15);
    CHECK(std::abs(a.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("hashed_embed matches an independent signed-hash reference") {
  // Reference written from the definition: bucket h mod dim, sign from the top
  // bit, h = splitmix64(fnv1a64(token) ^ splitmix64(seed)).
  const std::string textv = "my my sleep problem Problem";
  const std::size_t dim = 32;
  const std::uint64_t seed = 1234;
  std::vector<double> ref(dim, 0.0);
  for (const char* t : {"my", "my", "sleep", "problem", "problem"}) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* c = t; *c; ++c) {
      h ^= static_cast<unsigned char>(*c);
      h *= 0x100000001b3ULL;
    }
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL;
    s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ULL;
    s = (s ^ (s >> 27)) * 0x94d049bb133111ebULL;
    s ^= s >> 31;
    std::uint64_t x = (h ^ s) + 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x ^= x >> 31;
    ref[x % dim] += (x >> 63) ? -1.0 : 1.0;
  }
  double n = 0.0;
  for (double v : ref) n += v * v;
  n = std::sqrt(n);
  const auto got = hashed_embed(textv, dim, seed);
  for (std::size_t d = 0; d < dim; ++d) CHECK(got[d] == doctest::Approx(ref[d] / n).epsilon(1e-14));
}

TEST_CASE("hashed_embed of disjoint texts is near-orthogonal") {
  Rng rng(8);
  int small = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::string a, b;
    for (int i = 0; i < 6; ++i) a += "a" + random_word(rng) + " ";
    for (int i = 0; i < 6; ++i) b += "b" + random_word(rng) + " ";
    if (std::abs(cosine_sim(hashed_embed(a, 768, 42 + trial), hashed_embed(b, 768, 42 + trial))) < 0.2) ++small;
  }
  CHECK(small >= 95);
}

TEST_CASE("HashedBackend") {
  HashedBackend backend(32, 5);
  CHECK(backend.name() == "hashed");
  CHECK(backend.dim() == 32);
  CHECK(backend.embed("hello there") == hashed_embed("hello there", 32, 5));
}

TEST_CASE("load_vectors / save_vectors") {
  std::istringstream empty("");
  CHECK(load_vectors(empty).empty());

  std::istringstream one("{\"key\":\"a\",\"vector\":[1,2,3]}\n");
  const auto m = load_vectors(one);
  REQUIRE(m.size() == 1);
  CHECK(m.at("a") == vec({1, 2, 3}));

  std::istringstream ragged("{\"key\":\"a\",\"vector\":[1,2]}\n{\"key\":\"b\",\"vector\":[1,2,3]}\n");
  CHECK_ERROR_CODE(load_vectors(ragged), ErrorCode::DimMismatch);
  std::istringstream dup("{\"key\":\"a\",\"vector\":[1]}\n{\"key\":\"a\",\"vector\":[2]}\n");
  CHECK_ERROR_CODE(load_vectors(dup), ErrorCode::DuplicateKey);
  std::istringstream bad("{\"key\":\"a\",\"vector\":\"x\"}\n");
  CHECK_ERROR_CODE(load_vectors(bad), ErrorCode::MalformedLine);
  std::istringstream notjson("key a\n");
  CHECK_ERROR_CODE(load_vectors(notjson), ErrorCode::MalformedLine);

  std::istringstream pooled("{\"key\":\"p\",\"matrix\":[[1,0],[0,1]]}\n");
  CHECK(load_vectors(pooled).at("p") == vec({0.5, 0.5}));

  VectorMap three{{"zeta", vec({0.1, -2.5})}, {"alpha", vec({1.0 / 3.0, 1e-300})}, {"mid", vec({7, 8})}};
  std::stringstream io;
  save_vectors(io, three);
  const std::string written = io.str();
  CHECK(written.find("alpha") < written.find("mid"));
  CHECK(written.find("mid") < written.find("zeta"));
  CHECK(load_vectors(io) == three);

  std::stringstream none;
  save_vectors(none, VectorMap{});
  CHECK(none.str().empty());
}

TEST_CASE("LookupBackend") {
  LookupBackend backend(VectorMap{{"hi there", vec({1, 0})}, {"", vec({0, 1})}});
  CHECK(backend.name() == "file");
  CHECK(backend.dim() == 2);
  CHECK(backend.embed("hi there") == vec({1, 0}));
  CHECK(backend.embed("") == vec({0, 1}));
  CHECK_ERROR_CODE(backend.embed("unknown"), ErrorCode::MissingVector);
}

TEST_CASE("write_texts") {
  std::ostringstream out;
  const std::vector<TextItem> items{{"k1", "hello \"world\""}, {"k2", ""}};
  write_texts(out, items);
  CHECK(out.str() == "{\"key\":\"k1\",\"text\":\"hello \\\"world\\\"\"}\n{\"key\":\"k2\",\"text\":\"\"}\n");
}

}
